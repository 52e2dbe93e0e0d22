// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vbeacon/config.hpp"
#include "vbeacon/simulator.hpp"

namespace fs = std::filesystem;
using namespace vbeacon;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Source {
  std::string preset;
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

void add_source_flags(CLI::App* cmd, Source& src) {
  cmd->add_option("--preset", src.preset, "Start from a named scenario");
  cmd->add_option("--config", src.config, "Start from a JSON config file");
  cmd->add_option("--set", src.sets, "Override a field, e.g. --set protocol.alpha=2")->take_all();
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected name=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

SimConfig load(const Source& src) {
  if (!src.preset.empty() && !src.config.empty()) throw ConfigError("--preset and --config are exclusive");
  SimConfig c = !src.preset.empty() ? preset(src.preset) : !src.config.empty() ? load_config_file(src.config) : SimConfig{};
  if (src.seed) c.seed = *src.seed;
  for (const auto& s : src.sets) {
    const auto [name, value] = split_assignment(s);
    apply_override(c, resolve_field(name), value);
  }
  return c;
}

void check(const SimConfig& c) {
  auto problems = validate(c);
  if (!problems.empty()) throw ConfigError("invalid configuration", std::move(problems));
}

fs::path default_out() {
  const char* env = std::getenv("VBEACON_OUT");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("results");
}

void print_summary(const Summary& s, std::ostream& out) {
  char line[160];
  const auto row = [&](const char* name, double v, const char* unit = "") {
    std::snprintf(line, sizeof line, "  %-28s %12.4f %s\n", name, v, unit);
    out << line;
  };
  out << "benign beacons received " << s.beacons.received << "\n";
  row("expiration ratio", s.expiration_ratio);
  row("waiting mean", s.waiting.mean, "ms");
  row("waiting p95", s.waiting.p95, "ms");
  row("sig / self / coop", s.sig_ratio);
  row("", s.self_ratio);
  row("", s.coop_ratio);
  row("mac-assisted", s.mac_assisted_ratio);
  row("discovered within window", s.discovered_within_window);
  row("event acceptance", s.event_acceptance);
  row("event waiting mean", s.event_waiting.mean, "ms");
  row("affected median", s.affected_median);
  row("cpu utilization", s.cpu_utilization);
  row("discovered share (D)", s.d_share);
  out << "  revocations " << s.revocations << ", forged accepts " << s.audit.forged_accepts
      << ", forged events verified " << s.audit.forged_events_verified << ", provenance failures "
      << s.audit.provenance_failures << "\n";
}

int cmd_run(const Source& src, const fs::path& out, bool quiet) {
  SimConfig c = load(src);
  check(c);
  const MetricsReport r = run(c);
  r.write(out, to_json(c));
  if (!quiet) {
    std::cout << "wrote " << out.string() << "\n";
    print_summary(r.summarize(), std::cout);
  }
  return kOk;
}

struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> values;
  int seed_index = 0;
  SimConfig config;
};

int cmd_sweep(const Source& src, const std::vector<std::string>& params, int seeds, unsigned jobs,
              const fs::path& out, bool quiet) {
  const SimConfig base = load(src);
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& p : params) {
    const auto [name, list] = split_assignment(p);
    std::vector<std::string> vals;
    std::stringstream ss(list);
    for (std::string v; std::getline(ss, v, ',');) vals.push_back(v);
    if (vals.empty()) throw ConfigError("no values for " + name);
    axes.emplace_back(resolve_field(name), std::move(vals));
  }
  if (seeds < 1) throw ConfigError("--seeds must be at least 1");

  // Cartesian grid, last axis fastest; replicate s of every point shares its seed.
  std::vector<SweepPoint> points;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    for (int s = 0; s < seeds; ++s) {
      SweepPoint pt;
      pt.seed_index = s;
      pt.config = base;
      pt.config.seed = derive_seed(base.seed, static_cast<std::uint64_t>(s));
      for (std::size_t a = 0; a < axes.size(); ++a) {
        pt.values.emplace_back(axes[a].first, axes[a].second[idx[a]]);
        apply_override(pt.config, axes[a].first, axes[a].second[idx[a]]);
      }
      check(pt.config);
      points.push_back(std::move(pt));
    }
    std::size_t a = axes.size();
    while (a > 0 && ++idx[a - 1] == axes[a - 1].second.size()) idx[--a] = 0;
    if (a == 0) break;
  }

  std::vector<Summary> results(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < points.size();) {
      try {
        const MetricsReport r = run(points[i].config);
        char name[32];
        std::snprintf(name, sizeof name, "run_%04zu", i);
        r.write(out / name, to_json(points[i].config));
        results[i] = r.summarize();
        if (!quiet) {
          std::lock_guard lock(mu);
          std::cerr << "finished " << name << "\n";
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = points.size();
      }
    }
  };
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::ofstream csv(out / "sweep.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + (out / "sweep.csv").string());
  csv << "run,seed_index,seed";
  for (const auto& [name, vals] : axes) csv << ',' << name;
  csv << ",expiration_ratio,waiting_mean_ms,sig_ratio,self_ratio,coop_ratio,discovered_within_window,"
         "event_acceptance,event_waiting_mean_ms,affected_median,d_share,forged_accepts\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Summary& s = results[i];
    csv << i << ',' << points[i].seed_index << ',' << points[i].config.seed;
    for (const auto& [name, v] : points[i].values) csv << ',' << v;
    char tail[512];
    std::snprintf(tail, sizeof tail, ",%.6f,%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.3f,%.1f,%.6f,%llu\n",
                  s.expiration_ratio, s.waiting.mean, s.sig_ratio, s.self_ratio, s.coop_ratio,
                  s.discovered_within_window, s.event_acceptance, s.event_waiting.mean, s.affected_median,
                  s.d_share, static_cast<unsigned long long>(s.audit.forged_accepts));
    csv << tail;
  }
  if (!quiet) std::cout << "wrote " << points.size() << " runs to " << out.string() << "\n";
  return kOk;
}

int cmd_validate(const std::string& file, const std::vector<std::string>& sets) {
  Source src;
  src.config = file;
  src.sets = sets;
  check(load(src));
  std::cout << file << ": ok\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Facilitated beacon authentication simulator"};
  app.require_subcommand(1);

  Source run_src;
  std::string run_out;
  bool quiet = false;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run one configuration");
  add_source_flags(run_cmd, run_src);
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Master seed");
  run_cmd->add_option("--out", run_out, "Output directory (default $VBEACON_OUT or ./results)");
  run_cmd->add_flag("-q,--quiet", quiet);

  Source sweep_src;
  std::vector<std::string> sweep_params;
  int sweep_seeds = 1;
  unsigned sweep_jobs = std::max(1U, std::thread::hardware_concurrency());
  std::string sweep_out;
  std::uint64_t sweep_seed = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cartesian parameter grid times seeds");
  add_source_flags(sweep_cmd, sweep_src);
  sweep_cmd->add_option("--param", sweep_params, "Axis as name=v1,v2,...")->take_all();
  sweep_cmd->add_option("--seeds", sweep_seeds, "Replicates per grid point");
  auto* sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "Master seed");
  sweep_cmd->add_option("--jobs,-j", sweep_jobs, "Parallel runs");
  sweep_cmd->add_option("--out", sweep_out, "Output directory (default $VBEACON_OUT or ./results)");
  sweep_cmd->add_flag("-q,--quiet", quiet);

  auto* presets_cmd = app.add_subcommand("presets", "List scenario presets");

  std::string validate_file;
  std::vector<std::string> validate_sets;
  auto* validate_cmd = app.add_subcommand("validate-config", "Check a JSON config file");
  validate_cmd->add_option("file", validate_file)->required();
  validate_cmd->add_option("--set", validate_sets)->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) {
      if (*run_seed_opt) run_src.seed = run_seed;
      return cmd_run(run_src, run_out.empty() ? default_out() : fs::path(run_out), quiet);
    }
    if (*sweep_cmd) {
      if (*sweep_seed_opt) sweep_src.seed = sweep_seed;
      return cmd_sweep(sweep_src, sweep_params, sweep_seeds, sweep_jobs,
                       sweep_out.empty() ? default_out() : fs::path(sweep_out), quiet);
    }
    if (*presets_cmd) {
      for (const auto& p : presets()) std::cout << p.name << "\t" << p.description << "\n";
      return kOk;
    }
    if (*validate_cmd) return cmd_validate(validate_file, validate_sets);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    for (const auto& p : e.problems()) std::cerr << "  - " << p << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
