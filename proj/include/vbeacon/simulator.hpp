// Copyright 2026 The vbeacon Authors.
// Licensed under the Apache License, Version 2.0. See the LICENSE file at the
// root of this distribution or at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "vbeacon/config.hpp"
#include "vbeacon/metrics.hpp"

namespace vbeacon {

/// Runs one simulation to `config.duration_ms`. Throws ConfigError (with every
/// violated constraint) for invalid configurations. The result depends on
/// nothing but `config`.
MetricsReport run(const SimConfig& config);

}  // namespace vbeacon
