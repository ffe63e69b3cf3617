/*
 * Copyright 2026 The tiletune Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef TILETUNE_ORACLE_HPP_
#define TILETUNE_ORACLE_HPP_

#include <cstdint>
#include <string>

#include "tiletune/common.hpp"
#include "tiletune/device.hpp"
#include "tiletune/draft.hpp"
#include "tiletune/schedule.hpp"

namespace tiletune {

/// Simulated hardware standing in for on-device measurement. Latency is the
/// analyzer cost under a hidden device spec, scaled by two nonlinear terms
/// the analyzer cannot express, plus a constant launch overhead:
///
///   stride term:    1 + stride_coeff * f, with f the s5-weighted fraction of
///                   transfer statements whose s7 is not a multiple of the
///                   hidden n_l2
///   occupancy term: 1 + occupancy_coeff * max(0, 1 - fill), with
///                   fill = min(1, s4*s6 / (pu_l2 * n_l1))
///
/// Measurement noise is multiplicative lognormal with parameter noise_sigma.
struct OracleDevice {
  DeviceSpec hidden;
  double stride_coeff = 0.35;
  double occupancy_coeff = 1.5;
  double launch_overhead_s = 2e-6;
  double noise_sigma = 0.03;
  uint64_t seed = 0;
};

void validate_oracle(const OracleDevice& oracle);

/// Oracle config uses the device-file key-value format: the hidden spec
/// fields plus stride_coeff, occupancy_coeff, launch_overhead_s, noise_sigma
/// and seed.
OracleDevice load_oracle(const std::string& path);
OracleDevice parse_oracle(const std::string& text);
std::string serialize_oracle(const OracleDevice& oracle);
void save_oracle(const OracleDevice& oracle, const std::string& path);

struct Measurement {
  double latency_s = 0.0;
  double noiseless_latency_s = 0.0;
};

double stride_multiplier(const Sketch& sketch, const Schedule& sched,
                         const OracleDevice& oracle);
double occupancy_multiplier(const Sketch& sketch, const Schedule& sched,
                            const OracleDevice& oracle);

/// Deterministic noise-free latency of one schedule.
double noiseless_latency(const Sketch& sketch, const Schedule& sched,
                         const OracleDevice& oracle);

/// One simulated measurement; the latency draw consumes the rng stream.
Measurement measure(const Sketch& sketch, const Schedule& sched, const OracleDevice& oracle,
                    RngStream& rng);

struct OracleBest {
  double latency_s = 0.0;
  Schedule argmin;
};

/// Exhaustive noiseless minimum over the sketch space (errors beyond cap).
OracleBest oracle_best(const Sketch& sketch, const OracleDevice& oracle, uint64_t cap);

}  // namespace tiletune

#endif  // TILETUNE_ORACLE_HPP_
