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
#include "tiletune/oracle.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace tiletune {

void validate_oracle(const OracleDevice& oracle) {
  validate_device(oracle.hidden);
  if (oracle.stride_coeff < 0.0)
    fail(err::kValidate, "stride_coeff must be >= 0, got " + std::to_string(oracle.stride_coeff));
  if (oracle.occupancy_coeff < 0.0)
    fail(err::kValidate,
         "occupancy_coeff must be >= 0, got " + std::to_string(oracle.occupancy_coeff));
  if (oracle.launch_overhead_s < 0.0)
    fail(err::kValidate, "launch_overhead_s must be >= 0, got " +
                             std::to_string(oracle.launch_overhead_s));
  if (oracle.noise_sigma < 0.0)
    fail(err::kValidate, "noise_sigma must be >= 0, got " + std::to_string(oracle.noise_sigma));
}

OracleDevice parse_oracle(const std::string& text) {
  auto kv = parse_kv_text(text);
  auto take_double = [&kv](const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    double v = std::stod(it->second);
    kv.erase(it);
    return v;
  };
  OracleDevice oracle;
  oracle.stride_coeff = take_double("stride_coeff", oracle.stride_coeff);
  oracle.occupancy_coeff = take_double("occupancy_coeff", oracle.occupancy_coeff);
  oracle.launch_overhead_s = take_double("launch_overhead_s", oracle.launch_overhead_s);
  oracle.noise_sigma = take_double("noise_sigma", oracle.noise_sigma);
  auto seed_it = kv.find("seed");
  if (seed_it != kv.end()) {
    oracle.seed = std::stoull(seed_it->second);
    kv.erase(seed_it);
  }
  std::ostringstream device_part;
  for (const auto& [k, v] : kv) device_part << k << " = " << v << "\n";
  oracle.hidden = parse_device(device_part.str());
  validate_oracle(oracle);
  return oracle;
}

OracleDevice load_oracle(const std::string& path) { return parse_oracle(read_file(path)); }

std::string serialize_oracle(const OracleDevice& oracle) {
  std::ostringstream out;
  out.precision(17);
  out << serialize_device(oracle.hidden);
  out << "stride_coeff = " << oracle.stride_coeff << "\n"
      << "occupancy_coeff = " << oracle.occupancy_coeff << "\n"
      << "launch_overhead_s = " << oracle.launch_overhead_s << "\n"
      << "noise_sigma = " << oracle.noise_sigma << "\n"
      << "seed = " << oracle.seed << "\n";
  return out.str();
}

void save_oracle(const OracleDevice& oracle, const std::string& path) {
  write_file(path, serialize_oracle(oracle));
}

double stride_multiplier(const Sketch& sketch, const Schedule& sched,
                         const OracleDevice& oracle) {
  auto symbols = extract_symbols(sketch, sched);
  int64_t total = 0;
  int64_t misaligned = 0;
  for (const auto& ss : symbols) {
    if (ss.symbols.s5 <= 0) continue;
    total += ss.symbols.s5;
    if (ss.symbols.s7 % oracle.hidden.n_l2 != 0) misaligned += ss.symbols.s5;
  }
  if (total == 0) return 1.0;
  double frac = static_cast<double>(misaligned) / static_cast<double>(total);
  return 1.0 + oracle.stride_coeff * frac;
}

double occupancy_multiplier(const Sketch& sketch, const Schedule& sched,
                            const OracleDevice& oracle) {
  auto symbols = extract_symbols(sketch, sched);
  double lanes = static_cast<double>(symbols.front().symbols.s4) *
                 static_cast<double>(symbols.front().symbols.s6);
  double capacity =
      static_cast<double>(oracle.hidden.pu_l2) * static_cast<double>(oracle.hidden.n_l1);
  double fill = std::min(1.0, lanes / capacity);
  return 1.0 + oracle.occupancy_coeff * (1.0 - fill);
}

double noiseless_latency(const Sketch& sketch, const Schedule& sched,
                         const OracleDevice& oracle) {
  double base = draft_cost(sketch, sched, oracle.hidden).total;
  return base * stride_multiplier(sketch, sched, oracle) *
             occupancy_multiplier(sketch, sched, oracle) +
         oracle.launch_overhead_s;
}

Measurement measure(const Sketch& sketch, const Schedule& sched, const OracleDevice& oracle,
                    RngStream& rng) {
  Measurement m;
  m.noiseless_latency_s = noiseless_latency(sketch, sched, oracle);
  m.latency_s = oracle.noise_sigma == 0.0
                    ? m.noiseless_latency_s
                    : m.noiseless_latency_s * rng.lognormal(oracle.noise_sigma);
  return m;
}

OracleBest oracle_best(const Sketch& sketch, const OracleDevice& oracle, uint64_t cap) {
  auto space = enumerate_all(sketch, cap);
  OracleBest best;
  best.latency_s = std::numeric_limits<double>::infinity();
  for (const auto& sched : space) {
    double lat = noiseless_latency(sketch, sched, oracle);
    if (lat < best.latency_s) {
      best.latency_s = lat;
      best.argmin = sched;
    }
  }
  return best;
}

}  // namespace tiletune
