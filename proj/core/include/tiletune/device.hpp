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
#ifndef TILETUNE_DEVICE_HPP_
#define TILETUNE_DEVICE_HPP_

#include <cstdint>
#include <map>
#include <string>

namespace tiletune {

/// Abstract three-level memory hierarchy. L0 is per-lane register storage,
/// L1 is per-block scratch storage, L2 is device memory. All capacities and
/// transaction lengths are in elements; element_bytes is carried for
/// reporting only.
struct DeviceSpec {
  int64_t m_l0 = 0;   // L0 capacity per execution lane (elements)
  int64_t m_l1 = 0;   // L1 capacity per block (elements)
  int64_t pu_l1 = 0;  // L1 scheduling blocks activatable simultaneously
  int64_t n_l1 = 0;   // scheduling-group size within a block (lanes); power of two
  int64_t pu_l2 = 0;  // L2 parallel units (e.g. SMs)
  int64_t n_l2 = 0;   // memory transaction length at L2 (elements); power of two
  double t_p = 0.0;   // peak compute rate (fused ops / second)
  double t_m = 0.0;   // peak memory bandwidth (elements / second)
  int64_t element_bytes = 0;
};

/// Throws Error(E_VALIDATE) naming the offending field and observed value.
void validate_device(const DeviceSpec& dev);

/// Parses the key-value device file format; see save_device for the layout.
DeviceSpec load_device(const std::string& path);
DeviceSpec parse_device(const std::string& text);

std::string serialize_device(const DeviceSpec& dev);
void save_device(const DeviceSpec& dev, const std::string& path);

/// Shared line parser for the device-file format family ("key = value" lines,
/// '#' comments). Returns insertion-ordered pairs.
std::map<std::string, std::string> parse_kv_text(const std::string& text);

}  // namespace tiletune

#endif  // TILETUNE_DEVICE_HPP_
