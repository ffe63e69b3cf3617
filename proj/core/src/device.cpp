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
#include "tiletune/device.hpp"

#include <cmath>
#include <sstream>

#include "tiletune/common.hpp"

namespace tiletune {

namespace {

bool is_power_of_two(int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int64_t to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(err::kParse, "field " + key + ": expected integer, got \"" + value + "\"");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(err::kParse, "field " + key + ": expected number, got \"" + value + "\"");
  }
}

void require_positive(const std::string& field, int64_t v) {
  if (v <= 0)
    fail(err::kValidate, field + " must be strictly positive, got " + std::to_string(v));
}

void require_positive(const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v))
    fail(err::kValidate, field + " must be strictly positive, got " + std::to_string(v));
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(err::kParse, "line " + std::to_string(lineno) + ": expected \"key = value\"");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      fail(err::kParse, "line " + std::to_string(lineno) + ": empty key or value");
    if (kv.count(key))
      fail(err::kParse, "line " + std::to_string(lineno) + ": duplicate key " + key);
    kv[key] = value;
  }
  return kv;
}

void validate_device(const DeviceSpec& dev) {
  require_positive("m_l0", dev.m_l0);
  require_positive("m_l1", dev.m_l1);
  require_positive("pu_l1", dev.pu_l1);
  require_positive("n_l1", dev.n_l1);
  require_positive("pu_l2", dev.pu_l2);
  require_positive("n_l2", dev.n_l2);
  require_positive("t_p", dev.t_p);
  require_positive("t_m", dev.t_m);
  require_positive("element_bytes", dev.element_bytes);
  if (!is_power_of_two(dev.n_l1))
    fail(err::kValidate, "n_l1 must be a power of two, got " + std::to_string(dev.n_l1));
  if (!is_power_of_two(dev.n_l2))
    fail(err::kValidate, "n_l2 must be a power of two, got " + std::to_string(dev.n_l2));
}

DeviceSpec parse_device(const std::string& text) {
  auto kv = parse_kv_text(text);
  DeviceSpec dev;
  auto take = [&kv](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) fail(err::kParse, "missing field " + key);
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  dev.m_l0 = to_int("m_l0", take("m_l0"));
  dev.m_l1 = to_int("m_l1", take("m_l1"));
  dev.pu_l1 = to_int("pu_l1", take("pu_l1"));
  dev.n_l1 = to_int("n_l1", take("n_l1"));
  dev.pu_l2 = to_int("pu_l2", take("pu_l2"));
  dev.n_l2 = to_int("n_l2", take("n_l2"));
  dev.t_p = to_double("t_p", take("t_p"));
  dev.t_m = to_double("t_m", take("t_m"));
  dev.element_bytes = to_int("element_bytes", take("element_bytes"));
  if (!kv.empty()) fail(err::kParse, "unknown field " + kv.begin()->first);
  validate_device(dev);
  return dev;
}

DeviceSpec load_device(const std::string& path) { return parse_device(read_file(path)); }

std::string serialize_device(const DeviceSpec& dev) {
  std::ostringstream out;
  out.precision(17);
  out << "m_l0 = " << dev.m_l0 << "\n"
      << "m_l1 = " << dev.m_l1 << "\n"
      << "pu_l1 = " << dev.pu_l1 << "\n"
      << "n_l1 = " << dev.n_l1 << "\n"
      << "pu_l2 = " << dev.pu_l2 << "\n"
      << "n_l2 = " << dev.n_l2 << "\n"
      << "t_p = " << dev.t_p << "\n"
      << "t_m = " << dev.t_m << "\n"
      << "element_bytes = " << dev.element_bytes << "\n";
  return out.str();
}

void save_device(const DeviceSpec& dev, const std::string& path) {
  write_file(path, serialize_device(dev));
}

}  // namespace tiletune
