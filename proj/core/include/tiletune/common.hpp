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
#ifndef TILETUNE_COMMON_HPP_
#define TILETUNE_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tiletune {

/// Error with a stable machine-parsable code. The CLI prints "code: message"
/// on one line and exits 1; library callers can switch on code().
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
  throw Error(code, message);
}

namespace err {
inline constexpr const char* kParse = "E_PARSE";
inline constexpr const char* kValidate = "E_VALIDATE";
inline constexpr const char* kConfig = "E_CONFIG";
inline constexpr const char* kState = "E_STATE";
inline constexpr const char* kIo = "E_IO";
}  // namespace err

/// splitmix64 finalizer; used to derive independent seed streams from a base seed.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t scramble64(uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a) { return mix64(base ^ mix64(a)); }
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b, uint64_t c) {
  return derive_seed(derive_seed(base, a, b), c);
}

inline uint64_t hash_str(const std::string& s) {
  // FNV-1a
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Deterministic random stream. All draws are defined in terms of the raw
/// 64-bit engine output so results are identical across platforms and
/// standard-library versions.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  uint64_t next_u64() {
    // splitmix64: counter + finalizer, period 2^64
    state_ += 0x9e3779b97f4a7c15ULL;
    return scramble64(state_);
  }

  /// Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_index(uint64_t n) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform double in [0, 1).
  double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two draws per call.
  double normal() {
    double u1 = uniform_real();
    double u2 = uniform_real();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double lognormal(double sigma) { return std::exp(sigma * normal()); }

  RngStream fork(uint64_t tag) { return RngStream(derive_seed(state_, tag)); }

 private:
  uint64_t state_;
};

/// Runs fn(i) for i in [0, n). With threads <= 1 the loop is serial. Each
/// index must write only its own outputs; results are then independent of
/// the thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace tiletune

#endif  // TILETUNE_COMMON_HPP_
