#ifndef TILETUNE_TESTS_TEST_HELPERS_HPP_
#define TILETUNE_TESTS_TEST_HELPERS_HPP_

#include <string>
#include <vector>

#include "tiletune/device.hpp"
#include "tiletune/oracle.hpp"
#include "tiletune/schedule.hpp"
#include "tiletune/workload.hpp"

namespace tiletune::testing {

// The reference device used by the worked examples (matches
// samples/device.txt).
inline DeviceSpec reference_device() {
  DeviceSpec d;
  d.m_l0 = 256;
  d.m_l1 = 4096;
  d.pu_l1 = 4;
  d.n_l1 = 32;
  d.pu_l2 = 8;
  d.n_l2 = 32;
  d.t_p = 1.0e12;
  d.t_m = 1.0e11;
  d.element_bytes = 4;
  return d;
}

inline OracleDevice oracle_a() {
  OracleDevice o;
  o.hidden = reference_device();
  o.hidden.m_l0 = 192;
  o.hidden.m_l1 = 3072;
  o.hidden.pu_l2 = 6;
  o.hidden.n_l2 = 16;
  o.hidden.t_p = 8.0e11;
  o.hidden.t_m = 1.2e11;
  o.stride_coeff = 0.35;
  o.occupancy_coeff = 1.5;
  o.launch_overhead_s = 2.0e-6;
  o.noise_sigma = 0.03;
  o.seed = 90001;
  return o;
}

inline OracleDevice oracle_b() {
  OracleDevice o;
  o.hidden = reference_device();
  o.hidden.m_l0 = 128;
  o.hidden.m_l1 = 6144;
  o.hidden.pu_l1 = 2;
  o.hidden.n_l1 = 64;
  o.hidden.pu_l2 = 12;
  o.hidden.n_l2 = 64;
  o.hidden.t_p = 1.5e12;
  o.hidden.t_m = 0.9e11;
  o.stride_coeff = 0.5;
  o.occupancy_coeff = 2.0;
  o.launch_overhead_s = 1.0e-6;
  o.noise_sigma = 0.03;
  o.seed = 90002;
  return o;
}

inline TensorOpSpec make_gemm(const std::string& name, int64_t m, int64_t n, int64_t k,
                              int fused = 0) {
  TensorOpSpec op;
  op.name = name;
  op.spatial_axes = {{"m", m}, {"n", n}};
  op.reduction_axes = {{"k", k}};
  op.buffers = {{"A", {"m", "k"}, BufferIo::kInput},
                {"B", {"k", "n"}, BufferIo::kInput},
                {"C", {"m", "n"}, BufferIo::kOutput}};
  op.fused_elementwise = fused;
  op.kind = OpKind::kTiled;
  return op;
}

inline TensorOpSpec make_elementwise(const std::string& name, int64_t h, int64_t w) {
  TensorOpSpec op;
  op.name = name;
  op.spatial_axes = {{"h", h}, {"w", w}};
  op.buffers = {{"X", {"h", "w"}, BufferIo::kInput}, {"Y", {"h", "w"}, BufferIo::kOutput}};
  op.kind = OpKind::kElementwise;
  return op;
}

// Direct convolution shape: spatial (f, y, x), reduction (c, r).
inline TensorOpSpec make_conv(const std::string& name, int64_t f, int64_t y, int64_t x,
                              int64_t c, int64_t r) {
  TensorOpSpec op;
  op.name = name;
  op.spatial_axes = {{"f", f}, {"y", y}, {"x", x}};
  op.reduction_axes = {{"c", c}, {"r", r}};
  op.buffers = {{"In", {"c", "y", "x"}, BufferIo::kInput},
                {"W", {"f", "c", "r"}, BufferIo::kInput},
                {"Out", {"f", "y", "x"}, BufferIo::kOutput}};
  op.kind = OpKind::kTiled;
  return op;
}

inline Schedule make_schedule(const std::vector<std::vector<int64_t>>& spatial,
                              const std::vector<std::vector<int64_t>>& reduction,
                              int64_t unroll = 1) {
  Schedule s;
  s.spatial_factors = spatial;
  s.reduction_factors = reduction;
  s.unroll = unroll;
  return s;
}

// The GEMM-128 worked-example schedule: m (4,8,2,2), n (4,8,2,2), k (4,8,4).
inline Schedule reference_gemm_schedule() {
  return make_schedule({{4, 8, 2, 2}, {4, 8, 2, 2}}, {{4, 8, 4}}, 1);
}

}  // namespace tiletune::testing

#endif  // TILETUNE_TESTS_TEST_HELPERS_HPP_
