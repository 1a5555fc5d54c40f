#pragma once

#include <cstddef>

namespace dbb84::kernels {

// Elementwise/reduction primitives behind the binomial tail summation.
// A scalar reference implementation always exists; on x86 an AVX2 variant
// is compiled separately and selected at runtime. The environment variable
// DBB84_SIMD=scalar|avx2 forces a lane (useful for equivalence testing).
struct Ops {
  // y[i] = exp(x[i])
  void (*exp_n)(const double* x, double* y, std::size_t n);
  // y[i] = log(x[i]); inputs are strictly positive in all call sites
  void (*log_n)(const double* x, double* y, std::size_t n);
  // sum_i exp(x[i]); callers pre-shift so that x[i] <= 0
  double (*sum_exp)(const double* x, std::size_t n);
  const char* name;
};

const Ops& scalar();
bool avx2_supported();
const Ops& avx2();    // valid only when avx2_supported()
const Ops& active();  // resolved once per process

}  // namespace dbb84::kernels
