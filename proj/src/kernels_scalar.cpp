#include "dbb84/kernels.hpp"

#include <cmath>

namespace dbb84::kernels {
namespace {

void exp_n_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

void log_n_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::log(x[i]);
}

double sum_exp_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i]);
  return s;
}

}  // namespace

const Ops& scalar() {
  static const Ops ops{exp_n_scalar, log_n_scalar, sum_exp_scalar, "scalar"};
  return ops;
}

}  // namespace dbb84::kernels
