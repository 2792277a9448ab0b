#include <cmath>

#include "kernels_internal.h"

namespace ues::kernels::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void lincomb(double a, const double* x, double b, const double* y,
             double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void soft_threshold(const double* x, double t, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::fabs(x[i]) - t;
    out[i] = m > 0.0 ? std::copysign(m, x[i]) : 0.0;
  }
}

double abs_sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

double sparse_dot(const std::int32_t* idx, const double* val, const double* x,
                  std::size_t nnz) {
  double s = 0.0;
  for (std::size_t j = 0; j < nnz; ++j) s += val[j] * x[idx[j]];
  return s;
}

}  // namespace

const KernelTable kTable{dot,     sum_squares,    squared_distance, axpy,
                         lincomb, soft_threshold, abs_sum,          sparse_dot};

}  // namespace ues::kernels::scalar
