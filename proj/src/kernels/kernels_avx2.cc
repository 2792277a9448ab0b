// AVX2 variants. This translation unit is built with -mavx2 -mfma and is
// only entered after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <cmath>

#include "kernels_internal.h"

namespace ues::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 * kLanes <= n; i += 2 * kLanes) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + kLanes),
                           _mm256_loadu_pd(b + i + kLanes), acc1);
  }
  for (; i + kLanes <= n; i += kLanes) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) { return dot(a, a, n); }

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void lincomb(double a, const double* x, double b, const double* y,
             double* out, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const __m256d bv = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d ax = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    const __m256d by = _mm256_mul_pd(bv, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(ax, by));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void soft_threshold(const double* x, double t, double* out, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d tv = _mm256_set1_pd(t);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d mag = _mm256_sub_pd(_mm256_andnot_pd(sign_mask, xv), tv);
    const __m256d keep = _mm256_cmp_pd(mag, zero, _CMP_GT_OQ);
    const __m256d signed_mag = _mm256_or_pd(mag, _mm256_and_pd(sign_mask, xv));
    _mm256_storeu_pd(out + i, _mm256_and_pd(signed_mag, keep));
  }
  for (; i < n; ++i) {
    const double m = std::fabs(x[i]) - t;
    out[i] = m > 0.0 ? std::copysign(m, x[i]) : 0.0;
  }
}

double abs_sum(const double* a, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(a + i)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

double sparse_dot(const std::int32_t* idx, const double* val, const double* x,
                  std::size_t nnz) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + kLanes <= nnz; j += kLanes) {
    const __m128i iv =
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + j));
    const __m256d xv = _mm256_i32gather_pd(x, iv, 8);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(val + j), xv, acc);
  }
  double s = hsum(acc);
  for (; j < nnz; ++j) s += val[j] * x[idx[j]];
  return s;
}

}  // namespace

const KernelTable kTable{dot,     sum_squares,    squared_distance, axpy,
                         lincomb, soft_threshold, abs_sum,          sparse_dot};

}  // namespace ues::kernels::avx2
