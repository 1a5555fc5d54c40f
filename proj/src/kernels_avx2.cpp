#include "dbb84/kernels.hpp"

#include <immintrin.h>

#include <cfloat>
#include <cmath>
#include <cstdint>

// AVX2+FMA variants of the tail-sum primitives. exp uses Cody-Waite range
// reduction with a degree-13 Taylor core on [-ln2/2, ln2/2]; log recenters
// the mantissa around sqrt(2) and evaluates 2*atanh((m-1)/(m+1)). Both stay
// within a few ulp of libm over the ranges the tail sums produce; exp flushes
// results below the normal range to zero, which the call sites tolerate.

namespace dbb84::kernels {
namespace {

constexpr double kLog2E = 1.4426950408889634074;
constexpr double kExpLn2Hi = 6.93145751953125e-1;
constexpr double kExpLn2Lo = 1.42860682030941723212e-6;
constexpr double kExpHi = 709.0;
constexpr double kExpLo = -708.0;

constexpr double kLogLn2Hi = 6.93147180369123816490e-1;
constexpr double kLogLn2Lo = 1.90821492927058770002e-10;
constexpr double kSqrt2 = 1.41421356237309514547;

inline __m256d exp4(__m256d x) {
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2E)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kExpLn2Hi), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kExpLn2Lo), r);

  // Taylor series of exp on [-ln2/2, ln2/2], degree 13.
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // scale by 2^n through the exponent field
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  __m256d y = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));

  y = _mm256_blendv_pd(y, _mm256_set1_pd(0.0),
                       _mm256_cmp_pd(x, _mm256_set1_pd(kExpLo), _CMP_LT_OQ));
  y = _mm256_blendv_pd(y, _mm256_set1_pd(HUGE_VAL),
                       _mm256_cmp_pd(x, _mm256_set1_pd(kExpHi), _CMP_GT_OQ));
  return y;
}

inline __m256d log4(__m256d x) {
  const __m256i ix = _mm256_castpd_si256(x);
  const __m256i expfield =
      _mm256_srli_epi64(_mm256_and_si256(ix, _mm256_set1_epi64x(0x7ff0000000000000LL)), 52);
  __m256i e64 = _mm256_sub_epi64(expfield, _mm256_set1_epi64x(1023));
  const __m256i mbits = _mm256_or_si256(
      _mm256_and_si256(ix, _mm256_set1_epi64x(0x000fffffffffffffLL)),
      _mm256_set1_epi64x(0x3ff0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mbits);  // in [1, 2)

  // fold m > sqrt(2) down one octave
  const __m256d fold = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), fold);
  e64 = _mm256_add_epi64(e64, _mm256_srli_epi64(_mm256_castpd_si256(fold), 63));

  // e64 as double: values are small integers, convert via scalar-free trick
  const __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_add_epi64(e64, _mm256_set1_epi64x(0x4338000000000000LL))),
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x4338000000000000LL)));

  const __m256d t = _mm256_div_pd(_mm256_sub_pd(m, _mm256_set1_pd(1.0)),
                                  _mm256_add_pd(m, _mm256_set1_pd(1.0)));
  const __m256d z = _mm256_mul_pd(t, t);

  // atanh(t)/t = 1 + z/3 + z^2/5 + ... ; z <= 0.0295 so degree 11 suffices
  __m256d p = _mm256_set1_pd(1.0 / 23.0);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 21.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 19.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 17.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 15.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 13.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 11.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 9.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 7.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 5.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0 / 3.0));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.0));
  const __m256d logm = _mm256_mul_pd(_mm256_add_pd(t, t), p);

  __m256d y = _mm256_fmadd_pd(e, _mm256_set1_pd(kLogLn2Lo), logm);
  y = _mm256_fmadd_pd(e, _mm256_set1_pd(kLogLn2Hi), y);
  return y;
}

// call sites guarantee positive finite inputs; anything else takes libm
inline bool log_range_ok(__m256d x) {
  const __m256d lo = _mm256_cmp_pd(x, _mm256_set1_pd(DBL_MIN), _CMP_GE_OQ);
  const __m256d hi = _mm256_cmp_pd(x, _mm256_set1_pd(DBL_MAX), _CMP_LE_OQ);
  return _mm256_movemask_pd(_mm256_and_pd(lo, hi)) == 0xf;
}

void exp_n_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, exp4(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = std::exp(x[i]);
}

void log_n_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    if (log_range_ok(v)) {
      _mm256_storeu_pd(y + i, log4(v));
    } else {
      for (int j = 0; j < 4; ++j) y[i + j] = std::log(x[i + j]);
    }
  }
  for (; i < n; ++i) y[i] = std::log(x[i]);
}

double sum_exp_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, exp4(_mm256_loadu_pd(x + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += std::exp(x[i]);
  return s;
}

}  // namespace

const Ops& avx2() {
  static const Ops ops{exp_n_avx2, log_n_avx2, sum_exp_avx2, "avx2"};
  return ops;
}

}  // namespace dbb84::kernels
