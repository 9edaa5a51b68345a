// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers must check avx2::supported() first.

#include <immintrin.h>

#include <cmath>

#include "rsp/kernels.hpp"

namespace rsp::kernels::avx2 {

bool supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

struct Compensated {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

inline __m256d abs_pd(__m256d v) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
  return _mm256_and_pd(v, mask);
}

// One Neumaier step on four independent lanes.
inline void lane_add(__m256d& s, __m256d& c, __m256d x) {
  const __m256d t = _mm256_add_pd(s, x);
  const __m256d swap = _mm256_cmp_pd(abs_pd(s), abs_pd(x), _CMP_GE_OQ);
  const __m256d big = _mm256_blendv_pd(x, s, swap);
  const __m256d small = _mm256_blendv_pd(s, x, swap);
  c = _mm256_add_pd(c, _mm256_add_pd(_mm256_sub_pd(big, t), small));
  s = t;
}

inline double reduce_lanes(__m256d s, __m256d c, std::span<const double> tail) {
  alignas(32) double sl[4];
  alignas(32) double cl[4];
  _mm256_store_pd(sl, s);
  _mm256_store_pd(cl, c);
  Compensated total;
  for (int i = 0; i < 4; ++i) total.add(sl[i]);
  for (int i = 0; i < 4; ++i) total.add(cl[i]);
  for (const double x : tail) total.add(x);
  return total.value();
}

}  // namespace

double sum(std::span<const double> values) {
  const size_t n = values.size();
  const size_t vec_end = n - n % 4;
  __m256d s = _mm256_setzero_pd();
  __m256d c = _mm256_setzero_pd();
  const double* p = values.data();
  for (size_t i = 0; i < vec_end; i += 4) {
    lane_add(s, c, _mm256_loadu_pd(p + i));
  }
  return reduce_lanes(s, c, values.subspan(vec_end));
}

double sum_centered_sq(std::span<const double> values, double center) {
  const size_t n = values.size();
  const size_t vec_end = n - n % 4;
  const __m256d ctr = _mm256_set1_pd(center);
  __m256d s = _mm256_setzero_pd();
  __m256d c = _mm256_setzero_pd();
  const double* p = values.data();
  for (size_t i = 0; i < vec_end; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), ctr);
    lane_add(s, c, _mm256_mul_pd(d, d));
  }
  alignas(32) double sl[4];
  alignas(32) double cl[4];
  _mm256_store_pd(sl, s);
  _mm256_store_pd(cl, c);
  Compensated total;
  for (int i = 0; i < 4; ++i) total.add(sl[i]);
  for (int i = 0; i < 4; ++i) total.add(cl[i]);
  for (size_t i = vec_end; i < n; ++i) {
    const double d = values[i] - center;
    total.add(d * d);
  }
  return total.value();
}

void squared_dists(std::span<const double> x, const double* columns, size_t n,
                   size_t dim, double* out) {
  size_t j = 0;
  for (; j + 16 <= n; j += 16) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    for (size_t f = 0; f < dim; ++f) {
      const __m256d xf = _mm256_set1_pd(x[f]);
      const double* col = columns + f * n + j;
      const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(col), xf);
      const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(col + 4), xf);
      const __m256d d2 = _mm256_sub_pd(_mm256_loadu_pd(col + 8), xf);
      const __m256d d3 = _mm256_sub_pd(_mm256_loadu_pd(col + 12), xf);
      a0 = _mm256_fmadd_pd(d0, d0, a0);
      a1 = _mm256_fmadd_pd(d1, d1, a1);
      a2 = _mm256_fmadd_pd(d2, d2, a2);
      a3 = _mm256_fmadd_pd(d3, d3, a3);
    }
    _mm256_storeu_pd(out + j, a0);
    _mm256_storeu_pd(out + j + 4, a1);
    _mm256_storeu_pd(out + j + 8, a2);
    _mm256_storeu_pd(out + j + 12, a3);
  }
  for (; j < n; ++j) {
    double acc = 0.0;
    for (size_t f = 0; f < dim; ++f) {
      const double d = columns[f * n + j] - x[f];
      acc += d * d;
    }
    out[j] = acc;
  }
}

}  // namespace rsp::kernels::avx2
