#include "rsp/kernels.hpp"

#include <cmath>

namespace rsp::kernels {

namespace scalar {

double sum(std::span<const double> values) {
  double s = 0.0;
  double comp = 0.0;
  for (const double x : values) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      comp += (s - t) + x;
    } else {
      comp += (x - t) + s;
    }
    s = t;
  }
  return s + comp;
}

double sum_centered_sq(std::span<const double> values, double center) {
  double s = 0.0;
  double comp = 0.0;
  for (const double v : values) {
    const double d = v - center;
    const double x = d * d;
    const double t = s + x;
    if (s >= x) {
      comp += (s - t) + x;
    } else {
      comp += (x - t) + s;
    }
    s = t;
  }
  return s + comp;
}

void squared_dists(std::span<const double> x, const double* columns, size_t n,
                   size_t dim, double* out) {
  for (size_t j = 0; j < n; ++j) out[j] = 0.0;
  for (size_t f = 0; f < dim; ++f) {
    const double xf = x[f];
    const double* col = columns + f * n;
    for (size_t j = 0; j < n; ++j) {
      const double d = col[j] - xf;
      out[j] += d * d;
    }
  }
}

}  // namespace scalar

#ifndef RSP_HAVE_AVX2_TU
namespace avx2 {
bool supported() { return false; }
double sum(std::span<const double> values) { return scalar::sum(values); }
double sum_centered_sq(std::span<const double> values, double center) {
  return scalar::sum_centered_sq(values, center);
}
void squared_dists(std::span<const double> x, const double* columns, size_t n,
                   size_t dim, double* out) {
  scalar::squared_dists(x, columns, n, dim, out);
}
}  // namespace avx2
#endif

namespace {
const bool g_use_avx2 = avx2::supported();
}

double sum(std::span<const double> values) {
  return g_use_avx2 ? avx2::sum(values) : scalar::sum(values);
}

double sum_centered_sq(std::span<const double> values, double center) {
  return g_use_avx2 ? avx2::sum_centered_sq(values, center)
                    : scalar::sum_centered_sq(values, center);
}

void squared_dists(std::span<const double> x, const double* columns, size_t n,
                   size_t dim, double* out) {
  if (g_use_avx2) {
    avx2::squared_dists(x, columns, n, dim, out);
  } else {
    scalar::squared_dists(x, columns, n, dim, out);
  }
}

std::string_view active_implementation() {
  return g_use_avx2 ? "avx2" : "scalar";
}

}  // namespace rsp::kernels
