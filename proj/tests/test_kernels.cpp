#include <doctest.h>

#include <cmath>
#include <vector>

#include "rsp/kernels.hpp"
#include "rsp/prng.hpp"

namespace k = rsp::kernels;

namespace {

std::vector<double> random_values(size_t n, uint64_t seed, double scale) {
  rsp::Philox gen(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = (gen.next_double() - 0.5) * scale;
  return v;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("compensated sum beats naive accumulation") {
  // Alternating large/small values whose exact sum is n/2 * 1e-9.
  std::vector<double> v;
  for (int i = 0; i < 10000; ++i) {
    v.push_back(1e16);
    v.push_back(1e-9);
    v.push_back(-1e16);
  }
  const double exact = 10000 * 1e-9;
  CHECK(k::scalar::sum(v) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("scalar and dispatched sums agree with plain long double") {
  for (const size_t n : {1u, 2u, 3u, 7u, 8u, 64u, 1000u, 4099u}) {
    const auto v = random_values(n, 17 + n, 1e6);
    long double ref = 0.0L;
    for (const double x : v) ref += x;
    const double expected = static_cast<double>(ref);
    CHECK(k::scalar::sum(v) ==
          doctest::Approx(expected).epsilon(1e-13));
    CHECK(k::sum(v) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("avx2 variants match scalar bit-for-bit on well-scaled data"
          * doctest::skip(false)) {
  if (!k::avx2::supported()) {
    MESSAGE("avx2 not available; dispatch uses scalar");
    return;
  }
  for (const size_t n : {2u, 5u, 16u, 33u, 1024u, 10001u}) {
    const auto v = random_values(n, 23 + n, 1000.0);
    const double s_scalar = k::scalar::sum(v);
    const double s_avx = k::avx2::sum(v);
    CHECK(std::abs(s_avx - s_scalar) <=
          1e-12 * std::max(1.0, std::abs(s_scalar)));

    const double c_scalar = k::scalar::sum_centered_sq(v, 0.25);
    const double c_avx = k::avx2::sum_centered_sq(v, 0.25);
    CHECK(std::abs(c_avx - c_scalar) <=
          1e-12 * std::max(1.0, std::abs(c_scalar)));
  }
}

TEST_CASE("squared_dists equals the naive row loop") {
  const size_t n = 257, dim = 7;
  const auto points = random_values(n * dim, 31, 10.0);
  const auto x = random_values(dim, 37, 10.0);
  // feature-major layout: columns[f * n + j]
  std::vector<double> columns(n * dim);
  for (size_t j = 0; j < n; ++j) {
    for (size_t f = 0; f < dim; ++f) {
      columns[f * n + j] = points[j * dim + f];
    }
  }
  std::vector<double> naive(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    for (size_t f = 0; f < dim; ++f) {
      const double d = x[f] - points[j * dim + f];
      naive[j] += d * d;
    }
  }
  std::vector<double> scalar_out(n), dispatched(n);
  k::scalar::squared_dists(x, columns.data(), n, dim, scalar_out.data());
  k::squared_dists(x, columns.data(), n, dim, dispatched.data());
  for (size_t j = 0; j < n; ++j) {
    CHECK(scalar_out[j] == doctest::Approx(naive[j]).epsilon(1e-12));
    CHECK(dispatched[j] == doctest::Approx(naive[j]).epsilon(1e-12));
  }
  if (k::avx2::supported()) {
    std::vector<double> avx_out(n);
    k::avx2::squared_dists(x, columns.data(), n, dim, avx_out.data());
    for (size_t j = 0; j < n; ++j) {
      CHECK(avx_out[j] == doctest::Approx(naive[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("active implementation is reported") {
  const auto name = k::active_implementation();
  CHECK((name == "avx2" || name == "scalar"));
  if (k::avx2::supported()) CHECK(name == "avx2");
}

}  // TEST_SUITE
