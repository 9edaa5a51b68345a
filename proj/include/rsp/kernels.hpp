#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Arithmetic inner loops used by the statistics paths. Every kernel has a
// scalar reference implementation and an AVX2 variant; the dispatched entry
// points pick the widest instruction set the CPU supports at process start.
// The two variants are equivalence-tested against each other.
namespace rsp::kernels {

namespace scalar {
// Neumaier-compensated sum.
double sum(std::span<const double> values);
// Neumaier-compensated sum of (v - center)^2.
double sum_centered_sq(std::span<const double> values, double center);
// Squared Euclidean distances from x to n points stored feature-major:
// columns[f * n + j] is feature f of point j. out has n entries.
void squared_dists(std::span<const double> x, const double* columns, size_t n,
                   size_t dim, double* out);
}  // namespace scalar

namespace avx2 {
bool supported();  // compiled in and usable on this CPU
double sum(std::span<const double> values);
double sum_centered_sq(std::span<const double> values, double center);
void squared_dists(std::span<const double> x, const double* columns, size_t n,
                   size_t dim, double* out);
}  // namespace avx2

// Dispatched entry points.
double sum(std::span<const double> values);
double sum_centered_sq(std::span<const double> values, double center);
void squared_dists(std::span<const double> x, const double* columns, size_t n,
                   size_t dim, double* out);

std::string_view active_implementation();  // "avx2" or "scalar"

}  // namespace rsp::kernels
