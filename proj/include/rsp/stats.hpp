#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rsp/record.hpp"

namespace rsp {

// Empirical distribution function with the <= convention:
// F(x) = (#values <= x) / count.
struct Ecdf {
  std::vector<double> sorted_values;

  size_t count() const { return sorted_values.size(); }
  double operator()(double x) const;
};

Ecdf make_ecdf(std::span<const double> values);

// sup_x |F_a(x) - F_b(x)| over the pooled sample points.
double ks_statistic(const Ecdf& a, const Ecdf& b);

// Row-major numeric matrix; the sample containers for the two-sample tests.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }
};

Matrix features_matrix(const RecordBatch& batch);

// Median pairwise Euclidean distance over the pooled rows of a and b.
// Falls back to 1.0 when all points coincide.
double median_heuristic_bandwidth(const Matrix& a, const Matrix& b);

// Unbiased MMD^2 with Gaussian kernel exp(-|x-y|^2 / (2 bandwidth^2)).
// Diagonal terms excluded, so the value can be slightly negative.
double mmd2_unbiased(const Matrix& a, const Matrix& b, double bandwidth);

// Permutation test for the observed MMD^2: the pooled rows are randomly
// reassigned `permutations` times and the p-value is the add-one-smoothed
// fraction of reassignments with MMD^2 at least the observed value.
double mmd2_permutation_pvalue(const Matrix& a, const Matrix& b,
                               double bandwidth, uint32_t permutations,
                               uint64_t seed);

struct T2Result {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Hotelling T^2 with pooled covariance; p-value via the exact
// F transformation. Errors on singular covariance or too few rows.
T2Result hotelling_t2(const Matrix& a, const Matrix& b);

// Per-category label frequencies of a block. Every declared category is
// present in the result (possibly with proportion 0); an observed label
// outside the declared set is an error.
std::map<int32_t, double> category_proportions(const RecordBatch& block,
                                               const Schema& schema);

enum class Statistic { mean, stddev, category_proportion };

std::string statistic_name(Statistic s);

// mean or sample stddev (n-1) of one feature column of a block.
double block_statistic(const RecordBatch& block, size_t feature,
                       Statistic statistic);

double mean_of(std::span<const double> values);
double stddev_of(std::span<const double> values);

// One estimation trajectory: the combined estimate after each batch of g
// blocks, plus the full-data reference value it converges to.
struct EstimateCurve {
  Statistic statistic = Statistic::mean;
  std::string feature;
  std::vector<double> batch_values;
  std::vector<uint64_t> blocks_used;  // blocks consumed after each batch
  double reference = 0.0;
  uint32_t runs = 1;
};

// batch_values[t] = average of the first (t+1)*g per-block values; the last
// batch may be short.
EstimateCurve combine_estimates(std::span<const double> per_block_values,
                                uint32_t batch_size);

// Record-count-weighted variant for unequal block sizes.
EstimateCurve combine_estimates_weighted(
    std::span<const double> per_block_values,
    std::span<const uint64_t> record_counts, uint32_t batch_size);

// Point-wise mean of same-shaped curves; runs accumulates.
EstimateCurve average_curves(std::span<const EstimateCurve> curves);

double pooled_mean(std::span<const uint64_t> counts,
                   std::span<const double> means);

// Exact stddev of the concatenation of blocks described by per-block
// (count, mean, stddev), via pairwise moment combination.
double pooled_stddev(std::span<const uint64_t> counts,
                     std::span<const double> means,
                     std::span<const double> stddevs);

}  // namespace rsp
