#include "rsp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/fisher_f.hpp>

#include "rsp/error.hpp"
#include "rsp/kernels.hpp"
#include "rsp/prng.hpp"

namespace rsp {

namespace {

struct Compensated {
  double s = 0.0;
  double c = 0.0;

  void add(double v) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v)) {
      c += (s - t) + v;
    } else {
      c += (v - t) + s;
    }
    s = t;
  }
  double total() const { return s + c; }
};

}  // namespace

double Ecdf::operator()(double x) const {
  const auto it =
      std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
  return static_cast<double>(it - sorted_values.begin()) /
         static_cast<double>(sorted_values.size());
}

Ecdf make_ecdf(std::span<const double> values) {
  if (values.empty()) throw Error("ecdf needs at least one value");
  Ecdf e;
  e.sorted_values.assign(values.begin(), values.end());
  for (const double v : e.sorted_values) {
    if (!std::isfinite(v)) throw Error("ecdf values must be finite");
  }
  std::sort(e.sorted_values.begin(), e.sorted_values.end());
  return e;
}

double ks_statistic(const Ecdf& a, const Ecdf& b) {
  if (a.count() == 0 || b.count() == 0) {
    throw Error("ks_statistic needs non-empty samples");
  }
  const auto& av = a.sorted_values;
  const auto& bv = b.sorted_values;
  const double na = static_cast<double>(av.size());
  const double nb = static_cast<double>(bv.size());
  size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < av.size() && j < bv.size()) {
    const double x = std::min(av[i], bv[j]);
    while (i < av.size() && av[i] <= x) ++i;
    while (j < bv.size() && bv[j] <= x) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
  }
  return sup;
}

Matrix features_matrix(const RecordBatch& batch) {
  Matrix m(batch.size(), batch.feature_count());
  m.data = batch.features();
  return m;
}

namespace {

// Rows of m transposed into feature-major storage for the distance kernel.
std::vector<double> feature_major(const Matrix& m) {
  std::vector<double> cols(m.rows * m.cols);
  for (size_t r = 0; r < m.rows; ++r) {
    for (size_t c = 0; c < m.cols; ++c) {
      cols[c * m.rows + r] = m.at(r, c);
    }
  }
  return cols;
}

}  // namespace

double median_heuristic_bandwidth(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw Error("bandwidth: dimension mismatch");
  Matrix pooled(a.rows + b.rows, a.cols);
  std::copy(a.data.begin(), a.data.end(), pooled.data.begin());
  std::copy(b.data.begin(), b.data.end(),
            pooled.data.begin() + static_cast<ptrdiff_t>(a.data.size()));
  const size_t q = pooled.rows;
  if (q < 2) throw Error("bandwidth: need at least two pooled rows");
  const std::vector<double> cols = feature_major(pooled);
  std::vector<double> dists;
  dists.reserve(q * (q - 1) / 2);
  std::vector<double> row(q);
  for (size_t i = 0; i + 1 < q; ++i) {
    kernels::squared_dists({pooled.data.data() + i * pooled.cols, pooled.cols},
                           cols.data(), q, pooled.cols, row.data());
    for (size_t j = i + 1; j < q; ++j) dists.push_back(row[j]);
  }
  const size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<ptrdiff_t>(mid),
                   dists.end());
  const double med_sq = dists[mid];
  return med_sq > 0.0 ? std::sqrt(med_sq) : 1.0;
}

double mmd2_unbiased(const Matrix& a, const Matrix& b, double bandwidth) {
  if (a.cols != b.cols) throw Error("mmd2: dimension mismatch");
  if (a.rows < 2 || b.rows < 2) {
    throw Error("mmd2: each sample needs at least 2 rows");
  }
  if (!(bandwidth > 0.0)) throw Error("mmd2: bandwidth must be positive");
  const double inv = -1.0 / (2.0 * bandwidth * bandwidth);
  const std::vector<double> cols_a = feature_major(a);
  const std::vector<double> cols_b = feature_major(b);

  std::vector<double> dist(std::max(a.rows, b.rows));
  std::vector<double> kval(std::max(a.rows, b.rows));

  const auto kernel_row_sum = [&](std::span<const double> x,
                                  const std::vector<double>& cols, size_t n,
                                  size_t dim) {
    kernels::squared_dists(x, cols.data(), n, dim, dist.data());
    for (size_t j = 0; j < n; ++j) kval[j] = std::exp(dist[j] * inv);
    return kernels::sum({kval.data(), n});
  };

  Compensated s_aa, s_bb, s_ab;
  for (size_t i = 0; i < a.rows; ++i) {
    const std::span<const double> x{a.data.data() + i * a.cols, a.cols};
    s_aa.add(kernel_row_sum(x, cols_a, a.rows, a.cols) - 1.0);  // drop j == i
    s_ab.add(kernel_row_sum(x, cols_b, b.rows, a.cols));
  }
  for (size_t i = 0; i < b.rows; ++i) {
    const std::span<const double> y{b.data.data() + i * b.cols, b.cols};
    s_bb.add(kernel_row_sum(y, cols_b, b.rows, b.cols) - 1.0);
  }
  const double m = static_cast<double>(a.rows);
  const double n = static_cast<double>(b.rows);
  return s_aa.total() / (m * (m - 1.0)) + s_bb.total() / (n * (n - 1.0)) -
         2.0 * s_ab.total() / (m * n);
}

double mmd2_permutation_pvalue(const Matrix& a, const Matrix& b,
                               double bandwidth, uint32_t permutations,
                               uint64_t seed) {
  if (a.cols != b.cols) throw Error("mmd2: dimension mismatch");
  if (a.rows < 2 || b.rows < 2) {
    throw Error("mmd2: each sample needs at least 2 rows");
  }
  if (permutations == 0) throw Error("mmd2: need at least one permutation");
  const size_t m = a.rows;
  const size_t q = a.rows + b.rows;
  Matrix pooled(q, a.cols);
  std::copy(a.data.begin(), a.data.end(), pooled.data.begin());
  std::copy(b.data.begin(), b.data.end(),
            pooled.data.begin() + static_cast<ptrdiff_t>(a.data.size()));

  // Kernel matrix once; each reassignment only re-buckets its entries.
  const double inv = -1.0 / (2.0 * bandwidth * bandwidth);
  const std::vector<double> cols = feature_major(pooled);
  std::vector<double> gram(q * q);
  for (size_t i = 0; i < q; ++i) {
    kernels::squared_dists({pooled.data.data() + i * pooled.cols, pooled.cols},
                           cols.data(), q, pooled.cols, &gram[i * q]);
  }
  for (double& g : gram) g = std::exp(g * inv);

  std::vector<uint32_t> side(q);
  const auto mmd_of = [&]() {
    Compensated s_aa, s_bb, s_ab;
    for (size_t i = 0; i < q; ++i) {
      for (size_t j = i + 1; j < q; ++j) {
        const double k = gram[i * q + j];
        const uint32_t buckets = side[i] + side[j];
        if (buckets == 0) {
          s_aa.add(k);
        } else if (buckets == 2) {
          s_bb.add(k);
        } else {
          s_ab.add(k);
        }
      }
    }
    const double dm = static_cast<double>(m);
    const double dn = static_cast<double>(q - m);
    return 2.0 * s_aa.total() / (dm * (dm - 1.0)) +
           2.0 * s_bb.total() / (dn * (dn - 1.0)) -
           2.0 * s_ab.total() / (dm * dn);
  };

  for (size_t i = 0; i < q; ++i) side[i] = i < m ? 0 : 1;
  const double observed = mmd_of();

  uint32_t at_least = 0;
  std::vector<uint32_t> order(q);
  for (uint32_t r = 0; r < permutations; ++r) {
    for (size_t i = 0; i < q; ++i) order[i] = static_cast<uint32_t>(i);
    Philox gen(seed, r);
    fisher_yates(std::span<uint32_t>(order), gen);
    for (size_t i = 0; i < q; ++i) side[order[i]] = i < m ? 0 : 1;
    if (mmd_of() >= observed) ++at_least;
  }
  return (1.0 + at_least) / (1.0 + permutations);
}

namespace {

std::vector<double> column_means(const Matrix& m) {
  std::vector<double> mu(m.cols);
  std::vector<double> col(m.rows);
  for (size_t c = 0; c < m.cols; ++c) {
    for (size_t r = 0; r < m.rows; ++r) col[r] = m.at(r, c);
    mu[c] = kernels::sum(col) / static_cast<double>(m.rows);
  }
  return mu;
}

// (n-1)-scaled scatter matrix sum_r (x_r - mu)(x_r - mu)^T, accumulated into
// `scatter` (column-major irrelevant: symmetric).
void add_scatter(const Matrix& m, const std::vector<double>& mu,
                 std::vector<double>& scatter) {
  const size_t d = m.cols;
  std::vector<double> dev(d);
  for (size_t r = 0; r < m.rows; ++r) {
    for (size_t c = 0; c < d; ++c) dev[c] = m.at(r, c) - mu[c];
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = i; j < d; ++j) {
        scatter[i * d + j] += dev[i] * dev[j];
      }
    }
  }
}

// Cholesky factorization of the symmetric matrix stored in the upper
// triangle of `s` (d x d). Returns false when a pivot collapses. Collinear
// features leave a pivot at roundoff scale rather than exactly zero, so the
// test is relative to the largest diagonal entry.
bool cholesky(std::vector<double>& s, size_t d) {
  double scale = 0.0;
  for (size_t i = 0; i < d; ++i) scale = std::max(scale, s[i * d + i]);
  const double floor = scale * 1e-12;
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = i; j < d; ++j) {
      double v = s[i * d + j];
      for (size_t k = 0; k < i; ++k) v -= s[k * d + i] * s[k * d + j];
      if (i == j) {
        if (v <= floor || !std::isfinite(v)) return false;
        s[i * d + i] = std::sqrt(v);
      } else {
        s[i * d + j] = v / s[i * d + i];
      }
    }
  }
  return true;
}

}  // namespace

T2Result hotelling_t2(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw Error("hotelling_t2: dimension mismatch");
  const size_t d = a.cols;
  if (d == 0) throw Error("hotelling_t2: empty feature set");
  const double na = static_cast<double>(a.rows);
  const double nb = static_cast<double>(b.rows);
  const double nu = na + nb - 2.0;
  if (!(nu > static_cast<double>(d))) {
    std::ostringstream msg;
    msg << "hotelling_t2: need more than " << d + 2
        << " total rows for dimension " << d;
    throw Error(msg.str());
  }
  const std::vector<double> mu_a = column_means(a);
  const std::vector<double> mu_b = column_means(b);
  std::vector<double> pooled(d * d, 0.0);
  add_scatter(a, mu_a, pooled);
  add_scatter(b, mu_b, pooled);
  for (double& v : pooled) v /= nu;

  if (!cholesky(pooled, d)) {
    throw Error("hotelling_t2: singular pooled covariance");
  }
  // Solve S w = diff through the factor (upper triangle holds L^T).
  std::vector<double> w(d);
  for (size_t i = 0; i < d; ++i) {
    double v = mu_a[i] - mu_b[i];
    for (size_t k = 0; k < i; ++k) v -= pooled[k * d + i] * w[k];
    w[i] = v / pooled[i * d + i];
  }
  for (size_t ii = d; ii-- > 0;) {
    double v = w[ii];
    for (size_t k = ii + 1; k < d; ++k) v -= pooled[ii * d + k] * w[k];
    w[ii] = v / pooled[ii * d + ii];
  }
  Compensated quad;
  for (size_t i = 0; i < d; ++i) quad.add((mu_a[i] - mu_b[i]) * w[i]);

  T2Result result;
  result.statistic = (na * nb) / (na + nb) * quad.total();
  if (result.statistic < 0.0) result.statistic = 0.0;  // roundoff guard
  const double dd = static_cast<double>(d);
  const double f_stat = result.statistic * (nu - dd + 1.0) / (nu * dd);
  const boost::math::fisher_f f_dist(dd, nu - dd + 1.0);
  result.p_value = boost::math::cdf(boost::math::complement(f_dist, f_stat));
  return result;
}

std::map<int32_t, double> category_proportions(const RecordBatch& block,
                                               const Schema& schema) {
  if (!schema.has_label()) {
    throw Error("category_proportions: schema has no categorical label");
  }
  if (block.size() == 0) {
    throw Error("category_proportions: empty block");
  }
  std::map<int32_t, uint64_t> counts;
  for (const int32_t code : *schema.label_categories) counts[code] = 0;
  for (size_t i = 0; i < block.size(); ++i) {
    const int32_t code = block.label(i);
    const auto it = counts.find(code);
    if (it == counts.end()) {
      throw Error("category_proportions: undeclared category " +
                  std::to_string(code));
    }
    it->second += 1;
  }
  std::map<int32_t, double> result;
  for (const auto& [code, n] : counts) {
    result[code] =
        static_cast<double>(n) / static_cast<double>(block.size());
  }
  return result;
}

std::string statistic_name(Statistic s) {
  switch (s) {
    case Statistic::mean:
      return "mean";
    case Statistic::stddev:
      return "stddev";
    case Statistic::category_proportion:
      return "category_proportion";
  }
  throw Error("unknown statistic");
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw Error("mean needs at least one value");
  return kernels::sum(values) / static_cast<double>(values.size());
}

double stddev_of(std::span<const double> values) {
  if (values.size() < 2) throw Error("stddev needs at least two values");
  const double mu = mean_of(values);
  const double ss = kernels::sum_centered_sq(values, mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double block_statistic(const RecordBatch& block, size_t feature,
                       Statistic statistic) {
  if (feature >= block.feature_count()) {
    throw Error("block_statistic: feature index out of range");
  }
  const std::vector<double> column = block.feature_column(feature);
  switch (statistic) {
    case Statistic::mean:
      return mean_of(column);
    case Statistic::stddev:
      return stddev_of(column);
    case Statistic::category_proportion:
      throw Error(
          "block_statistic handles mean and stddev; "
          "use category_proportions for labels");
  }
  throw Error("unknown statistic");
}

EstimateCurve combine_estimates(std::span<const double> per_block_values,
                                uint32_t batch_size) {
  if (per_block_values.empty()) {
    throw Error("combine_estimates: no per-block values");
  }
  if (batch_size == 0) {
    throw Error("combine_estimates: batch size must be positive");
  }
  EstimateCurve curve;
  Compensated running;
  size_t used = 0;
  while (used < per_block_values.size()) {
    const size_t stop =
        std::min(per_block_values.size(), used + batch_size);
    for (; used < stop; ++used) running.add(per_block_values[used]);
    curve.batch_values.push_back(running.total() /
                                 static_cast<double>(used));
    curve.blocks_used.push_back(used);
  }
  return curve;
}

EstimateCurve combine_estimates_weighted(
    std::span<const double> per_block_values,
    std::span<const uint64_t> record_counts, uint32_t batch_size) {
  if (per_block_values.size() != record_counts.size()) {
    throw Error("combine_estimates_weighted: length mismatch");
  }
  if (per_block_values.empty()) {
    throw Error("combine_estimates_weighted: no per-block values");
  }
  if (batch_size == 0) {
    throw Error("combine_estimates_weighted: batch size must be positive");
  }
  EstimateCurve curve;
  Compensated weighted_sum;
  Compensated weight;
  size_t used = 0;
  while (used < per_block_values.size()) {
    const size_t stop =
        std::min(per_block_values.size(), used + batch_size);
    for (; used < stop; ++used) {
      const double w = static_cast<double>(record_counts[used]);
      weighted_sum.add(w * per_block_values[used]);
      weight.add(w);
    }
    if (weight.total() <= 0.0) {
      throw Error("combine_estimates_weighted: zero total weight");
    }
    curve.batch_values.push_back(weighted_sum.total() / weight.total());
    curve.blocks_used.push_back(used);
  }
  return curve;
}

EstimateCurve average_curves(std::span<const EstimateCurve> curves) {
  if (curves.empty()) throw Error("average_curves: no curves");
  EstimateCurve out = curves.front();
  out.runs = 0;
  std::vector<Compensated> acc(out.batch_values.size());
  for (const EstimateCurve& c : curves) {
    if (c.batch_values.size() != acc.size() ||
        c.blocks_used != out.blocks_used || c.statistic != out.statistic ||
        c.feature != out.feature) {
      throw Error("average_curves: shape mismatch");
    }
    for (size_t t = 0; t < acc.size(); ++t) acc[t].add(c.batch_values[t]);
    out.runs += c.runs;
  }
  for (size_t t = 0; t < acc.size(); ++t) {
    out.batch_values[t] = acc[t].total() / static_cast<double>(curves.size());
  }
  return out;
}

double pooled_mean(std::span<const uint64_t> counts,
                   std::span<const double> means) {
  if (counts.size() != means.size() || counts.empty()) {
    throw Error("pooled_mean: bad inputs");
  }
  Compensated num, den;
  for (size_t i = 0; i < counts.size(); ++i) {
    num.add(static_cast<double>(counts[i]) * means[i]);
    den.add(static_cast<double>(counts[i]));
  }
  if (den.total() <= 0.0) throw Error("pooled_mean: zero total count");
  return num.total() / den.total();
}

double pooled_stddev(std::span<const uint64_t> counts,
                     std::span<const double> means,
                     std::span<const double> stddevs) {
  if (counts.size() != means.size() || counts.size() != stddevs.size() ||
      counts.empty()) {
    throw Error("pooled_stddev: bad inputs");
  }
  const double grand = pooled_mean(counts, means);
  Compensated m2;
  uint64_t total = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    const double n = static_cast<double>(counts[i]);
    m2.add((n - 1.0) * stddevs[i] * stddevs[i]);
    const double dev = means[i] - grand;
    m2.add(n * dev * dev);
    total += counts[i];
  }
  if (total < 2) throw Error("pooled_stddev: need at least two records");
  return std::sqrt(m2.total() / static_cast<double>(total - 1));
}

}  // namespace rsp
