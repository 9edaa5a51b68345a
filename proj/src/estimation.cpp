#include "rsp/estimation.hpp"

#include <algorithm>

#include "rsp/error.hpp"

namespace rsp {

std::vector<BlockStats> per_block_stats(const Manifest& manifest) {
  std::vector<BlockStats> out;
  out.reserve(manifest.blocks.size());
  for (const BlockMeta& meta : manifest.blocks) {
    const RecordBatch block = read_block(manifest, meta.block_id);
    BlockStats s;
    s.block_id = meta.block_id;
    s.records = block.size();
    const size_t m = block.feature_count();
    s.mean.resize(m);
    s.stddev.resize(m, 0.0);
    for (size_t f = 0; f < m; ++f) {
      const std::vector<double> column = block.feature_column(f);
      s.mean[f] = mean_of(column);
      if (column.size() >= 2) s.stddev[f] = stddev_of(column);
    }
    if (manifest.schema.has_label()) {
      for (const int32_t code : *manifest.schema.label_categories) {
        s.label_counts[code] = 0;
      }
      for (size_t i = 0; i < block.size(); ++i) {
        s.label_counts.at(block.label(i)) += 1;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

ReferenceStats reference_stats(const std::vector<BlockStats>& blocks) {
  if (blocks.empty()) throw Error("reference_stats: no blocks");
  const size_t m = blocks.front().mean.size();
  ReferenceStats ref;
  std::vector<uint64_t> counts;
  counts.reserve(blocks.size());
  for (const BlockStats& b : blocks) {
    counts.push_back(b.records);
    ref.records += b.records;
  }
  ref.mean.resize(m);
  ref.stddev.resize(m);
  std::vector<double> means(blocks.size());
  std::vector<double> stddevs(blocks.size());
  for (size_t f = 0; f < m; ++f) {
    for (size_t i = 0; i < blocks.size(); ++i) {
      means[i] = blocks[i].mean[f];
      stddevs[i] = blocks[i].stddev[f];
    }
    ref.mean[f] = pooled_mean(counts, means);
    ref.stddev[f] = pooled_stddev(counts, means, stddevs);
  }
  if (!blocks.front().label_counts.empty()) {
    for (const auto& [code, n0] : blocks.front().label_counts) {
      uint64_t total = n0;
      for (size_t i = 1; i < blocks.size(); ++i) {
        total += blocks[i].label_counts.at(code);
      }
      ref.proportions[code] =
          static_cast<double>(total) / static_cast<double>(ref.records);
    }
  }
  return ref;
}

std::vector<EstimateCurve> run_estimate(const Manifest& manifest,
                                        const std::vector<BlockStats>& stats,
                                        SamplingLedger& ledger,
                                        uint32_t batch_size, bool weighted) {
  if (stats.size() != manifest.blocks.size()) {
    throw Error("run_estimate: block stats do not match manifest");
  }
  if (batch_size == 0) {
    throw Error("run_estimate: batch size must be positive");
  }
  // Draw blocks to exhaustion first; each curve is then a combination pass
  // over the same per-block sequence.
  std::vector<uint32_t> order;
  order.reserve(remaining(ledger));
  while (remaining(ledger) > 0) {
    const uint32_t take =
        std::min<uint32_t>(batch_size, remaining(ledger));
    const std::vector<uint32_t> ids = sample_blocks(ledger, take);
    order.insert(order.end(), ids.begin(), ids.end());
  }
  if (order.empty()) throw Error("run_estimate: ledger already exhausted");

  std::vector<const BlockStats*> by_id(stats.size() + 1, nullptr);
  for (const BlockStats& s : stats) by_id.at(s.block_id) = &s;
  std::vector<uint64_t> counts;
  counts.reserve(order.size());
  for (const uint32_t id : order) counts.push_back(by_id.at(id)->records);

  const ReferenceStats ref = reference_stats(stats);
  const size_t m = ref.mean.size();

  std::vector<EstimateCurve> curves;
  std::vector<double> values(order.size());
  const auto combined = [&]() {
    return weighted ? combine_estimates_weighted(values, counts, batch_size)
                    : combine_estimates(values, batch_size);
  };
  for (size_t f = 0; f < m; ++f) {
    for (size_t i = 0; i < order.size(); ++i) {
      values[i] = by_id.at(order[i])->mean[f];
    }
    EstimateCurve curve = combined();
    curve.statistic = Statistic::mean;
    curve.feature = manifest.schema.feature_names[f];
    curve.reference = ref.mean[f];
    curves.push_back(std::move(curve));

    for (size_t i = 0; i < order.size(); ++i) {
      values[i] = by_id.at(order[i])->stddev[f];
    }
    curve = combined();
    curve.statistic = Statistic::stddev;
    curve.feature = manifest.schema.feature_names[f];
    curve.reference = ref.stddev[f];
    curves.push_back(std::move(curve));
  }
  if (manifest.schema.has_label()) {
    for (const int32_t code : *manifest.schema.label_categories) {
      for (size_t i = 0; i < order.size(); ++i) {
        const BlockStats& s = *by_id.at(order[i]);
        values[i] = static_cast<double>(s.label_counts.at(code)) /
                    static_cast<double>(s.records);
      }
      EstimateCurve curve = combined();
      curve.statistic = Statistic::category_proportion;
      curve.feature = "label=" + std::to_string(code);
      curve.reference = ref.proportions.at(code);
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

}  // namespace rsp
