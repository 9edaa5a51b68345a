#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "rsp/block_store.hpp"
#include "rsp/sampler.hpp"
#include "rsp/stats.hpp"

namespace rsp {

// Summary statistics of one block, computed in a single pass over the
// dataset and reusable across estimation runs.
struct BlockStats {
  uint32_t block_id = 0;
  uint64_t records = 0;
  std::vector<double> mean;    // per feature
  std::vector<double> stddev;  // per feature, sample (n-1)
  std::map<int32_t, uint64_t> label_counts;
};

std::vector<BlockStats> per_block_stats(const Manifest& manifest);

// Full-data values the estimation curves converge to, combined exactly from
// the per-block summaries.
struct ReferenceStats {
  uint64_t records = 0;
  std::vector<double> mean;
  std::vector<double> stddev;  // pooled over all blocks
  std::map<int32_t, double> proportions;
};

ReferenceStats reference_stats(const std::vector<BlockStats>& blocks);

// One estimation pass: draws batches of `batch_size` blocks through the
// ledger until exhaustion and builds a curve per feature statistic (mean,
// stddev) and per label category (proportion). `weighted` switches the
// combination rule to record-count weighting.
std::vector<EstimateCurve> run_estimate(const Manifest& manifest,
                                        const std::vector<BlockStats>& stats,
                                        SamplingLedger& ledger,
                                        uint32_t batch_size, bool weighted);

}  // namespace rsp
