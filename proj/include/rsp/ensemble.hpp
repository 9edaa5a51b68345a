#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rsp/block_store.hpp"
#include "rsp/decision_tree.hpp"
#include "rsp/sampler.hpp"

namespace rsp {

struct BaseModel {
  DecisionTree tree;
  uint32_t source_block_id = 0;
  double train_accuracy = 0.0;

  bool operator==(const BaseModel&) const = default;
};

// Additive majority-vote ensemble plus the accuracy trajectory recorded
// after each training batch.
struct Ensemble {
  std::vector<BaseModel> members;
  std::vector<double> trajectory;     // test accuracy after each batch
  std::vector<uint64_t> blocks_used;  // cumulative blocks after each batch
  uint32_t batches_completed = 0;
  uint32_t batch_size = 0;
  std::vector<int32_t> class_codes;

  bool operator==(const Ensemble&) const = default;
};

BaseModel train_base(const RecordBatch& block,
                     std::span<const int32_t> class_codes,
                     const LearnerConfig& config, uint32_t source_block_id);

// Majority vote over members; ties resolve to the smallest class code.
int32_t predict(const Ensemble& ensemble, std::span<const double> features);

double evaluate(const Ensemble& ensemble, const RecordBatch& test);

struct RunOptions {
  uint32_t workers = 1;
};

// Batchwise ensemble growth: sample batch_size unseen blocks, train one
// base model per block (in parallel), add them, evaluate on the test set,
// and stop once the per-batch accuracy improvement falls below `threshold`
// or the ledger runs out of blocks. The final batch may be short.
Ensemble run_asymptotic(const Manifest& manifest, SamplingLedger& ledger,
                        const LearnerConfig& config, uint32_t batch_size,
                        double threshold, const RecordBatch& test,
                        const RunOptions& options = {});

void save_ensemble(const Ensemble& ensemble,
                   const std::filesystem::path& path);
Ensemble load_ensemble(const std::filesystem::path& path);

}  // namespace rsp
