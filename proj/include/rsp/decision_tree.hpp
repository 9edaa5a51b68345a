#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsp/record.hpp"

namespace rsp {

// Base learner settings. Only decision trees are implemented; the seed is
// carried for learners that would need one (tree training is deterministic).
struct LearnerConfig {
  uint32_t max_depth = 8;
  uint32_t min_leaf = 1;
  uint64_t seed = 0;
};

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  uint32_t left = 0;
  uint32_t right = 0;
  std::vector<uint64_t> class_counts;  // training distribution, by class index

  bool operator==(const TreeNode&) const = default;
};

// Greedy binary classification tree splitting on Gini impurity decrease.
// Records with feature < threshold go left. Exact search: every boundary
// between distinct sorted feature values is scored.
class DecisionTree {
 public:
  static DecisionTree train(const RecordBatch& data,
                            std::span<const int32_t> class_codes,
                            const LearnerConfig& config);

  int32_t predict(std::span<const double> features) const;
  double accuracy(const RecordBatch& test) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<int32_t>& class_codes() const { return class_codes_; }
  uint32_t depth() const;

  std::vector<std::byte> serialize() const;
  static DecisionTree deserialize(std::span<const std::byte> bytes);

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<int32_t> class_codes_;  // ascending; ties resolve to smallest
};

}  // namespace rsp
