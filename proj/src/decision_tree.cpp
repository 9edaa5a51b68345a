#include "rsp/decision_tree.hpp"

#include <algorithm>
#include <cstring>
#include <limits>

#include "rsp/error.hpp"

namespace rsp {

namespace {

struct Split {
  // An impure node splits on any valid boundary, even a zero-gain one --
  // XOR-style targets have no single split that reduces impurity, yet the
  // children still become separable.
  bool found = false;
  double gain = -std::numeric_limits<double>::infinity();
  size_t feature = 0;
  double threshold = 0.0;
};

// Gini decrease scored through the sum-of-squares identity: maximizing
// sum(l_c^2)/s + sum(r_c^2)/(n-s) maximizes the impurity decrease.
class Builder {
 public:
  Builder(const RecordBatch& data, size_t class_count,
          const std::vector<uint32_t>& class_index, const LearnerConfig& cfg)
      : data_(data),
        class_count_(class_count),
        class_index_(class_index),
        cfg_(cfg) {}

  uint32_t build(std::vector<uint32_t>& rows, size_t begin, size_t end,
                 uint32_t depth, std::vector<TreeNode>& nodes) {
    const uint32_t index = static_cast<uint32_t>(nodes.size());
    nodes.emplace_back();
    std::vector<uint64_t> counts(class_count_, 0);
    for (size_t i = begin; i < end; ++i) {
      counts[class_index_[rows[i]]] += 1;
    }
    nodes[index].class_counts = counts;

    const size_t n = end - begin;
    const size_t present =
        class_count_ - static_cast<size_t>(std::count(
                           counts.begin(), counts.end(), uint64_t{0}));
    if (present < 2 || depth >= cfg_.max_depth || n < 2 * cfg_.min_leaf) {
      return index;
    }
    const Split split = best_split(rows, begin, end, counts);
    if (!split.found) return index;

    const auto mid_it = std::stable_partition(
        rows.begin() + static_cast<ptrdiff_t>(begin),
        rows.begin() + static_cast<ptrdiff_t>(end), [&](uint32_t r) {
          return data_.row(r)[split.feature] < split.threshold;
        });
    const size_t mid = static_cast<size_t>(mid_it - rows.begin());

    nodes[index].feature = static_cast<int32_t>(split.feature);
    nodes[index].threshold = split.threshold;
    const uint32_t left = build(rows, begin, mid, depth + 1, nodes);
    const uint32_t right = build(rows, mid, end, depth + 1, nodes);
    nodes[index].left = left;
    nodes[index].right = right;
    return index;
  }

 private:
  Split best_split(const std::vector<uint32_t>& rows, size_t begin,
                   size_t end, const std::vector<uint64_t>& counts) {
    const size_t n = end - begin;
    double parent_sq = 0.0;
    for (const uint64_t c : counts) {
      parent_sq += static_cast<double>(c) * static_cast<double>(c);
    }
    const double parent_score = parent_sq / static_cast<double>(n);

    Split best;
    std::vector<std::pair<double, uint32_t>> order(n);
    std::vector<uint64_t> left(class_count_);
    for (size_t f = 0; f < data_.feature_count(); ++f) {
      for (size_t i = 0; i < n; ++i) {
        const uint32_t r = rows[begin + i];
        order[i] = {data_.row(r)[f], class_index_[r]};
      }
      std::sort(order.begin(), order.end());
      std::fill(left.begin(), left.end(), 0);
      double left_sq = 0.0;
      for (size_t s = 1; s < n; ++s) {
        const auto& [value, cls] = order[s - 1];
        const double c = static_cast<double>(left[cls]);
        left_sq += 2.0 * c + 1.0;  // (c+1)^2 - c^2
        left[cls] += 1;
        if (order[s].first == value) continue;  // not a boundary
        if (s < cfg_.min_leaf || n - s < cfg_.min_leaf) continue;
        double right_sq = 0.0;
        for (size_t k = 0; k < class_count_; ++k) {
          const double rc = static_cast<double>(counts[k] - left[k]);
          right_sq += rc * rc;
        }
        const double score = left_sq / static_cast<double>(s) +
                             right_sq / static_cast<double>(n - s);
        const double gain = (score - parent_score) / static_cast<double>(n);
        if (gain > best.gain) {
          double threshold = value + (order[s].first - value) / 2.0;
          if (!(threshold > value)) threshold = order[s].first;
          best = {true, gain, f, threshold};
        }
      }
    }
    return best;
  }

  const RecordBatch& data_;
  size_t class_count_;
  const std::vector<uint32_t>& class_index_;
  LearnerConfig cfg_;
};

void append_u32(std::vector<std::byte>& out, uint32_t v) {
  const size_t at = out.size();
  out.resize(at + 4);
  std::memcpy(out.data() + at, &v, 4);
}

void append_u64(std::vector<std::byte>& out, uint64_t v) {
  const size_t at = out.size();
  out.resize(at + 8);
  std::memcpy(out.data() + at, &v, 8);
}

void append_f64(std::vector<std::byte>& out, double v) {
  const size_t at = out.size();
  out.resize(at + 8);
  std::memcpy(out.data() + at, &v, 8);
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  uint32_t u32() { return read<uint32_t>(); }
  uint64_t u64() { return read<uint64_t>(); }
  double f64() { return read<double>(); }
  int32_t i32() { return static_cast<int32_t>(read<uint32_t>()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  template <typename T>
  T read() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw Error("truncated tree payload");
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::byte> bytes_;
  size_t pos_ = 0;
};

}  // namespace

DecisionTree DecisionTree::train(const RecordBatch& data,
                                 std::span<const int32_t> class_codes,
                                 const LearnerConfig& config) {
  if (!data.labeled()) throw Error("decision tree needs labeled data");
  if (data.size() == 0) throw Error("decision tree needs records");
  if (class_codes.empty()) throw Error("decision tree needs classes");
  if (config.max_depth < 1 || config.min_leaf < 1) {
    throw Error("max_depth and min_leaf must be at least 1");
  }
  DecisionTree tree;
  tree.class_codes_.assign(class_codes.begin(), class_codes.end());
  if (!std::is_sorted(tree.class_codes_.begin(), tree.class_codes_.end())) {
    throw Error("class codes must be ascending");
  }

  std::vector<uint32_t> class_index(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    const auto it = std::lower_bound(tree.class_codes_.begin(),
                                     tree.class_codes_.end(), data.label(i));
    if (it == tree.class_codes_.end() || *it != data.label(i)) {
      throw Error("record " + std::to_string(i) + " has undeclared class " +
                  std::to_string(data.label(i)));
    }
    class_index[i] =
        static_cast<uint32_t>(it - tree.class_codes_.begin());
  }

  std::vector<uint32_t> rows(data.size());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<uint32_t>(i);
  Builder builder(data, tree.class_codes_.size(), class_index, config);
  builder.build(rows, 0, rows.size(), 0, tree.nodes_);
  return tree;
}

int32_t DecisionTree::predict(std::span<const double> features) const {
  if (nodes_.empty()) throw Error("predict on an untrained tree");
  uint32_t at = 0;
  while (nodes_[at].feature >= 0) {
    const TreeNode& node = nodes_[at];
    at = features[static_cast<size_t>(node.feature)] < node.threshold
             ? node.left
             : node.right;
  }
  const auto& counts = nodes_[at].class_counts;
  size_t best = 0;
  for (size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;  // ties keep the smaller code
  }
  return class_codes_[best];
}

double DecisionTree::accuracy(const RecordBatch& test) const {
  if (!test.labeled() || test.size() == 0) {
    throw Error("accuracy needs a non-empty labeled test set");
  }
  uint64_t correct = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    if (predict(test.row(i)) == test.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

uint32_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  // Iterative depth over the implicit tree.
  std::vector<std::pair<uint32_t, uint32_t>> stack{{0, 1}};
  uint32_t deepest = 0;
  while (!stack.empty()) {
    const auto [at, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[at].feature >= 0) {
      stack.push_back({nodes_[at].left, d + 1});
      stack.push_back({nodes_[at].right, d + 1});
    }
  }
  return deepest - 1;  // edges, not nodes
}

std::vector<std::byte> DecisionTree::serialize() const {
  std::vector<std::byte> out;
  append_u32(out, static_cast<uint32_t>(class_codes_.size()));
  for (const int32_t code : class_codes_) {
    append_u32(out, static_cast<uint32_t>(code));
  }
  append_u32(out, static_cast<uint32_t>(nodes_.size()));
  for (const TreeNode& node : nodes_) {
    append_u32(out, static_cast<uint32_t>(node.feature));
    append_f64(out, node.threshold);
    append_u32(out, node.left);
    append_u32(out, node.right);
    append_u32(out, static_cast<uint32_t>(node.class_counts.size()));
    for (const uint64_t c : node.class_counts) append_u64(out, c);
  }
  return out;
}

DecisionTree DecisionTree::deserialize(std::span<const std::byte> bytes) {
  ByteReader in(bytes);
  DecisionTree tree;
  const uint32_t codes = in.u32();
  tree.class_codes_.reserve(codes);
  for (uint32_t i = 0; i < codes; ++i) tree.class_codes_.push_back(in.i32());
  const uint32_t count = in.u32();
  tree.nodes_.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    TreeNode node;
    node.feature = in.i32();
    node.threshold = in.f64();
    node.left = in.u32();
    node.right = in.u32();
    const uint32_t k = in.u32();
    node.class_counts.reserve(k);
    for (uint32_t c = 0; c < k; ++c) node.class_counts.push_back(in.u64());
    tree.nodes_.push_back(std::move(node));
  }
  if (tree.nodes_.empty()) throw Error("empty tree payload");
  return tree;
}

}  // namespace rsp
