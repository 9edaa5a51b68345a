#include "rsp/record.hpp"

#include <algorithm>
#include <unordered_set>

#include "rsp/error.hpp"

namespace rsp {

bool Schema::label_declared(int32_t code) const {
  if (!label_categories) return false;
  return std::binary_search(label_categories->begin(), label_categories->end(),
                            code);
}

void Schema::validate() const {
  if (feature_names.empty()) throw Error("schema: feature_count must be >= 1");
  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names) {
    if (name.empty()) throw Error("schema: empty feature name");
    if (name.find_first_of(", \t\n") != std::string::npos) {
      throw Error("schema: feature name '" + name + "' contains a separator");
    }
    if (!seen.insert(name).second) {
      throw Error("schema: duplicate feature name '" + name + "'");
    }
  }
  if (label_categories) {
    if (label_categories->empty()) {
      throw Error("schema: labeled schema needs at least one category");
    }
    if (!std::is_sorted(label_categories->begin(), label_categories->end())) {
      throw Error("schema: label categories must be sorted");
    }
    for (size_t i = 0; i < label_categories->size(); ++i) {
      if ((*label_categories)[i] < 0) {
        throw Error("schema: label codes must be non-negative");
      }
      if (i > 0 && (*label_categories)[i] == (*label_categories)[i - 1]) {
        throw Error("schema: duplicate label category");
      }
    }
  }
}

void RecordBatch::append(std::span<const double> features, int32_t label) {
  features_.insert(features_.end(), features.begin(), features.end());
  if (labeled_) labels_.push_back(label);
}

void RecordBatch::append_record(const Record& r) {
  append(r.features, r.label.value_or(kNoLabel));
}

void RecordBatch::append_rows(const RecordBatch& other, size_t begin,
                              size_t end) {
  features_.insert(features_.end(),
                   other.features_.begin() + begin * feature_count_,
                   other.features_.begin() + end * feature_count_);
  if (labeled_) {
    labels_.insert(labels_.end(), other.labels_.begin() + begin,
                   other.labels_.begin() + end);
  }
}

Record RecordBatch::record(size_t i) const {
  Record r;
  const auto f = row(i);
  r.features.assign(f.begin(), f.end());
  if (labeled_) r.label = labels_[i];
  return r;
}

std::vector<double> RecordBatch::feature_column(size_t feature) const {
  std::vector<double> out(size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = features_[i * feature_count_ + feature];
  }
  return out;
}

RecordBatch RecordBatch::reordered(std::span<const uint32_t> perm) const {
  RecordBatch out(feature_count_, labeled_);
  out.reserve(perm.size());
  for (const uint32_t src : perm) {
    out.features_.insert(out.features_.end(),
                         features_.begin() + src * feature_count_,
                         features_.begin() + (src + 1) * feature_count_);
    if (labeled_) out.labels_.push_back(labels_[src]);
  }
  return out;
}

}  // namespace rsp
