#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rsp {

// Label code meaning "no label"; matches the on-disk sentinel 0xFFFFFFFF.
inline constexpr int32_t kNoLabel = -1;

// Fixed record layout of a dataset: M named numeric features plus an
// optional categorical label with a declared code set.
struct Schema {
  std::vector<std::string> feature_names;
  std::optional<std::vector<int32_t>> label_categories;  // sorted, distinct

  size_t feature_count() const { return feature_names.size(); }
  bool has_label() const { return label_categories.has_value(); }
  bool label_declared(int32_t code) const;

  // Bytes per stored record: M * 8 feature bytes + 4 label bytes.
  size_t record_bytes() const { return feature_count() * 8 + 4; }

  // Throws rsp::Error on duplicate/empty names, empty schema, or label
  // codes that are negative or duplicated.
  void validate() const;

  bool operator==(const Schema&) const = default;
};

struct Record {
  std::vector<double> features;
  std::optional<int32_t> label;
};

// A contiguous batch of fixed-schema records: row-major feature storage with
// a parallel label array when the schema is labeled.
class RecordBatch {
 public:
  RecordBatch() = default;
  RecordBatch(size_t feature_count, bool labeled)
      : feature_count_(feature_count), labeled_(labeled) {}

  size_t size() const {
    return feature_count_ == 0 ? 0 : features_.size() / feature_count_;
  }
  size_t feature_count() const { return feature_count_; }
  bool labeled() const { return labeled_; }

  std::span<const double> row(size_t i) const {
    return {features_.data() + i * feature_count_, feature_count_};
  }
  int32_t label(size_t i) const { return labeled_ ? labels_[i] : kNoLabel; }

  void reserve(size_t records) {
    features_.reserve(records * feature_count_);
    if (labeled_) labels_.reserve(records);
  }

  void append(std::span<const double> features, int32_t label = kNoLabel);
  void append_record(const Record& r);
  void append_rows(const RecordBatch& other, size_t begin, size_t end);

  Record record(size_t i) const;

  // Column i gathered into a fresh vector.
  std::vector<double> feature_column(size_t feature) const;

  const std::vector<double>& features() const { return features_; }
  const std::vector<int32_t>& labels() const { return labels_; }
  std::vector<double>& mutable_features() { return features_; }
  std::vector<int32_t>& mutable_labels() { return labels_; }

  // Reorders rows so that new row i is old row perm[i].
  RecordBatch reordered(std::span<const uint32_t> perm) const;

  bool operator==(const RecordBatch&) const = default;

 private:
  size_t feature_count_ = 0;
  bool labeled_ = false;
  std::vector<double> features_;
  std::vector<int32_t> labels_;
};

}  // namespace rsp
