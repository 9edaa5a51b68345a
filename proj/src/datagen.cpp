#include "rsp/datagen.hpp"

#include <algorithm>
#include <numeric>

#include "rsp/error.hpp"
#include "rsp/prng.hpp"

namespace rsp {

GenModel parse_gen_model(const std::string& name) {
  if (name == "gaussian_mixture") return GenModel::gaussian_mixture;
  if (name == "uniform") return GenModel::uniform;
  if (name == "sorted_adversarial") return GenModel::sorted_adversarial;
  throw Error("unknown generator model: " + name);
}

std::string gen_model_name(GenModel model) {
  switch (model) {
    case GenModel::gaussian_mixture:
      return "gaussian_mixture";
    case GenModel::uniform:
      return "uniform";
    case GenModel::sorted_adversarial:
      return "sorted_adversarial";
  }
  throw Error("unknown generator model");
}

Schema make_gen_schema(size_t features, uint32_t classes) {
  Schema schema;
  schema.feature_names.reserve(features);
  for (size_t f = 1; f <= features; ++f) {
    schema.feature_names.push_back("f" + std::to_string(f));
  }
  if (classes > 0) {
    std::vector<int32_t> codes(classes);
    std::iota(codes.begin(), codes.end(), 0);
    schema.label_categories = std::move(codes);
  }
  return schema;
}

namespace {

// Class c is a unit gaussian shifted by 1.5 along feature (c mod M).
class MixtureSource : public RecordSource {
 public:
  MixtureSource(uint64_t records, size_t features, uint32_t classes,
                uint64_t seed)
      : remaining_(records),
        features_(features),
        classes_(classes),
        gen_(seed) {}

  bool next(Record& out) override {
    if (remaining_ == 0) return false;
    --remaining_;
    const auto label = static_cast<int32_t>(gen_.bounded(classes_));
    out.features.resize(features_);
    for (size_t f = 0; f < features_; ++f) {
      out.features[f] = gen_.next_gaussian();
    }
    out.features[static_cast<size_t>(label) % features_] += 1.5;
    out.label = label;
    return true;
  }

 private:
  uint64_t remaining_;
  size_t features_;
  uint32_t classes_;
  Philox gen_;
};

class UniformSource : public RecordSource {
 public:
  UniformSource(uint64_t records, size_t features, uint64_t seed)
      : remaining_(records), features_(features), gen_(seed) {}

  bool next(Record& out) override {
    if (remaining_ == 0) return false;
    --remaining_;
    out.features.resize(features_);
    for (size_t f = 0; f < features_; ++f) {
      out.features[f] = gen_.next_double();
    }
    out.label.reset();
    return true;
  }

 private:
  uint64_t remaining_;
  size_t features_;
  Philox gen_;
};

// Exactly balanced contiguous class labels, feature 1 shifted by 3 per
// class, records sorted by (label, feature 1). Materialized: sorting needs
// the whole dataset, so this generator is for desk-scale inputs.
class AdversarialSource : public RecordSource {
 public:
  AdversarialSource(uint64_t records, size_t features, uint32_t classes,
                    uint64_t seed)
      : batch_(features, true) {
    batch_.reserve(records);
    Philox gen(seed);
    std::vector<double> row(features);
    for (uint64_t i = 0; i < records; ++i) {
      const auto label = static_cast<int32_t>(i * classes / records);
      for (size_t f = 0; f < features; ++f) row[f] = gen.next_gaussian();
      row[0] += 3.0 * label;
      batch_.append(row, label);
    }
    std::vector<uint32_t> perm(records);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](uint32_t a, uint32_t b) {
      if (batch_.label(a) != batch_.label(b)) {
        return batch_.label(a) < batch_.label(b);
      }
      return batch_.row(a)[0] < batch_.row(b)[0];
    });
    batch_ = batch_.reordered(perm);
  }

  bool next(Record& out) override {
    if (pos_ == batch_.size()) return false;
    out = batch_.record(pos_++);
    return true;
  }

 private:
  RecordBatch batch_;
  size_t pos_ = 0;
};

}  // namespace

Manifest generate_dataset(const std::filesystem::path& dir, uint64_t records,
                          size_t features, uint32_t classes, GenModel model,
                          uint64_t seed, uint64_t block_records) {
  if (records == 0) throw Error("generate_dataset: need at least one record");
  if (features == 0) throw Error("generate_dataset: need at least one feature");
  if (model != GenModel::uniform && classes == 0) {
    throw Error("generate_dataset: labeled models need at least one class");
  }
  const Schema schema =
      make_gen_schema(features, model == GenModel::uniform ? 0 : classes);
  Manifest manifest;
  switch (model) {
    case GenModel::gaussian_mixture: {
      MixtureSource source(records, features, classes, seed);
      manifest = create_dataset(dir, schema, source, block_records);
      break;
    }
    case GenModel::uniform: {
      UniformSource source(records, features, seed);
      manifest = create_dataset(dir, schema, source, block_records);
      break;
    }
    case GenModel::sorted_adversarial: {
      AdversarialSource source(records, features, classes, seed);
      manifest = create_dataset(dir, schema, source, block_records);
      break;
    }
  }
  manifest.params.seed = seed;
  write_manifest(manifest);
  return manifest;
}

}  // namespace rsp
