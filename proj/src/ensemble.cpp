#include "rsp/ensemble.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "rsp/error.hpp"
#include "rsp/parallel.hpp"

namespace rsp {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'P', 'E', 'N', 'S', '0', '1'};

size_t class_slot(const std::vector<int32_t>& codes, int32_t code) {
  const auto it = std::lower_bound(codes.begin(), codes.end(), code);
  if (it == codes.end() || *it != code) {
    throw Error("prediction outside the declared classes");
  }
  return static_cast<size_t>(it - codes.begin());
}

// Majority with ties to the lowest index (= smallest code, codes ascending).
size_t winning_slot(std::span<const uint32_t> votes) {
  size_t best = 0;
  for (size_t c = 1; c < votes.size(); ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return best;
}

}  // namespace

BaseModel train_base(const RecordBatch& block,
                     std::span<const int32_t> class_codes,
                     const LearnerConfig& config, uint32_t source_block_id) {
  BaseModel model;
  model.tree = DecisionTree::train(block, class_codes, config);
  model.source_block_id = source_block_id;
  model.train_accuracy = model.tree.accuracy(block);
  return model;
}

int32_t predict(const Ensemble& ensemble, std::span<const double> features) {
  if (ensemble.members.empty()) throw Error("predict on an empty ensemble");
  std::vector<uint32_t> votes(ensemble.class_codes.size(), 0);
  for (const BaseModel& member : ensemble.members) {
    votes[class_slot(ensemble.class_codes, member.tree.predict(features))]++;
  }
  return ensemble.class_codes[winning_slot(votes)];
}

double evaluate(const Ensemble& ensemble, const RecordBatch& test) {
  if (!test.labeled() || test.size() == 0) {
    throw Error("evaluate needs a non-empty labeled test set");
  }
  uint64_t correct = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    if (predict(ensemble, test.row(i)) == test.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

Ensemble run_asymptotic(const Manifest& manifest, SamplingLedger& ledger,
                        const LearnerConfig& config, uint32_t batch_size,
                        double threshold, const RecordBatch& test,
                        const RunOptions& options) {
  if (manifest.kind != DatasetKind::rsp) {
    throw Error("run_asymptotic needs an RSP dataset");
  }
  if (!manifest.schema.has_label()) {
    throw Error("run_asymptotic needs labeled data");
  }
  if (batch_size == 0) throw Error("batch size must be positive");
  if (!test.labeled() || test.size() == 0) {
    throw Error("run_asymptotic needs a non-empty labeled test set");
  }

  Ensemble ensemble;
  ensemble.batch_size = batch_size;
  ensemble.class_codes = *manifest.schema.label_categories;

  // Running vote counts per test record; each new member adds one vote per
  // record, so evaluating after a batch costs only the new members' trees.
  const size_t classes = ensemble.class_codes.size();
  std::vector<uint32_t> votes(test.size() * classes, 0);
  std::vector<size_t> truth(test.size());
  for (size_t i = 0; i < test.size(); ++i) {
    truth[i] = class_slot(ensemble.class_codes, test.label(i));
  }

  double previous = 0.0;  // the first batch's improvement is over nothing
  while (remaining(ledger) > 0) {
    const uint32_t take = std::min(batch_size, remaining(ledger));
    const std::vector<uint32_t> ids = sample_blocks(ledger, take);
    std::vector<BaseModel> batch(ids.size());
    parallel_for(ids.size(), options.workers, [&](size_t q) {
      const RecordBatch block = read_block(manifest, ids[q]);
      batch[q] = train_base(block, ensemble.class_codes, config, ids[q]);
    });
    for (BaseModel& model : batch) {
      const DecisionTree& tree = model.tree;
      for (size_t i = 0; i < test.size(); ++i) {
        votes[i * classes +
              class_slot(ensemble.class_codes, tree.predict(test.row(i)))]++;
      }
      ensemble.members.push_back(std::move(model));
    }
    uint64_t correct = 0;
    for (size_t i = 0; i < test.size(); ++i) {
      if (winning_slot({votes.data() + i * classes, classes}) == truth[i]) {
        ++correct;
      }
    }
    const double accuracy =
        static_cast<double>(correct) / static_cast<double>(test.size());
    ensemble.trajectory.push_back(accuracy);
    ensemble.blocks_used.push_back(ensemble.members.size());
    ensemble.batches_completed += 1;

    const double improvement = accuracy - previous;
    previous = accuracy;
    if (improvement < threshold) break;
  }
  if (ensemble.members.empty()) {
    throw Error("run_asymptotic: ledger already exhausted");
  }
  return ensemble;
}

namespace {

void put_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

void put_u64(std::ofstream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}

void put_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}

template <typename T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error("truncated ensemble file");
  return v;
}

}  // namespace

void save_ensemble(const Ensemble& ensemble,
                   const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write ensemble: " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, ensemble.batch_size);
    put_u32(out, ensemble.batches_completed);
    put_u32(out, static_cast<uint32_t>(ensemble.class_codes.size()));
    for (const int32_t code : ensemble.class_codes) {
      put_u32(out, static_cast<uint32_t>(code));
    }
    put_u32(out, static_cast<uint32_t>(ensemble.trajectory.size()));
    for (const double a : ensemble.trajectory) put_f64(out, a);
    for (const uint64_t b : ensemble.blocks_used) put_u64(out, b);
    put_u32(out, static_cast<uint32_t>(ensemble.members.size()));
    for (const BaseModel& member : ensemble.members) {
      put_u32(out, member.source_block_id);
      put_f64(out, member.train_accuracy);
      const std::vector<std::byte> payload = member.tree.serialize();
      put_u32(out, static_cast<uint32_t>(payload.size()));
      out.write(reinterpret_cast<const char*>(payload.data()),
                static_cast<std::streamsize>(payload.size()));
    }
    if (!out.good()) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Ensemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open ensemble: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error("not an ensemble file: " + path.string());
  }
  Ensemble ensemble;
  ensemble.batch_size = get<uint32_t>(in);
  ensemble.batches_completed = get<uint32_t>(in);
  const uint32_t classes = get<uint32_t>(in);
  for (uint32_t i = 0; i < classes; ++i) {
    ensemble.class_codes.push_back(static_cast<int32_t>(get<uint32_t>(in)));
  }
  const uint32_t batches = get<uint32_t>(in);
  for (uint32_t i = 0; i < batches; ++i) {
    ensemble.trajectory.push_back(get<double>(in));
  }
  for (uint32_t i = 0; i < batches; ++i) {
    ensemble.blocks_used.push_back(get<uint64_t>(in));
  }
  const uint32_t members = get<uint32_t>(in);
  for (uint32_t i = 0; i < members; ++i) {
    BaseModel member;
    member.source_block_id = get<uint32_t>(in);
    member.train_accuracy = get<double>(in);
    const uint32_t size = get<uint32_t>(in);
    std::vector<std::byte> payload(size);
    in.read(reinterpret_cast<char*>(payload.data()), size);
    if (!in) throw Error("truncated ensemble file");
    member.tree = DecisionTree::deserialize(payload);
    ensemble.members.push_back(std::move(member));
  }
  return ensemble;
}

}  // namespace rsp
