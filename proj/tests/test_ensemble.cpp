#include <doctest.h>

#include <cmath>
#include <vector>

#include "rsp/datagen.hpp"
#include "rsp/ensemble.hpp"
#include "rsp/error.hpp"
#include "rsp/partitioner.hpp"
#include "rsp/prng.hpp"

#include "util.hpp"

using namespace rsp;
using testutil::TempDir;

namespace {

const std::vector<int32_t> kTwoClasses{0, 1};

// A tree that always predicts `label`: trained on a single-class batch.
BaseModel constant_model(int32_t label, uint32_t block_id = 1) {
  RecordBatch b(1, true);
  const double x = 0.0;
  b.append({&x, 1}, label);
  b.append({&x, 1}, label);
  return train_base(b, kTwoClasses, {}, block_id);
}

Ensemble ensemble_of(const std::vector<BaseModel>& members) {
  Ensemble e;
  e.members = members;
  e.class_codes = kTwoClasses;
  e.batch_size = 1;
  e.batches_completed = static_cast<uint32_t>(members.size());
  return e;
}

// member m splits on feature m alone; the other features carry no signal.
BaseModel indicator_model(size_t feature, size_t feature_count) {
  RecordBatch b(feature_count, true);
  std::vector<double> row(feature_count, 0.0);
  for (const double v : {0.0, 0.0, 1.0, 1.0}) {
    row[feature] = v;
    b.append(row, v > 0.5 ? 1 : 0);
  }
  return train_base(b, kTwoClasses, {}, static_cast<uint32_t>(feature + 1));
}

struct RspFixture {
  TempDir src{"ens_src"};
  TempDir out{"ens_out"};
  TempDir test_dir{"ens_test"};
  Manifest rsp;
  RecordBatch test;

  RspFixture() {
    const Manifest source = generate_dataset(
        src.path(), 4000, 2, 2, GenModel::gaussian_mixture, 101, 200);
    PartitionParams params;
    params.rsp_blocks = 20;
    params.master_seed = 102;
    rsp = two_stage_partition(source, params, out.path());
    const Manifest holdout = generate_dataset(
        test_dir.path(), 1000, 2, 2, GenModel::gaussian_mixture, 103, 1000);
    test = read_all(holdout);
  }
};

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("majority vote with documented tie-break") {
  const Ensemble two_one = ensemble_of(
      {constant_model(0), constant_model(0), constant_model(1)});
  const double x = 7.0;
  CHECK(predict(two_one, {&x, 1}) == 0);

  const Ensemble single = ensemble_of({constant_model(1)});
  CHECK(predict(single, {&x, 1}) == 1);

  const Ensemble tied = ensemble_of({constant_model(0), constant_model(1)});
  CHECK(predict(tied, {&x, 1}) == 0);  // smallest code wins ties

  const Ensemble empty;
  CHECK_THROWS_AS((void)predict(empty, {&x, 1}), Error);
}

TEST_CASE("evaluate extremes") {
  RecordBatch test(1, true);
  const double x = 0.0;
  for (int i = 0; i < 10; ++i) test.append({&x, 1}, 1);
  const Ensemble right = ensemble_of({constant_model(1)});
  CHECK(evaluate(right, test) == 1.0);
  const Ensemble wrong = ensemble_of({constant_model(0)});
  CHECK(evaluate(wrong, test) == 0.0);

  // predictions independent of the labels, balanced labels -> ~0.5
  RecordBatch balanced(1, true);
  Philox gen(55);
  for (int i = 0; i < 2000; ++i) {
    balanced.append({&x, 1}, static_cast<int32_t>(gen.bounded(2)));
  }
  CHECK(std::abs(evaluate(right, balanced) - 0.5) < 0.05);

  CHECK_THROWS_AS((void)evaluate(right, RecordBatch(1, true)), Error);
}

TEST_CASE("three independent 0.8-accurate voters combine to exactly 0.896") {
  // Test records indexed by three digits in 0..4; member m errs exactly
  // when digit m is 4, so each member is 112/140... rather 100/125 = 0.8
  // accurate and errors are combinatorially independent. Majority voting
  // is wrong only when two or more digits are 4: 1 - 13/125 = 0.896,
  // the analytic 3p^2(1-p) + p^3 at p = 0.8.
  const Ensemble voters = ensemble_of(
      {indicator_model(0, 3), indicator_model(1, 3), indicator_model(2, 3)});
  RecordBatch test(3, true);
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      for (int c = 0; c < 5; ++c) {
        const double row[3] = {a == 4 ? 1.0 : 0.0, b == 4 ? 1.0 : 0.0,
                               c == 4 ? 1.0 : 0.0};
        test.append(row, 0);
      }
    }
  }
  for (const BaseModel& m : voters.members) {
    CHECK(m.tree.accuracy(test) == 100.0 / 125.0);
  }
  CHECK(evaluate(voters, test) == 112.0 / 125.0);
}

TEST_CASE("run_asymptotic") {
  const RspFixture fx;
  LearnerConfig config;
  config.max_depth = 6;

  SUBCASE("threshold 1.0 stops after the first batch") {
    SamplingLedger ledger = make_ledger(fx.rsp, "e", 7);
    const Ensemble e = run_asymptotic(fx.rsp, ledger, config, 5, 1.0, fx.test);
    CHECK(e.batches_completed == 1);
    CHECK(e.members.size() == 5);
    CHECK(e.trajectory.size() == 1);
    CHECK(e.blocks_used == std::vector<uint64_t>{5});
    CHECK(remaining(ledger) == 15);
  }

  SUBCASE("threshold -1 runs to exhaustion with a short final batch") {
    SamplingLedger ledger = make_ledger(fx.rsp, "e", 7);
    const Ensemble e = run_asymptotic(fx.rsp, ledger, config, 6, -1.0, fx.test);
    CHECK(e.batches_completed == 4);  // ceil(20 / 6)
    CHECK(e.members.size() == 20);
    CHECK(e.blocks_used == std::vector<uint64_t>{6, 12, 18, 20});
    CHECK(remaining(ledger) == 0);
    // every block trained exactly one member
    std::vector<bool> seen(21, false);
    for (const BaseModel& m : e.members) {
      CHECK(!seen[m.source_block_id]);
      seen[m.source_block_id] = true;
    }
    // the recorded trajectory ends at the ensemble's actual test accuracy
    CHECK(e.trajectory.back() == evaluate(e, fx.test));
    // mixture data is learnable: far better than chance
    CHECK(e.trajectory.back() > 0.7);
  }

  SUBCASE("deterministic and worker-count independent") {
    SamplingLedger first = make_ledger(fx.rsp, "e", 9);
    SamplingLedger second = make_ledger(fx.rsp, "e", 9);
    RunOptions serial, parallel;
    serial.workers = 1;
    parallel.workers = 2;
    const Ensemble a =
        run_asymptotic(fx.rsp, first, config, 4, -1.0, fx.test, serial);
    const Ensemble b =
        run_asymptotic(fx.rsp, second, config, 4, -1.0, fx.test, parallel);
    CHECK(a == b);
  }

  SUBCASE("save/load round-trip") {
    SamplingLedger ledger = make_ledger(fx.rsp, "e", 11);
    const Ensemble e = run_asymptotic(fx.rsp, ledger, config, 5, 0.005,
                                      fx.test);
    const auto path = fx.out / "model.bin";
    save_ensemble(e, path);
    const Ensemble back = load_ensemble(path);
    CHECK(back == e);
    CHECK(evaluate(back, fx.test) == evaluate(e, fx.test));

    auto bytes = read_file(path);
    bytes[0] = std::byte{'X'};  // break the magic
    write_file(path, bytes);
    CHECK_THROWS_AS((void)load_ensemble(path), Error);
  }

  SUBCASE("argument validation") {
    SamplingLedger ledger = make_ledger(fx.rsp, "e", 1);
    CHECK_THROWS_AS(
        (void)run_asymptotic(fx.rsp, ledger, config, 0, -1.0, fx.test), Error);
    RecordBatch unlabeled(2, false);
    const double row[2] = {0, 0};
    unlabeled.append(row);
    CHECK_THROWS_AS(
        (void)run_asymptotic(fx.rsp, ledger, config, 5, -1.0, unlabeled),
        Error);
  }
}

TEST_CASE("run_asymptotic rejects non-RSP datasets") {
  TempDir dir("ens_orig");
  const Manifest original = generate_dataset(dir.path(), 400, 2, 2,
                                             GenModel::gaussian_mixture, 1,
                                             100);
  SamplingLedger ledger = make_ledger(original, "e", 1);
  RecordBatch test(2, true);
  const double row[2] = {0, 0};
  test.append(row, 0);
  CHECK_THROWS_AS(
      (void)run_asymptotic(original, ledger, {}, 2, -1.0, test), Error);
}

}  // TEST_SUITE
