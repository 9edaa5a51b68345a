// rsp — random sample partition toolkit.
//
// Subcommands cover the full workflow: synthesize a dataset (gen), convert
// it into statistically equivalent blocks (partition), check the blocks
// against the full data (verify), draw blocks without replacement (sample),
// estimate statistics from sampled blocks (estimate), grow a batch-trained
// ensemble (ensemble), and measure partition scaling (bench).

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsp/block_store.hpp"
#include "rsp/datagen.hpp"
#include "rsp/ensemble.hpp"
#include "rsp/error.hpp"
#include "rsp/estimation.hpp"
#include "rsp/kernels.hpp"
#include "rsp/parallel.hpp"
#include "rsp/partitioner.hpp"
#include "rsp/prng.hpp"
#include "rsp/sampler.hpp"
#include "rsp/stats.hpp"

namespace fs = std::filesystem;
using namespace rsp;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- gen ----

struct GenArgs {
  std::string out;
  uint64_t records = 0;
  uint64_t features = 10;
  uint32_t classes = 2;
  std::string model = "gaussian_mixture";
  uint64_t seed = 1;
  uint64_t block_records = 100000;
};

int run_gen(const GenArgs& args) {
  const Manifest manifest = generate_dataset(
      args.out, args.records, args.features, args.classes,
      parse_gen_model(args.model), args.seed, args.block_records);
  std::cout << "wrote " << manifest.total_records << " records in "
            << manifest.blocks.size() << " blocks to " << args.out << "\n";
  return 0;
}

// ----------------------------------------------------------- partition ----

struct PartitionArgs {
  std::string in;
  std::string out;
  uint64_t orig_blocks = 0;
  uint64_t rsp_blocks = 0;
  uint64_t slice = 0;
  uint64_t block_records = 0;
  uint64_t seed = 1;
  unsigned workers = 0;
  bool keep_intermediate = false;
  std::string scratch;
};

int run_partition(const PartitionArgs& args) {
  const Manifest source = load_manifest(args.in);
  PartitionParams params;
  params.orig_blocks = args.orig_blocks;
  params.rsp_blocks = args.rsp_blocks;
  params.slice_records = args.slice;
  params.block_records = args.block_records;
  params.master_seed = args.seed;
  PartitionOptions options;
  options.workers = args.workers;
  options.keep_intermediate = args.keep_intermediate;
  if (!args.scratch.empty()) options.scratch_dir = args.scratch;
  const Manifest result = two_stage_partition(source, params, args.out, options);
  std::cout << "partitioned " << result.total_records << " records into "
            << result.blocks.size() << " blocks (about " << result.params.n
            << " records each) at " << args.out << "\n";
  return 0;
}

// -------------------------------------------------------------- verify ----

struct VerifyArgs {
  std::string in;
  std::string reference;
  bool deep = false;
  uint64_t seed = 1;
  uint64_t deep_cap = 1000;
  // enough permutations that the smallest reachable p-value, 1/(R+1), sits
  // below the 0.01 cutoff — otherwise the MMD check could never fail
  uint32_t permutations = 128;
};

struct CheckLine {
  bool pass;
  std::string text;
};

void print_checks(const std::vector<CheckLine>& checks) {
  for (const CheckLine& c : checks) {
    std::cout << (c.pass ? "ok   " : "FAIL ") << c.text << "\n";
  }
}

int run_verify(const VerifyArgs& args) {
  const Manifest manifest = load_manifest(args.in);
  std::vector<CheckLine> checks;

  const ValidationReport structural = validate_manifest(manifest);
  for (const auto& entry : structural.entries) {
    checks.push_back({entry.pass, entry.check +
                      (entry.detail.empty() ? "" : ": " + entry.detail)});
  }

  if (!args.reference.empty()) {
    const Manifest reference = load_manifest(args.reference);
    const bool equal = records_multiset_equal(manifest, reference);
    checks.push_back({equal, std::string("records match reference ") +
                                 args.reference});
  }

  // Distribution checks compare each block against the pooled data.
  const RecordBatch all = read_all(manifest);
  const size_t m = all.feature_count();
  std::vector<Ecdf> full_ecdf;
  full_ecdf.reserve(m);
  for (size_t f = 0; f < m; ++f) {
    full_ecdf.push_back(make_ecdf(all.feature_column(f)));
  }
  std::map<int32_t, double> global_props;
  if (manifest.schema.has_label()) {
    global_props = category_proportions(all, manifest.schema);
  }

  double worst_ks = 0.0;
  std::string worst_ks_where;
  bool ks_pass = true;
  double worst_prop = 0.0;
  std::string worst_prop_where;
  bool prop_pass = true;
  for (const BlockMeta& meta : manifest.blocks) {
    const RecordBatch block = read_block(manifest, meta.block_id);
    const double n = static_cast<double>(block.size());
    const double ks_band = 1.36 * std::sqrt(2.0 / n);
    for (size_t f = 0; f < m; ++f) {
      const double ks =
          ks_statistic(make_ecdf(block.feature_column(f)), full_ecdf[f]);
      if (ks >= worst_ks) {
        worst_ks = ks;
        worst_ks_where = manifest.schema.feature_names[f] + " block " +
                         std::to_string(meta.block_id);
      }
      if (ks > ks_band) ks_pass = false;
    }
    if (manifest.schema.has_label()) {
      const double tol = std::max(0.02, 2.0 / std::sqrt(n));
      for (const auto& [code, prop] : category_proportions(block,
                                                           manifest.schema)) {
        const double dev = std::abs(prop - global_props.at(code));
        if (dev >= worst_prop) {
          worst_prop = dev;
          worst_prop_where = "label=" + std::to_string(code) + " block " +
                             std::to_string(meta.block_id);
        }
        if (dev > tol) prop_pass = false;
      }
    }
  }
  checks.push_back({ks_pass, "per-feature KS within 1.36*sqrt(2/n) band "
                             "(worst " + fmt_double(worst_ks) + " at " +
                             worst_ks_where + ")"});
  if (manifest.schema.has_label()) {
    checks.push_back({prop_pass,
                      "label proportions within max(0.02, 2/sqrt(n)) of "
                      "global (worst " + fmt_double(worst_prop) + " at " +
                      worst_prop_where + ")"});
  }

  if (args.deep) {
    // One block against an equal-size uniform random sample of the pooled
    // records, both capped, compared with the MMD permutation test and
    // Hotelling's T^2.
    Philox gen(args.seed);
    const uint32_t block_id = static_cast<uint32_t>(
        1 + gen.bounded(manifest.blocks.size()));
    RecordBatch block = read_block(manifest, block_id);
    const size_t take = std::min<size_t>(
        {block.size(), all.size(), static_cast<size_t>(args.deep_cap)});

    const auto sample_rows = [&](const RecordBatch& from, size_t count) {
      std::vector<uint32_t> idx(from.size());
      for (size_t i = 0; i < idx.size(); ++i) {
        idx[i] = static_cast<uint32_t>(i);
      }
      for (size_t i = 0; i < count; ++i) {
        const uint64_t j = i + gen.bounded(idx.size() - i);
        std::swap(idx[i], idx[j]);
      }
      Matrix out(count, from.feature_count());
      for (size_t i = 0; i < count; ++i) {
        const auto row = from.row(idx[i]);
        std::copy(row.begin(), row.end(), out.data.begin() +
                  static_cast<ptrdiff_t>(i * from.feature_count()));
      }
      return out;
    };
    const Matrix a = sample_rows(block, take);
    const Matrix b = sample_rows(all, take);
    const double bandwidth = median_heuristic_bandwidth(a, b);
    const double mmd_p = mmd2_permutation_pvalue(a, b, bandwidth,
                                                 args.permutations, args.seed);
    checks.push_back({mmd_p >= 0.01,
                      "MMD permutation test on block " +
                      std::to_string(block_id) + " (p=" + fmt_double(mmd_p) +
                      ", bandwidth=" + fmt_double(bandwidth) + ")"});
    try {
      const T2Result t2 = hotelling_t2(a, b);
      checks.push_back({t2.p_value >= 0.001,
                        "Hotelling T^2 on block " + std::to_string(block_id) +
                        " (T2=" + fmt_double(t2.statistic) +
                        ", p=" + fmt_double(t2.p_value) + ")"});
    } catch (const Error& e) {
      checks.push_back({false, std::string("Hotelling T^2: ") + e.what()});
    }
  }

  print_checks(checks);
  const bool all_pass = std::all_of(checks.begin(), checks.end(),
                                    [](const CheckLine& c) { return c.pass; });
  std::cout << (all_pass ? "verify PASS" : "verify FAIL") << "\n";
  return all_pass ? 0 : 1;
}

// -------------------------------------------------------------- sample ----

struct SampleArgs {
  std::string in;
  std::string ledger;
  uint32_t batch = 0;
  bool reset = false;
  uint64_t seed = 1;
  std::string process_id = "cli";
};

int run_sample(const SampleArgs& args) {
  const Manifest manifest = load_manifest(args.in);
  const fs::path ledger_path = args.ledger.empty()
                                   ? manifest.dir / "ledger.txt"
                                   : fs::path(args.ledger);
  SamplingLedger ledger =
      (!args.reset && fs::exists(ledger_path))
          ? load_ledger(ledger_path, manifest)
          : make_ledger(manifest, args.process_id, args.seed);
  const std::vector<uint32_t> ids = sample_blocks(ledger, args.batch);
  save_ledger(ledger, ledger_path);
  for (size_t i = 0; i < ids.size(); ++i) {
    std::cout << (i ? " " : "") << ids[i];
  }
  std::cout << "\n";
  return 0;
}

// ------------------------------------------------------------ estimate ----

struct EstimateArgs {
  std::string in;
  std::string ledger;
  std::string out;
  uint32_t batch = 0;
  uint32_t runs = 1;
  bool weighted = false;
  uint64_t seed = 1;
  std::string process_id = "cli";
};

void write_curves_csv(const fs::path& path,
                      const std::vector<EstimateCurve>& curves) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "batch,blocks_used,feature,statistic,value,reference\n";
  for (const EstimateCurve& curve : curves) {
    for (size_t t = 0; t < curve.batch_values.size(); ++t) {
      out << (t + 1) << "," << curve.blocks_used[t] << "," << curve.feature
          << "," << statistic_name(curve.statistic) << ","
          << fmt_double(curve.batch_values[t]) << ","
          << fmt_double(curve.reference) << "\n";
    }
  }
  if (!out.good()) throw Error("write failed: " + path.string());
}

int run_estimate(const EstimateArgs& args) {
  const Manifest manifest = load_manifest(args.in);
  const std::vector<BlockStats> stats = per_block_stats(manifest);
  std::vector<EstimateCurve> curves;
  if (args.runs <= 1) {
    const fs::path ledger_path = args.ledger.empty()
                                     ? manifest.dir / "ledger.txt"
                                     : fs::path(args.ledger);
    SamplingLedger ledger =
        fs::exists(ledger_path)
            ? load_ledger(ledger_path, manifest)
            : make_ledger(manifest, args.process_id, args.seed);
    curves = rsp::run_estimate(manifest, stats, ledger, args.batch,
                               args.weighted);
    save_ledger(ledger, ledger_path);
  } else {
    // Independent repetitions: fresh ledgers with derived seeds, averaged.
    std::vector<std::vector<EstimateCurve>> runs;
    runs.reserve(args.runs);
    for (uint32_t r = 0; r < args.runs; ++r) {
      SamplingLedger ledger = make_ledger(manifest, args.process_id,
                                          derive_seed(args.seed, r));
      runs.push_back(rsp::run_estimate(manifest, stats, ledger, args.batch,
                                       args.weighted));
    }
    std::vector<EstimateCurve> one(runs.size());
    for (size_t c = 0; c < runs.front().size(); ++c) {
      for (size_t r = 0; r < runs.size(); ++r) one[r] = runs[r][c];
      curves.push_back(average_curves(one));
    }
  }
  write_curves_csv(args.out, curves);
  std::cout << "wrote " << curves.size() << " curves ("
            << curves.front().batch_values.size() << " batches, "
            << (args.runs > 1 ? std::to_string(args.runs) + " runs averaged"
                              : std::string("1 run"))
            << ") to " << args.out << "\n";
  return 0;
}

// ------------------------------------------------------------ ensemble ----

struct EnsembleArgs {
  std::string in;
  std::string test;
  std::string out;
  std::string model_out;
  std::string ledger;
  uint32_t batch = 0;
  double threshold = 0.0;
  uint32_t depth = 8;
  uint32_t min_leaf = 1;
  uint64_t seed = 1;
  unsigned workers = 0;
  std::string process_id = "cli";
};

int run_ensemble(const EnsembleArgs& args) {
  const Manifest manifest = load_manifest(args.in);
  const Manifest test_manifest = load_manifest(args.test);
  const RecordBatch test = read_all(test_manifest);

  SamplingLedger ledger = make_ledger(manifest, args.process_id, args.seed);
  if (!args.ledger.empty() && fs::exists(args.ledger)) {
    ledger = load_ledger(args.ledger, manifest);
  }
  LearnerConfig config;
  config.max_depth = args.depth;
  config.min_leaf = args.min_leaf;
  config.seed = args.seed;
  RunOptions options;
  options.workers = args.workers == 0 ? default_workers() : args.workers;

  const Ensemble ensemble = run_asymptotic(manifest, ledger, config,
                                           args.batch, args.threshold, test,
                                           options);
  if (!args.ledger.empty()) save_ledger(ledger, args.ledger);

  const double total = static_cast<double>(manifest.blocks.size());
  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::trunc);
    if (!out) throw Error("cannot write " + args.out);
    out << "batch,blocks_used,percent_data,accuracy\n";
    for (size_t t = 0; t < ensemble.trajectory.size(); ++t) {
      out << (t + 1) << "," << ensemble.blocks_used[t] << ","
          << fmt_double(100.0 * static_cast<double>(ensemble.blocks_used[t]) /
                        total)
          << "," << fmt_double(ensemble.trajectory[t]) << "\n";
    }
    if (!out.good()) throw Error("write failed: " + args.out);
  }
  if (!args.model_out.empty()) save_ensemble(ensemble, args.model_out);

  std::cout << "ensemble: " << ensemble.members.size() << " base models in "
            << ensemble.batches_completed << " batches, final accuracy "
            << fmt_double(ensemble.trajectory.back()) << "\n";
  return 0;
}

// --------------------------------------------------------------- bench ----

struct BenchArgs {
  std::string sizes;
  std::string out;
  std::string work_dir;
  uint64_t features = 10;
  uint64_t block_records = 10000;
  uint64_t seed = 1;
  unsigned workers = 0;
};

int run_bench(const BenchArgs& args) {
  std::vector<uint64_t> sizes;
  {
    std::istringstream in(args.sizes);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (!tok.empty()) sizes.push_back(std::stoull(tok));
    }
  }
  if (sizes.empty()) throw CLI::ValidationError("--sizes", "no sizes given");
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw CLI::ValidationError("--sizes", "sizes must be ascending");
  }
  for (const uint64_t n : sizes) {
    if (n < args.block_records || n % args.block_records != 0) {
      throw CLI::ValidationError(
          "--sizes", "each size must be a multiple of --block-records");
    }
  }

  const fs::path work = args.work_dir.empty()
                            ? fs::temp_directory_path() /
                                  ("rsp_bench_" + std::to_string(::getpid()))
                            : fs::path(args.work_dir);
  fs::create_directories(work);

  std::vector<double> seconds;
  for (const uint64_t n : sizes) {
    const uint64_t blocks = n / args.block_records;
    const fs::path src_dir = work / ("src_" + std::to_string(n));
    const fs::path out_dir = work / ("rsp_" + std::to_string(n));
    const Manifest source =
        generate_dataset(src_dir, n, args.features, 0, GenModel::uniform,
                         args.seed, args.block_records);
    PartitionParams params;
    params.orig_blocks = blocks;
    params.rsp_blocks = blocks;
    params.master_seed = args.seed;
    PartitionOptions options;
    options.workers = args.workers;
    const auto start = std::chrono::steady_clock::now();
    two_stage_partition(source, params, out_dir, options);
    const std::chrono::duration<double> took =
        std::chrono::steady_clock::now() - start;
    seconds.push_back(took.count());
    std::cout << "N=" << n << " P=K=" << blocks << " partition "
              << fmt_double(took.count()) << " s\n";
    fs::remove_all(src_dir);
    fs::remove_all(out_dir);
  }
  fs::remove_all(work);

  double r2 = 0.0;
  if (sizes.size() >= 3) {
    // Least-squares line through (N, seconds).
    const double k = static_cast<double>(sizes.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < sizes.size(); ++i) {
      const double x = static_cast<double>(sizes[i]);
      sx += x;
      sy += seconds[i];
      sxx += x * x;
      sxy += x * seconds[i];
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / k;
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < sizes.size(); ++i) {
      const double fit = intercept + slope * static_cast<double>(sizes[i]);
      ss_res += (seconds[i] - fit) * (seconds[i] - fit);
      ss_tot += (seconds[i] - sy / k) * (seconds[i] - sy / k);
    }
    r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    std::cout << "linear fit R^2 = " << fmt_double(r2) << "\n";
  }

  if (!args.out.empty()) {
    std::ofstream out(args.out, std::ios::trunc);
    if (!out) throw Error("cannot write " + args.out);
    out << "records,seconds\n";
    for (size_t i = 0; i < sizes.size(); ++i) {
      out << sizes[i] << "," << fmt_double(seconds[i]) << "\n";
    }
    if (!out.good()) throw Error("write failed: " + args.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random sample partition toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen", "synthesize a dataset");
  cmd_gen->add_option("--out", gen.out, "dataset directory")->required();
  cmd_gen->add_option("--records", gen.records, "number of records")
      ->required()->check(CLI::PositiveNumber);
  cmd_gen->add_option("--features", gen.features, "number of features")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--classes", gen.classes,
                      "label classes (labeled models)");
  cmd_gen->add_option("--model", gen.model,
                      "gaussian_mixture | uniform | sorted_adversarial")
      ->check(CLI::IsMember(
          {"gaussian_mixture", "uniform", "sorted_adversarial"}));
  cmd_gen->add_option("--seed", gen.seed, "generator seed");
  cmd_gen->add_option("--block-records", gen.block_records,
                      "records per stored block")
      ->check(CLI::PositiveNumber);

  PartitionArgs part;
  CLI::App* cmd_part =
      app.add_subcommand("partition", "build an RSP dataset from a source");
  cmd_part->add_option("--in", part.in, "source dataset")->required();
  cmd_part->add_option("--out", part.out, "output directory")->required();
  cmd_part->add_option("--orig-blocks", part.orig_blocks,
                       "original block count P (default: as stored)");
  cmd_part->add_option("--blocks", part.rsp_blocks, "RSP block count K")
      ->required()->check(CLI::PositiveNumber);
  CLI::Option* opt_slice = cmd_part->add_option(
      "--slice", part.slice, "records per slice (needs P*K*slice == N)");
  cmd_part->add_option("--block-records", part.block_records,
                       "records per RSP block (alternative to --slice)")
      ->excludes(opt_slice);
  cmd_part->add_option("--seed", part.seed, "master seed");
  cmd_part->add_option("--workers", part.workers, "worker threads");
  cmd_part->add_flag("--keep-intermediate", part.keep_intermediate,
                     "keep the slice scratch directory");
  cmd_part->add_option("--scratch", part.scratch, "scratch directory");

  VerifyArgs verify;
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "check blocks against the pooled data");
  cmd_verify->add_option("--in", verify.in, "dataset to verify")->required();
  cmd_verify->add_option("--reference", verify.reference,
                         "dataset whose records must match as a multiset");
  cmd_verify->add_flag("--deep", verify.deep,
                       "also run MMD permutation and Hotelling T^2 tests "
                       "on a sampled block");
  cmd_verify->add_option("--seed", verify.seed, "seed for --deep sampling");
  cmd_verify->add_option("--deep-cap", verify.deep_cap,
                         "row cap per side for --deep")
      ->check(CLI::PositiveNumber);
  cmd_verify->add_option("--permutations", verify.permutations,
                         "MMD permutation count")
      ->check(CLI::PositiveNumber);

  SampleArgs sample;
  CLI::App* cmd_sample =
      app.add_subcommand("sample", "draw blocks without replacement");
  cmd_sample->add_option("--in", sample.in, "RSP dataset")->required();
  cmd_sample->add_option("--ledger", sample.ledger,
                         "ledger path (default <in>/ledger.txt)");
  cmd_sample->add_option("--batch", sample.batch, "blocks to draw")
      ->required()->check(CLI::PositiveNumber);
  cmd_sample->add_flag("--reset", sample.reset, "start a fresh ledger");
  cmd_sample->add_option("--seed", sample.seed, "seed for a fresh ledger");
  cmd_sample->add_option("--process-id", sample.process_id,
                         "analysis process name");

  EstimateArgs estimate;
  CLI::App* cmd_estimate = app.add_subcommand(
      "estimate", "estimate statistics from sampled blocks");
  cmd_estimate->add_option("--in", estimate.in, "RSP dataset")->required();
  cmd_estimate->add_option("--out", estimate.out, "output CSV")->required();
  cmd_estimate->add_option("--batch", estimate.batch, "blocks per batch")
      ->required()->check(CLI::PositiveNumber);
  cmd_estimate->add_option("--runs", estimate.runs,
                           "independent repetitions to average")
      ->check(CLI::PositiveNumber);
  cmd_estimate->add_flag("--weighted", estimate.weighted,
                         "weight block estimates by record count");
  cmd_estimate->add_option("--ledger", estimate.ledger,
                           "ledger path for runs=1 (default <in>/ledger.txt)");
  cmd_estimate->add_option("--seed", estimate.seed, "sampling seed");
  cmd_estimate->add_option("--process-id", estimate.process_id,
                           "analysis process name");

  EnsembleArgs ensemble;
  CLI::App* cmd_ensemble = app.add_subcommand(
      "ensemble", "batch-train an ensemble over sampled blocks");
  cmd_ensemble->add_option("--in", ensemble.in, "RSP dataset")->required();
  cmd_ensemble->add_option("--test", ensemble.test, "test dataset")
      ->required();
  cmd_ensemble->add_option("--batch", ensemble.batch, "blocks per batch")
      ->required()->check(CLI::PositiveNumber);
  cmd_ensemble->add_option("--threshold", ensemble.threshold,
                           "stop when per-batch accuracy improvement falls "
                           "below this");
  cmd_ensemble->add_option("--depth", ensemble.depth, "tree depth limit")
      ->check(CLI::PositiveNumber);
  cmd_ensemble->add_option("--min-leaf", ensemble.min_leaf,
                           "minimum records per leaf")
      ->check(CLI::PositiveNumber);
  cmd_ensemble->add_option("--seed", ensemble.seed, "sampling seed");
  cmd_ensemble->add_option("--workers", ensemble.workers, "worker threads");
  cmd_ensemble->add_option("--out", ensemble.out, "trajectory CSV");
  cmd_ensemble->add_option("--model-out", ensemble.model_out,
                           "serialized ensemble path");
  cmd_ensemble->add_option("--ledger", ensemble.ledger,
                           "persistent ledger path");
  cmd_ensemble->add_option("--process-id", ensemble.process_id,
                           "analysis process name");

  BenchArgs bench;
  CLI::App* cmd_bench =
      app.add_subcommand("bench", "measure partition scaling");
  cmd_bench->add_option("--sizes", bench.sizes,
                        "comma-separated ascending record counts")
      ->required();
  cmd_bench->add_option("--features", bench.features, "features per record")
      ->check(CLI::PositiveNumber);
  cmd_bench->add_option("--block-records", bench.block_records,
                        "records per block (P = K = N / this)")
      ->check(CLI::PositiveNumber);
  cmd_bench->add_option("--seed", bench.seed, "generator seed");
  cmd_bench->add_option("--workers", bench.workers, "worker threads");
  cmd_bench->add_option("--out", bench.out, "timings CSV");
  cmd_bench->add_option("--work-dir", bench.work_dir,
                        "scratch directory for generated data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(cmd_gen)) return run_gen(gen);
    if (app.got_subcommand(cmd_part)) return run_partition(part);
    if (app.got_subcommand(cmd_verify)) return run_verify(verify);
    if (app.got_subcommand(cmd_sample)) return run_sample(sample);
    if (app.got_subcommand(cmd_estimate)) return run_estimate(estimate);
    if (app.got_subcommand(cmd_ensemble)) return run_ensemble(ensemble);
    if (app.got_subcommand(cmd_bench)) return run_bench(bench);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
