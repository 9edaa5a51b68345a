#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsp/block_store.hpp"

#include "util.hpp"

using namespace rsp;
using testutil::TempDir;

namespace {

#ifndef RSP_CLI_PATH
#error "RSP_CLI_PATH must point at the rsp binary"
#endif

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(RSP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf;
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    r.output.append(buf.data(), got);
  }
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string quoted(const std::filesystem::path& p) {
  return "'" + p.string() + "'";
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen, partition, verify: the full happy path exits 0") {
  TempDir work("cli_happy");
  const auto data = work / "data";
  const auto rsp_dir = work / "rsp";

  const RunResult gen = run_cli("gen --records 4000 --features 2 --classes 2"
                                " --model gaussian_mixture --seed 5"
                                " --block-records 400 --out " + quoted(data));
  REQUIRE_MESSAGE(gen.exit_code == 0, gen.output);

  const RunResult part = run_cli("partition --in " + quoted(data) +
                                 " --blocks 10 --seed 6 --out " +
                                 quoted(rsp_dir));
  REQUIRE_MESSAGE(part.exit_code == 0, part.output);

  const RunResult verify = run_cli("verify --in " + quoted(rsp_dir));
  CHECK_MESSAGE(verify.exit_code == 0, verify.output);
  CHECK(verify.output.find("verify PASS") != std::string::npos);
  CHECK(verify.output.find("FAIL") == std::string::npos);

  const RunResult deep =
      run_cli("verify --deep --seed 7 --in " + quoted(rsp_dir));
  CHECK_MESSAGE(deep.exit_code == 0, deep.output);
}

TEST_CASE("verify flags sequential chunks of adversarial data, exits 1") {
  TempDir work("cli_adv");
  const auto data = work / "data";
  const RunResult gen = run_cli(
      "gen --records 4000 --features 2 --classes 2 --model sorted_adversarial"
      " --seed 9 --block-records 1000 --out " + quoted(data));
  REQUIRE_MESSAGE(gen.exit_code == 0, gen.output);

  // pose the sequential chunks as an RSP partition of themselves: the
  // structure is consistent, so only the distribution checks can object
  Manifest m = load_manifest(data);
  m.kind = DatasetKind::rsp;
  m.source = ".";
  m.params.p = m.blocks.size();
  m.params.k = m.blocks.size();
  m.params.n = m.total_records / m.blocks.size();
  m.params.delta = m.params.n / m.params.p;
  write_manifest(m);

  const RunResult verify = run_cli("verify --in " + quoted(data));
  CHECK_MESSAGE(verify.exit_code == 1, verify.output);
  CHECK(verify.output.find("verify FAIL") != std::string::npos);
  CHECK(verify.output.find("FAIL per-feature KS") != std::string::npos);
  CHECK(verify.output.find("FAIL label proportions") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("partition --in x --out y --blocks 2 --slice 2"
                " --block-records 10").exit_code == 2);
  CHECK(run_cli("gen --records 10 --out /tmp/x --model warp").exit_code == 2);
  CHECK(run_cli("gen --records 0 --out /tmp/x").exit_code == 2);
}

TEST_CASE("reruns with one seed are byte-identical") {
  TempDir work("cli_rerun");
  for (const char* name : {"a", "b"}) {
    const auto data = work / (std::string("data_") + name);
    const auto rsp_dir = work / (std::string("rsp_") + name);
    REQUIRE(run_cli("gen --records 1000 --features 2 --classes 2"
                    " --model gaussian_mixture --seed 11 --block-records 100"
                    " --out " + quoted(data)).exit_code == 0);
    REQUIRE(run_cli("partition --in " + quoted(data) +
                    " --blocks 5 --seed 12 --out " + quoted(rsp_dir))
                .exit_code == 0);
  }
  const Manifest a = load_manifest(work / "rsp_a");
  const Manifest b = load_manifest(work / "rsp_b");
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    CHECK(a.blocks[i].checksum == b.blocks[i].checksum);
  }
}

TEST_CASE("sample draws without replacement across invocations") {
  TempDir work("cli_sample");
  const auto data = work / "data";
  const auto rsp_dir = work / "rsp";
  REQUIRE(run_cli("gen --records 600 --features 1 --classes 2"
                  " --model gaussian_mixture --seed 3 --block-records 100"
                  " --out " + quoted(data)).exit_code == 0);
  REQUIRE(run_cli("partition --in " + quoted(data) +
                  " --blocks 6 --seed 4 --out " + quoted(rsp_dir))
              .exit_code == 0);

  std::set<std::string> seen;
  for (int call = 0; call < 3; ++call) {
    const RunResult r =
        run_cli("sample --batch 2 --seed 8 --in " + quoted(rsp_dir));
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    std::istringstream in(r.output);
    std::string id;
    int count = 0;
    while (in >> id) {
      CHECK(seen.insert(id).second);  // never repeated across calls
      ++count;
    }
    CHECK(count == 2);
  }
  CHECK(std::filesystem::exists(rsp_dir / "ledger.txt"));

  // the seventh block does not exist
  const RunResult over =
      run_cli("sample --batch 1 --seed 8 --in " + quoted(rsp_dir));
  CHECK(over.exit_code == 1);
  CHECK(over.output.find("remain") != std::string::npos);

  // --reset starts over
  const RunResult reset =
      run_cli("sample --batch 6 --seed 8 --reset --in " + quoted(rsp_dir));
  CHECK_MESSAGE(reset.exit_code == 0, reset.output);
}

TEST_CASE("estimate emits a well-formed convergence CSV") {
  TempDir work("cli_estimate");
  const auto data = work / "data";
  const auto rsp_dir = work / "rsp";
  const auto csv = work / "curves.csv";
  REQUIRE(run_cli("gen --records 3000 --features 2 --classes 2"
                  " --model gaussian_mixture --seed 21 --block-records 300"
                  " --out " + quoted(data)).exit_code == 0);
  REQUIRE(run_cli("partition --in " + quoted(data) +
                  " --blocks 10 --seed 22 --out " + quoted(rsp_dir))
              .exit_code == 0);
  const RunResult est = run_cli("estimate --batch 2 --seed 23 --in " +
                                quoted(rsp_dir) + " --out " + quoted(csv));
  REQUIRE_MESSAGE(est.exit_code == 0, est.output);

  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "batch,blocks_used,feature,statistic,value,reference");
  // mean and stddev for f1/f2 plus two label proportions = 6 curves,
  // 5 batches each
  size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 6 * 5);
}

TEST_CASE("ensemble emits a trajectory CSV and a loadable model") {
  TempDir work("cli_ensemble");
  const auto data = work / "data";
  const auto test_data = work / "test";
  const auto rsp_dir = work / "rsp";
  const auto csv = work / "traj.csv";
  const auto model = work / "model.bin";
  REQUIRE(run_cli("gen --records 2000 --features 2 --classes 2"
                  " --model gaussian_mixture --seed 31 --block-records 100"
                  " --out " + quoted(data)).exit_code == 0);
  REQUIRE(run_cli("gen --records 500 --features 2 --classes 2"
                  " --model gaussian_mixture --seed 32 --block-records 500"
                  " --out " + quoted(test_data)).exit_code == 0);
  REQUIRE(run_cli("partition --in " + quoted(data) +
                  " --blocks 20 --seed 33 --out " + quoted(rsp_dir))
              .exit_code == 0);

  const RunResult run = run_cli(
      "ensemble --batch 5 --threshold -1 --seed 34 --depth 4 --in " +
      quoted(rsp_dir) + " --test " + quoted(test_data) + " --out " +
      quoted(csv) + " --model-out " + quoted(model));
  REQUIRE_MESSAGE(run.exit_code == 0, run.output);

  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "batch,blocks_used,percent_data,accuracy");
  const auto rows = lines_of(std::string(
      std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
  CHECK(rows.size() == 4);  // 20 blocks / batch 5, threshold -1
  // final row uses all blocks: percent_data 100
  CHECK(rows.back().find(",100,") != std::string::npos);
  CHECK(std::filesystem::exists(model));
}

TEST_CASE("bench reports per-size timings and a linear fit") {
  TempDir work("cli_bench");
  const auto csv = work / "bench.csv";
  const auto scratch = work / "scratch";
  const RunResult r = run_cli(
      "bench --sizes 2000,4000,8000 --features 2 --block-records 500"
      " --seed 41 --work-dir " + quoted(scratch) + " --out " + quoted(csv));
  REQUIRE_MESSAGE(r.exit_code == 0, r.output);
  CHECK(r.output.find("R^2") != std::string::npos);

  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "records,seconds");
  const auto rows = lines_of(std::string(
      std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("2000,", 0) == 0);
  CHECK(rows[2].rfind("8000,", 0) == 0);

  // unsorted sizes are a usage error
  CHECK(run_cli("bench --sizes 4000,2000 --out " + quoted(csv)).exit_code ==
        2);
}

}  // TEST_SUITE
