#include <doctest.h>

#include <fstream>
#include <vector>

#include "rsp/block_store.hpp"
#include "rsp/error.hpp"
#include "rsp/prng.hpp"

#include "util.hpp"

using namespace rsp;
using testutil::TempDir;

namespace {

std::vector<Record> make_records(size_t count, size_t features, bool labeled,
                                 uint64_t seed = 1) {
  Philox gen(seed);
  std::vector<Record> out;
  for (size_t i = 0; i < count; ++i) {
    Record r;
    for (size_t f = 0; f < features; ++f) {
      r.features.push_back(gen.next_double() * 100.0);
    }
    if (labeled) r.label = static_cast<int32_t>(gen.bounded(2));
    out.push_back(std::move(r));
  }
  return out;
}

Manifest write_dataset(const TempDir& dir, const std::vector<Record>& records,
                       size_t features, bool labeled, uint64_t block_size) {
  VectorSource source(records);
  return create_dataset(dir.path(), testutil::schema_of(features, labeled),
                        source, block_size);
}

}  // namespace

TEST_SUITE("block_store") {

TEST_CASE("blocks are cut sequentially with a short tail") {
  TempDir dir("bs_cut");
  SUBCASE("10 records, block size 5") {
    const auto m = write_dataset(dir, make_records(10, 2, true), 2, true, 5);
    REQUIRE(m.blocks.size() == 2);
    CHECK(m.blocks[0].record_count == 5);
    CHECK(m.blocks[1].record_count == 5);
  }
  SUBCASE("10 records, block size 4") {
    const auto m = write_dataset(dir, make_records(10, 2, true), 2, true, 4);
    REQUIRE(m.blocks.size() == 3);
    CHECK(m.blocks[0].record_count == 4);
    CHECK(m.blocks[1].record_count == 4);
    CHECK(m.blocks[2].record_count == 2);
  }
  SUBCASE("1 record, block size 100") {
    const auto m = write_dataset(dir, make_records(1, 2, true), 2, true, 100);
    REQUIRE(m.blocks.size() == 1);
    CHECK(m.blocks[0].record_count == 1);
  }
}

TEST_CASE("order and values survive the round trip") {
  TempDir dir("bs_rt");
  const auto records = make_records(100, 3, true, 9);
  const auto m = write_dataset(dir, records, 3, true, 33);
  const RecordBatch all = read_all(m);
  REQUIRE(all.size() == records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const Record r = all.record(i);
    CHECK(r.features == records[i].features);
    CHECK(r.label == records[i].label);
  }
}

TEST_CASE("unlabeled schema stores the absent-label sentinel") {
  TempDir dir("bs_nolabel");
  const auto records = make_records(7, 2, false);
  const auto m = write_dataset(dir, records, 2, false, 7);
  const RecordBatch all = read_all(m);
  CHECK(!all.labeled());
  CHECK(all.record(0).label == std::nullopt);
  // on disk: feature bytes then 0xFFFFFFFF
  const auto bytes = read_file(m.block_path(m.blocks[0]));
  REQUIRE(bytes.size() == 7 * (2 * 8 + 4));
  const auto* tail = reinterpret_cast<const uint32_t*>(bytes.data() + 16);
  CHECK(*tail == 0xFFFFFFFFu);
}

TEST_CASE("manifest round trip preserves every field") {
  TempDir dir("bs_manifest");
  const auto m = write_dataset(dir, make_records(10, 2, true), 2, true, 4);
  const Manifest loaded = load_manifest(dir.path());
  CHECK(loaded.kind == m.kind);
  CHECK(loaded.schema == m.schema);
  CHECK(loaded.total_records == m.total_records);
  CHECK(loaded.params.p == m.params.p);
  CHECK(loaded.source == m.source);
  REQUIRE(loaded.blocks.size() == m.blocks.size());
  for (size_t i = 0; i < m.blocks.size(); ++i) {
    CHECK(loaded.blocks[i].block_id == m.blocks[i].block_id);
    CHECK(loaded.blocks[i].record_count == m.blocks[i].record_count);
    CHECK(loaded.blocks[i].path == m.blocks[i].path);
    CHECK(loaded.blocks[i].checksum == m.blocks[i].checksum);
  }
}

TEST_CASE("unknown block id is an error") {
  TempDir dir("bs_unknown");
  const auto m = write_dataset(dir, make_records(10, 2, true), 2, true, 5);
  CHECK_THROWS_AS((void)read_block(m, 0), Error);
  CHECK_THROWS_AS((void)read_block(m, 3), Error);
}

TEST_CASE("a flipped byte is caught by the checksum") {
  TempDir dir("bs_corrupt");
  const auto m = write_dataset(dir, make_records(20, 2, true), 2, true, 10);
  const auto path = m.block_path(m.blocks[1]);
  auto bytes = read_file(path);
  bytes[5] ^= std::byte{0x01};
  write_file(path, bytes);
  CHECK_THROWS_WITH_AS((void)read_block(m, 2),
                       doctest::Contains("corruption"), Error);
  const ValidationReport report = validate_manifest(m);
  CHECK(!report.all_pass());
}

TEST_CASE("a truncated block file fails validation") {
  TempDir dir("bs_trunc");
  const auto m = write_dataset(dir, make_records(20, 2, true), 2, true, 10);
  const auto path = m.block_path(m.blocks[0]);
  auto bytes = read_file(path);
  bytes.resize(bytes.size() - 4);
  write_file(path, bytes);
  const ValidationReport report = validate_manifest(m);
  CHECK(!report.all_pass());
  bool mentions_block_1 = false;
  for (const auto& e : report.entries) {
    if (!e.pass && e.check.find("block 1") != std::string::npos) {
      mentions_block_1 = true;
    }
  }
  CHECK(mentions_block_1);
}

TEST_CASE("validation errors name the offending record") {
  TempDir dir("bs_badrec");
  const Schema schema = testutil::schema_of(2, true);

  SUBCASE("wrong feature count") {
    std::vector<Record> records = make_records(5, 2, true);
    records[3].features.pop_back();
    VectorSource source(records);
    CHECK_THROWS_WITH_AS(
        (void)create_dataset(dir.path(), schema, source, 5),
        doctest::Contains("record 3"), Error);
  }
  SUBCASE("non-finite feature") {
    std::vector<Record> records = make_records(5, 2, true);
    records[2].features[1] = std::numeric_limits<double>::infinity();
    VectorSource source(records);
    CHECK_THROWS_WITH_AS(
        (void)create_dataset(dir.path(), schema, source, 5),
        doctest::Contains("record 2"), Error);
  }
  SUBCASE("undeclared label") {
    std::vector<Record> records = make_records(5, 2, true);
    records[4].label = 9;
    VectorSource source(records);
    CHECK_THROWS_WITH_AS(
        (void)create_dataset(dir.path(), schema, source, 5),
        doctest::Contains("record 4"), Error);
  }
  SUBCASE("empty stream") {
    std::vector<Record> records;
    VectorSource source(records);
    CHECK_THROWS_AS((void)create_dataset(dir.path(), schema, source, 5),
                    Error);
  }
}

TEST_CASE("schema validation") {
  Schema s = testutil::schema_of(2, true);
  CHECK_NOTHROW(s.validate());

  Schema dup = s;
  dup.feature_names[1] = dup.feature_names[0];
  CHECK_THROWS_AS(dup.validate(), Error);

  Schema comma = s;
  comma.feature_names[0] = "a,b";
  CHECK_THROWS_AS(comma.validate(), Error);

  Schema unsorted = s;
  unsorted.label_categories = {{1, 0}};
  CHECK_THROWS_AS(unsorted.validate(), Error);

  Schema negative = s;
  negative.label_categories = {{-1, 0}};
  CHECK_THROWS_AS(negative.validate(), Error);

  Schema empty;
  CHECK_THROWS_AS(empty.validate(), Error);
}

TEST_CASE("multiset equality ignores order, catches any change") {
  TempDir da("bs_ms_a");
  TempDir db("bs_ms_b");
  auto records = make_records(100, 2, true, 4);
  const auto ma = write_dataset(da, records, 2, true, 7);

  // same records, rotated and re-blocked differently
  std::rotate(records.begin(), records.begin() + 41, records.end());
  {
    VectorSource source(records);
    const auto mb = create_dataset(db.path(), testutil::schema_of(2, true),
                                   source, 25);
    CHECK(records_multiset_equal(ma, mb));
  }

  TempDir dc("bs_ms_c");
  records[17].features[0] += 1e-9;  // any perturbation breaks equality
  VectorSource source(records);
  const auto mc = create_dataset(dc.path(), testutil::schema_of(2, true),
                                 source, 25);
  CHECK(!records_multiset_equal(ma, mc));
}

TEST_CASE("crc32 matches the zlib reference value") {
  // "123456789" -> 0xCBF43926, the classic check value.
  const char* s = "123456789";
  const auto* b = reinterpret_cast<const std::byte*>(s);
  CHECK(crc32_bytes({b, 9}) == 0xCBF43926u);
}

}  // TEST_SUITE
