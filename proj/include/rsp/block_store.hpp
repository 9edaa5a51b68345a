#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsp/record.hpp"

namespace rsp {

enum class DatasetKind { original, rsp };

struct BlockMeta {
  uint32_t block_id = 0;        // 1-based, contiguous
  uint64_t record_count = 0;
  std::string path;             // relative to the manifest directory
  uint32_t checksum = 0;        // CRC-32 of the block file bytes
};

// Partitioning parameters carried by a manifest; zero means "not set".
struct ManifestParams {
  uint64_t p = 0;      // original blocks
  uint64_t k = 0;      // RSP blocks
  uint64_t n = 0;      // records per RSP block (nominal)
  uint64_t delta = 0;  // records per slice
  uint64_t seed = 0;
};

struct Manifest {
  DatasetKind kind = DatasetKind::original;
  Schema schema;
  uint64_t total_records = 0;
  ManifestParams params;
  std::string source;  // parent dataset directory; empty = none
  std::vector<BlockMeta> blocks;
  std::filesystem::path dir;  // location on disk, set on create/load

  const BlockMeta* find_block(uint32_t block_id) const;
  std::filesystem::path block_path(const BlockMeta& meta) const {
    return dir / meta.path;
  }
};

// Pull-based record stream consumed by create_dataset.
class RecordSource {
 public:
  virtual ~RecordSource() = default;
  // Fills `out` and returns true, or returns false at end of stream.
  virtual bool next(Record& out) = 0;
};

class VectorSource : public RecordSource {
 public:
  explicit VectorSource(std::vector<Record> records)
      : records_(std::move(records)) {}
  bool next(Record& out) override {
    if (pos_ == records_.size()) return false;
    out = records_[pos_++];
    return true;
  }

 private:
  std::vector<Record> records_;
  size_t pos_ = 0;
};

class BatchSource : public RecordSource {
 public:
  explicit BatchSource(const RecordBatch& batch) : batch_(batch) {}
  bool next(Record& out) override {
    if (pos_ == batch_.size()) return false;
    out = batch_.record(pos_++);
    return true;
  }

 private:
  const RecordBatch& batch_;
  size_t pos_ = 0;
};

// Materializes the stream under `dir` as sequentially cut blocks of
// `block_size` records (the last block carries the remainder) and writes
// manifest.txt. Records are validated against the schema; a violation names
// the offending record index.
Manifest create_dataset(const std::filesystem::path& dir, const Schema& schema,
                        RecordSource& records, uint64_t block_size);

// Reads one block, verifying length and checksum.
RecordBatch read_block(const Manifest& manifest, uint32_t block_id);

// Reads every block in id order into one batch.
RecordBatch read_all(const Manifest& manifest);

Manifest load_manifest(const std::filesystem::path& dir_or_file);
void write_manifest(const Manifest& manifest);

struct ValidationEntry {
  std::string check;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool all_pass() const;
  std::string summary() const;
};

// Structural checks: per-block existence/length/checksum, contiguous ids,
// total_records consistency, RSP parameter consistency, and — for kind=rsp
// with a source link — multiset equality against the source's records.
ValidationReport validate_manifest(const Manifest& manifest);

// Exact multiset comparison of two datasets' records.
bool records_multiset_equal(const Manifest& a, const Manifest& b);

// Low-level block payload helpers shared with the partitioner. The payload
// layout is record-major: per record, feature_count little-endian 64-bit
// floats followed by a 32-bit label code (0xFFFFFFFF when absent).
std::vector<std::byte> encode_records(const RecordBatch& batch);
RecordBatch decode_records(const Schema& schema,
                           std::span<const std::byte> bytes);
void write_file(const std::filesystem::path& path,
                std::span<const std::byte> bytes);
std::vector<std::byte> read_file(const std::filesystem::path& path);
uint32_t crc32_bytes(std::span<const std::byte> bytes);

}  // namespace rsp
