#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rsp/block_store.hpp"
#include "rsp/prng.hpp"
#include "rsp/record.hpp"

namespace rsp {

// Parameters for converting an original dataset into an RSP dataset.
// Zero-valued fields are derived:
//   orig_blocks    P; 0 = use the source's block count
//   slice_records  delta; the even-slice policy requires every original
//                  block to hold exactly K * delta records
//   block_records  n; alternative to delta, requires n divisible by P
// When neither delta nor n is given, slices are balanced: within each
// original block, slice sizes differ by at most one, so RSP block sizes
// differ by at most P.
struct PartitionParams {
  uint64_t orig_blocks = 0;
  uint64_t rsp_blocks = 0;
  uint64_t slice_records = 0;
  uint64_t block_records = 0;
  uint64_t master_seed = 0;
};

struct PartitionOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
  bool keep_intermediate = false;
  std::filesystem::path scratch_dir;  // default: <out>/scratch
};

// A sampled permutation together with the seed that produced it.
struct Permutation {
  std::vector<uint32_t> mapping;  // bijection on 0..size-1
  uint64_t seed = 0;

  size_t size() const { return mapping.size(); }
  bool is_bijection() const;
};

Permutation random_permutation(size_t size, uint64_t seed, uint64_t stream = 0);

// Uniform shuffle of a block; deterministic in the seed. The result is a
// reordering of the input (multiset-preserving).
RecordBatch randomize_block(const RecordBatch& block, uint64_t seed);

// Even-slice policy: cuts the block into K consecutive slices of exactly
// delta records; requires K * delta == block size.
std::vector<RecordBatch> slice_block(const RecordBatch& block, uint64_t k,
                                     uint64_t delta);

// General policy: K consecutive slices whose sizes differ by at most one
// (the first size % K slices carry the extra record); requires size >= K.
std::vector<RecordBatch> slice_block(const RecordBatch& block, uint64_t k);

// Slice boundaries used by both policies; returns K+1 offsets.
std::vector<uint64_t> slice_offsets(uint64_t size, uint64_t k, uint64_t delta);

// Algorithm: shuffle each of the P original blocks with a per-block seed
// split from the master seed, cut each into K slices, then build RSP block
// k from one slice of every original block, chosen without replacement via
// a per-block uniform permutation of slice indices. Identical inputs give
// byte-identical outputs regardless of worker count.
Manifest two_stage_partition(const Manifest& source,
                             const PartitionParams& params,
                             const std::filesystem::path& out_dir,
                             const PartitionOptions& options = {});

// Single-permutation construction: permute the whole dataset uniformly and
// cut K consecutive blocks of delta records. Requires K * delta == size.
std::vector<RecordBatch> lemma1_partition(const RecordBatch& dataset,
                                          uint64_t k, uint64_t delta,
                                          uint64_t seed);

}  // namespace rsp
