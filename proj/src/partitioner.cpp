#include "rsp/partitioner.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "rsp/error.hpp"
#include "rsp/parallel.hpp"

namespace rsp {

namespace {

// Stream ids for the counter-based seed split: original block i uses stream
// 2i for its shuffle and stream 2i+1 for its slice-assignment permutation.
constexpr uint64_t shuffle_stream(uint64_t block_index) {
  return 2 * block_index;
}
constexpr uint64_t assign_stream(uint64_t block_index) {
  return 2 * block_index + 1;
}

std::string slice_file_name(uint64_t orig_index, uint64_t slice_index) {
  // 1-based names: orig<i>_slice<j>.bin
  return "orig" + std::to_string(orig_index + 1) + "_slice" +
         std::to_string(slice_index + 1) + ".bin";
}

std::string rsp_block_name(uint32_t block_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "block_%05u.bin", block_id);
  return buf;
}

// Rewrites the source into P balanced blocks (sizes differ by at most one)
// under scratch_dir, preserving record order.
Manifest rechunk(const Manifest& source, uint64_t p,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Manifest manifest;
  manifest.kind = DatasetKind::original;
  manifest.schema = source.schema;
  manifest.dir = dir;
  const uint64_t n = source.total_records;
  const uint64_t base = n / p;
  const uint64_t extra = n % p;

  const size_t m = source.schema.feature_count();
  RecordBatch pending(m, source.schema.has_label());
  size_t src_index = 0;
  uint64_t emitted = 0;
  for (uint64_t i = 0; i < p; ++i) {
    const uint64_t count = base + (i < extra ? 1 : 0);
    while (pending.size() < count && src_index < source.blocks.size()) {
      const RecordBatch next = read_block(
          source, source.blocks[src_index++].block_id);
      pending.append_rows(next, 0, next.size());
    }
    if (pending.size() < count) {
      throw Error("rechunk: source ran short of records");
    }
    RecordBatch block(m, pending.labeled());
    block.reserve(count);
    block.append_rows(pending, 0, count);
    RecordBatch rest(m, pending.labeled());
    rest.reserve(pending.size() - count);
    rest.append_rows(pending, count, pending.size());
    pending = std::move(rest);

    BlockMeta meta;
    meta.block_id = static_cast<uint32_t>(i + 1);
    meta.record_count = count;
    meta.path = rsp_block_name(meta.block_id);
    const auto bytes = encode_records(block);
    meta.checksum = crc32_bytes(bytes);
    write_file(dir / meta.path, bytes);
    manifest.blocks.push_back(std::move(meta));
    emitted += count;
  }
  manifest.total_records = emitted;
  manifest.params.p = p;
  write_manifest(manifest);
  return manifest;
}

}  // namespace

bool Permutation::is_bijection() const {
  std::vector<bool> seen(mapping.size(), false);
  for (const uint32_t v : mapping) {
    if (v >= mapping.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation random_permutation(size_t size, uint64_t seed, uint64_t stream) {
  Permutation perm;
  perm.seed = seed;
  perm.mapping.resize(size);
  std::iota(perm.mapping.begin(), perm.mapping.end(), 0u);
  Philox gen(seed, stream);
  fisher_yates(std::span<uint32_t>(perm.mapping), gen);
  return perm;
}

RecordBatch randomize_block(const RecordBatch& block, uint64_t seed) {
  if (block.size() == 0) throw Error("randomize_block: empty block");
  const Permutation perm = random_permutation(block.size(), seed);
  return block.reordered(perm.mapping);
}

std::vector<uint64_t> slice_offsets(uint64_t size, uint64_t k,
                                    uint64_t delta) {
  std::vector<uint64_t> offsets(k + 1);
  if (delta > 0) {
    if (k * delta != size) {
      throw Error("slice_block: K*delta = " + std::to_string(k * delta) +
                  " does not match block size " + std::to_string(size));
    }
    for (uint64_t j = 0; j <= k; ++j) offsets[j] = j * delta;
    return offsets;
  }
  if (size < k) {
    throw Error("slice_block: block of " + std::to_string(size) +
                " records cannot be cut into " + std::to_string(k) +
                " slices");
  }
  const uint64_t base = size / k;
  const uint64_t extra = size % k;
  offsets[0] = 0;
  for (uint64_t j = 0; j < k; ++j) {
    offsets[j + 1] = offsets[j] + base + (j < extra ? 1 : 0);
  }
  return offsets;
}

namespace {

std::vector<RecordBatch> cut(const RecordBatch& block,
                             const std::vector<uint64_t>& offsets) {
  std::vector<RecordBatch> slices;
  slices.reserve(offsets.size() - 1);
  for (size_t j = 0; j + 1 < offsets.size(); ++j) {
    RecordBatch s(block.feature_count(), block.labeled());
    s.reserve(offsets[j + 1] - offsets[j]);
    s.append_rows(block, offsets[j], offsets[j + 1]);
    slices.push_back(std::move(s));
  }
  return slices;
}

}  // namespace

std::vector<RecordBatch> slice_block(const RecordBatch& block, uint64_t k,
                                     uint64_t delta) {
  if (k == 0 || delta == 0) throw Error("slice_block: K and delta must be >= 1");
  return cut(block, slice_offsets(block.size(), k, delta));
}

std::vector<RecordBatch> slice_block(const RecordBatch& block, uint64_t k) {
  if (k == 0) throw Error("slice_block: K must be >= 1");
  return cut(block, slice_offsets(block.size(), k, 0));
}

std::vector<RecordBatch> lemma1_partition(const RecordBatch& dataset,
                                          uint64_t k, uint64_t delta,
                                          uint64_t seed) {
  if (k == 0 || delta == 0) {
    throw Error("lemma1_partition: K and delta must be >= 1");
  }
  if (dataset.size() != k * delta) {
    throw Error("lemma1_partition: dataset size " +
                std::to_string(dataset.size()) + " != K*delta = " +
                std::to_string(k * delta));
  }
  const RecordBatch shuffled = randomize_block(dataset, seed);
  return slice_block(shuffled, k, delta);
}

Manifest two_stage_partition(const Manifest& source,
                             const PartitionParams& params,
                             const std::filesystem::path& out_dir,
                             const PartitionOptions& options) {
  namespace fs = std::filesystem;
  const uint64_t n_total = source.total_records;
  const uint64_t p = params.orig_blocks == 0 ? source.blocks.size()
                                             : params.orig_blocks;
  const uint64_t k = params.rsp_blocks;
  if (p == 0 || k == 0) {
    throw Error("two_stage_partition: P and K must be >= 1");
  }
  if (p > n_total) {
    throw Error("two_stage_partition: P exceeds total records");
  }
  if (params.slice_records != 0 && params.block_records != 0) {
    throw Error("two_stage_partition: give slice_records or block_records, "
                "not both");
  }
  uint64_t delta = params.slice_records;
  if (params.block_records != 0) {
    if (params.block_records % p != 0) {
      throw Error("two_stage_partition: block_records = " +
                  std::to_string(params.block_records) +
                  " is not divisible by P = " + std::to_string(p));
    }
    delta = params.block_records / p;
  }
  if (delta != 0 && p * k * delta != n_total) {
    throw Error("two_stage_partition: P*K*delta = " +
                std::to_string(p * k * delta) + " != total records " +
                std::to_string(n_total));
  }

  // An explicit P means balanced blocks (sizes differ by at most one);
  // rechunk unless the source already has exactly that shape. P = 0 keeps
  // the stored chunks as they are.
  bool needs_rechunk = false;
  if (params.orig_blocks != 0) {
    const uint64_t base = n_total / p;
    const uint64_t extra = n_total % p;
    needs_rechunk = source.blocks.size() != p;
    for (uint64_t i = 0; !needs_rechunk && i < p; ++i) {
      if (source.blocks[i].record_count != base + (i < extra ? 1 : 0)) {
        needs_rechunk = true;
      }
    }
  }
  if (delta == 0) {
    // Balanced slicing needs at least K records in every original block.
    uint64_t smallest = n_total / p;
    if (!needs_rechunk) {
      for (const auto& b : source.blocks) {
        smallest = std::min(smallest, b.record_count);
      }
    }
    if (smallest < k) {
      throw Error("two_stage_partition: original blocks of " +
                  std::to_string(smallest) +
                  " records cannot be cut into K = " + std::to_string(k) +
                  " slices");
    }
  }

  fs::create_directories(out_dir);
  const fs::path scratch = options.scratch_dir.empty()
                               ? out_dir / "scratch"
                               : options.scratch_dir;
  fs::create_directories(scratch);
  Manifest chunked =
      needs_rechunk ? rechunk(source, p, scratch / "rechunk") : source;
  if (delta != 0) {
    for (const auto& b : chunked.blocks) {
      if (b.record_count != k * delta) {
        throw Error("two_stage_partition: original block " +
                    std::to_string(b.block_id) + " holds " +
                    std::to_string(b.record_count) +
                    " records; even slicing needs exactly K*delta = " +
                    std::to_string(k * delta));
      }
    }
  }

  // Stage 1: shuffle and slice every original block. Randomness is
  // pre-split per block, so worker scheduling cannot change the output.
  std::vector<std::vector<uint64_t>> slice_sizes(p);
  parallel_for(p, options.workers, [&](size_t i) {
    const RecordBatch block =
        read_block(chunked, static_cast<uint32_t>(i + 1));
    const uint64_t block_seed =
        derive_seed(params.master_seed, shuffle_stream(i));
    const RecordBatch randomized = randomize_block(block, block_seed);
    const auto offsets = slice_offsets(randomized.size(), k, delta);
    std::vector<uint64_t> sizes(k);
    for (uint64_t j = 0; j < k; ++j) {
      RecordBatch slice(randomized.feature_count(), randomized.labeled());
      slice.append_rows(randomized, offsets[j], offsets[j + 1]);
      sizes[j] = slice.size();
      write_file(scratch / slice_file_name(i, j), encode_records(slice));
    }
    slice_sizes[i] = std::move(sizes);
  });

  // Slice assignment: RSP block k receives slice sigma_i(k) of original
  // block i, a uniform draw without replacement.
  std::vector<Permutation> assignment(p);
  for (uint64_t i = 0; i < p; ++i) {
    assignment[i] =
        random_permutation(k, params.master_seed, assign_stream(i));
  }

  Manifest manifest;
  manifest.kind = DatasetKind::rsp;
  manifest.schema = source.schema;
  manifest.dir = out_dir;
  manifest.total_records = n_total;
  manifest.params.p = p;
  manifest.params.k = k;
  manifest.params.delta = delta != 0 ? delta : n_total / (p * k);
  manifest.params.n = delta != 0 ? p * delta : n_total / k;
  manifest.params.seed = params.master_seed;
  // Stored relative to the output so the pair of datasets can be moved
  // together; consumers resolve it against the manifest directory.
  std::error_code rel_ec;
  const fs::path rel =
      fs::relative(fs::absolute(source.dir), fs::absolute(out_dir), rel_ec);
  manifest.source =
      (rel_ec || rel.empty()) ? fs::absolute(source.dir).string()
                              : rel.string();
  manifest.blocks.resize(k);

  // Stage 2: assemble each RSP block from its assigned slices. Slice files
  // hold raw fixed-size records, so assembly is pure byte concatenation.
  parallel_for(k, options.workers, [&](size_t block_index) {
    std::vector<std::byte> payload;
    uint64_t records = 0;
    for (uint64_t i = 0; i < p; ++i) {
      const uint64_t j = assignment[i].mapping[block_index];
      const auto bytes = read_file(scratch / slice_file_name(i, j));
      payload.insert(payload.end(), bytes.begin(), bytes.end());
      records += slice_sizes[i][j];
    }
    BlockMeta meta;
    meta.block_id = static_cast<uint32_t>(block_index + 1);
    meta.record_count = records;
    meta.path = rsp_block_name(meta.block_id);
    meta.checksum = crc32_bytes(payload);
    write_file(out_dir / meta.path, payload);
    manifest.blocks[block_index] = std::move(meta);
  });

  write_manifest(manifest);

  if (!options.keep_intermediate) {
    std::error_code ec;
    fs::remove_all(scratch, ec);
  }
  return manifest;
}

}  // namespace rsp
