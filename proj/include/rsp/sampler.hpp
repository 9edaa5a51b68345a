#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "rsp/block_store.hpp"

namespace rsp {

// Tracks which blocks of a dataset a consumer has already drawn, so that
// successive batches are disjoint (sampling without replacement at the
// block level).  Ledgers can be persisted and picked up later, and several
// process ids can sample the same dataset independently.
struct SamplingLedger {
  std::string manifest_ref;      // path of the dataset the ledger belongs to
  uint32_t k = 0;                // total number of blocks in that dataset
  std::string process_id;
  uint64_t seed = 0;
  uint64_t draw_count = 0;       // number of sample_blocks calls so far
  std::set<uint32_t> consumed;   // block ids already handed out
};

SamplingLedger make_ledger(const Manifest& manifest,
                           const std::string& process_id, uint64_t seed);

// Draws `count` block ids uniformly from the blocks this ledger has not yet
// consumed, marks them consumed, and returns them.  Throws when fewer than
// `count` blocks remain, reporting how many are left.
std::vector<uint32_t> sample_blocks(SamplingLedger& ledger, uint32_t count);

uint32_t remaining(const SamplingLedger& ledger);

// Clears consumption history and restarts the draw sequence under a new
// seed.  The dataset binding is kept.
void reset_ledger(SamplingLedger& ledger, uint64_t new_seed);

// The ledger file stores only the draw state (seed, process_id, consumed
// ids); the dataset binding is re-established from the manifest on load.
void save_ledger(const SamplingLedger& ledger,
                 const std::filesystem::path& path);
SamplingLedger load_ledger(const std::filesystem::path& path,
                           const Manifest& manifest);

}  // namespace rsp
