#include "rsp/sampler.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rsp/error.hpp"
#include "rsp/prng.hpp"

namespace rsp {

SamplingLedger make_ledger(const Manifest& manifest,
                           const std::string& process_id, uint64_t seed) {
  SamplingLedger ledger;
  ledger.manifest_ref = manifest.dir.string();
  ledger.k = static_cast<uint32_t>(manifest.blocks.size());
  ledger.process_id = process_id;
  ledger.seed = seed;
  return ledger;
}

std::vector<uint32_t> sample_blocks(SamplingLedger& ledger, uint32_t count) {
  std::vector<uint32_t> pool;
  pool.reserve(ledger.k);
  for (uint32_t id = 1; id <= ledger.k; ++id) {
    if (!ledger.consumed.count(id)) pool.push_back(id);
  }
  if (count == 0) throw Error("sample_blocks: batch size must be positive");
  if (count > pool.size()) {
    std::ostringstream msg;
    msg << "sample_blocks: requested " << count << " blocks but only "
        << pool.size() << " remain";
    throw Error(msg.str());
  }
  // The draw stream is keyed off how many blocks were consumed before this
  // call, so a ledger reloaded from disk continues the exact same sequence.
  Philox gen(ledger.seed, ledger.consumed.size());
  std::vector<uint32_t> picked;
  picked.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint64_t j = i + gen.bounded(pool.size() - i);
    std::swap(pool[i], pool[j]);
    picked.push_back(pool[i]);
  }
  ledger.consumed.insert(picked.begin(), picked.end());
  ledger.draw_count += 1;
  return picked;
}

uint32_t remaining(const SamplingLedger& ledger) {
  return ledger.k - static_cast<uint32_t>(ledger.consumed.size());
}

void reset_ledger(SamplingLedger& ledger, uint64_t new_seed) {
  ledger.consumed.clear();
  ledger.draw_count = 0;
  ledger.seed = new_seed;
}

void save_ledger(const SamplingLedger& ledger,
                 const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write ledger: " + tmp.string());
    out << "seed " << ledger.seed << "\n";
    out << "process_id " << ledger.process_id << "\n";
    out << "consumed:";
    bool first = true;
    for (const uint32_t id : ledger.consumed) {
      out << (first ? " " : ",") << id;
      first = false;
    }
    out << "\n";
    if (!out.good()) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SamplingLedger load_ledger(const std::filesystem::path& path,
                           const Manifest& manifest) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ledger: " + path.string());
  SamplingLedger ledger;
  ledger.manifest_ref = manifest.dir.string();
  ledger.k = static_cast<uint32_t>(manifest.blocks.size());
  std::string line;
  bool saw_seed = false, saw_process = false, saw_consumed = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (key == "seed") {
      fields >> ledger.seed;
      saw_seed = true;
    } else if (key == "process_id") {
      fields >> ledger.process_id;
      saw_process = true;
    } else if (key == "consumed:") {
      std::string ids;
      fields >> ids;
      saw_consumed = true;
      std::istringstream parts(ids);
      std::string tok;
      while (std::getline(parts, tok, ',')) {
        if (tok.empty()) continue;
        const uint32_t id = static_cast<uint32_t>(std::stoul(tok));
        if (id < 1 || id > ledger.k) {
          throw Error("ledger references unknown block " + tok);
        }
        ledger.consumed.insert(id);
      }
    } else {
      throw Error("unrecognized ledger line: " + line);
    }
  }
  if (!saw_seed || !saw_process || !saw_consumed) {
    throw Error("incomplete ledger file: " + path.string());
  }
  return ledger;
}

}  // namespace rsp
