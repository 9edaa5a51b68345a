#include "rsp/block_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rsp/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "block files are little-endian; add byte swapping for this host");

namespace rsp {

namespace {

constexpr uint32_t kLabelAbsent = 0xFFFFFFFFu;

std::string block_file_name(uint32_t block_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "block_%05u.bin", block_id);
  return buf;
}

std::string kind_name(DatasetKind kind) {
  return kind == DatasetKind::original ? "original" : "rsp";
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    const uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("manifest: bad " + what + " value '" + s + "'");
  }
}

}  // namespace

uint32_t crc32_bytes(std::span<const std::byte> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  size_t off = 0;
  while (off < bytes.size()) {
    const size_t chunk = std::min<size_t>(bytes.size() - off, 1u << 30);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off),
                  static_cast<uInt>(chunk));
    off += chunk;
  }
  return static_cast<uint32_t>(crc);
}

std::vector<std::byte> encode_records(const RecordBatch& batch) {
  const size_t m = batch.feature_count();
  std::vector<std::byte> out;
  out.reserve(batch.size() * (m * 8 + 4));
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto row = batch.row(i);
    const size_t at = out.size();
    out.resize(at + m * 8);
    std::memcpy(out.data() + at, row.data(), m * 8);
    uint32_t code = kLabelAbsent;
    if (batch.labeled() && batch.label(i) != kNoLabel) {
      code = static_cast<uint32_t>(batch.label(i));
    }
    const size_t lat = out.size();
    out.resize(lat + 4);
    std::memcpy(out.data() + lat, &code, 4);
  }
  return out;
}

RecordBatch decode_records(const Schema& schema,
                           std::span<const std::byte> bytes) {
  const size_t m = schema.feature_count();
  const size_t rec_bytes = schema.record_bytes();
  if (bytes.size() % rec_bytes != 0) {
    throw Error("block payload length is not a multiple of the record size");
  }
  const size_t n = bytes.size() / rec_bytes;
  RecordBatch batch(m, schema.has_label());
  batch.reserve(n);
  auto& feats = batch.mutable_features();
  feats.resize(n * m);
  for (size_t i = 0; i < n; ++i) {
    const std::byte* rec = bytes.data() + i * rec_bytes;
    std::memcpy(feats.data() + i * m, rec, m * 8);
    if (schema.has_label()) {
      uint32_t code;
      std::memcpy(&code, rec + m * 8, 4);
      batch.mutable_labels().push_back(
          code == kLabelAbsent ? kNoLabel : static_cast<int32_t>(code));
    }
  }
  return batch;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed on '" + path.string() + "'");
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::byte> bytes(static_cast<size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw Error("read failed on '" + path.string() + "'");
  return bytes;
}

const BlockMeta* Manifest::find_block(uint32_t block_id) const {
  for (const auto& b : blocks) {
    if (b.block_id == block_id) return &b;
  }
  return nullptr;
}

Manifest create_dataset(const std::filesystem::path& dir, const Schema& schema,
                        RecordSource& records, uint64_t block_size) {
  schema.validate();
  if (block_size == 0) throw Error("create_dataset: block_size must be >= 1");
  std::filesystem::create_directories(dir);

  Manifest manifest;
  manifest.kind = DatasetKind::original;
  manifest.schema = schema;
  manifest.dir = dir;

  const size_t m = schema.feature_count();
  RecordBatch pending(m, schema.has_label());
  pending.reserve(block_size);
  uint64_t index = 0;
  uint32_t next_id = 1;

  auto flush = [&] {
    if (pending.size() == 0) return;
    BlockMeta meta;
    meta.block_id = next_id++;
    meta.record_count = pending.size();
    meta.path = block_file_name(meta.block_id);
    const auto bytes = encode_records(pending);
    meta.checksum = crc32_bytes(bytes);
    write_file(dir / meta.path, bytes);
    manifest.total_records += meta.record_count;
    manifest.blocks.push_back(std::move(meta));
    pending = RecordBatch(m, schema.has_label());
    pending.reserve(block_size);
  };

  Record r;
  while (records.next(r)) {
    if (r.features.size() != m) {
      throw Error("record " + std::to_string(index) + ": expected " +
                  std::to_string(m) + " features, got " +
                  std::to_string(r.features.size()));
    }
    for (const double v : r.features) {
      if (!std::isfinite(v)) {
        throw Error("record " + std::to_string(index) +
                    ": non-finite feature value");
      }
    }
    if (schema.has_label()) {
      if (!r.label || !schema.label_declared(*r.label)) {
        throw Error("record " + std::to_string(index) +
                    ": label missing or not in declared categories");
      }
    }
    pending.append_record(r);
    if (pending.size() == block_size) flush();
    ++index;
  }
  flush();
  if (manifest.blocks.empty()) {
    throw Error("create_dataset: record stream is empty");
  }
  manifest.params.p = manifest.blocks.size();
  write_manifest(manifest);
  return manifest;
}

RecordBatch read_block(const Manifest& manifest, uint32_t block_id) {
  const BlockMeta* meta = manifest.find_block(block_id);
  if (meta == nullptr) {
    throw Error("unknown block_id " + std::to_string(block_id));
  }
  const auto bytes = read_file(manifest.block_path(*meta));
  if (crc32_bytes(bytes) != meta->checksum) {
    throw Error("checksum mismatch on block " + std::to_string(block_id) +
                " (" + meta->path + "): corruption detected");
  }
  RecordBatch batch = decode_records(manifest.schema, bytes);
  if (batch.size() != meta->record_count) {
    throw Error("block " + std::to_string(block_id) + " holds " +
                std::to_string(batch.size()) + " records, manifest says " +
                std::to_string(meta->record_count));
  }
  return batch;
}

RecordBatch read_all(const Manifest& manifest) {
  RecordBatch all(manifest.schema.feature_count(), manifest.schema.has_label());
  all.reserve(manifest.total_records);
  for (const auto& meta : manifest.blocks) {
    const RecordBatch block = read_block(manifest, meta.block_id);
    all.append_rows(block, 0, block.size());
  }
  return all;
}

void write_manifest(const Manifest& manifest) {
  std::ostringstream out;
  out << "kind " << kind_name(manifest.kind) << "\n";
  out << "total_records " << manifest.total_records << "\n";
  out << "feature_count " << manifest.schema.feature_count() << "\n";
  out << "feature_names ";
  for (size_t i = 0; i < manifest.schema.feature_names.size(); ++i) {
    if (i > 0) out << ",";
    out << manifest.schema.feature_names[i];
  }
  out << "\n";
  out << "label_categories ";
  if (manifest.schema.has_label()) {
    const auto& cats = *manifest.schema.label_categories;
    for (size_t i = 0; i < cats.size(); ++i) {
      if (i > 0) out << ",";
      out << cats[i];
    }
  } else {
    out << "none";
  }
  out << "\n";
  out << "params.P " << manifest.params.p << "\n";
  out << "params.K " << manifest.params.k << "\n";
  out << "params.n " << manifest.params.n << "\n";
  out << "params.delta " << manifest.params.delta << "\n";
  out << "params.seed " << manifest.params.seed << "\n";
  out << "source " << (manifest.source.empty() ? "none" : manifest.source)
      << "\n";
  for (const auto& b : manifest.blocks) {
    char crc[16];
    std::snprintf(crc, sizeof(crc), "%08x", b.checksum);
    out << b.block_id << " " << b.record_count << " " << b.path << " " << crc
        << "\n";
  }

  const auto tmp = manifest.dir / "manifest.txt.tmp";
  const auto final_path = manifest.dir / "manifest.txt";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw Error("cannot write manifest at '" + tmp.string() + "'");
    f << out.str();
  }
  std::filesystem::rename(tmp, final_path);
}

Manifest load_manifest(const std::filesystem::path& dir_or_file) {
  namespace fs = std::filesystem;
  fs::path file = dir_or_file;
  if (fs::is_directory(file)) file /= "manifest.txt";
  std::ifstream in(file);
  if (!in) throw Error("cannot open manifest '" + file.string() + "'");

  Manifest manifest;
  manifest.dir = file.parent_path();
  std::string line;
  size_t feature_count = 0;
  bool in_blocks = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t sp = line.find(' ');
    const std::string head = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (!in_blocks) {
      if (head == "kind") {
        if (rest == "original") {
          manifest.kind = DatasetKind::original;
        } else if (rest == "rsp") {
          manifest.kind = DatasetKind::rsp;
        } else {
          throw Error("manifest: unknown kind '" + rest + "'");
        }
        continue;
      }
      if (head == "total_records") {
        manifest.total_records = parse_u64(rest, "total_records");
        continue;
      }
      if (head == "feature_count") {
        feature_count = parse_u64(rest, "feature_count");
        continue;
      }
      if (head == "feature_names") {
        manifest.schema.feature_names = split(rest, ',');
        continue;
      }
      if (head == "label_categories") {
        if (rest != "none") {
          std::vector<int32_t> cats;
          for (const auto& c : split(rest, ',')) {
            cats.push_back(
                static_cast<int32_t>(parse_u64(c, "label category")));
          }
          manifest.schema.label_categories = std::move(cats);
        }
        continue;
      }
      if (head == "params.P") { manifest.params.p = parse_u64(rest, "P"); continue; }
      if (head == "params.K") { manifest.params.k = parse_u64(rest, "K"); continue; }
      if (head == "params.n") { manifest.params.n = parse_u64(rest, "n"); continue; }
      if (head == "params.delta") { manifest.params.delta = parse_u64(rest, "delta"); continue; }
      if (head == "params.seed") { manifest.params.seed = parse_u64(rest, "seed"); continue; }
      if (head == "source") {
        manifest.source = rest == "none" ? "" : rest;
        in_blocks = true;  // block table follows
        continue;
      }
      throw Error("manifest: unexpected header line '" + line + "'");
    }
    // block line: id count path checksum
    const auto parts = split(line, ' ');
    if (parts.size() != 4) {
      throw Error("manifest: malformed block line '" + line + "'");
    }
    BlockMeta meta;
    meta.block_id = static_cast<uint32_t>(parse_u64(parts[0], "block_id"));
    meta.record_count = parse_u64(parts[1], "record_count");
    meta.path = parts[2];
    meta.checksum =
        static_cast<uint32_t>(std::stoul(parts[3], nullptr, 16));
    manifest.blocks.push_back(std::move(meta));
  }
  if (manifest.schema.feature_names.size() != feature_count) {
    throw Error("manifest: feature_count does not match feature_names");
  }
  manifest.schema.validate();
  return manifest;
}

namespace {

// Lexicographic record order over (features, label); exact on bit patterns.
struct RecordLess {
  const RecordBatch& batch;
  bool operator()(uint32_t a, uint32_t b) const {
    const auto ra = batch.row(a);
    const auto rb = batch.row(b);
    for (size_t f = 0; f < ra.size(); ++f) {
      if (ra[f] < rb[f]) return true;
      if (ra[f] > rb[f]) return false;
    }
    return batch.label(a) < batch.label(b);
  }
};

bool sorted_equal(const RecordBatch& a, const RecordBatch& b) {
  if (a.size() != b.size() || a.feature_count() != b.feature_count() ||
      a.labeled() != b.labeled()) {
    return false;
  }
  std::vector<uint32_t> ia(a.size()), ib(b.size());
  std::iota(ia.begin(), ia.end(), 0u);
  std::iota(ib.begin(), ib.end(), 0u);
  std::sort(ia.begin(), ia.end(), RecordLess{a});
  std::sort(ib.begin(), ib.end(), RecordLess{b});
  for (size_t i = 0; i < ia.size(); ++i) {
    const auto ra = a.row(ia[i]);
    const auto rb = b.row(ib[i]);
    if (!std::equal(ra.begin(), ra.end(), rb.begin())) return false;
    if (a.label(ia[i]) != b.label(ib[i])) return false;
  }
  return true;
}

}  // namespace

bool records_multiset_equal(const Manifest& a, const Manifest& b) {
  return sorted_equal(read_all(a), read_all(b));
}

bool ValidationReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ValidationEntry& e) { return e.pass; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << (e.pass ? "PASS " : "FAIL ") << e.check;
    if (!e.detail.empty()) out << ": " << e.detail;
    out << "\n";
  }
  return out.str();
}

ValidationReport validate_manifest(const Manifest& manifest) {
  ValidationReport report;
  auto add = [&](const std::string& check, bool pass,
                 const std::string& detail = "") {
    report.entries.push_back({check, pass, detail});
  };

  // Block ids must be 1..B, unique and contiguous.
  {
    std::vector<uint32_t> ids;
    ids.reserve(manifest.blocks.size());
    for (const auto& b : manifest.blocks) ids.push_back(b.block_id);
    std::sort(ids.begin(), ids.end());
    bool contiguous = !ids.empty();
    for (size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] != i + 1) contiguous = false;
    }
    add("block ids contiguous", contiguous);
  }

  uint64_t counted = 0;
  for (const auto& meta : manifest.blocks) {
    const auto path = manifest.block_path(meta);
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    const std::string name = "block " + std::to_string(meta.block_id);
    if (ec) {
      add(name + " integrity", false, "missing file " + meta.path);
      continue;
    }
    const uint64_t expected =
        meta.record_count * manifest.schema.record_bytes();
    if (size != expected) {
      add(name + " integrity", false,
          "file " + meta.path + " has " + std::to_string(size) +
              " bytes, expected " + std::to_string(expected));
      continue;
    }
    const auto bytes = read_file(path);
    if (crc32_bytes(bytes) != meta.checksum) {
      add(name + " integrity", false, "checksum mismatch on " + meta.path);
      continue;
    }
    add(name + " integrity", true);
    counted += meta.record_count;
  }

  add("total_records consistent", counted == manifest.total_records,
      "blocks hold " + std::to_string(counted) + ", manifest says " +
          std::to_string(manifest.total_records));

  if (manifest.kind == DatasetKind::rsp) {
    const auto& p = manifest.params;
    const bool params_set = p.k >= 1 && p.n >= 1 && p.delta >= 1 && p.p >= 1;
    add("rsp params set", params_set);
    add("rsp block count matches K", manifest.blocks.size() == p.k);
    if (params_set && !manifest.blocks.empty()) {
      uint64_t lo = manifest.blocks.front().record_count;
      uint64_t hi = lo;
      for (const auto& b : manifest.blocks) {
        lo = std::min(lo, b.record_count);
        hi = std::max(hi, b.record_count);
      }
      // Even slicing gives exactly n = P * delta records per block; the
      // general policy spreads remainders, at most one extra per slice.
      if (p.n == p.p * p.delta && manifest.total_records == p.n * p.k) {
        add("rsp block sizes", lo == p.n && hi == p.n,
            "expected " + std::to_string(p.n) + " records per block");
      } else {
        add("rsp block sizes", hi - lo <= p.p,
            "sizes range " + std::to_string(lo) + ".." + std::to_string(hi));
      }
    }
    if (!manifest.source.empty()) {
      std::filesystem::path src(manifest.source);
      if (src.is_relative()) src = manifest.dir / src;
      try {
        const Manifest parent = load_manifest(src);
        add("source multiset equality",
            records_multiset_equal(manifest, parent));
      } catch (const std::exception& e) {
        add("source multiset equality", false, e.what());
      }
    }
  }
  return report;
}

}  // namespace rsp
