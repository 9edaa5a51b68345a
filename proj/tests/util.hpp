#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include "rsp/block_store.hpp"
#include "rsp/record.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rsp_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline rsp::Schema schema_of(size_t features, bool labeled,
                             int32_t classes = 2) {
  rsp::Schema s;
  for (size_t f = 1; f <= features; ++f) {
    s.feature_names.push_back("f" + std::to_string(f));
  }
  if (labeled) {
    std::vector<int32_t> codes;
    for (int32_t c = 0; c < classes; ++c) codes.push_back(c);
    s.label_categories = std::move(codes);
  }
  return s;
}

// Single-feature unlabeled batch from a plain list of values.
inline rsp::RecordBatch batch_of(std::initializer_list<double> values) {
  rsp::RecordBatch b(1, false);
  for (const double v : values) b.append({&v, 1});
  return b;
}

}  // namespace testutil
