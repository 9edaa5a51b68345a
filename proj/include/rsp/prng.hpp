#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace rsp {

// Philox4x32-10 counter-based generator. State is a 128-bit counter plus a
// 64-bit key; independent streams share a seed and differ in the stream id,
// which occupies the upper counter lanes. Deterministic across platforms.
class Philox {
 public:
  explicit Philox(uint64_t seed, uint64_t stream = 0)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        stream_(stream) {}

  // Raw 4x32 block function, exposed for known-answer tests.
  static std::array<uint32_t, 4> block(const std::array<uint32_t, 4>& counter,
                                       const std::array<uint32_t, 2>& key) {
    std::array<uint32_t, 4> c = counter;
    uint32_t k0 = key[0];
    uint32_t k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = kMul0 * static_cast<uint64_t>(c[0]);
      const uint64_t p1 = kMul1 * static_cast<uint64_t>(c[2]);
      const uint32_t lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
      const uint32_t lo1 = static_cast<uint32_t>(p1);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
      c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return c;
  }

  uint32_t next_u32() {
    if (index_ == 4) refill();
    return buffer_[index_++];
  }

  uint64_t next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n) without modulo bias (rejection sampling). n >= 1.
  uint64_t bounded(uint64_t n) {
    const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * next_double();
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  uint64_t stream() const { return stream_; }

 private:
  void refill() {
    buffer_ = block({static_cast<uint32_t>(position_),
                     static_cast<uint32_t>(position_ >> 32),
                     static_cast<uint32_t>(stream_),
                     static_cast<uint32_t>(stream_ >> 32)},
                    key_);
    ++position_;
    index_ = 0;
  }

  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  std::array<uint32_t, 2> key_;
  uint64_t stream_;
  uint64_t position_ = 0;
  std::array<uint32_t, 4> buffer_{};
  int index_ = 4;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

// Counter-based seed split: sub-seed i of a master seed.
inline uint64_t derive_seed(uint64_t master_seed, uint64_t tag) {
  return Philox(master_seed, tag).next_u64();
}

// Uniform in-place shuffle (Fisher-Yates). swap(i, j) is invoked with i > j.
template <typename Swap>
void fisher_yates(size_t count, Philox& gen, Swap&& swap) {
  for (size_t i = count; i > 1; --i) {
    const size_t j = static_cast<size_t>(gen.bounded(i));
    if (j != i - 1) swap(i - 1, j);
  }
}

template <typename T>
void fisher_yates(std::span<T> values, Philox& gen) {
  fisher_yates(values.size(), gen,
               [&](size_t i, size_t j) { std::swap(values[i], values[j]); });
}

}  // namespace rsp
