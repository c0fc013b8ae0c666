#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace simplexscan {

// Counter-based random stream (Philox4x32-10).  A stream is identified by a
// 64-bit key; draws walk a 64-bit counter through the keyed permutation, so
// the i-th draw of a stream is a pure function of (key, i).  Substreams fork
// by mixing a tag into the key, which makes results independent of how work
// is partitioned across threads: every (operation, sample index) pair owns a
// private stream regardless of scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(seed) {}

  // Named fork; children with distinct tags are decorrelated from each other
  // and from the parent's own draw sequence.
  RngStream substream(std::uint64_t tag) const {
    return RngStream(mix64(key_ ^ mix64(tag + 0x9e3779b97f4a7c15ull)));
  }
  RngStream substream(std::string_view name) const {
    // FNV-1a 64 over the name, then the usual key mix.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : name) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return substream(h);
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    if (block_pos_ == 0) {
      block_ = philox(counter_++, key_);
      block_pos_ = 1;
      return (std::uint64_t(block_[1]) << 32) | block_[0];
    }
    block_pos_ = 0;
    return (std::uint64_t(block_[3]) << 32) | block_[2];
  }

  // Uniform on [0,1) with 53 random bits.
  double next_uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (pairs cached per stream instance).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  // Sample from the standard profile g(x) = exp(-pi x^2): std = 1/sqrt(2 pi).
  double next_gaussian_g() {
    return next_normal() * 0x1.9884533d43651p-2;  // 1/sqrt(2 pi)
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  static std::array<std::uint32_t, 4> philox(std::uint64_t counter,
                                             std::uint64_t key) {
    std::uint32_t c0 = std::uint32_t(counter);
    std::uint32_t c1 = std::uint32_t(counter >> 32);
    std::uint32_t c2 = 0u, c3 = 0u;
    std::uint32_t k0 = std::uint32_t(key);
    std::uint32_t k1 = std::uint32_t(key >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * c0;
      const std::uint64_t p1 = 0xCD9E8D57ull * c2;
      const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
      const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {c0, c1, c2, c3};
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace simplexscan
