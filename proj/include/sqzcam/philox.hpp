#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A stream is addressed by a 64-bit key and a 96-bit stream position
// (stream id, 64-bit substream index). Within a stream a 32-bit block
// counter advances; each block yields four 32-bit words. Any two distinct
// (key, stream, substream) triples produce independent sequences, so frame
// f of a batch can be generated without touching frames 0..f-1.

#include <array>
#include <cstdint>
#include <limits>

namespace sqzcam {

class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() = default;

  Philox4x32(std::uint64_t seed, std::uint32_t stream, std::uint64_t substream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0, stream, static_cast<std::uint32_t>(substream),
             static_cast<std::uint32_t>(substream >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      buf_ = generate(ctr_, key_);
      ++ctr_[0];
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Number of 32-bit words drawn so far.
  std::uint64_t words_drawn() const { return std::uint64_t{ctr_[0]} * 4 - (4 - pos_); }

  /// The raw bijection: ten Philox rounds of `ctr` under `key`.
  static constexpr Block generate(Block ctr, Key key) {
    ctr = round(ctr, key);
    for (int i = 1; i < 10; ++i) {
      key[0] += kW0;
      key[1] += kW1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;

  static constexpr Block round(const Block& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  Key key_{0, 0};
  Block ctr_{0, 0, 0, 0};
  Block buf_{};
  int pos_ = 4;
};

/// Uniform double in [0, 1) with 53 random bits, built from two 32-bit words.
template <class Engine>
double uniform01(Engine& eng) {
  const std::uint64_t hi = static_cast<std::uint32_t>(eng());
  const std::uint64_t lo = static_cast<std::uint32_t>(eng());
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace sqzcam
