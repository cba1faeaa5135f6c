#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace pgspec {

// Philox4x32-10 (Salmon et al., SC'11). The 64-bit key is the seed and the
// upper half of the 128-bit counter is the stream id, so any (seed, stream)
// pair names an independent sequence of 2^64 blocks without any setup cost.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    counter_ = {0u, 0u, static_cast<std::uint32_t>(stream),
                static_cast<std::uint32_t>(stream >> 32)};
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) {
      refill();
      pos_ = 0;
    }
    const result_type out = (static_cast<result_type>(block_[2 * pos_ + 1]) << 32) | block_[2 * pos_];
    ++pos_;
    return out;
  }

  std::uint64_t blocks_generated() const { return blocks_; }

  static std::array<std::uint32_t, 4> bijection(std::array<std::uint32_t, 4> x,
                                                std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x[2];
      x = {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return x;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void refill() {
    block_ = bijection(counter_, key_);
    ++blocks_;
    if (++counter_[0] == 0) ++counter_[1];
  }

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 2;
  std::uint64_t blocks_ = 0;
};

// Stream-id layout: the top byte names the consumer so that chains, estimator
// draws and test streams derived from one user seed never collide.
enum class StreamDomain : std::uint8_t {
  kChain = 1,
  kEstimatorDraw = 2,
  kDiscreteDraw = 3,
  kValidation = 4,
};

constexpr std::uint64_t stream_id(StreamDomain domain, std::uint64_t index) {
  return (static_cast<std::uint64_t>(domain) << 56) | (index & 0x00FF'FFFF'FFFF'FFFFull);
}

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double exponential() { return -std::log(uniform()); }

  double normal() { return normal_(engine_); }

  double gamma(double shape) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(engine_);
  }

  std::uint64_t bits() { return engine_(); }

  std::uint64_t blocks_generated() const { return engine_.blocks_generated(); }

  Philox4x32& engine() { return engine_; }

 private:
  Philox4x32 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace pgspec
