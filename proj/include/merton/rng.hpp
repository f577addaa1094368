#pragma once

#include <array>
#include <cstdint>

namespace merton {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream addressed by (master seed, stream, substream).
///
/// The stream is a plain value: copying it forks an identical sequence, and
/// two streams with the same address and counter produce the same words no
/// matter which thread draws them. The Philox key is the master seed; the
/// 128-bit Philox counter packs the block index (32 bits), the substream
/// (32 bits) and the stream index (64 bits).
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
            std::uint32_t substream_index, std::uint64_t counter = 0);

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  /// Next 64-bit word; advances the counter by one.
  result_type operator()() {
    const auto slot = static_cast<unsigned>(counter_ % kBufferWords);
    if (slot == 0) refill(counter_ / kBufferWords);
    ++counter_;
    return buffer_[slot];
  }

  /// Uniform double on the open interval (0, 1) with 53 random bits.
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_; }
  std::uint32_t substream_index() const noexcept { return substream_; }
  /// Number of 64-bit words drawn so far.
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const RngStream& a, const RngStream& b) noexcept {
    return a.seed_ == b.seed_ && a.stream_ == b.stream_ && a.substream_ == b.substream_ &&
           a.counter_ == b.counter_;
  }

 private:
  // Words are produced four Philox blocks at a time; the output sequence is
  // the same as drawing the blocks one by one.
  static constexpr std::uint64_t kBufferWords = 8;
  void refill(std::uint64_t group);

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint32_t substream_;
  std::uint64_t counter_;
  std::array<std::uint64_t, kBufferWords> buffer_{};
};

/// Standard normal variate (ziggurat).
double draw_standard_normal(RngStream& stream);

/// Poisson sampler with the mean fixed up front, so the hot path carries no
/// transcendental setup. A zero mean returns 0 without consuming draws.
class PoissonSampler {
 public:
  explicit PoissonSampler(double mean);

  int operator()(RngStream& stream) const;
  double mean() const noexcept { return mean_; }

 private:
  double mean_;
  double p_zero_;
};

/// Poisson variate with the given mean (>= 0).
int draw_poisson(RngStream& stream, double mean);

}  // namespace merton
