#include "merton/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "merton/errors.hpp"

namespace merton {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Inversion is exact and cheap while the mean is small.
constexpr double kInversionLimit = 10.0;

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
                     std::uint32_t substream_index, std::uint64_t counter)
    : seed_(master_seed), stream_(stream_index), substream_(substream_index), counter_(counter) {
  if (counter_ % kBufferWords != 0) refill(counter_ / kBufferWords);
}

void RngStream::refill(std::uint64_t group) {
  constexpr std::uint64_t kBlocks = kBufferWords / 2;
  if (group > (std::uint64_t{std::numeric_limits<std::uint32_t>::max()} + 1) / kBlocks - 1) {
    throw std::overflow_error("RngStream: substream exhausted (2^32 blocks)");
  }
  // Structure-of-arrays rounds over four independent blocks.
  std::uint32_t c0[kBlocks], c1[kBlocks], c2[kBlocks], c3[kBlocks];
  for (std::uint64_t j = 0; j < kBlocks; ++j) {
    c0[j] = static_cast<std::uint32_t>(group * kBlocks + j);
    c1[j] = substream_;
    c2[j] = static_cast<std::uint32_t>(stream_);
    c3[j] = static_cast<std::uint32_t>(stream_ >> 32);
  }
  std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
  for (int round = 0; round < 10; ++round) {
    for (std::uint64_t j = 0; j < kBlocks; ++j) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0[j];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2[j];
      const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[j] ^ k0;
      const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[j] ^ k1;
      c1[j] = static_cast<std::uint32_t>(p1);
      c3[j] = static_cast<std::uint32_t>(p0);
      c0[j] = n0;
      c2[j] = n2;
    }
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  for (std::uint64_t j = 0; j < kBlocks; ++j) {
    buffer_[2 * j] = (static_cast<std::uint64_t>(c1[j]) << 32) | c0[j];
    buffer_[2 * j + 1] = (static_cast<std::uint64_t>(c3[j]) << 32) | c2[j];
  }
}

double draw_standard_normal(RngStream& stream) {
  return boost::random::normal_distribution<double>{}(stream);
}

PoissonSampler::PoissonSampler(double mean) : mean_(mean), p_zero_(std::exp(-mean)) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw ConfigError("Poisson mean must be finite and >= 0");
  }
}

int PoissonSampler::operator()(RngStream& stream) const {
  if (mean_ == 0.0) return 0;
  if (mean_ >= kInversionLimit) {
    return boost::random::poisson_distribution<int, double>(mean_)(stream);
  }
  // Sequential search on the cumulative pmf.
  double u = stream.uniform();
  double p = p_zero_;
  int n = 0;
  while (u > p) {
    u -= p;
    ++n;
    p *= mean_ / n;
    if (p <= 0.0) break;
  }
  return n;
}

int draw_poisson(RngStream& stream, double mean) { return PoissonSampler(mean)(stream); }

}  // namespace merton
