#include "specfilter/core/rng.hpp"

#include <cmath>
#include <numbers>

namespace specfilter {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline void philox_round(std::array<std::uint32_t, 4>& x, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
}

inline std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, key[0], key[1]);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t sid)
    : pos_(4), gauss_cache_(0.0), has_gauss_cache_(false) {
  const std::uint64_t k = splitmix64(seed);
  const std::uint64_t s = splitmix64(sid ^ splitmix64(seed + 0x632BE59BD9B4E019ull));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  counter_ = {0u, 0u, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
}

void RandomStream::refill() {
  block_ = philox10(counter_, key_);
  pos_ = 0;
  if (++counter_[0] == 0) ++counter_[1];  // 64-bit block index; never wraps in practice
}

std::uint64_t RandomStream::next_u64() {
  if (pos_ > 2) refill();
  const std::uint64_t lo = block_[pos_];
  const std::uint64_t hi = block_[pos_ + 1];
  pos_ += 2;
  return lo | (hi << 32);
}

double RandomStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_uniform_open() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::next_gaussian() {
  if (has_gauss_cache_) {
    has_gauss_cache_ = false;
    return gauss_cache_;
  }
  const double u = next_uniform_open();
  const double v = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double theta = 2.0 * std::numbers::pi * v;
  gauss_cache_ = r * std::sin(theta);
  has_gauss_cache_ = true;
  return r * std::cos(theta);
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace specfilter
