#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace specfilter {

// Counter-based stream built on Philox4x32-10. A stream is addressed by
// (seed, stream_id); draws depend only on that address and the number of
// values already consumed, never on which thread runs it. This is what makes
// Monte Carlo results independent of the parallel schedule: replication r
// always owns stream (seed, purpose, r).
class RandomStream {
public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // uniform on [0,1), 53-bit resolution
  double next_uniform();
  // uniform on (0,1], safe as a log() argument
  double next_uniform_open();
  // standard normal via Box-Muller (second value of each pair is cached)
  double next_gaussian();

private:
  void refill();

  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> block_;
  int pos_;
  double gauss_cache_;
  bool has_gauss_cache_;
};

// Stream-id namespaces, so that e.g. epsilon draws of replication r and xi
// draws of replication r never collide.
enum class StreamPurpose : std::uint64_t {
  epsilon = 1,
  xi = 2,
  instance_gen = 3,
  tail_cert = 4,
  ambient = 5,
  xi_resample = 6,
  truncation = 7,
};

inline std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t index) {
  return (static_cast<std::uint64_t>(purpose) << 48) ^ (index & 0xFFFFFFFFFFFFull);
}

inline RandomStream make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
  return RandomStream(seed, stream_id(purpose, index));
}

// Deterministic pairwise reduction; result is independent of thread count
// because it only ever sees the completed value array.
double pairwise_sum(std::span<const double> values);

}  // namespace specfilter
