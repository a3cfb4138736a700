#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tpp {

// Counter-based generator: Philox4x64 with 10 rounds, keyed by
// (seed, stream).  The same (seed, stream) pair always reproduces the same
// draw sequence, and distinct stream indices give independent streams under
// one seed, so callers can fan work out across threads and still get
// bit-identical results.  Output blocks match numpy.random.Philox(key=...).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // uniform on [0, 1) with 53-bit resolution
  double uniform();

  // uniform on (0, 1); safe under log
  double uniform_open();

  // uniform on {0, ..., n - 1}; n must be positive
  std::uint64_t next_below(std::uint64_t n);

  // unit-rate exponential
  double exponential() { return -std::log(uniform_open()); }

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream() const { return key_[1]; }

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_;
  int pos_;
};

// Stream-space layout used across the library so that no two purposes ever
// share a (seed, stream) pair.  The low bits carry the per-purpose index.
namespace streams {
inline constexpr std::uint64_t kPolicyInit = 1ULL << 60;
inline constexpr std::uint64_t kBandwidth = 2ULL << 60;

// dataset simulation: sequence i uses stream i directly
inline std::uint64_t dataset_sequence(std::uint64_t i) { return i; }

// training iteration k, purpose p (0 = expert batch, 1 = bandwidth,
// 2 + m = rollout m)
inline std::uint64_t train(std::uint64_t iteration, std::uint64_t purpose) {
  return (3ULL << 60) | (iteration << 22) | purpose;
}

// likelihood fitting iteration k (minibatch selection)
inline std::uint64_t fit(std::uint64_t iteration) {
  return (4ULL << 60) | iteration;
}
}  // namespace streams

}  // namespace tpp
