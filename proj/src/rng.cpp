#include "rng.hpp"

#include "errors.hpp"

namespace tpp {
namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : key_{seed, stream}, counter_{0, 0, 0, 0}, block_{0, 0, 0, 0}, pos_(4) {}

void RngStream::refill() {
  // 256-bit little-endian counter, incremented before each block as the
  // reference stream does
  if (++counter_[0] == 0)
    if (++counter_[1] == 0)
      if (++counter_[2] == 0) ++counter_[3];
  std::uint64_t c0 = counter_[0], c1 = counter_[1];
  std::uint64_t c2 = counter_[2], c3 = counter_[3];
  std::uint64_t k0 = key_[0], k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c0, hi0, lo0);
    mulhilo(kMul1, c2, hi1, lo1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  block_ = {c0, c1, c2, c3};
  pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (pos_ == 4) refill();
  return block_[pos_++];
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "next_below: n must be positive");
  // rejection sampling over the largest multiple of n that fits in 64 bits
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  for (;;) {
    std::uint64_t x = next_u64();
    if (x <= limit) return x % n;
  }
}

}  // namespace tpp
