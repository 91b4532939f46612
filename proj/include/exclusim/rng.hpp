#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace exclusim {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011).
/// Used only to derive independent stream seeds.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

/// xoshiro256** (Blackman & Vigna). Fast per-stream generator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  Xoshiro256() : s_{0x9E3779B97F4A7C15ull, 0xBF58476D1CE4E5B9ull, 0x94D049BB133111EBull, 1} {}
  explicit Xoshiro256(const std::array<std::uint64_t, 4>& s) : s_(s) {
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  //! Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  //! Uniform integer in [0, n), Lemire's nearly divisionless method.
  std::uint64_t below(std::uint64_t n) noexcept {
    __uint128_t m = static_cast<__uint128_t>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  //! Exponential with rate `rate`.
  double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_;
};

/// Identifies one random stream: a purpose tag, a time-grid index, a sample
/// index and a replica index.
struct StreamId {
  std::uint32_t tag = 0;
  std::uint32_t t_index = 0;
  std::uint32_t sample = 0;
  std::uint32_t replica = 0;
};

/// Derives the generator for `id` under `master_seed`. Streams for distinct ids
/// are independent and the mapping does not depend on scheduling.
inline Xoshiro256 make_stream(std::uint64_t master_seed, StreamId id) {
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(master_seed),
                                         static_cast<std::uint32_t>(master_seed >> 32)};
  // The top bit of the replica word selects the second half of the state.
  const auto a = philox4x32({id.tag, id.t_index, id.sample, id.replica & 0x7FFFFFFFu}, key);
  const auto b = philox4x32({id.tag, id.t_index, id.sample, id.replica | 0x80000000u}, key);
  auto join = [](std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  };
  return Xoshiro256({join(a[0], a[1]), join(a[2], a[3]), join(b[0], b[1]), join(b[2], b[3])});
}

namespace stream_tag {
inline constexpr std::uint32_t initial = 1;
inline constexpr std::uint32_t replica = 2;
inline constexpr std::uint32_t kernel = 3;
inline constexpr std::uint32_t martingale = 4;
inline constexpr std::uint32_t lanczos = 5;
inline constexpr std::uint32_t checks = 6;
inline constexpr std::uint32_t user = 7;
}  // namespace stream_tag

}  // namespace exclusim
