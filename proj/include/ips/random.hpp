#pragma once

// Counter-based random numbers. Every draw is a pure function of a 64-bit key
// and a 128-bit counter, so results do not depend on query order or threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace ips {

/// Philox4x32-10 block function (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// SplitMix64 finalizer; used to fold identifiers into keys.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Order-sensitive hash of a sequence of words.
constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6A09E667F3BCC909ull;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

/// Maps 64 random bits to a double in the open interval (0, 1).
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Domain tags separating independent uses of the same key.
enum class Stream : std::uint32_t {
  Noise = 1,
  Offspring = 2,
  InitialState = 3,
  Generator = 4,
  Replica = 5,
  Sampling = 6,
};

/// Sequential counter-based stream: draw i of stream (key, tag, a, b) is fixed.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, Stream tag, std::uint32_t a = 0, std::uint32_t b = 0)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        ctr_{static_cast<std::uint32_t>(tag), a, b, 0} {}

  std::uint64_t next_u64() {
    if (have_ == 0) {
      block_ = Philox4x32::apply(ctr_, key_);
      ++ctr_[3];
      if (ctr_[3] == 0) ++ctr_[2];
      have_ = 2;
    }
    const int i = 2 - have_;
    --have_;
    return (std::uint64_t{block_[2 * i]} << 32) | block_[2 * i + 1];
  }

  /// Uniform on (0, 1).
  double uniform() { return to_unit_open(next_u64()); }

  /// Exponential with the given rate (> 0).
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // UniformRandomBitGenerator interface, for std::shuffle-style algorithms.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int have_ = 0;
};

/// One-shot uniform (0,1) keyed by (key, tag, a, b).
inline double keyed_uniform(std::uint64_t key, Stream tag, std::uint32_t a = 0, std::uint32_t b = 0) {
  CounterRng rng(key, tag, a, b);
  return rng.uniform();
}

/// Seed of replica `index` derived from a base seed; independent of replica count.
inline std::uint64_t replica_seed(std::uint64_t base, std::uint64_t index) {
  return hash_words({base, static_cast<std::uint64_t>(Stream::Replica), index});
}

}  // namespace ips
