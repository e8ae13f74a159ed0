#pragma once

// Reproducible randomness.
//
// Every stochastic routine draws from std::mt19937_64, whose output sequence is
// fixed by the C++ standard. The standard <random> distributions are NOT used
// because their algorithms are implementation-defined; the conversions below
// are spelled out so any implementation can reproduce a run from its seed:
//
//   uniform01()      = (u64 >> 11) * 2^-53                       in [0, 1)
//   uniform_below(n) = Lemire multiply-shift with rejection      in [0, n)
//   derive_seed(s,k) = splitmix64(s ^ splitmix64(k + 0x632BE59BD9B4E019))
//
// Shuffles are Fisher-Yates: for i = n down to 2, swap slot i-1 with slot
// uniform_below(i).

#include <cstdint>
#include <random>
#include <utility>

namespace emoseq {

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(Seed, Seed) = default;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent stream `k` of seed `s`; used for per-thread and per-replicate generators.
constexpr Seed derive_seed(Seed s, std::uint64_t k) noexcept {
  return {splitmix64(s.value ^ splitmix64(k + 0x632BE59BD9B4E019ull))};
}

/// Seed drawn from std::random_device, for runs where the user supplied none.
Seed entropy_seed();

class Rng {
public:
  explicit Rng(Seed seed) : engine_(seed.value) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a logarithm argument.
  double uniform_open_low() { return 1.0 - uniform01(); }

  std::uint64_t uniform_below(std::uint64_t n) {
    // Lemire, "Fast Random Integer Generation in an Interval" (2019).
    std::uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = engine_();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = uniform_below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace emoseq
