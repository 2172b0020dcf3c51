#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace cityaccess {

// Stream tags keep substreams derived from the same scenario seed disjoint.
enum class StreamTag : std::uint64_t {
  kAccessDraw = 1,
  kMatchmaking = 2,
  kLedgerTips = 3,
  kSettlement = 4,
  kTest = 99,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keyed hash of (seed, tag, a, b). Used both as a substream seed and, through
// counter_uniform, as a stateless random number for per-driver draws.
constexpr std::uint64_t derive_key(std::uint64_t seed, StreamTag tag, std::uint64_t a,
                                   std::uint64_t b = 0) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

// 53-bit uniform in [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

constexpr double counter_uniform(std::uint64_t seed, StreamTag tag, std::uint64_t a,
                                 std::uint64_t b) noexcept {
  return to_unit(derive_key(seed, tag, a, b));
}

/// Sequential random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the helpers below avoid the
/// implementation-defined std:: distributions so that results are
/// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, StreamTag tag, std::uint64_t a, std::uint64_t b = 0)
      : engine_(derive_key(seed, tag, a, b)) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return to_unit(engine_()); }

  bool bernoulli(double p) { return uniform() < p; }

  __extension__ using U128 = unsigned __int128;

  // Unbiased integer in [0, bound) (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    U128 m = static_cast<U128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<U128>(engine_()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cityaccess
