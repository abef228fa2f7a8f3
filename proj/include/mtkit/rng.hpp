#pragma once

// Deterministic PRNG used everywhere randomness matters. std::shuffle and
// std::uniform_int_distribution are implementation-defined, so seeded outputs
// would not be reproducible across standard libraries; this generator plus the
// Fisher-Yates below guarantee byte-identical datasets for a given seed on any
// platform.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace mtkit {

// splitmix64: tiny, well-mixed, passes BigCrush as a 64-bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) via rejection sampling; exact, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent named substream from a base seed. Tags keep the
// stream used for, say, the mono draw decoupled from the parallel draw, so
// adding one consumer never perturbs another.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  Rng mixer(seed ^ fnv1a64(tag));
  return mixer.next();
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  Rng mixer((seed ^ fnv1a64(tag)) + 0x632be59bd9b4e019ULL * (index + 1));
  return mixer.next();
}

// Fisher-Yates with our own generator, identical everywhere.
template <typename T>
void seeded_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  Rng rng(seed);
  seeded_shuffle(v, rng);
}

}  // namespace mtkit
