#pragma once

// Temperature-based language balancing: p_l = q_l^(1/tau) / sum_k q_k^(1/tau)
// with q_l = D_l / sum_k D_k, realized deterministically by largest-remainder
// apportionment plus a seeded epoch-cycling draw.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtkit/rng.hpp"
#include "mtkit/util.hpp"

namespace mtkit {

struct SamplingConfig {
  double tau = 30.0;
  std::uint64_t target_size = 0;
  std::uint64_t seed = 0;
  enum class Unit { examples, tokens } unit = Unit::examples;
};

// p_l for each language. Sizes must be positive; tau > 0. Because the
// normalizer sum(D) cancels, this is computed as pow(D_l, 1/tau) /
// sum_k pow(D_k, 1/tau), which keeps simple ratios exact in IEEE arithmetic
// (e.g. {900, 100} at tau=2 -> {0.75, 0.25}).
std::map<std::string, double> temperature_distribution(const std::map<std::string, double>& sizes,
                                                       double tau);

// Largest-remainder apportionment of target_size by the probabilities.
// Ties on equal remainders break by lexicographic key, smallest first.
std::map<std::string, std::uint64_t> allocate(const std::map<std::string, double>& probabilities,
                                              std::uint64_t target_size);

// For each language, takes counts[l] records by cycling a seeded shuffle of
// that language's list: no record repeats before the whole list is exhausted,
// so multiplicities are ceil/floor of n_l / D_l (epoch-wise upsampling). The
// returned union is itself seeded-shuffled. Languages iterate in sorted code
// order; determinism depends only on (corpus, counts, seed).
template <typename T>
std::vector<T> draw(const std::map<std::string, std::vector<T>>& corpus,
                    const std::map<std::string, std::uint64_t>& counts, std::uint64_t seed) {
  std::vector<T> out;
  for (const auto& [lang, n] : counts) {
    if (n == 0) continue;
    auto it = corpus.find(lang);
    if (it == corpus.end() || it->second.empty())
      throw data_error("sampling draw: language \"" + lang + "\" has no records");
    std::vector<std::size_t> order(it->second.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    seeded_shuffle(order, derive_seed(seed, lang));
    for (std::uint64_t i = 0; i < n; ++i)
      out.push_back(it->second[order[i % order.size()]]);
  }
  seeded_shuffle(out, derive_seed(seed, "union"));
  return out;
}

// allocate() variant with per-language capacity caps: no language exceeds its
// cap; any deficit is re-apportioned among languages with headroom. The total
// is min(target_size, sum of caps). Used where upsampling is not allowed
// (e.g. each parallel pair may be consumed at most once).
std::map<std::string, std::uint64_t> allocate_capped(
    const std::map<std::string, double>& probabilities, std::uint64_t target_size,
    const std::map<std::string, std::uint64_t>& caps);

}  // namespace mtkit
