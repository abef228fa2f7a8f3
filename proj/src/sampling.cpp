#include "mtkit/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace mtkit {

std::map<std::string, double> temperature_distribution(const std::map<std::string, double>& sizes,
                                                       double tau) {
  if (sizes.empty()) throw data_error("temperature_distribution: empty size map");
  if (!(tau > 0.0)) throw data_error("temperature_distribution: tau must be > 0");
  std::map<std::string, double> probs;
  double norm = 0.0;
  for (const auto& [lang, size] : sizes) {
    if (!(size > 0.0))
      throw data_error("temperature_distribution: non-positive size for \"" + lang + "\"");
    const double w = std::pow(size, 1.0 / tau);
    probs.emplace(lang, w);
    norm += w;
  }
  for (auto& [_, p] : probs) p /= norm;
  return probs;
}

std::map<std::string, std::uint64_t> allocate(const std::map<std::string, double>& probabilities,
                                              std::uint64_t target_size) {
  std::map<std::string, std::uint64_t> counts;
  std::vector<std::pair<double, std::string>> remainders;  // (remainder, lang)
  std::uint64_t assigned = 0;
  for (const auto& [lang, p] : probabilities) {
    const double exact = p * static_cast<double>(target_size);
    const double floor_part = std::floor(exact);
    const auto base = static_cast<std::uint64_t>(floor_part);
    counts.emplace(lang, base);
    assigned += base;
    remainders.emplace_back(exact - floor_part, lang);
  }
  // Hand out the leftover units to the largest remainders; equal remainders
  // resolve by lexicographic language code, smallest first.
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::uint64_t leftover = target_size - assigned;
  for (const auto& [_, lang] : remainders) {
    if (leftover == 0) break;
    ++counts[lang];
    --leftover;
  }
  return counts;
}

std::map<std::string, std::uint64_t> allocate_capped(
    const std::map<std::string, double>& probabilities, std::uint64_t target_size,
    const std::map<std::string, std::uint64_t>& caps) {
  std::map<std::string, std::uint64_t> taken;
  for (const auto& [lang, _] : probabilities) taken.emplace(lang, 0);
  std::uint64_t remaining = target_size;
  while (remaining > 0) {
    // Languages that still have headroom, with probabilities renormalized.
    std::map<std::string, double> active;
    double norm = 0.0;
    for (const auto& [lang, p] : probabilities) {
      auto cap_it = caps.find(lang);
      const std::uint64_t cap = cap_it == caps.end() ? 0 : cap_it->second;
      if (taken[lang] < cap) {
        active.emplace(lang, p);
        norm += p;
      }
    }
    if (active.empty() || norm <= 0.0) break;  // capacity exhausted
    for (auto& [_, p] : active) p /= norm;
    const auto want = allocate(active, remaining);
    for (const auto& [lang, n] : want) {
      const std::uint64_t cap = caps.at(lang);
      const std::uint64_t take = std::min<std::uint64_t>(n, cap - taken[lang]);
      taken[lang] += take;
      remaining -= take;
    }
    // allocate() sums to `remaining`, so at least one unit lands under a cap
    // each pass; the loop always terminates.
  }
  return taken;
}

}  // namespace mtkit
