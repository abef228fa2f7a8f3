#include "mtkit/cpt.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mtkit/rng.hpp"
#include "mtkit/util.hpp"

namespace mtkit {

using nlohmann::json;

std::string to_string(MixStrategy s) {
  switch (s) {
    case MixStrategy::all_mono:
      return "all_mono";
    case MixStrategy::mono_parallel_concat:
      return "mono_parallel_concat";
    case MixStrategy::mono_parallel_separate:
      return "mono_parallel_separate";
  }
  return "all_mono";
}

MixStrategy parse_strategy(std::string_view name) {
  if (name == "all_mono" || name == "all-mono" || name == "mono")
    return MixStrategy::all_mono;
  if (name == "mono_parallel_concat" || name == "concat")
    return MixStrategy::mono_parallel_concat;
  if (name == "mono_parallel_separate" || name == "separate")
    return MixStrategy::mono_parallel_separate;
  throw config_error("unknown mixing strategy: " + std::string(name));
}

std::string to_string(CptOrigin o) {
  switch (o) {
    case CptOrigin::mono:
      return "mono";
    case CptOrigin::parallel_concat:
      return "parallel_concat";
    case CptOrigin::parallel_src_side:
      return "parallel_src_side";
    case CptOrigin::parallel_tgt_side:
      return "parallel_tgt_side";
  }
  return "mono";
}

namespace {

CptOrigin parse_origin(std::string_view name, std::string_view where) {
  if (name == "mono") return CptOrigin::mono;
  if (name == "parallel_concat") return CptOrigin::parallel_concat;
  if (name == "parallel_src_side") return CptOrigin::parallel_src_side;
  if (name == "parallel_tgt_side") return CptOrigin::parallel_tgt_side;
  throw data_error(std::string(where) + ": unknown origin tag \"" + std::string(name) + "\"");
}

CptSequence mono_line(const MonoRecord& r) {
  return {r.text, CptOrigin::mono, r.lang, ""};
}

CptSequence side_line(const ParallelRecord& p, bool target_side) {
  if (target_side) return {p.tgt, CptOrigin::parallel_tgt_side, p.tgt_lang, ""};
  return {p.src, CptOrigin::parallel_src_side, p.src_lang, ""};
}

std::map<std::string, std::vector<CptSequence>> group_by_lang(std::vector<CptSequence> pool) {
  std::map<std::string, std::vector<CptSequence>> grouped;
  for (auto& seq : pool) grouped[seq.lang].push_back(std::move(seq));
  return grouped;
}

// Temperature-samples n lines from the pool. Language sizes come from record
// counts, or from the supplied token totals when unit = tokens.
std::vector<CptSequence> sample_union(const std::vector<CptSequence>& pool,
                                      const SamplingConfig& sampling,
                                      const std::map<std::string, double>& token_sizes,
                                      std::uint64_t n, std::uint64_t seed) {
  if (n == 0) return {};
  const auto grouped = group_by_lang(pool);
  std::map<std::string, double> sizes;
  for (const auto& [lang, records] : grouped) {
    if (sampling.unit == SamplingConfig::Unit::tokens) {
      auto it = token_sizes.find(lang);
      if (it == token_sizes.end())
        throw config_error("token-unit sampling: no token count supplied for language \"" + lang +
                           "\"");
      sizes.emplace(lang, it->second);
    } else {
      sizes.emplace(lang, static_cast<double>(records.size()));
    }
  }
  const auto probs = temperature_distribution(sizes, sampling.tau);
  const auto counts = allocate(probs, n);
  return draw(grouped, counts, seed);
}

CptBuildResult finish(std::vector<CptSequence> sequences, const MixerConfig& config,
                      CptBuildResult result) {
  seeded_shuffle(sequences, derive_seed(config.seed, "global"));
  for (const auto& seq : sequences) ++result.origin_counts[to_string(seq.origin)];
  result.sequences = std::move(sequences);
  return result;
}

}  // namespace

CptSequence format_concat(const ParallelRecord& pair) {
  CptSequence seq;
  seq.text = "<" + pair.src_lang + ">: " + pair.src + "\n<" + pair.tgt_lang + ">: " + pair.tgt;
  seq.origin = CptOrigin::parallel_concat;
  seq.pair = pair_key(pair);
  return seq;
}

CptBuildResult build_all_mono(const std::vector<MonoRecord>& mono,
                              const std::vector<ParallelRecord>& parallel,
                              const MixerConfig& config) {
  CptBuildResult result;
  std::vector<CptSequence> pool;
  pool.reserve(mono.size() + parallel.size());
  for (const auto& r : mono) pool.push_back(mono_line(r));
  for (const auto& p : parallel) pool.push_back(side_line(p, /*target_side=*/true));
  if (pool.empty()) {
    result.warnings.push_back("empty inputs: emitted an empty dataset");
    return finish({}, config, std::move(result));
  }
  std::vector<CptSequence> sequences =
      config.target_size == 0
          ? std::move(pool)
          : sample_union(pool, config.mono_sampling, config.mono_token_sizes, config.target_size,
                         derive_seed(config.seed, "mono"));
  return finish(std::move(sequences), config, std::move(result));
}

CptBuildResult build_separate(const std::vector<MonoRecord>& mono,
                              const std::vector<ParallelRecord>& parallel,
                              const MixerConfig& config) {
  CptBuildResult result;
  std::vector<CptSequence> pool;
  pool.reserve(mono.size() + 2 * parallel.size());
  for (const auto& r : mono) pool.push_back(mono_line(r));
  for (const auto& p : parallel) {
    pool.push_back(side_line(p, /*target_side=*/false));
    pool.push_back(side_line(p, /*target_side=*/true));
  }
  if (pool.empty()) {
    result.warnings.push_back("empty inputs: emitted an empty dataset");
    return finish({}, config, std::move(result));
  }
  std::vector<CptSequence> sequences =
      config.target_size == 0
          ? std::move(pool)
          : sample_union(pool, config.mono_sampling, config.mono_token_sizes, config.target_size,
                         derive_seed(config.seed, "mono"));
  return finish(std::move(sequences), config, std::move(result));
}

CptBuildResult build_concat(const std::vector<MonoRecord>& mono,
                            const std::vector<ParallelRecord>& parallel,
                            const MixerConfig& config) {
  if (config.parallel_ratio < 0.0 || config.parallel_ratio > 1.0)
    throw config_error("parallel ratio must lie in [0, 1]");
  if (config.target_size == 0)
    throw config_error("the concat strategy requires a positive target size");

  CptBuildResult result;
  const std::uint64_t n_total = config.target_size;
  result.concat_requested = static_cast<std::uint64_t>(
      std::floor(config.parallel_ratio * static_cast<double>(n_total)));

  // Phase 1: consume floor(r * N) pairs, each at most once (no upsampling),
  // apportioned over pair directions by the parallel temperature. Unconsumed
  // pairs flow into the mono pool as target-side lines, exactly as the
  // all-mono strategy treats them.
  std::vector<CptSequence> concat_lines;
  std::vector<const ParallelRecord*> overflow;
  if (result.concat_requested == 0) {
    overflow.reserve(parallel.size());
    for (const auto& p : parallel) overflow.push_back(&p);
  } else if (parallel.empty()) {
    result.warnings.push_back("parallel shortfall: 0 pairs available, " +
                              std::to_string(result.concat_requested) + " concat lines requested");
  } else {
    std::map<std::string, std::vector<const ParallelRecord*>> groups;
    for (const auto& p : parallel) groups[pair_key(p)].push_back(&p);
    std::map<std::string, double> sizes;
    std::map<std::string, std::uint64_t> caps;
    for (const auto& [key, members] : groups) {
      caps.emplace(key, members.size());
      if (config.parallel_sampling.unit == SamplingConfig::Unit::tokens) {
        auto it = config.pair_token_sizes.find(key);
        if (it == config.pair_token_sizes.end())
          throw config_error("token-unit sampling: no token count supplied for pair \"" + key +
                             "\"");
        sizes.emplace(key, it->second);
      } else {
        sizes.emplace(key, static_cast<double>(members.size()));
      }
    }
    const auto probs = temperature_distribution(sizes, config.parallel_sampling.tau);
    const auto counts = allocate_capped(probs, result.concat_requested, caps);
    std::uint64_t consumed_total = 0;
    for (const auto& [key, members] : groups) {
      std::vector<std::size_t> order(members.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      seeded_shuffle(order, derive_seed(config.seed, "pairs:" + key));
      const std::uint64_t take = counts.at(key);
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i < take)
          concat_lines.push_back(format_concat(*members[order[i]]));
        else
          overflow.push_back(members[order[i]]);
      }
      consumed_total += take;
    }
    if (consumed_total < result.concat_requested)
      result.warnings.push_back(
          "parallel shortfall: " + std::to_string(consumed_total) + " pairs available for " +
          std::to_string(result.concat_requested) + " requested concat lines");
  }
  result.concat_emitted = concat_lines.size();

  // Phase 2: fill the rest from the mono pool (mono records + overflow target
  // sides), temperature-sampled under the mono settings.
  std::vector<CptSequence> pool;
  pool.reserve(mono.size() + overflow.size());
  for (const auto& r : mono) pool.push_back(mono_line(r));
  for (const ParallelRecord* p : overflow) pool.push_back(side_line(*p, /*target_side=*/true));
  const std::uint64_t rest_n = n_total - result.concat_emitted;
  std::vector<CptSequence> sequences = std::move(concat_lines);
  if (rest_n > 0) {
    if (pool.empty()) {
      result.warnings.push_back("empty mono pool: emitted " +
                                std::to_string(sequences.size()) + " of " +
                                std::to_string(n_total) + " requested lines");
    } else {
      auto rest = sample_union(pool, config.mono_sampling, config.mono_token_sizes, rest_n,
                               derive_seed(config.seed, "mono"));
      sequences.insert(sequences.end(), std::make_move_iterator(rest.begin()),
                       std::make_move_iterator(rest.end()));
    }
  }
  return finish(std::move(sequences), config, std::move(result));
}

CptBuildResult build_cpt(const std::vector<MonoRecord>& mono,
                         const std::vector<ParallelRecord>& parallel, const MixerConfig& config) {
  switch (config.strategy) {
    case MixStrategy::all_mono:
      return build_all_mono(mono, parallel, config);
    case MixStrategy::mono_parallel_separate:
      return build_separate(mono, parallel, config);
    case MixStrategy::mono_parallel_concat:
      return build_concat(mono, parallel, config);
  }
  throw config_error("unknown mixing strategy");
}

std::string emit_cpt_jsonl(const std::vector<CptSequence>& sequences) {
  std::string out;
  for (const auto& seq : sequences) {
    json j{{"text", seq.text}, {"origin", to_string(seq.origin)}};
    if (seq.origin == CptOrigin::parallel_concat)
      j["pair"] = seq.pair;
    else
      j["lang"] = seq.lang;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string emit_cpt_text(const std::vector<CptSequence>& sequences) {
  std::string out;
  for (const auto& seq : sequences) {
    out += seq.text;
    out += "\n\n";
  }
  return out;
}

std::vector<CptSequence> parse_cpt_jsonl(std::string_view content, std::string_view origin) {
  std::vector<CptSequence> sequences;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = content.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (is_blank(line)) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j.contains("origin") ||
        !j["text"].is_string() || !j["origin"].is_string())
      throw data_error(std::string(origin) + ":" + std::to_string(lineno) +
                       ": malformed pretraining record");
    CptSequence seq;
    seq.text = j["text"].get<std::string>();
    seq.origin = parse_origin(j["origin"].get<std::string>(),
                              std::string(origin) + ":" + std::to_string(lineno));
    if (j.contains("lang") && j["lang"].is_string()) seq.lang = j["lang"].get<std::string>();
    if (j.contains("pair") && j["pair"].is_string()) seq.pair = j["pair"].get<std::string>();
    sequences.push_back(std::move(seq));
  }
  return sequences;
}

}  // namespace mtkit
