#pragma once

// Continued-pretraining corpus builders. Three strategies:
//   all_mono               - temperature-sampled union of mono records and the
//                            target sides of parallel pairs
//   mono_parallel_separate - as all_mono, but each pair contributes both sides
//                            as independent lines
//   mono_parallel_concat   - floor(r * N) lines are "<src>: ...\n<tgt>: ..."
//                            concatenations of sampled pairs; pairs beyond the
//                            threshold contribute target sides as mono lines;
//                            the remainder is temperature-sampled mono
// Every strategy ends with one global seeded shuffle.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtkit/corpus.hpp"
#include "mtkit/sampling.hpp"

namespace mtkit {

enum class MixStrategy { all_mono, mono_parallel_concat, mono_parallel_separate };

std::string to_string(MixStrategy s);
MixStrategy parse_strategy(std::string_view name);  // accepts canonical + CLI aliases

enum class CptOrigin { mono, parallel_concat, parallel_src_side, parallel_tgt_side };

std::string to_string(CptOrigin o);

struct CptSequence {
  std::string text;
  CptOrigin origin = CptOrigin::mono;
  std::string lang;  // non-concat lines
  std::string pair;  // concat lines ("spa-aym")

  bool operator==(const CptSequence&) const = default;
};

struct MixerConfig {
  MixStrategy strategy = MixStrategy::all_mono;
  double parallel_ratio = 0.0;       // concat only
  SamplingConfig mono_sampling;      // tau + unit consulted
  SamplingConfig parallel_sampling;  // tau + unit consulted (concat pair draw)
  std::uint64_t target_size = 0;     // 0 = unconstrained (whole pool, once)
  std::uint64_t seed = 0;
  // Required when the corresponding unit is tokens: language -> token count
  // for mono, pair key -> token count for parallel.
  std::map<std::string, double> mono_token_sizes;
  std::map<std::string, double> pair_token_sizes;
};

struct CptBuildResult {
  std::vector<CptSequence> sequences;
  std::map<std::string, std::uint64_t> origin_counts;
  std::uint64_t concat_requested = 0;  // floor(r * N)
  std::uint64_t concat_emitted = 0;
  std::vector<std::string> warnings;
};

// "<spa>: hola\n<aym>: kamisaraki" - exactly one newline, codes verbatim.
CptSequence format_concat(const ParallelRecord& pair);

CptBuildResult build_all_mono(const std::vector<MonoRecord>& mono,
                              const std::vector<ParallelRecord>& parallel,
                              const MixerConfig& config);
CptBuildResult build_separate(const std::vector<MonoRecord>& mono,
                              const std::vector<ParallelRecord>& parallel,
                              const MixerConfig& config);
CptBuildResult build_concat(const std::vector<MonoRecord>& mono,
                            const std::vector<ParallelRecord>& parallel,
                            const MixerConfig& config);

// Dispatches on config.strategy.
CptBuildResult build_cpt(const std::vector<MonoRecord>& mono,
                         const std::vector<ParallelRecord>& parallel, const MixerConfig& config);

// JSONL: {"text", "origin", "lang"} for single-side lines, {"text", "origin",
// "pair"} for concat lines; the embedded newline is JSON-escaped. Text variant:
// records separated by one blank line, so a concat record spans two physical
// lines but remains one record.
std::string emit_cpt_jsonl(const std::vector<CptSequence>& sequences);
std::string emit_cpt_text(const std::vector<CptSequence>& sequences);
std::vector<CptSequence> parse_cpt_jsonl(std::string_view content, std::string_view origin = "");

}  // namespace mtkit
