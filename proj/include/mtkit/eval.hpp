#pragma once

// chrF++ scoring (character n-grams order 1..6 plus word n-grams order 1..2,
// F-beta with beta=2 averaged uniformly over orders) with corpus-level
// statistic accumulation, multilingual bootstrap confidence intervals, and
// grouped reporting.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtkit {

struct ChrfParams {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
  // Default smoothing excludes orders where neither side has any n-grams
  // (effective-order), which keeps identical strings at exactly 100. The eps
  // variant instead scores every order with a 1e-16 floor, reproducing the
  // original scorer script's behavior.
  bool eps_smoothing = false;
};

struct EvalSet {
  std::string lang;
  std::vector<std::string> hypotheses;
  std::vector<std::string> references;
};

// Flattened [hyp_count, ref_count, match_count] per order; char orders first.
struct ChrfStats {
  std::vector<std::uint64_t> v;

  ChrfStats() = default;
  explicit ChrfStats(std::size_t orders) : v(orders * 3, 0) {}
  ChrfStats& operator+=(const ChrfStats& other);
};

// Per-segment match statistics; the building block for corpus and bootstrap
// scoring (sums of these are corpus statistics).
ChrfStats chrf_segment_stats(std::string_view hyp, std::string_view ref,
                             const ChrfParams& params = {});

// Score from accumulated statistics, in [0, 100].
double chrf_from_stats(const ChrfStats& stats, const ChrfParams& params = {});

// Empty hypothesis against a non-empty reference scores 0; two empty strings
// score 100.
double chrf_segment(std::string_view hyp, std::string_view ref, const ChrfParams& params = {});

// Corpus score: statistics are accumulated over all segments before the F
// computation (not a mean of segment scores). Length mismatch or an empty set
// is an alignment error.
double chrf_corpus(const EvalSet& set, const ChrfParams& params = {});

struct BootstrapResult {
  double mean = 0.0;
  double std_dev = 0.0;  // population (divide by B)
  std::uint64_t resamples = 0;
  std::uint64_t seed = 0;
};

// For b in 1..B: per language, resample segment indices with replacement
// (size = original), score the resampled corpus, macro-average across
// languages; report mean and population std-dev of the B macro-averages.
// Resample b's draw for a language depends only on (seed, b, language), so
// results are independent of worker count (`jobs`) and set order.
BootstrapResult bootstrap_ci(const std::vector<EvalSet>& sets, const ChrfParams& params,
                             std::uint64_t B, std::uint64_t seed, unsigned jobs = 1);

struct EvalReport {
  std::map<std::string, double> per_language;
  double macro_average = 0.0;
  std::map<std::string, double> groups;
  std::optional<BootstrapResult> bootstrap;
  ChrfParams params;
};

// Unweighted group means over per-language scores. A group naming a language
// without a score is a configuration error.
EvalReport group_report(const std::map<std::string, double>& per_language,
                        const std::map<std::string, std::vector<std::string>>& groups = {});

// The bundled Americas grouping: HRL = {aym, grn, quy}, LRL = the other eight.
const std::map<std::string, std::vector<std::string>>& american_default_groups();

// Report serialization: JSON (round-trippable) and an aligned text table.
std::string report_to_json_string(const EvalReport& report);
EvalReport report_from_json_string(std::string_view text, std::string_view origin);
std::string report_table(const EvalReport& report);

}  // namespace mtkit
