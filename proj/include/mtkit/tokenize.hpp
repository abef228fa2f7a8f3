#pragma once

// Pluggable token counting (whitespace words, greedy BPE, precomputed sidecar
// counts) and the fertility metric (tokens per whitespace word).

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mtkit/corpus.hpp"

namespace mtkit {

class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::string name() const = 0;
  // Deterministic, pure, safe to call from multiple threads.
  virtual std::uint64_t count(std::string_view text) const = 0;
};

// count("") = 0; otherwise the number of maximal non-whitespace runs.
class WhitespaceCounter final : public TokenCounter {
 public:
  std::string name() const override { return "whitespace"; }
  std::uint64_t count(std::string_view text) const override;
};

// -- BPE ----------------------------------------------------------------------

struct BpeModel {
  std::map<std::string, std::int64_t> vocabulary;
  std::vector<std::pair<std::string, std::string>> merges;  // rank order
  bool byte_fallback = true;

  // vocabulary file: "token<TAB>id" per line; merges file: "left<SPACE>right"
  // per line in rank order. Every merge's output symbol must be in the
  // vocabulary; violations are data errors.
  static BpeModel load(const std::filesystem::path& vocab_path,
                       const std::filesystem::path& merges_path, bool byte_fallback = true);
};

// Greedy lowest-rank-first segmentation over the code points of `text`.
// Unknown symbols decompose into byte tokens when byte_fallback is set;
// otherwise a coverage error names the offending symbol.
std::vector<std::string> bpe_tokenize(const BpeModel& model, std::string_view text);
std::uint64_t bpe_count(const BpeModel& model, std::string_view text);

class BpeCounter final : public TokenCounter {
 public:
  explicit BpeCounter(BpeModel model) : model_(std::move(model)) {}
  std::string name() const override { return "bpe"; }
  std::uint64_t count(std::string_view text) const override { return bpe_count(model_, text); }

 private:
  BpeModel model_;
};

// Precomputed per-record token counts: JSONL {"tokens": n}, aligned 1:1 with
// the corpus file it annotates.
std::vector<std::uint64_t> load_sidecar_counts(const std::filesystem::path& path);

// -- Fertility ----------------------------------------------------------------

struct FertilityEntry {
  std::uint64_t tokens = 0;
  std::uint64_t words = 0;
  double fertility = 0.0;
};

struct FertilityReport {
  std::map<std::string, FertilityEntry> per_language;
  double average = 0.0;               // unweighted mean over included languages
  std::vector<std::string> excluded;  // languages with zero words
};

FertilityReport fertility(const std::vector<MonoRecord>& records, const TokenCounter& counter);

// Same metric from pre-aggregated (tokens, words) sums, e.g. sidecar counts.
FertilityReport fertility_from_totals(
    const std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>& tokens_words);

}  // namespace mtkit
