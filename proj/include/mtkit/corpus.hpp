#pragma once

// Core data model: language registry, monolingual/parallel records, plain-text
// and JSONL ingest, JSONL emit, corpus statistics, and validation.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mtkit {

// -- Language registry -------------------------------------------------------

class LanguageRegistry {
 public:
  // Bundled default set: the Americas languages plus the Indic/English/Spanish/
  // Portuguese codes used by the shipped configurations.
  static const LanguageRegistry& builtin();

  // Loads {"languages": [{"code": ..., "name": ...}, ...]}; throws config_error
  // on malformed schema.
  static LanguageRegistry from_json_file(const std::filesystem::path& path);

  void add(std::string code, std::string name);
  bool contains(std::string_view code) const;

  // Display name for a code; throws data_error for unknown codes.
  const std::string& display_name(std::string_view code) const;

  // All codes, sorted.
  std::vector<std::string> codes() const;

 private:
  std::map<std::string, std::string, std::less<>> names_;
};

// -- Records ------------------------------------------------------------------

struct MonoRecord {
  std::string lang;
  std::string text;
  std::string source;

  bool operator==(const MonoRecord&) const = default;
};

struct ParallelRecord {
  std::string src_lang;
  std::string tgt_lang;
  std::string src;
  std::string tgt;
  std::string source;

  bool operator==(const ParallelRecord&) const = default;
};

// "spa-aym" style key identifying a direction.
inline std::string pair_key(const ParallelRecord& r) { return r.src_lang + "-" + r.tgt_lang; }

// -- Ingest -------------------------------------------------------------------

template <typename Record>
struct IngestResult {
  std::vector<Record> records;
  std::size_t skipped_blank = 0;
};

// One record per non-blank line; blank lines are skipped and counted. Throws
// data_error naming the 1-based line number on invalid UTF-8.
IngestResult<MonoRecord> ingest_mono_text(const std::filesystem::path& path,
                                          std::string_view lang, std::string_view source);

// Two line-aligned files. Line counts must match (alignment error otherwise);
// a pair is skipped (and counted) when either side is blank.
IngestResult<ParallelRecord> ingest_parallel_text(const std::filesystem::path& src_path,
                                                  const std::filesystem::path& tgt_path,
                                                  std::string_view src_lang,
                                                  std::string_view tgt_lang,
                                                  std::string_view source);

// Tab-separated source/target. Every non-blank line must have exactly two
// columns; anything else is a format error naming the line number.
IngestResult<ParallelRecord> ingest_parallel_tsv(const std::filesystem::path& path,
                                                 std::string_view src_lang,
                                                 std::string_view tgt_lang,
                                                 std::string_view source);

// -- JSONL round-trip ---------------------------------------------------------
// Mono lines:     {"lang": ..., "text": ..., "source": ...}
// Parallel lines: {"src_lang": ..., "tgt_lang": ..., "src": ..., "tgt": ..., "source": ...}
// Embedded newlines in text fields are JSON-escaped, so one record is always
// one physical line.

std::string emit_mono_jsonl(const std::vector<MonoRecord>& records);
std::string emit_parallel_jsonl(const std::vector<ParallelRecord>& records);

std::vector<MonoRecord> parse_mono_jsonl(std::string_view content, std::string_view origin = "");
std::vector<ParallelRecord> parse_parallel_jsonl(std::string_view content,
                                                 std::string_view origin = "");

std::vector<MonoRecord> load_mono_jsonl(const std::filesystem::path& path);
std::vector<ParallelRecord> load_parallel_jsonl(const std::filesystem::path& path);

// -- Statistics ---------------------------------------------------------------

struct LanguageStats {
  std::uint64_t segments = 0;
  std::uint64_t words = 0;    // whitespace-delimited words
  std::uint64_t tokens = 0;   // filled only when a tokenizer was applied
  bool has_tokens = false;
};

struct CorpusStats {
  std::map<std::string, LanguageStats> per_language;

  LanguageStats totals() const;
  void add_segment(std::string_view lang, std::string_view text);
  void add_tokens(std::string_view lang, std::uint64_t tokens);
};

CorpusStats corpus_stats(const std::vector<MonoRecord>& records);
// Parallel records contribute each side to its own language.
CorpusStats corpus_stats(const std::vector<ParallelRecord>& records);

// -- Validation ---------------------------------------------------------------

struct ValidationIssue {
  std::size_t record_index = 0;  // 1-based position in the input
  std::string reason;
};

struct ValidationReport {
  std::size_t records = 0;
  std::size_t duplicates = 0;
  std::vector<ValidationIssue> issues;
  std::map<std::string, std::size_t> per_source;

  bool ok() const { return issues.empty(); }
};

// Flags empty text, unknown language codes, and counts exact duplicates.
ValidationReport validate(const std::vector<MonoRecord>& records,
                          const LanguageRegistry& registry);
ValidationReport validate(const std::vector<ParallelRecord>& records,
                          const LanguageRegistry& registry);

}  // namespace mtkit
