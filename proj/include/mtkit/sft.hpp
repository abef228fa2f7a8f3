#pragma once

// Alpaca-format SFT dataset construction: MT prompt rendering with template
// sampling, general-purpose passthrough with key mapping, mixture composition,
// and epoch repetition.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mtkit/corpus.hpp"

namespace mtkit {

enum class SftTask { mt, xqa, general };

std::string to_string(SftTask t);
SftTask parse_task(std::string_view name);

struct SftRecord {
  std::string instruction;
  std::string input;  // may be empty
  std::string output;
  SftTask task = SftTask::general;
  std::string pair;  // "spa-aym" provenance for mt/xqa records
  std::string lang;  // language provenance for general records, when known

  bool operator==(const SftRecord&) const = default;
};

struct PromptTemplate {
  int id = 0;  // 1-based
  std::string pattern;  // contains {src_lang} and {tgt_lang} exactly once each
};

// The 14 bundled translation prompt templates, ids 1..14.
const std::vector<PromptTemplate>& mt_templates();

// Substitutes registry display names into the template. Unknown codes raise
// the registry's lookup error.
SftRecord render_mt(const ParallelRecord& pair, const PromptTemplate& tmpl,
                    const LanguageRegistry& registry);

enum class TemplateMode { random_templates, constant_template };

// Random mode draws template ids i.i.d. uniform under the seed; constant mode
// always uses the first template. Output order follows input order.
std::vector<SftRecord> build_mt_dataset(const std::vector<ParallelRecord>& pairs,
                                        const std::vector<PromptTemplate>& templates,
                                        TemplateMode mode, std::uint64_t seed,
                                        const LanguageRegistry& registry,
                                        std::map<int, std::uint64_t>* template_counts = nullptr);

// Passthrough ingest of a general-purpose instruction JSONL file. key_map maps
// a source key to one of "instruction"/"input"/"output"; unmapped fields read
// their own names. instruction and output are required (schema error naming
// the line), input defaults to empty unless explicitly mapped.
std::vector<SftRecord> ingest_general(const std::filesystem::path& path, SftTask task_tag,
                                      const std::map<std::string, std::string>& key_map = {},
                                      std::string_view lang = "");

// -- Mixtures -----------------------------------------------------------------

struct MixtureComponent {
  std::string name;     // manifest label; unique within a spec
  std::string dataset;  // key into the datasets map (CLI: a JSONL path)
  std::uint64_t count = 0;
  double fraction = 0.0;
  bool by_fraction = false;
  std::string expected_task;  // optional: assert tag homogeneity
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;
  std::uint64_t total = 0;
  std::uint64_t epochs = 1;
  std::uint64_t seed = 0;

  // {"components": [{"name", "dataset", "count" | "fraction", "task"?}, ...],
  //  "total": n, "epochs": k, "seed": s}; unknown keys rejected.
  static MixtureSpec from_json(const std::string& text, std::string_view origin);
  static MixtureSpec from_json_file(const std::filesystem::path& path);

  // Resolves fraction components into counts via largest-remainder over total.
  // Enforces: counts sum to total; fractions sum to 1 within 1e-9.
  std::map<std::string, std::uint64_t> resolved_counts() const;
};

struct MixtureResult {
  std::vector<SftRecord> records;
  std::map<std::string, std::uint64_t> component_counts;  // pre-epoch
  std::map<std::string, std::uint64_t> task_counts;       // post-epoch
};

// For each component: seeded shuffle of its dataset, take the first `count`
// records (shortfall is an error naming the component and deficit), then one
// global seeded shuffle and `epochs` repetition.
MixtureResult compose_mixture(const MixtureSpec& spec,
                              const std::map<std::string, std::vector<SftRecord>>& datasets);

// Concatenation of `epochs` copies, each independently seeded-shuffled; record
// content is untouched (templates are not re-drawn). epochs=1 is one shuffle.
std::vector<SftRecord> repeat_epochs(const std::vector<SftRecord>& dataset, std::uint64_t epochs,
                                     std::uint64_t seed);

// JSONL {"instruction","input","output","task","pair"/"lang"}.
std::string emit_sft_jsonl(const std::vector<SftRecord>& records);
std::vector<SftRecord> parse_sft_jsonl(std::string_view content, std::string_view origin = "");
std::vector<SftRecord> load_sft_jsonl(const std::filesystem::path& path);

}  // namespace mtkit
