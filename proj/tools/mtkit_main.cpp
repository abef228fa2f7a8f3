// mtkit: batch CLI for corpus engineering and evaluation in low-resource MT.
//
// Subcommands: ingest-mono, ingest-parallel, stats, build-cpt, build-sft,
// synth-xqa, evaluate, report. Every output is written atomically with a JSON
// manifest sidecar recording inputs, effective config, seed, and counts.
// Identical (config, seed, inputs) produce byte-identical outputs; --jobs
// changes wall time only, never bytes.
//
// Exit codes: 0 ok, 2 configuration error, 3 data error, 4 endpoint error.

#include <algorithm>
#include <clocale>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtkit/corpus.hpp"
#include "mtkit/cpt.hpp"
#include "mtkit/eval.hpp"
#include "mtkit/manifest.hpp"
#include "mtkit/rng.hpp"
#include "mtkit/sampling.hpp"
#include "mtkit/sft.hpp"
#include "mtkit/tokenize.hpp"
#include "mtkit/util.hpp"
#include "mtkit/xqa.hpp"

namespace {

using nlohmann::json;
using namespace mtkit;

struct Globals {
  std::string languages;  // registry JSON; empty = builtin
  unsigned jobs = 1;      // execution knob; excluded from manifests
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  const json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw config_error(path + ": config file must be a JSON object");
  return j;
}

void reject_unknown_keys(const json& cfg, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : cfg.items()) {
    if (!allowed.count(key)) throw config_error(where + ": unknown config key \"" + key + "\"");
  }
}

// Flags override config-file values: a config key is applied only when the
// matching flag was not given on the command line.
template <typename T>
void merge_key(const json& cfg, const char* key, const CLI::App& sub, const std::string& flag,
               T& var) {
  if (!cfg.contains(key) || sub.count(flag) > 0) return;
  try {
    var = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error(std::string("config key \"") + key + "\" has the wrong type");
  }
}

std::string require_value(const std::string& value, const char* what) {
  if (value.empty()) throw config_error(std::string(what) + " is required");
  return value;
}

std::uint64_t count_lines(std::string_view content) {
  std::uint64_t n = 0;
  for (char c : content) {
    if (c == '\n') ++n;
  }
  return n;
}

// Writes the artifact atomically, writes its manifest sidecar, and prints the
// one-line summary.
void emit_output(const std::string& path, std::string_view content, DatasetManifest manifest) {
  const std::uint64_t records = manifest.record_count;
  atomic_write_file(path, content);
  const std::string manifest_path = write_manifest(path, std::move(manifest));
  std::cout << "wrote " << path << " (" << records << " records); manifest " << manifest_path
            << "\n";
}

std::vector<MonoRecord> load_mono_inputs(const std::vector<std::string>& paths) {
  std::vector<MonoRecord> out;
  for (const std::string& path : paths) {
    std::vector<MonoRecord> part = load_mono_jsonl(path);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<ParallelRecord> load_parallel_inputs(const std::vector<std::string>& paths) {
  std::vector<ParallelRecord> out;
  for (const std::string& path : paths) {
    std::vector<ParallelRecord> part = load_parallel_jsonl(path);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<InputDigest> digest_inputs(const std::vector<std::string>& paths) {
  std::vector<InputDigest> out;
  out.reserve(paths.size());
  for (const std::string& path : paths) out.push_back(digest_input(path));
  return out;
}

// File as line-aligned segments: every line is a segment, blanks included.
std::vector<std::string> read_segment_lines(const std::string& path) {
  std::string content = read_file(path);
  if (!utf8_valid(content)) throw data_error(path + ": invalid UTF-8");
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) {
      if (start < content.size()) lines.push_back(content.substr(start));
      break;
    }
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string languages_label(const Globals& g) {
  return g.languages.empty() ? std::string("builtin") : g.languages;
}

json stats_to_json(const CorpusStats& stats) {
  json per = json::object();
  for (const auto& [lang, s] : stats.per_language) {
    json entry{{"segments", s.segments}, {"words", s.words}};
    if (s.has_tokens) entry["tokens"] = s.tokens;
    per[lang] = entry;
  }
  const LanguageStats t = stats.totals();
  json totals{{"segments", t.segments}, {"words", t.words}};
  if (t.has_tokens) totals["tokens"] = t.tokens;
  return json{{"per_language", per}, {"totals", totals}};
}

json validation_to_json(const ValidationReport& report) {
  json issues = json::array();
  for (const ValidationIssue& issue : report.issues)
    issues.push_back({{"record", issue.record_index}, {"reason", issue.reason}});
  return json{{"records", report.records},
              {"duplicates", report.duplicates},
              {"issues", issues},
              {"per_source", report.per_source}};
}

// ---------------------------------------------------------------------------
// ingest-mono

struct IngestMonoOpts {
  std::string config, input, lang, source, output;
};

int run_ingest_mono(const CLI::App& sub, IngestMonoOpts& o, const Globals& g) {
  const json cfg = load_config_file(o.config);
  reject_unknown_keys(cfg, {"input", "lang", "source", "output"}, "ingest-mono");
  merge_key(cfg, "input", sub, "--input", o.input);
  merge_key(cfg, "lang", sub, "--lang", o.lang);
  merge_key(cfg, "source", sub, "--source", o.source);
  merge_key(cfg, "output", sub, "--output", o.output);
  require_value(o.input, "ingest-mono: --input");
  require_value(o.lang, "ingest-mono: --lang");
  require_value(o.output, "ingest-mono: --output");
  if (o.source.empty()) o.source = std::filesystem::path(o.input).filename().string();

  const auto result = ingest_mono_text(o.input, o.lang, o.source);

  DatasetManifest m;
  m.strategy = "ingest_mono";
  m.record_count = result.records.size();
  m.created_from = {digest_input(o.input)};
  m.config = json{{"input", o.input},
                  {"lang", o.lang},
                  {"source", o.source},
                  {"output", o.output},
                  {"languages", languages_label(g)}};
  m.details = json{{"skipped_blank", result.skipped_blank}};
  emit_output(o.output, emit_mono_jsonl(result.records), std::move(m));
  return 0;
}

// ---------------------------------------------------------------------------
// ingest-parallel

struct IngestParallelOpts {
  std::string config, src_input, tgt_input, tsv, src_lang, tgt_lang, source, output;
};

int run_ingest_parallel(const CLI::App& sub, IngestParallelOpts& o, const Globals& g) {
  const json cfg = load_config_file(o.config);
  reject_unknown_keys(
      cfg, {"src_input", "tgt_input", "tsv", "src_lang", "tgt_lang", "source", "output"},
      "ingest-parallel");
  merge_key(cfg, "src_input", sub, "--src-input", o.src_input);
  merge_key(cfg, "tgt_input", sub, "--tgt-input", o.tgt_input);
  merge_key(cfg, "tsv", sub, "--tsv", o.tsv);
  merge_key(cfg, "src_lang", sub, "--src-lang", o.src_lang);
  merge_key(cfg, "tgt_lang", sub, "--tgt-lang", o.tgt_lang);
  merge_key(cfg, "source", sub, "--source", o.source);
  merge_key(cfg, "output", sub, "--output", o.output);

  const bool two_file = !o.src_input.empty() || !o.tgt_input.empty();
  const bool tsv = !o.tsv.empty();
  if (two_file == tsv)
    throw config_error("ingest-parallel: provide either --src-input/--tgt-input or --tsv");
  if (two_file && (o.src_input.empty() || o.tgt_input.empty()))
    throw config_error("ingest-parallel: both --src-input and --tgt-input are required");
  require_value(o.src_lang, "ingest-parallel: --src-lang");
  require_value(o.tgt_lang, "ingest-parallel: --tgt-lang");
  require_value(o.output, "ingest-parallel: --output");
  if (o.source.empty()) {
    o.source =
        std::filesystem::path(tsv ? o.tsv : o.src_input).filename().string();
  }

  const auto result = tsv ? ingest_parallel_tsv(o.tsv, o.src_lang, o.tgt_lang, o.source)
                          : ingest_parallel_text(o.src_input, o.tgt_input, o.src_lang, o.tgt_lang,
                                                 o.source);

  DatasetManifest m;
  m.strategy = "ingest_parallel";
  m.record_count = result.records.size();
  if (tsv) {
    m.created_from = {digest_input(o.tsv)};
  } else {
    m.created_from = {digest_input(o.src_input), digest_input(o.tgt_input)};
  }
  m.config = json{{"src_input", o.src_input}, {"tgt_input", o.tgt_input},
                  {"tsv", o.tsv},             {"src_lang", o.src_lang},
                  {"tgt_lang", o.tgt_lang},   {"source", o.source},
                  {"output", o.output},       {"languages", languages_label(g)}};
  m.details = json{{"skipped_blank", result.skipped_blank}};
  emit_output(o.output, emit_parallel_jsonl(result.records), std::move(m));
  return 0;
}

// ---------------------------------------------------------------------------
// stats

struct StatsOpts {
  std::string config;
  std::vector<std::string> mono, parallel;
  bool fertility = false;
  std::string counter = "whitespace";
  std::string bpe_vocab, bpe_merges;
  bool byte_fallback = true;
  std::string output;
};

int run_stats(const CLI::App& sub, StatsOpts& o, const Globals& g,
              const LanguageRegistry& registry) {
  const json cfg = load_config_file(o.config);
  reject_unknown_keys(cfg,
                      {"mono", "parallel", "fertility", "counter", "bpe_vocab", "bpe_merges",
                       "byte_fallback", "output"},
                      "stats");
  merge_key(cfg, "mono", sub, "--mono", o.mono);
  merge_key(cfg, "parallel", sub, "--parallel", o.parallel);
  merge_key(cfg, "fertility", sub, "--fertility", o.fertility);
  merge_key(cfg, "counter", sub, "--counter", o.counter);
  merge_key(cfg, "bpe_vocab", sub, "--bpe-vocab", o.bpe_vocab);
  merge_key(cfg, "bpe_merges", sub, "--bpe-merges", o.bpe_merges);
  merge_key(cfg, "byte_fallback", sub, "--byte-fallback", o.byte_fallback);
  merge_key(cfg, "output", sub, "--output", o.output);
  if (o.mono.empty() && o.parallel.empty())
    throw config_error("stats: at least one --mono or --parallel input is required");
  if (o.fertility && o.mono.empty())
    throw config_error("stats: --fertility requires monolingual inputs");

  std::unique_ptr<TokenCounter> counter;
  if (o.counter == "whitespace") {
    counter = std::make_unique<WhitespaceCounter>();
  } else if (o.counter == "bpe") {
    require_value(o.bpe_vocab, "stats: --bpe-vocab");
    require_value(o.bpe_merges, "stats: --bpe-merges");
    counter = std::make_unique<BpeCounter>(BpeModel::load(o.bpe_vocab, o.bpe_merges,
                                                          o.byte_fallback));
  } else {
    throw config_error("stats: unknown counter \"" + o.counter +
                       "\" (expected whitespace or bpe)");
  }

  json out = json::object();
  if (!o.mono.empty()) {
    const std::vector<MonoRecord> mono = load_mono_inputs(o.mono);
    CorpusStats stats = corpus_stats(mono);
    if (o.fertility) {
      for (const MonoRecord& r : mono) stats.add_tokens(r.lang, counter->count(r.text));
    }
    out["mono"] = stats_to_json(stats);
    out["mono"]["validation"] = validation_to_json(validate(mono, registry));
    if (o.fertility) {
      const FertilityReport fr = fertility(mono, *counter);
      json per = json::object();
      for (const auto& [lang, e] : fr.per_language)
        per[lang] = {{"tokens", e.tokens}, {"words", e.words}, {"fertility", e.fertility}};
      out["fertility"] = {{"per_language", per},
                          {"average", fr.average},
                          {"excluded", fr.excluded},
                          {"counter", counter->name()}};
    }
  }
  if (!o.parallel.empty()) {
    const std::vector<ParallelRecord> parallel = load_parallel_inputs(o.parallel);
    out["parallel"] = stats_to_json(corpus_stats(parallel));
    out["parallel"]["validation"] = validation_to_json(validate(parallel, registry));
  }

  const std::string text = out.dump(2) + "\n";
  if (o.output.empty()) {
    std::cout << text;
    return 0;
  }
  DatasetManifest m;
  m.strategy = "stats";
  m.record_count = count_lines(text);
  std::vector<std::string> all_inputs = o.mono;
  all_inputs.insert(all_inputs.end(), o.parallel.begin(), o.parallel.end());
  m.created_from = digest_inputs(all_inputs);
  m.config = json{{"mono", o.mono},
                  {"parallel", o.parallel},
                  {"fertility", o.fertility},
                  {"counter", o.counter},
                  {"bpe_vocab", o.bpe_vocab},
                  {"bpe_merges", o.bpe_merges},
                  {"byte_fallback", o.byte_fallback},
                  {"output", o.output},
                  {"languages", languages_label(g)}};
  m.details = json{{"note", "line count of the JSON report"}};
  emit_output(o.output, text, std::move(m));
  return 0;
}

// ---------------------------------------------------------------------------
// build-cpt

struct BuildCptOpts {
  std::string config, strategy;
  std::vector<std::string> mono, parallel;
  double parallel_ratio = 0.0;
  double tau = 30.0;
  double parallel_tau = -1.0;  // -1: follow --tau
  std::uint64_t size = 0;
  std::string unit = "examples";
  std::string token_sizes;
  std::uint64_t seed = 0;
  std::string output, text_output;
};

int run_build_cpt(const CLI::App& sub, BuildCptOpts& o, const Globals& g) {
  const json cfg = load_config_file(o.config);
  reject_unknown_keys(cfg,
                      {"strategy", "mono", "parallel", "parallel_ratio", "tau", "parallel_tau",
                       "size", "unit", "token_sizes", "seed", "output", "text_output"},
                      "build-cpt");
  merge_key(cfg, "strategy", sub, "--strategy", o.strategy);
  merge_key(cfg, "mono", sub, "--mono", o.mono);
  merge_key(cfg, "parallel", sub, "--parallel", o.parallel);
  merge_key(cfg, "parallel_ratio", sub, "--parallel-ratio", o.parallel_ratio);
  merge_key(cfg, "tau", sub, "--tau", o.tau);
  merge_key(cfg, "parallel_tau", sub, "--parallel-tau", o.parallel_tau);
  merge_key(cfg, "size", sub, "--size", o.size);
  merge_key(cfg, "unit", sub, "--unit", o.unit);
  merge_key(cfg, "token_sizes", sub, "--token-sizes", o.token_sizes);
  merge_key(cfg, "seed", sub, "--seed", o.seed);
  merge_key(cfg, "output", sub, "--output", o.output);
  merge_key(cfg, "text_output", sub, "--text-output", o.text_output);
  require_value(o.strategy, "build-cpt: --strategy");
  require_value(o.output, "build-cpt: --output");

  MixerConfig mc;
  mc.strategy = parse_strategy(o.strategy);
  mc.parallel_ratio = o.parallel_ratio;
  mc.target_size = o.size;
  mc.seed = o.seed;
  mc.mono_sampling.tau = o.tau;
  mc.parallel_sampling.tau = o.parallel_tau > 0 ? o.parallel_tau : o.tau;
  if (o.unit == "examples") {
    mc.mono_sampling.unit = SamplingConfig::Unit::examples;
    mc.parallel_sampling.unit = SamplingConfig::Unit::examples;
  } else if (o.unit == "tokens") {
    mc.mono_sampling.unit = SamplingConfig::Unit::tokens;
    mc.parallel_sampling.unit = SamplingConfig::Unit::tokens;
    require_value(o.token_sizes, "build-cpt: --token-sizes (required with --unit tokens)");
  } else {
    throw config_error("build-cpt: unknown unit \"" + o.unit + "\" (expected examples or tokens)");
  }
  if (!o.token_sizes.empty()) {
    const json sizes = json::parse(read_file(o.token_sizes), nullptr, false);
    if (sizes.is_discarded() || !sizes.is_object())
      throw config_error(o.token_sizes + ": token sizes must be a JSON object");
    try {
      if (sizes.contains("mono"))
        mc.mono_token_sizes = sizes.at("mono").get<std::map<std::string, double>>();
      if (sizes.contains("pairs"))
        mc.pair_token_sizes = sizes.at("pairs").get<std::map<std::string, double>>();
    } catch (const json::exception&) {
      throw config_error(o.token_sizes + ": token sizes must map names to numbers");
    }
  }

  const std::vector<MonoRecord> mono = load_mono_inputs(o.mono);
  const std::vector<ParallelRecord> parallel = load_parallel_inputs(o.parallel);
  const CptBuildResult result = build_cpt(mono, parallel, mc);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";

  const json config{{"strategy", to_string(mc.strategy)},
                    {"mono", o.mono},
                    {"parallel", o.parallel},
                    {"parallel_ratio", mc.parallel_ratio},
                    {"tau", mc.mono_sampling.tau},
                    {"parallel_tau", mc.parallel_sampling.tau},
                    {"size", mc.target_size},
                    {"unit", o.unit},
                    {"token_sizes", o.token_sizes},
                    {"seed", mc.seed},
                    {"output", o.output},
                    {"text_output", o.text_output},
                    {"languages", languages_label(g)}};
  json details{{"origin_counts", result.origin_counts},
               {"concat_requested", result.concat_requested},
               {"concat_emitted", result.concat_emitted},
               {"warnings", result.warnings}};
  if (mc.strategy == MixStrategy::mono_parallel_concat) {
    details["concat_format"] =
        "\"<code>: text\" per side, sides joined by a single newline inside one record";
  }
  std::vector<std::string> all_inputs = o.mono;
  all_inputs.insert(all_inputs.end(), o.parallel.begin(), o.parallel.end());
  if (!o.token_sizes.empty()) all_inputs.push_back(o.token_sizes);

  DatasetManifest m;
  m.strategy = to_string(mc.strategy);
  m.seed = mc.seed;
  m.record_count = result.sequences.size();
  m.created_from = digest_inputs(all_inputs);
  m.config = config;
  m.details = details;
  emit_output(o.output, emit_cpt_jsonl(result.sequences), std::move(m));

  if (!o.text_output.empty()) {
    DatasetManifest tm;
    tm.strategy = to_string(mc.strategy);
    tm.seed = mc.seed;
    tm.record_count = result.sequences.size();
    tm.created_from = digest_inputs(all_inputs);
    tm.config = config;
    tm.details = details;
    tm.details["format"] =
        "plain text; records separated by one blank line; concat records span two physical lines";
    emit_output(o.text_output, emit_cpt_text(result.sequences), std::move(tm));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// build-sft

struct BuildSftOpts {
  std::string config;
  std::vector<std::string> pairs;
  std::string templates = "random";
  std::uint64_t size = 0;
  double tau = 80.0;
  std::string general;
  std::string task;
  std::vector<std::string> map_entries;
  std::string lang;
  std::string spec;
  std::uint64_t epochs = 1;
  std::uint64_t seed = 0;
  std::string output;
};

std::map<std::string, std::string> parse_key_map(const std::vector<std::string>& entries) {
  std::map<std::string, std::string> key_map;
  for (const std::string& entry : entries) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= entry.size())
      throw config_error("build-sft: --map expects SOURCE_KEY=DEST_FIELD, got \"" + entry + "\"");
    const std::string dest = entry.substr(eq + 1);
    if (dest != "instruction" && dest != "input" && dest != "output")
      throw config_error("build-sft: --map destination must be instruction, input, or output");
    key_map[entry.substr(0, eq)] = dest;
  }
  return key_map;
}

int run_build_sft(const CLI::App& sub, BuildSftOpts& o, const Globals& g,
                  const LanguageRegistry& registry) {
  const json cfg = load_config_file(o.config);
  reject_unknown_keys(cfg,
                      {"pairs", "templates", "size", "tau", "general", "task", "map", "lang",
                       "spec", "epochs", "seed", "output"},
                      "build-sft");
  merge_key(cfg, "pairs", sub, "--pairs", o.pairs);
  merge_key(cfg, "templates", sub, "--templates", o.templates);
  merge_key(cfg, "size", sub, "--size", o.size);
  merge_key(cfg, "tau", sub, "--tau", o.tau);
  merge_key(cfg, "general", sub, "--general", o.general);
  merge_key(cfg, "task", sub, "--task", o.task);
  merge_key(cfg, "lang", sub, "--lang", o.lang);
  merge_key(cfg, "spec", sub, "--spec", o.spec);
  merge_key(cfg, "epochs", sub, "--epochs", o.epochs);
  merge_key(cfg, "seed", sub, "--seed", o.seed);
  merge_key(cfg, "output", sub, "--output", o.output);
  std::map<std::string, std::string> key_map = parse_key_map(o.map_entries);
  if (key_map.empty() && cfg.contains("map")) {
    try {
      key_map = cfg.at("map").get<std::map<std::string, std::string>>();
    } catch (const json::exception&) {
      throw config_error("config key \"map\" must be an object of source-to-destination keys");
    }
    for (const auto& [src, dest] : key_map) {
      if (dest != "instruction" && dest != "input" && dest != "output")
        throw config_error("build-sft: map destination must be instruction, input, or output");
    }
  }
  require_value(o.output, "build-sft: --output");

  const int modes = (!o.pairs.empty() ? 1 : 0) + (!o.general.empty() ? 1 : 0) +
                    (!o.spec.empty() ? 1 : 0);
  if (modes != 1)
    throw config_error("build-sft: provide exactly one of --pairs, --general, or --spec");
  if (o.epochs < 1) throw config_error("build-sft: --epochs must be at least 1");

  std::vector<SftRecord> records;
  DatasetManifest m;
  m.seed = o.seed;

  if (!o.pairs.empty()) {
    if (o.templates != "random" && o.templates != "constant")
      throw config_error("build-sft: --templates must be random or constant");
    std::vector<ParallelRecord> pool = load_parallel_inputs(o.pairs);
    json drawn_counts = json::object();
    if (o.size > 0) {
      std::map<std::string, std::vector<ParallelRecord>> groups;
      for (const ParallelRecord& r : pool) groups[pair_key(r)].push_back(r);
      std::map<std::string, double> sizes;
      for (const auto& [key, group] : groups) sizes[key] = static_cast<double>(group.size());
      const auto counts = allocate(temperature_distribution(sizes, o.tau), o.size);
      pool = draw(groups, counts, o.seed);
      for (const auto& [key, n] : counts) drawn_counts[key] = n;
    }
    std::map<int, std::uint64_t> template_counts;
    const TemplateMode mode = o.templates == "random" ? TemplateMode::random_templates
                                                      : TemplateMode::constant_template;
    records = build_mt_dataset(pool, mt_templates(), mode, o.seed, registry, &template_counts);
    if (o.epochs > 1) records = repeat_epochs(records, o.epochs, o.seed);

    json tc = json::object();
    for (const auto& [id, n] : template_counts) tc[std::to_string(id)] = n;
    m.strategy = "sft_mt";
    m.created_from = digest_inputs(o.pairs);
    m.config = json{{"pairs", o.pairs},   {"templates", o.templates},
                    {"size", o.size},     {"tau", o.tau},
                    {"epochs", o.epochs}, {"seed", o.seed},
                    {"output", o.output}, {"languages", languages_label(g)}};
    m.details = json{{"template_counts", tc},
                     {"drawn_pair_counts", drawn_counts},
                     {"task_counts", {{"mt", records.size()}}},
                     {"epochs", o.epochs}};
  } else if (!o.general.empty()) {
    const SftTask task = parse_task(o.task.empty() ? "general" : o.task);
    records = ingest_general(o.general, task, key_map, o.lang);
    if (o.epochs > 1) records = repeat_epochs(records, o.epochs, o.seed);
    m.strategy = "sft_general";
    m.created_from = digest_inputs({o.general});
    m.config = json{{"general", o.general}, {"task", to_string(task)},
                    {"map", key_map},       {"lang", o.lang},
                    {"epochs", o.epochs},   {"seed", o.seed},
                    {"output", o.output},   {"languages", languages_label(g)}};
    m.details = json{{"task_counts", {{to_string(task), records.size()}}}, {"epochs", o.epochs}};
  } else {
    MixtureSpec spec = MixtureSpec::from_json_file(o.spec);
    if (sub.count("--epochs") > 0 || cfg.contains("epochs")) spec.epochs = o.epochs;
    if (sub.count("--seed") > 0 || cfg.contains("seed")) spec.seed = o.seed;
    const std::filesystem::path spec_dir = std::filesystem::path(o.spec).parent_path();
    std::map<std::string, std::vector<SftRecord>> datasets;
    std::vector<std::string> dataset_paths{o.spec};
    for (const MixtureComponent& c : spec.components) {
      if (datasets.count(c.dataset)) continue;
      std::filesystem::path path(c.dataset);
      if (path.is_relative()) path = spec_dir / path;  // spec-relative references
      datasets[c.dataset] = load_sft_jsonl(path);
      dataset_paths.push_back(path.string());
    }
    const MixtureResult result = compose_mixture(spec, datasets);
    records = result.records;

    json components = json::array();
    for (const MixtureComponent& c : spec.components) {
      json cj{{"name", c.name}, {"dataset", c.dataset}};
      if (c.by_fraction) {
        cj["fraction"] = c.fraction;
      } else {
        cj["count"] = c.count;
      }
      if (!c.expected_task.empty()) cj["task"] = c.expected_task;
      components.push_back(cj);
    }
    json task_counts = json::object();
    for (const auto& [task, n] : result.task_counts) task_counts[task] = n;
    m.strategy = "sft_mixture";
    m.seed = spec.seed;
    m.created_from = digest_inputs(dataset_paths);
    m.config = json{{"spec", o.spec},
                    {"mixture", {{"components", components},
                                 {"total", spec.total},
                                 {"epochs", spec.epochs},
                                 {"seed", spec.seed}}},
                    {"output", o.output},
                    {"languages", languages_label(g)}};
    m.details = json{{"component_counts", result.component_counts},
                     {"task_counts", task_counts},
                     {"epochs", spec.epochs}};
  }

  m.record_count = records.size();
  emit_output(o.output, emit_sft_jsonl(records), std::move(m));
  return 0;
}

// ---------------------------------------------------------------------------
// synth-xqa

struct SynthXqaOpts {
  std::string config;
  std::vector<std::string> pairs;
  // Default: all pairs. A literal 0 processes none (and emits an empty set).
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t seed = 0;
  std::string mock, endpoint;
  double temperature = 0.7;
  int max_tokens = 128;
  int retries = 3;
  int timeout_ms = 30000;
  std::string output;
};

int run_synth_xqa(const CLI::App& sub, SynthXqaOpts& o, const Globals& g,
                  const LanguageRegistry& registry) {
  const json cfg = load_config_file(o.config);
  reject_unknown_keys(cfg,
                      {"pairs", "limit", "seed", "mock", "endpoint", "temperature", "max_tokens",
                       "retries", "timeout_ms", "output"},
                      "synth-xqa");
  merge_key(cfg, "pairs", sub, "--pairs", o.pairs);
  merge_key(cfg, "limit", sub, "--limit", o.limit);
  merge_key(cfg, "seed", sub, "--seed", o.seed);
  merge_key(cfg, "mock", sub, "--mock", o.mock);
  merge_key(cfg, "endpoint", sub, "--endpoint", o.endpoint);
  merge_key(cfg, "temperature", sub, "--temperature", o.temperature);
  merge_key(cfg, "max_tokens", sub, "--max-tokens", o.max_tokens);
  merge_key(cfg, "retries", sub, "--retries", o.retries);
  merge_key(cfg, "timeout_ms", sub, "--timeout-ms", o.timeout_ms);
  merge_key(cfg, "output", sub, "--output", o.output);
  if (o.pairs.empty()) throw config_error("synth-xqa: --pairs is required");
  require_value(o.output, "synth-xqa: --output");

  std::string auth = "none";
  std::unique_ptr<GenerationClient> client;
  if (!o.mock.empty() && !o.endpoint.empty())
    throw config_error("synth-xqa: --mock and --endpoint are mutually exclusive");
  if (!o.mock.empty()) {
    client = std::make_unique<MockGenerationClient>(MockGenerationClient::from_jsonl_file(o.mock));
  } else {
    std::string url = o.endpoint;
    if (url.empty()) {
      if (const char* env = std::getenv("MTKIT_ENDPOINT_URL")) url = env;
    }
    if (url.empty())
      throw config_error(
          "synth-xqa: no generator configured (use --mock, --endpoint, or MTKIT_ENDPOINT_URL)");
    std::string token;
    if (const char* env = std::getenv("MTKIT_ENDPOINT_TOKEN")) token = env;
    if (!token.empty()) auth = "bearer";
    o.endpoint = url;
    client = std::make_unique<HttpGenerationClient>(url, token);
  }

  GenerationParams params;
  params.temperature = o.temperature;
  params.max_tokens = o.max_tokens;
  params.retries = o.retries;
  params.timeout_ms = o.timeout_ms;

  const std::vector<ParallelRecord> pairs = load_parallel_inputs(o.pairs);
  const std::uint64_t limit =
      std::min<std::uint64_t>(o.limit, static_cast<std::uint64_t>(pairs.size()));
  const XqaBuildResult result = build_xqa_dataset(pairs, *client, limit, o.seed, registry, params);

  std::vector<std::string> all_inputs = o.pairs;
  if (!o.mock.empty()) all_inputs.push_back(o.mock);
  DatasetManifest m;
  m.strategy = "xqa";
  m.seed = o.seed;
  m.record_count = result.records.size();
  m.created_from = digest_inputs(all_inputs);
  m.config = json{{"pairs", o.pairs},
                  {"limit", o.limit},
                  {"seed", o.seed},
                  {"mock", o.mock},
                  {"endpoint", o.endpoint},
                  {"auth", auth},
                  {"temperature", o.temperature},
                  {"max_tokens", o.max_tokens},
                  {"retries", o.retries},
                  {"timeout_ms", o.timeout_ms},
                  {"output", o.output},
                  {"languages", languages_label(g)}};
  m.details = json{{"processed", result.processed},
                   {"skipped_blank", result.skipped_blank},
                   {"client", client->descriptor()},
                   {"task_counts", {{"xqa", result.records.size()}}}};
  emit_output(o.output, emit_sft_jsonl(result.records), std::move(m));
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOpts {
  std::string config;
  std::string sets_manifest;
  std::string lang, hyp, ref;
  std::vector<std::uint64_t> bootstrap;  // empty value list: default 1000
  std::uint64_t seed = 0;
  std::string groups;
  bool eps_smoothing = false;
  std::string output;
};

struct EvalSetSpec {
  std::string lang, hyp, ref;
};

std::vector<EvalSetSpec> parse_sets_manifest(const std::string& path) {
  const json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw data_error(path + ": sets manifest is not valid JSON");
  const json* arr = nullptr;
  if (j.is_array()) {
    arr = &j;
  } else if (j.is_object() && j.contains("sets") && j.at("sets").is_array()) {
    arr = &j.at("sets");
  } else {
    throw data_error(path + ": sets manifest must be an array of {lang, hyp_path, ref_path}");
  }
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string p) {
    std::filesystem::path fp(p);
    return fp.is_relative() ? (base / fp).string() : p;  // manifest-relative paths
  };
  std::vector<EvalSetSpec> specs;
  for (const json& entry : *arr) {
    if (!entry.is_object()) throw data_error(path + ": sets manifest entries must be objects");
    EvalSetSpec spec;
    try {
      spec.lang = entry.at("lang").get<std::string>();
      spec.hyp = resolve(entry.contains("hyp_path") ? entry.at("hyp_path").get<std::string>()
                                                    : entry.at("hyp").get<std::string>());
      spec.ref = resolve(entry.contains("ref_path") ? entry.at("ref_path").get<std::string>()
                                                    : entry.at("ref").get<std::string>());
    } catch (const json::exception&) {
      throw data_error(path + ": each set needs lang, hyp_path, and ref_path");
    }
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw data_error(path + ": sets manifest lists no sets");
  return specs;
}

std::map<std::string, std::vector<std::string>> load_groups(const std::string& value) {
  if (value == "american") return american_default_groups();
  const json j = json::parse(read_file(value), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw config_error(value + ": groups file must be a JSON object of name -> [codes]");
  std::map<std::string, std::vector<std::string>> groups;
  try {
    for (const auto& [name, members] : j.items())
      groups[name] = members.get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw config_error(value + ": groups file must map names to arrays of language codes");
  }
  return groups;
}

int run_evaluate(const CLI::App& sub, EvaluateOpts& o, const Globals& g) {
  const json cfg = load_config_file(o.config);
  reject_unknown_keys(
      cfg, {"manifest", "lang", "hyp", "ref", "bootstrap", "seed", "groups", "eps_smoothing",
            "output"},
      "evaluate");
  merge_key(cfg, "manifest", sub, "--manifest", o.sets_manifest);
  merge_key(cfg, "lang", sub, "--lang", o.lang);
  merge_key(cfg, "hyp", sub, "--hyp", o.hyp);
  merge_key(cfg, "ref", sub, "--ref", o.ref);
  merge_key(cfg, "seed", sub, "--seed", o.seed);
  merge_key(cfg, "groups", sub, "--groups", o.groups);
  merge_key(cfg, "eps_smoothing", sub, "--eps-smoothing", o.eps_smoothing);
  merge_key(cfg, "output", sub, "--output", o.output);

  std::uint64_t resamples = 0;
  if (sub.count("--bootstrap") > 0) {
    // A bare --bootstrap surfaces as a single 0; both mean the 1000 default.
    resamples = (o.bootstrap.empty() || o.bootstrap.front() == 0) ? 1000 : o.bootstrap.front();
  } else if (cfg.contains("bootstrap")) {
    try {
      resamples = cfg.at("bootstrap").get<std::uint64_t>();
    } catch (const json::exception&) {
      throw config_error("config key \"bootstrap\" has the wrong type");
    }
  }

  std::vector<EvalSetSpec> specs;
  if (!o.sets_manifest.empty()) {
    if (!o.lang.empty() || !o.hyp.empty() || !o.ref.empty())
      throw config_error("evaluate: --manifest and --lang/--hyp/--ref are mutually exclusive");
    specs = parse_sets_manifest(o.sets_manifest);
  } else {
    require_value(o.lang, "evaluate: --lang");
    require_value(o.hyp, "evaluate: --hyp");
    require_value(o.ref, "evaluate: --ref");
    specs.push_back({o.lang, o.hyp, o.ref});
  }

  ChrfParams params;
  params.eps_smoothing = o.eps_smoothing;

  std::vector<EvalSet> sets;
  std::map<std::string, double> per_language;
  for (const EvalSetSpec& spec : specs) {
    if (per_language.count(spec.lang))
      throw config_error("evaluate: language \"" + spec.lang + "\" listed more than once");
    EvalSet set;
    set.lang = spec.lang;
    set.hypotheses = read_segment_lines(spec.hyp);
    set.references = read_segment_lines(spec.ref);
    per_language[spec.lang] = chrf_corpus(set, params);
    sets.push_back(std::move(set));
  }

  std::map<std::string, std::vector<std::string>> groups;
  if (!o.groups.empty()) groups = load_groups(o.groups);
  EvalReport report = group_report(per_language, groups);
  report.params = params;
  if (resamples > 0) report.bootstrap = bootstrap_ci(sets, params, resamples, o.seed, g.jobs);

  std::cout << report_table(report);

  if (!o.output.empty()) {
    const std::string text = report_to_json_string(report);
    std::vector<std::string> inputs;
    if (!o.sets_manifest.empty()) inputs.push_back(o.sets_manifest);
    for (const EvalSetSpec& spec : specs) {
      inputs.push_back(spec.hyp);
      inputs.push_back(spec.ref);
    }
    if (!o.groups.empty() && o.groups != "american") inputs.push_back(o.groups);
    DatasetManifest m;
    m.strategy = "evaluate";
    m.seed = o.seed;
    m.record_count = count_lines(text);
    m.created_from = digest_inputs(inputs);
    m.config = json{{"manifest", o.sets_manifest},
                    {"lang", o.lang},
                    {"hyp", o.hyp},
                    {"ref", o.ref},
                    {"bootstrap", resamples},
                    {"seed", o.seed},
                    {"groups", o.groups},
                    {"eps_smoothing", o.eps_smoothing},
                    {"output", o.output},
                    {"languages", languages_label(g)}};
    m.details = json{{"languages_scored", static_cast<std::uint64_t>(per_language.size())},
                     {"note", "line count of the JSON report"}};
    emit_output(o.output, text, std::move(m));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOpts {
  std::string config, input;
};

int run_report(const CLI::App& sub, ReportOpts& o) {
  const json cfg = load_config_file(o.config);
  reject_unknown_keys(cfg, {"input"}, "report");
  merge_key(cfg, "input", sub, "--input", o.input);
  require_value(o.input, "report: --input");
  const EvalReport report = report_from_json_string(read_file(o.input), o.input);
  std::cout << report_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"corpus engineering and evaluation toolkit for low-resource machine translation"};
  app.require_subcommand(1);

  Globals g;
  app.add_option("--languages", g.languages, "language registry JSON (default: builtin set)");
  app.add_option("--jobs", g.jobs, "worker threads (never affects output bytes)")
      ->check(CLI::PositiveNumber);

  IngestMonoOpts im;
  CLI::App* sub_im = app.add_subcommand("ingest-mono", "plain text -> monolingual JSONL");
  sub_im->fallthrough();
  sub_im->add_option("--config", im.config, "JSON config file (flags override)");
  sub_im->add_option("--input", im.input, "plain-text input, one segment per line");
  sub_im->add_option("--lang", im.lang, "language code");
  sub_im->add_option("--source", im.source, "source label (default: input filename)");
  sub_im->add_option("--output", im.output, "output JSONL path");

  IngestParallelOpts ip;
  CLI::App* sub_ip = app.add_subcommand("ingest-parallel", "aligned text or TSV -> parallel JSONL");
  sub_ip->fallthrough();
  sub_ip->add_option("--config", ip.config, "JSON config file (flags override)");
  sub_ip->add_option("--src-input", ip.src_input, "source-side text file");
  sub_ip->add_option("--tgt-input", ip.tgt_input, "target-side text file (line-aligned)");
  sub_ip->add_option("--tsv", ip.tsv, "two-column TSV (source<TAB>target)");
  sub_ip->add_option("--src-lang", ip.src_lang, "source language code");
  sub_ip->add_option("--tgt-lang", ip.tgt_lang, "target language code");
  sub_ip->add_option("--source", ip.source, "source label");
  sub_ip->add_option("--output", ip.output, "output JSONL path");

  StatsOpts st;
  CLI::App* sub_st = app.add_subcommand("stats", "corpus statistics, validation, fertility");
  sub_st->fallthrough();
  sub_st->add_option("--config", st.config, "JSON config file (flags override)");
  sub_st->add_option("--mono", st.mono, "monolingual JSONL inputs");
  sub_st->add_option("--parallel", st.parallel, "parallel JSONL inputs");
  sub_st->add_flag("--fertility", st.fertility, "report tokens-per-word fertility (mono inputs)");
  sub_st->add_option("--counter", st.counter, "token counter: whitespace | bpe");
  sub_st->add_option("--bpe-vocab", st.bpe_vocab, "BPE vocabulary file (token<TAB>id)");
  sub_st->add_option("--bpe-merges", st.bpe_merges, "BPE merges file (left right per line)");
  sub_st->add_flag("--byte-fallback,!--no-byte-fallback", st.byte_fallback,
                   "decompose unknown symbols into bytes (default on)");
  sub_st->add_option("--output", st.output, "write the JSON report here (default: stdout)");

  BuildCptOpts bc;
  CLI::App* sub_bc = app.add_subcommand("build-cpt", "continued-pretraining corpus builder");
  sub_bc->fallthrough();
  sub_bc->add_option("--config", bc.config, "JSON config file (flags override)");
  sub_bc->add_option("--strategy", bc.strategy, "all-mono | concat | separate");
  sub_bc->add_option("--mono", bc.mono, "monolingual JSONL inputs");
  sub_bc->add_option("--parallel", bc.parallel, "parallel JSONL inputs");
  sub_bc->add_option("--parallel-ratio", bc.parallel_ratio,
                     "fraction of the corpus emitted as concatenated pairs (concat strategy)");
  sub_bc->add_option("--tau", bc.tau, "temperature for language balancing (default 30)");
  sub_bc->add_option("--parallel-tau", bc.parallel_tau,
                     "temperature for the pair draw (default: --tau)");
  sub_bc->add_option("--size", bc.size, "target corpus size in records (0: whole pool once)");
  sub_bc->add_option("--unit", bc.unit, "language size unit: examples | tokens");
  sub_bc->add_option("--token-sizes", bc.token_sizes,
                     "JSON {\"mono\": {lang: tokens}, \"pairs\": {pair: tokens}}");
  sub_bc->add_option("--seed", bc.seed, "random seed");
  sub_bc->add_option("--output", bc.output, "output JSONL path");
  sub_bc->add_option("--text-output", bc.text_output, "also write a plain-text rendering here");

  BuildSftOpts bs;
  CLI::App* sub_bs = app.add_subcommand("build-sft", "instruction-tuning dataset builder");
  sub_bs->fallthrough();
  sub_bs->add_option("--config", bs.config, "JSON config file (flags override)");
  sub_bs->add_option("--pairs", bs.pairs, "parallel JSONL inputs (translation prompt mode)");
  sub_bs->add_option("--templates", bs.templates, "random | constant (default random)");
  sub_bs->add_option("--size", bs.size,
                     "temperature-sample this many pairs before rendering (0: all)");
  sub_bs->add_option("--tau", bs.tau, "temperature for --size sampling (default 80)");
  sub_bs->add_option("--general", bs.general, "instruction JSONL input (passthrough mode)");
  sub_bs->add_option("--task", bs.task, "task tag for --general records (default general)");
  sub_bs->add_option("--map", bs.map_entries, "rename input keys: SOURCE_KEY=DEST_FIELD");
  sub_bs->add_option("--lang", bs.lang, "language provenance for --general records");
  sub_bs->add_option("--spec", bs.spec, "mixture spec JSON (composition mode)");
  sub_bs->add_option("--epochs", bs.epochs, "repeat the dataset this many times, reshuffled");
  sub_bs->add_option("--seed", bs.seed, "random seed");
  sub_bs->add_option("--output", bs.output, "output JSONL path");

  SynthXqaOpts sx;
  CLI::App* sub_sx = app.add_subcommand("synth-xqa", "synthetic cross-lingual QA generation");
  sub_sx->fallthrough();
  sub_sx->add_option("--config", sx.config, "JSON config file (flags override)");
  sub_sx->add_option("--pairs", sx.pairs, "parallel JSONL inputs");
  sub_sx->add_option("--limit", sx.limit, "process at most this many pairs (default: all)");
  sub_sx->add_option("--seed", sx.seed, "random seed for the pair sample");
  sub_sx->add_option("--mock", sx.mock, "canned-response JSONL fixture instead of an endpoint");
  sub_sx->add_option("--endpoint", sx.endpoint,
                     "generation endpoint URL (or MTKIT_ENDPOINT_URL; token from "
                     "MTKIT_ENDPOINT_TOKEN)");
  sub_sx->add_option("--temperature", sx.temperature, "sampling temperature (default 0.7)");
  sub_sx->add_option("--max-tokens", sx.max_tokens, "generation length cap (default 128)");
  sub_sx->add_option("--retries", sx.retries, "endpoint retries (default 3)");
  sub_sx->add_option("--timeout-ms", sx.timeout_ms, "endpoint timeout (default 30000)");
  sub_sx->add_option("--output", sx.output, "output JSONL path");

  EvaluateOpts ev;
  CLI::App* sub_ev = app.add_subcommand("evaluate", "chrF++ scoring with bootstrap CIs");
  sub_ev->fallthrough();
  sub_ev->add_option("--config", ev.config, "JSON config file (flags override)");
  sub_ev->add_option("--manifest", ev.sets_manifest,
                     "JSON listing [{lang, hyp_path, ref_path}] (paths resolve relative to it)");
  sub_ev->add_option("--lang", ev.lang, "language code (single-set mode)");
  sub_ev->add_option("--hyp", ev.hyp, "hypothesis file, one segment per line");
  sub_ev->add_option("--ref", ev.ref, "reference file, line-aligned with --hyp");
  sub_ev->add_option("--bootstrap", ev.bootstrap,
                     "bootstrap resamples (bare flag or 0: the 1000 default)")
      ->expected(0, 1);
  sub_ev->add_option("--seed", ev.seed, "bootstrap seed");
  sub_ev->add_option("--groups", ev.groups, "groups JSON ({name: [codes]}) or \"american\"");
  sub_ev->add_flag("--eps-smoothing", ev.eps_smoothing,
                   "score every order with a 1e-16 floor instead of skipping empty orders");
  sub_ev->add_option("--output", ev.output, "write the JSON report here");

  ReportOpts rp;
  CLI::App* sub_rp = app.add_subcommand("report", "render an evaluation report as a text table");
  sub_rp->fallthrough();
  sub_rp->add_option("--config", rp.config, "JSON config file (flags override)");
  sub_rp->add_option("--input", rp.input, "evaluation report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const LanguageRegistry registry = g.languages.empty()
                                          ? LanguageRegistry::builtin()
                                          : LanguageRegistry::from_json_file(g.languages);
    if (sub_im->parsed()) return run_ingest_mono(*sub_im, im, g);
    if (sub_ip->parsed()) return run_ingest_parallel(*sub_ip, ip, g);
    if (sub_st->parsed()) return run_stats(*sub_st, st, g, registry);
    if (sub_bc->parsed()) return run_build_cpt(*sub_bc, bc, g);
    if (sub_bs->parsed()) return run_build_sft(*sub_bs, bs, g, registry);
    if (sub_sx->parsed()) return run_synth_xqa(*sub_sx, sx, g, registry);
    if (sub_ev->parsed()) return run_evaluate(*sub_ev, ev, g);
    if (sub_rp->parsed()) return run_report(*sub_rp, rp);
    std::cerr << "error[config]: no subcommand selected\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return 2;
  } catch (const data_error& e) {
    std::cerr << "error[data]: " << e.what() << "\n";
    return 3;
  } catch (const endpoint_error& e) {
    std::cerr << "error[endpoint]: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
