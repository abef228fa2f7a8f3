#include "mtkit/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "json.hpp"
#include "mtkit/util.hpp"

namespace mtkit {

using nlohmann::json;

namespace {

// Splits file content into lines; a trailing newline does not create an extra
// empty line. Handles \n and \r\n.
std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    if (start == content.size()) {
      if (!lines.empty() || content.empty()) break;
    }
    const std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < content.size()) lines.push_back(content.substr(start));
      break;
    }
    std::size_t end = nl;
    if (end > start && content[end - 1] == '\r') --end;
    lines.push_back(content.substr(start, end - start));
    start = nl + 1;
  }
  return lines;
}

void require_utf8(std::string_view line, const std::filesystem::path& path, std::size_t lineno) {
  if (!utf8_valid(line))
    throw data_error(path.string() + ":" + std::to_string(lineno) + ": invalid UTF-8 byte sequence");
}

json parse_json_line(std::string_view line, std::string_view origin, std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw data_error(std::string(origin) + ":" + std::to_string(lineno) + ": malformed JSON record");
  return j;
}

std::string get_string(const json& j, const char* key, std::string_view origin, std::size_t lineno,
                       bool required, std::string fallback = "") {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required)
      throw data_error(std::string(origin) + ":" + std::to_string(lineno) + ": missing key \"" +
                       key + "\"");
    return fallback;
  }
  if (!it->is_string())
    throw data_error(std::string(origin) + ":" + std::to_string(lineno) + ": key \"" + key +
                     "\" is not a string");
  return it->get<std::string>();
}

}  // namespace

// -- Language registry --------------------------------------------------------

const LanguageRegistry& LanguageRegistry::builtin() {
  static const LanguageRegistry reg = [] {
    LanguageRegistry r;
    r.add("aym", "Aymara");
    r.add("bzd", "Bribri");
    r.add("cni", "Asháninka");
    r.add("ctp", "Chatino");
    r.add("grn", "Guarani");
    r.add("hch", "Huichol");
    r.add("nhe", "Nahuatl");
    r.add("ote", "Otomi");
    r.add("quy", "Quechua");
    r.add("shp", "Shipibo-Konibo");
    r.add("tar", "Tarahumara");
    r.add("asm", "Assamese");
    r.add("kha", "Khasi");
    r.add("lus", "Mizo");
    r.add("mni", "Meitei");
    r.add("eng", "English");
    r.add("spa", "Spanish");
    r.add("por", "Portuguese");
    return r;
  }();
  return reg;
}

LanguageRegistry LanguageRegistry::from_json_file(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("languages") || !j["languages"].is_array())
    throw config_error("language registry " + path.string() +
                       ": expected {\"languages\": [{\"code\", \"name\"}, ...]}");
  LanguageRegistry r;
  for (const auto& entry : j["languages"]) {
    if (!entry.is_object() || !entry.contains("code") || !entry.contains("name") ||
        !entry["code"].is_string() || !entry["name"].is_string())
      throw config_error("language registry " + path.string() +
                         ": every entry needs string \"code\" and \"name\"");
    r.add(entry["code"].get<std::string>(), entry["name"].get<std::string>());
  }
  return r;
}

void LanguageRegistry::add(std::string code, std::string name) {
  names_[std::move(code)] = std::move(name);
}

bool LanguageRegistry::contains(std::string_view code) const {
  return names_.find(code) != names_.end();
}

const std::string& LanguageRegistry::display_name(std::string_view code) const {
  auto it = names_.find(code);
  if (it == names_.end()) throw data_error("unknown language code: " + std::string(code));
  return it->second;
}

std::vector<std::string> LanguageRegistry::codes() const {
  std::vector<std::string> out;
  out.reserve(names_.size());
  for (const auto& [code, _] : names_) out.push_back(code);
  return out;
}

// -- Ingest -------------------------------------------------------------------

IngestResult<MonoRecord> ingest_mono_text(const std::filesystem::path& path,
                                          std::string_view lang, std::string_view source) {
  const std::string content = read_file(path);
  IngestResult<MonoRecord> result;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(content)) {
    ++lineno;
    require_utf8(line, path, lineno);
    if (is_blank(line)) {
      ++result.skipped_blank;
      continue;
    }
    // Text bytes pass through untouched (split_lines already dropped the
    // line terminator).
    result.records.push_back({std::string(lang), std::string(line), std::string(source)});
  }
  return result;
}

IngestResult<ParallelRecord> ingest_parallel_text(const std::filesystem::path& src_path,
                                                  const std::filesystem::path& tgt_path,
                                                  std::string_view src_lang,
                                                  std::string_view tgt_lang,
                                                  std::string_view source) {
  const std::string src_content = read_file(src_path);
  const std::string tgt_content = read_file(tgt_path);
  const auto src_lines = split_lines(src_content);
  const auto tgt_lines = split_lines(tgt_content);
  if (src_lines.size() != tgt_lines.size())
    throw data_error("alignment error: " + src_path.string() + " has " +
                     std::to_string(src_lines.size()) + " lines but " + tgt_path.string() +
                     " has " + std::to_string(tgt_lines.size()));
  IngestResult<ParallelRecord> result;
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    require_utf8(src_lines[i], src_path, i + 1);
    require_utf8(tgt_lines[i], tgt_path, i + 1);
    if (is_blank(src_lines[i]) || is_blank(tgt_lines[i])) {
      ++result.skipped_blank;
      continue;
    }
    result.records.push_back({std::string(src_lang), std::string(tgt_lang),
                              std::string(src_lines[i]), std::string(tgt_lines[i]),
                              std::string(source)});
  }
  return result;
}

IngestResult<ParallelRecord> ingest_parallel_tsv(const std::filesystem::path& path,
                                                 std::string_view src_lang,
                                                 std::string_view tgt_lang,
                                                 std::string_view source) {
  const std::string content = read_file(path);
  IngestResult<ParallelRecord> result;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(content)) {
    ++lineno;
    require_utf8(line, path, lineno);
    if (is_blank(line)) {
      ++result.skipped_blank;
      continue;
    }
    const std::size_t first_tab = line.find('\t');
    if (first_tab == std::string_view::npos ||
        line.find('\t', first_tab + 1) != std::string_view::npos)
      throw data_error(path.string() + ":" + std::to_string(lineno) +
                       ": expected exactly 2 tab-separated columns");
    const std::string_view src = line.substr(0, first_tab);
    const std::string_view tgt = line.substr(first_tab + 1);
    if (is_blank(src) || is_blank(tgt)) {
      ++result.skipped_blank;
      continue;
    }
    result.records.push_back({std::string(src_lang), std::string(tgt_lang), std::string(src),
                              std::string(tgt), std::string(source)});
  }
  return result;
}

// -- JSONL --------------------------------------------------------------------

std::string emit_mono_jsonl(const std::vector<MonoRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j{{"lang", r.lang}, {"text", r.text}, {"source", r.source}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string emit_parallel_jsonl(const std::vector<ParallelRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j{{"src_lang", r.src_lang},
           {"tgt_lang", r.tgt_lang},
           {"src", r.src},
           {"tgt", r.tgt},
           {"source", r.source}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<MonoRecord> parse_mono_jsonl(std::string_view content, std::string_view origin) {
  std::vector<MonoRecord> records;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(content)) {
    ++lineno;
    if (is_blank(line)) continue;
    const json j = parse_json_line(line, origin, lineno);
    MonoRecord r;
    r.lang = get_string(j, "lang", origin, lineno, true);
    r.text = get_string(j, "text", origin, lineno, true);
    r.source = get_string(j, "source", origin, lineno, false);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ParallelRecord> parse_parallel_jsonl(std::string_view content,
                                                 std::string_view origin) {
  std::vector<ParallelRecord> records;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(content)) {
    ++lineno;
    if (is_blank(line)) continue;
    const json j = parse_json_line(line, origin, lineno);
    ParallelRecord r;
    r.src_lang = get_string(j, "src_lang", origin, lineno, true);
    r.tgt_lang = get_string(j, "tgt_lang", origin, lineno, true);
    r.src = get_string(j, "src", origin, lineno, true);
    r.tgt = get_string(j, "tgt", origin, lineno, true);
    r.source = get_string(j, "source", origin, lineno, false);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<MonoRecord> load_mono_jsonl(const std::filesystem::path& path) {
  return parse_mono_jsonl(read_file(path), path.string());
}

std::vector<ParallelRecord> load_parallel_jsonl(const std::filesystem::path& path) {
  return parse_parallel_jsonl(read_file(path), path.string());
}

// -- Statistics ---------------------------------------------------------------

LanguageStats CorpusStats::totals() const {
  LanguageStats t;
  t.has_tokens = !per_language.empty();
  for (const auto& [_, s] : per_language) {
    t.segments += s.segments;
    t.words += s.words;
    t.tokens += s.tokens;
    t.has_tokens = t.has_tokens && s.has_tokens;
  }
  return t;
}

void CorpusStats::add_segment(std::string_view lang, std::string_view text) {
  auto& s = per_language[std::string(lang)];
  ++s.segments;
  s.words += count_words(text);
}

void CorpusStats::add_tokens(std::string_view lang, std::uint64_t tokens) {
  auto& s = per_language[std::string(lang)];
  s.tokens += tokens;
  s.has_tokens = true;
}

CorpusStats corpus_stats(const std::vector<MonoRecord>& records) {
  CorpusStats stats;
  for (const auto& r : records) stats.add_segment(r.lang, r.text);
  return stats;
}

CorpusStats corpus_stats(const std::vector<ParallelRecord>& records) {
  CorpusStats stats;
  for (const auto& r : records) {
    stats.add_segment(r.src_lang, r.src);
    stats.add_segment(r.tgt_lang, r.tgt);
  }
  return stats;
}

// -- Validation ---------------------------------------------------------------

namespace {

template <typename Record, typename KeyFn, typename CheckFn>
ValidationReport validate_impl(const std::vector<Record>& records, KeyFn key, CheckFn check) {
  ValidationReport report;
  report.records = records.size();
  std::unordered_set<std::string> seen;
  seen.reserve(records.size());
  std::size_t index = 0;
  for (const auto& r : records) {
    ++index;
    check(r, index, report);
    ++report.per_source[r.source];
    if (!seen.insert(key(r)).second) ++report.duplicates;
  }
  return report;
}

}  // namespace

ValidationReport validate(const std::vector<MonoRecord>& records,
                          const LanguageRegistry& registry) {
  return validate_impl(
      records, [](const MonoRecord& r) { return r.lang + "\x1f" + r.text; },
      [&](const MonoRecord& r, std::size_t i, ValidationReport& rep) {
        if (r.text.empty()) rep.issues.push_back({i, "empty text"});
        if (r.text.find('\n') != std::string::npos)
          rep.issues.push_back({i, "embedded newline in text"});
        if (!registry.contains(r.lang))
          rep.issues.push_back({i, "unknown language code: " + r.lang});
      });
}

ValidationReport validate(const std::vector<ParallelRecord>& records,
                          const LanguageRegistry& registry) {
  return validate_impl(
      records,
      [](const ParallelRecord& r) {
        return r.src_lang + "\x1f" + r.tgt_lang + "\x1f" + r.src + "\x1f" + r.tgt;
      },
      [&](const ParallelRecord& r, std::size_t i, ValidationReport& rep) {
        if (r.src.empty()) rep.issues.push_back({i, "empty source text"});
        if (r.tgt.empty()) rep.issues.push_back({i, "empty target text"});
        if (r.src.find('\n') != std::string::npos || r.tgt.find('\n') != std::string::npos)
          rep.issues.push_back({i, "embedded newline in text"});
        if (!registry.contains(r.src_lang))
          rep.issues.push_back({i, "unknown language code: " + r.src_lang});
        if (!registry.contains(r.tgt_lang))
          rep.issues.push_back({i, "unknown language code: " + r.tgt_lang});
        if (r.src_lang == r.tgt_lang)
          rep.issues.push_back({i, "source and target language are identical"});
      });
}

}  // namespace mtkit
