#include "mtkit/tokenize.hpp"

#include <algorithm>
#include <limits>

#include "json.hpp"
#include "mtkit/util.hpp"

namespace mtkit {

std::uint64_t WhitespaceCounter::count(std::string_view text) const { return count_words(text); }

// -- BPE ----------------------------------------------------------------------

BpeModel BpeModel::load(const std::filesystem::path& vocab_path,
                        const std::filesystem::path& merges_path, bool byte_fallback) {
  BpeModel model;
  model.byte_fallback = byte_fallback;

  const std::string vocab = read_file(vocab_path);
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < vocab.size()) {
    std::size_t end = vocab.find('\n', start);
    if (end == std::string::npos) end = vocab.size();
    std::string_view line(vocab.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw data_error(vocab_path.string() + ":" + std::to_string(lineno) +
                       ": expected \"token<TAB>id\"");
    std::int64_t id = 0;
    try {
      id = std::stoll(std::string(line.substr(tab + 1)));
    } catch (const std::exception&) {
      throw data_error(vocab_path.string() + ":" + std::to_string(lineno) + ": malformed id");
    }
    model.vocabulary.emplace(std::string(line.substr(0, tab)), id);
  }

  const std::string merges = read_file(merges_path);
  lineno = 0;
  start = 0;
  while (start < merges.size()) {
    std::size_t end = merges.find('\n', start);
    if (end == std::string::npos) end = merges.size();
    std::string_view line(merges.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    const std::size_t space = line.find(' ');
    if (space == std::string_view::npos || space == 0 || space + 1 >= line.size())
      throw data_error(merges_path.string() + ":" + std::to_string(lineno) +
                       ": expected \"left<SPACE>right\"");
    std::string left(line.substr(0, space));
    std::string right(line.substr(space + 1));
    if (model.vocabulary.find(left + right) == model.vocabulary.end())
      throw data_error(merges_path.string() + ":" + std::to_string(lineno) + ": merge output \"" +
                       left + right + "\" is not in the vocabulary");
    model.merges.emplace_back(std::move(left), std::move(right));
  }
  return model;
}

std::vector<std::string> bpe_tokenize(const BpeModel& model, std::string_view text) {
  // Initial segmentation: one symbol per code point.
  std::vector<std::string> symbols;
  for (char32_t cp : utf8_decode(text)) symbols.push_back(utf8_encode(cp));
  if (symbols.empty()) return symbols;

  std::map<std::pair<std::string_view, std::string_view>, std::size_t> rank;
  for (std::size_t i = 0; i < model.merges.size(); ++i)
    rank.emplace(std::make_pair(std::string_view(model.merges[i].first),
                                std::string_view(model.merges[i].second)),
                 i);

  // Repeatedly apply the lowest-ranked merge present anywhere in the sequence.
  while (symbols.size() > 1) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = rank.find({std::string_view(symbols[i]), std::string_view(symbols[i + 1])});
      if (it != rank.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    const auto& [left, right] = model.merges[best_rank];
    std::vector<std::string> merged;
    merged.reserve(symbols.size());
    std::size_t i = 0;
    while (i < symbols.size()) {
      if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
        merged.push_back(left + right);
        i += 2;
      } else {
        merged.push_back(std::move(symbols[i]));
        ++i;
      }
    }
    symbols = std::move(merged);
  }

  // Vocabulary lookup with optional byte fallback.
  std::vector<std::string> tokens;
  tokens.reserve(symbols.size());
  for (const auto& sym : symbols) {
    if (model.vocabulary.find(sym) != model.vocabulary.end()) {
      tokens.push_back(sym);
    } else if (model.byte_fallback) {
      for (char c : sym) tokens.push_back(std::string(1, c));
    } else {
      throw data_error("no vocabulary coverage for symbol \"" + sym + "\"");
    }
  }
  return tokens;
}

std::uint64_t bpe_count(const BpeModel& model, std::string_view text) {
  return bpe_tokenize(model, text).size();
}

std::vector<std::uint64_t> load_sidecar_counts(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<std::uint64_t> counts;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string_view line(content.data() + start, end - start);
    start = end + 1;
    ++lineno;
    if (is_blank(line)) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("tokens") ||
        !j["tokens"].is_number_unsigned())
      throw data_error(path.string() + ":" + std::to_string(lineno) +
                       ": expected {\"tokens\": n}");
    counts.push_back(j["tokens"].get<std::uint64_t>());
  }
  return counts;
}

// -- Fertility ----------------------------------------------------------------

namespace {

FertilityReport finish_fertility(
    const std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>& tokens_words) {
  FertilityReport report;
  double sum = 0.0;
  std::size_t included = 0;
  for (const auto& [lang, tw] : tokens_words) {
    FertilityEntry e;
    e.tokens = tw.first;
    e.words = tw.second;
    if (e.words == 0) {
      report.excluded.push_back(lang);
    } else {
      e.fertility = static_cast<double>(e.tokens) / static_cast<double>(e.words);
      sum += e.fertility;
      ++included;
    }
    report.per_language.emplace(lang, e);
  }
  if (included == 0)
    throw data_error("fertility undefined: every language has zero whitespace words");
  report.average = sum / static_cast<double>(included);
  return report;
}

}  // namespace

FertilityReport fertility(const std::vector<MonoRecord>& records, const TokenCounter& counter) {
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> tokens_words;
  for (const auto& r : records) {
    auto& tw = tokens_words[r.lang];
    tw.first += counter.count(r.text);
    tw.second += count_words(r.text);
  }
  return finish_fertility(tokens_words);
}

FertilityReport fertility_from_totals(
    const std::map<std::string, std::pair<std::uint64_t, std::uint64_t>>& tokens_words) {
  return finish_fertility(tokens_words);
}

}  // namespace mtkit
