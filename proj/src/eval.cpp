#include "mtkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "mtkit/rng.hpp"
#include "mtkit/util.hpp"

namespace mtkit {
namespace {

// ASCII punctuation; only these are split off word edges.
constexpr std::string_view kPunctuation = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

bool is_ascii_punct(char32_t c) {
  return c < 128 && kPunctuation.find(static_cast<char>(c)) != std::string_view::npos;
}

bool is_ascii_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

// Code points of the text with all whitespace removed; char n-grams are drawn
// from this sequence.
std::u32string strip_whitespace(std::string_view text) {
  std::u32string out;
  for (char32_t c : utf8_decode(text)) {
    if (!is_ascii_space(c)) out.push_back(c);
  }
  return out;
}

// Whitespace tokenization followed by splitting a single punctuation mark off
// the end of a word, or else off the start. One-code-point words stay intact.
std::vector<std::string> punct_split_words(std::string_view text) {
  std::vector<std::string> out;
  for (std::string_view word : split_words(text)) {
    const std::vector<char32_t> cps = utf8_decode(word);
    if (cps.size() <= 1) {
      out.emplace_back(word);
      continue;
    }
    if (is_ascii_punct(cps.back())) {
      const std::size_t tail = utf8_encode(cps.back()).size();
      out.emplace_back(word.substr(0, word.size() - tail));
      out.emplace_back(word.substr(word.size() - tail));
    } else if (is_ascii_punct(cps.front())) {
      const std::size_t head = utf8_encode(cps.front()).size();
      out.emplace_back(word.substr(0, head));
      out.emplace_back(word.substr(head));
    } else {
      out.emplace_back(word);
    }
  }
  return out;
}

template <typename Key>
std::uint64_t count_matches(const std::map<Key, std::uint64_t>& hyp,
                            const std::map<Key, std::uint64_t>& ref) {
  std::uint64_t matches = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return matches;
}

std::map<std::u32string, std::uint64_t> char_ngram_counts(const std::u32string& chars, int order) {
  std::map<std::u32string, std::uint64_t> counts;
  const auto n = static_cast<std::size_t>(order);
  if (chars.size() >= n) {
    for (std::size_t i = 0; i + n <= chars.size(); ++i) ++counts[chars.substr(i, n)];
  }
  return counts;
}

std::map<std::string, std::uint64_t> word_ngram_counts(const std::vector<std::string>& tokens,
                                                       int order) {
  std::map<std::string, std::uint64_t> counts;
  const auto n = static_cast<std::size_t>(order);
  if (tokens.size() >= n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (std::size_t j = 1; j < n; ++j) {
        key += ' ';
        key += tokens[i + j];
      }
      ++counts[key];
    }
  }
  return counts;
}

void validate_params(const ChrfParams& params) {
  if (params.char_order < 0 || params.word_order < 0 || params.char_order + params.word_order <= 0)
    throw config_error("chrF orders must be non-negative and sum to at least 1");
  if (!(params.beta > 0.0)) throw config_error("chrF beta must be positive");
}

void validate_set(const EvalSet& set) {
  if (set.hypotheses.size() != set.references.size())
    throw data_error("evaluation set '" + set.lang + "' is misaligned: " +
                     std::to_string(set.hypotheses.size()) + " hypotheses vs " +
                     std::to_string(set.references.size()) + " references");
  if (set.hypotheses.empty())
    throw data_error("evaluation set '" + set.lang + "' is empty");
}

std::string fmt2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

}  // namespace

ChrfStats& ChrfStats::operator+=(const ChrfStats& other) {
  if (v.empty()) v.assign(other.v.size(), 0);
  if (v.size() != other.v.size()) throw config_error("chrF statistics order mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.v[i];
  return *this;
}

ChrfStats chrf_segment_stats(std::string_view hyp, std::string_view ref,
                             const ChrfParams& params) {
  validate_params(params);
  const std::size_t orders = static_cast<std::size_t>(params.char_order + params.word_order);
  ChrfStats stats(orders);

  const std::u32string hyp_chars = strip_whitespace(hyp);
  const std::u32string ref_chars = strip_whitespace(ref);
  for (int n = 1; n <= params.char_order; ++n) {
    const auto hyp_counts = char_ngram_counts(hyp_chars, n);
    const auto ref_counts = char_ngram_counts(ref_chars, n);
    const std::size_t slot = static_cast<std::size_t>(n - 1) * 3;
    stats.v[slot] = hyp_chars.size() >= static_cast<std::size_t>(n)
                        ? hyp_chars.size() - static_cast<std::size_t>(n) + 1
                        : 0;
    stats.v[slot + 1] = ref_chars.size() >= static_cast<std::size_t>(n)
                            ? ref_chars.size() - static_cast<std::size_t>(n) + 1
                            : 0;
    stats.v[slot + 2] = count_matches(hyp_counts, ref_counts);
  }

  const std::vector<std::string> hyp_words = punct_split_words(hyp);
  const std::vector<std::string> ref_words = punct_split_words(ref);
  for (int n = 1; n <= params.word_order; ++n) {
    const auto hyp_counts = word_ngram_counts(hyp_words, n);
    const auto ref_counts = word_ngram_counts(ref_words, n);
    const std::size_t slot = (static_cast<std::size_t>(params.char_order) +
                              static_cast<std::size_t>(n - 1)) *
                             3;
    stats.v[slot] = hyp_words.size() >= static_cast<std::size_t>(n)
                        ? hyp_words.size() - static_cast<std::size_t>(n) + 1
                        : 0;
    stats.v[slot + 1] = ref_words.size() >= static_cast<std::size_t>(n)
                            ? ref_words.size() - static_cast<std::size_t>(n) + 1
                            : 0;
    stats.v[slot + 2] = count_matches(hyp_counts, ref_counts);
  }
  return stats;
}

double chrf_from_stats(const ChrfStats& stats, const ChrfParams& params) {
  validate_params(params);
  const std::size_t orders = static_cast<std::size_t>(params.char_order + params.word_order);
  if (stats.v.size() != orders * 3) throw config_error("chrF statistics order mismatch");

  const double factor = params.beta * params.beta;
  constexpr double eps = 1e-16;
  double total = 0.0;
  std::size_t effective = 0;
  for (std::size_t i = 0; i < orders; ++i) {
    const double h = static_cast<double>(stats.v[i * 3]);
    const double r = static_cast<double>(stats.v[i * 3 + 1]);
    const double m = static_cast<double>(stats.v[i * 3 + 2]);
    if (params.eps_smoothing) {
      const double prec = h > 0 ? m / h : eps;
      const double rec = r > 0 ? m / r : eps;
      const double denom = factor * prec + rec;
      total += denom > 0 ? (1.0 + factor) * prec * rec / denom : eps;
      ++effective;
    } else {
      if (h + r == 0) continue;  // neither side has n-grams at this order
      const double prec = h > 0 ? m / h : 0.0;
      const double rec = r > 0 ? m / r : 0.0;
      const double denom = factor * prec + rec;
      total += denom > 0 ? (1.0 + factor) * prec * rec / denom : 0.0;
      ++effective;
    }
  }
  if (effective == 0) return 100.0;  // nothing to compare on either side
  return 100.0 * total / static_cast<double>(effective);
}

double chrf_segment(std::string_view hyp, std::string_view ref, const ChrfParams& params) {
  return chrf_from_stats(chrf_segment_stats(hyp, ref, params), params);
}

double chrf_corpus(const EvalSet& set, const ChrfParams& params) {
  validate_params(params);
  validate_set(set);
  ChrfStats total(static_cast<std::size_t>(params.char_order + params.word_order));
  for (std::size_t i = 0; i < set.hypotheses.size(); ++i)
    total += chrf_segment_stats(set.hypotheses[i], set.references[i], params);
  return chrf_from_stats(total, params);
}

BootstrapResult bootstrap_ci(const std::vector<EvalSet>& sets, const ChrfParams& params,
                             std::uint64_t B, std::uint64_t seed, unsigned jobs) {
  validate_params(params);
  if (B < 1) throw config_error("bootstrap requires at least one resample");
  if (sets.empty()) throw config_error("bootstrap requires at least one evaluation set");
  for (const EvalSet& set : sets) validate_set(set);

  // Per-segment statistics are computed once; every resample only sums them.
  const std::size_t orders = static_cast<std::size_t>(params.char_order + params.word_order);
  std::vector<std::vector<ChrfStats>> segment_stats(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    segment_stats[s].reserve(sets[s].hypotheses.size());
    for (std::size_t i = 0; i < sets[s].hypotheses.size(); ++i)
      segment_stats[s].push_back(
          chrf_segment_stats(sets[s].hypotheses[i], sets[s].references[i], params));
  }

  std::vector<double> macro(B, 0.0);
  auto run_range = [&](std::uint64_t first_b, std::uint64_t stride) {
    for (std::uint64_t b = first_b; b <= B; b += stride) {
      double sum_scores = 0.0;
      for (std::size_t s = 0; s < sets.size(); ++s) {
        const std::size_t n = segment_stats[s].size();
        Rng rng(derive_seed(seed ^ b, sets[s].lang));
        ChrfStats resampled(orders);
        for (std::size_t i = 0; i < n; ++i)
          resampled += segment_stats[s][rng.below(static_cast<std::uint64_t>(n))];
        sum_scores += chrf_from_stats(resampled, params);
      }
      macro[b - 1] = sum_scores / static_cast<double>(sets.size());
    }
  };

  unsigned workers = std::max(1u, jobs);
  if (static_cast<std::uint64_t>(workers) > B) workers = static_cast<unsigned>(B);
  if (workers == 1) {
    run_range(1, 1);
  } else {
    std::vector<std::thread> threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          run_range(w + 1, workers);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (std::thread& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  // Sequential reduction keeps byte-identical output regardless of `jobs`.
  // Scores are accumulated relative to the first resample so that a run of
  // identical scores produces a variance of exactly zero.
  const double offset = macro[0];
  double shifted_mean = 0.0;
  for (double x : macro) shifted_mean += x - offset;
  shifted_mean /= static_cast<double>(B);
  double variance = 0.0;
  for (double x : macro) {
    const double d = (x - offset) - shifted_mean;
    variance += d * d;
  }
  variance /= static_cast<double>(B);

  BootstrapResult result;
  result.mean = offset + shifted_mean;
  result.std_dev = std::sqrt(variance);
  result.resamples = B;
  result.seed = seed;
  return result;
}

EvalReport group_report(const std::map<std::string, double>& per_language,
                        const std::map<std::string, std::vector<std::string>>& groups) {
  if (per_language.empty())
    throw config_error("group report requires at least one per-language score");
  EvalReport report;
  report.per_language = per_language;
  double sum = 0.0;
  for (const auto& [lang, score] : per_language) sum += score;
  report.macro_average = sum / static_cast<double>(per_language.size());
  for (const auto& [name, members] : groups) {
    if (members.empty()) throw config_error("group '" + name + "' has no members");
    double group_sum = 0.0;
    for (const std::string& member : members) {
      auto it = per_language.find(member);
      if (it == per_language.end())
        throw config_error("group '" + name + "' references language '" + member +
                           "' with no score");
      group_sum += it->second;
    }
    report.groups[name] = group_sum / static_cast<double>(members.size());
  }
  return report;
}

const std::map<std::string, std::vector<std::string>>& american_default_groups() {
  static const std::map<std::string, std::vector<std::string>> groups = {
      {"HRL", {"aym", "grn", "quy"}},
      {"LRL", {"bzd", "cni", "ctp", "hch", "nhe", "ote", "shp", "tar"}},
  };
  return groups;
}

std::string report_to_json_string(const EvalReport& report) {
  nlohmann::json j;
  j["per_language"] = report.per_language;
  j["macro_average"] = report.macro_average;
  j["groups"] = report.groups;
  if (report.bootstrap) {
    j["bootstrap"] = {{"mean", report.bootstrap->mean},
                      {"std_dev", report.bootstrap->std_dev},
                      {"resamples", report.bootstrap->resamples},
                      {"seed", report.bootstrap->seed}};
  }
  j["params"] = {{"char_order", report.params.char_order},
                 {"word_order", report.params.word_order},
                 {"beta", report.params.beta},
                 {"eps_smoothing", report.params.eps_smoothing}};
  return j.dump(2) + "\n";
}

EvalReport report_from_json_string(std::string_view text, std::string_view origin) {
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  const std::string where(origin);
  if (j.is_discarded() || !j.is_object())
    throw data_error(where + ": not a valid evaluation report (invalid JSON)");
  EvalReport report;
  try {
    if (!j.contains("per_language") || !j.at("per_language").is_object())
      throw data_error(where + ": missing per-language scores");
    for (const auto& [lang, score] : j.at("per_language").items())
      report.per_language[lang] = score.get<double>();
    report.macro_average = j.at("macro_average").get<double>();
    if (j.contains("groups")) {
      for (const auto& [name, score] : j.at("groups").items())
        report.groups[name] = score.get<double>();
    }
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      BootstrapResult boot;
      boot.mean = b.at("mean").get<double>();
      boot.std_dev = b.at("std_dev").get<double>();
      boot.resamples = b.at("resamples").get<std::uint64_t>();
      boot.seed = b.at("seed").get<std::uint64_t>();
      report.bootstrap = boot;
    }
    if (j.contains("params")) {
      const auto& p = j.at("params");
      report.params.char_order = p.at("char_order").get<int>();
      report.params.word_order = p.at("word_order").get<int>();
      report.params.beta = p.at("beta").get<double>();
      report.params.eps_smoothing = p.at("eps_smoothing").get<bool>();
    }
  } catch (const data_error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(where + ": not a valid evaluation report: " + e.what());
  }
  return report;
}

std::string report_table(const EvalReport& report) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& [lang, score] : report.per_language) rows.emplace_back(lang, fmt2(score));
  rows.emplace_back("macro average", fmt2(report.macro_average));
  for (const auto& [name, score] : report.groups) rows.emplace_back(name, fmt2(score));

  std::size_t label_width = std::string("Language").size();
  std::size_t score_width = std::string("chrF++").size();
  for (const auto& [label, score] : rows) {
    label_width = std::max(label_width, label.size());
    score_width = std::max(score_width, score.size());
  }

  auto pad_row = [&](std::string_view label, std::string_view score) {
    std::string line(label);
    line.append(label_width - label.size() + 2, ' ');
    line.append(score_width - score.size(), ' ');
    line.append(score);
    line.push_back('\n');
    return line;
  };

  std::string out;
  out += "chrF++ (char order " + std::to_string(report.params.char_order) + ", word order " +
         std::to_string(report.params.word_order) + ", beta " + fmt2(report.params.beta) + ")";
  if (report.params.eps_smoothing) out += " [eps smoothing]";
  out += "\n\n";
  out += pad_row("Language", "chrF++");
  out += std::string(label_width + score_width + 2, '-') + "\n";
  const std::size_t language_rows = report.per_language.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == language_rows) out += std::string(label_width + score_width + 2, '-') + "\n";
    out += pad_row(rows[i].first, rows[i].second);
  }
  if (report.bootstrap) {
    out += "\nbootstrap mean " + fmt2(report.bootstrap->mean) + ", std " +
           fmt2(report.bootstrap->std_dev) + " (resamples " +
           std::to_string(report.bootstrap->resamples) + ", seed " +
           std::to_string(report.bootstrap->seed) + ")\n";
  }
  return out;
}

}  // namespace mtkit
