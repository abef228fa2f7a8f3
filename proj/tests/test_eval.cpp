#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mtkit/eval.hpp"
#include "mtkit/util.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

using namespace mtkit;

namespace {

const std::filesystem::path kDataDir = MTKIT_TEST_DATA_DIR;

ChrfParams eps_params() {
  ChrfParams p;
  p.eps_smoothing = true;
  return p;
}

// Reassembles the per-language evaluation sets frozen in the scorer fixture.
std::map<std::string, EvalSet> fixture_sets(const nlohmann::json& fixture) {
  std::map<std::string, EvalSet> sets;
  for (const auto& seg : fixture.at("segments")) {
    const std::string lang = seg.at("lang").get<std::string>();
    auto& set = sets[lang];
    set.lang = lang;
    set.hypotheses.push_back(seg.at("hyp").get<std::string>());
    set.references.push_back(seg.at("ref").get<std::string>());
  }
  return sets;
}

}  // namespace

TEST_CASE("identical strings score exactly one hundred") {
  CHECK(chrf_segment("kamisaraki", "kamisaraki") == 100.0);
  CHECK(chrf_segment("the quick brown fox", "the quick brown fox") == 100.0);
}

TEST_CASE("disjoint strings score zero") {
  CHECK(chrf_segment("zzzz", "aaaa") == 0.0);
}

TEST_CASE("empty-side conventions") {
  CHECK(chrf_segment("", "kamisaraki") == 0.0);
  CHECK(chrf_segment("kamisaraki", "") == 0.0);
  CHECK(chrf_segment("", "") == 100.0);
}

TEST_CASE("partial overlap matches the frozen reference value") {
  // Frozen from an independent implementation of the published scorer.
  const double expected = 49.74428816698791;
  CHECK(std::abs(chrf_segment("the cat sat", "the cat sat on the mat") - expected) < 1e-3);
  // Every order has mass for this pair, so both smoothing modes agree.
  CHECK(std::abs(chrf_segment("the cat sat", "the cat sat on the mat", eps_params()) - expected) <
        1e-3);
}

TEST_CASE("epsilon smoothing penalizes the empty word-bigram order") {
  // A single word has no word 2-grams; the default mode drops that order
  // (7 perfect orders → 100), the epsilon mode keeps all 8 (7/8 of 100).
  CHECK(chrf_segment("kamisaraki", "kamisaraki") == 100.0);
  CHECK(chrf_segment("kamisaraki", "kamisaraki", eps_params()) == 87.5);
}

TEST_CASE("corpus score of a single segment equals the segment score") {
  EvalSet set{"aym", {"the cat sat"}, {"the cat sat on the mat"}};
  CHECK(chrf_corpus(set) == chrf_segment("the cat sat", "the cat sat on the mat"));
}

TEST_CASE("corpus score is invariant to duplicating the whole set") {
  EvalSet set{"aym",
              {"kamisaraki kullaka", "waliki", "aski urukipana"},
              {"kamisaraki jilata", "walikiwa", "aski jayp'ukipana"}};
  EvalSet doubled = set;
  doubled.hypotheses.insert(doubled.hypotheses.end(), set.hypotheses.begin(),
                            set.hypotheses.end());
  doubled.references.insert(doubled.references.end(), set.references.begin(),
                            set.references.end());
  CHECK(chrf_corpus(doubled) == doctest::Approx(chrf_corpus(set)).epsilon(1e-12));
}

TEST_CASE("corpus scoring is not a mean of segment scores") {
  // One perfect and one disjoint segment: the statistic-pooled score differs
  // from the 50.0 a segment-mean would give.
  EvalSet set{"aym", {"kamisaraki", "zzzz"}, {"kamisaraki", "aaaa"}};
  const double corpus = chrf_corpus(set);
  CHECK(corpus > 0.0);
  CHECK(corpus < 100.0);
  CHECK(corpus != doctest::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("misaligned or empty sets raise alignment errors") {
  EvalSet bad{"aym", {"a", "b"}, {"a", "b", "c"}};
  try {
    chrf_corpus(bad);
    FAIL("expected data_error");
  } catch (const data_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("aym") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
  }
  EvalSet empty{"aym", {}, {}};
  CHECK_THROWS_AS(chrf_corpus(empty), data_error);
}

TEST_CASE("fifty-pair fixture matches the reference scorer within 1e-3") {
  const auto fixture = nlohmann::json::parse(read_file(kDataDir / "chrf_fixture.json"));
  const auto& segments = fixture.at("segments");
  REQUIRE(segments.size() == 50);
  for (const auto& seg : segments) {
    const std::string hyp = seg.at("hyp").get<std::string>();
    const std::string ref = seg.at("ref").get<std::string>();
    CAPTURE(hyp);
    CHECK(std::abs(chrf_segment(hyp, ref) - seg.at("score").get<double>()) < 1e-3);
    CHECK(std::abs(chrf_segment(hyp, ref, eps_params()) - seg.at("score_eps").get<double>()) <
          1e-3);
  }
  const auto sets = fixture_sets(fixture);
  for (const auto& [lang, expected] : fixture.at("corpus").items()) {
    CAPTURE(lang);
    const auto& set = sets.at(lang);
    REQUIRE(set.hypotheses.size() == expected.at("segments").get<std::size_t>());
    CHECK(std::abs(chrf_corpus(set) - expected.at("score").get<double>()) < 1e-3);
    CHECK(std::abs(chrf_corpus(set, eps_params()) - expected.at("score_eps").get<double>()) <
          1e-3);
  }
}

TEST_CASE("group report reproduces the grouped means") {
  std::map<std::string, double> scores = {{"aym", 20.0}, {"grn", 25.0}, {"quy", 24.0}};
  for (const auto* lang : {"bzd", "cni", "ctp", "hch", "nhe", "ote", "shp", "tar"})
    scores[lang] = 10.0;
  const auto report = group_report(scores, american_default_groups());
  CHECK(report.groups.at("HRL") == doctest::Approx(23.0).epsilon(1e-12));
  CHECK(report.groups.at("LRL") == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(report.macro_average == doctest::Approx(149.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("a group holding every language reproduces the macro average") {
  std::map<std::string, double> scores = {{"aym", 17.5}, {"quy", 23.25}, {"spa", 61.0}};
  const auto report = group_report(scores, {{"all", {"aym", "quy", "spa"}}});
  CHECK(report.groups.at("all") == doctest::Approx(report.macro_average).epsilon(1e-12));
}

TEST_CASE("groups naming an unscored language are a configuration error") {
  CHECK_THROWS_WITH_AS(group_report({{"aym", 10.0}}, {{"HRL", {"aym", "quy"}}}),
                       doctest::Contains("quy"), config_error);
  CHECK_THROWS_AS(group_report({}), config_error);
}

TEST_CASE("bootstrap of perfect hypotheses has zero variance") {
  std::vector<EvalSet> sets = {
      {"aym", {"kamisaraki", "waliki jilata"}, {"kamisaraki", "waliki jilata"}},
      {"quy", {"allinllachu"}, {"allinllachu"}},
  };
  for (std::uint64_t B : {1, 5, 64}) {
    const auto result = bootstrap_ci(sets, {}, B, 11);
    CHECK(result.mean == 100.0);
    CHECK(result.std_dev == 0.0);
    CHECK(result.resamples == B);
  }
}

TEST_CASE("a single resample has zero standard deviation") {
  std::vector<EvalSet> sets = {
      {"aym", {"kamisaraki", "waliki"}, {"kamisaraki kullaka", "walikiwa"}},
  };
  const auto result = bootstrap_ci(sets, {}, 1, 3);
  CHECK(result.std_dev == 0.0);
  // Both segments overlap their references, so every possible resample of
  // this set pools some matching n-grams.
  CHECK(result.mean > 0.0);
}

TEST_CASE("bootstrap is deterministic and independent of the worker count") {
  std::vector<EvalSet> sets;
  for (const auto* lang : {"aym", "quy", "grn"}) {
    EvalSet set;
    set.lang = lang;
    for (int i = 0; i < 12; ++i) {
      set.hypotheses.push_back(std::string(lang) + " hyp words " + std::to_string(i));
      set.references.push_back(std::string(lang) + " ref words " + std::to_string(i % 3));
    }
    sets.push_back(std::move(set));
  }
  const auto a = bootstrap_ci(sets, {}, 200, 17, 1);
  const auto b = bootstrap_ci(sets, {}, 200, 17, 1);
  CHECK(a.mean == b.mean);
  CHECK(a.std_dev == b.std_dev);
  const auto parallel = bootstrap_ci(sets, {}, 200, 17, 8);
  CHECK(parallel.mean == a.mean);  // bitwise: same resamples, same reduction order
  CHECK(parallel.std_dev == a.std_dev);
  const auto other_seed = bootstrap_ci(sets, {}, 200, 18, 1);
  CHECK(other_seed.mean != a.mean);
}

TEST_CASE("bootstrap validates its inputs") {
  CHECK_THROWS_AS(bootstrap_ci({}, {}, 10, 1), config_error);
  std::vector<EvalSet> sets = {{"aym", {"a"}, {"a"}}};
  CHECK_THROWS_AS(bootstrap_ci(sets, {}, 0, 1), config_error);
}

TEST_CASE("report json round-trips every field") {
  std::map<std::string, double> scores = {{"aym", 20.25}, {"grn", 25.5}, {"quy", 24.125}};
  auto report = group_report(scores, {{"HRL", {"aym", "grn", "quy"}}});
  BootstrapResult boot;
  boot.mean = 23.3125;
  boot.std_dev = 0.75;
  boot.resamples = 1000;
  boot.seed = 42;
  report.bootstrap = boot;

  const std::string text = report_to_json_string(report);
  const auto parsed = report_from_json_string(text, "roundtrip");
  CHECK(parsed.per_language == report.per_language);
  CHECK(parsed.macro_average == report.macro_average);
  CHECK(parsed.groups == report.groups);
  REQUIRE(parsed.bootstrap.has_value());
  CHECK(parsed.bootstrap->mean == boot.mean);
  CHECK(parsed.bootstrap->std_dev == boot.std_dev);
  CHECK(parsed.bootstrap->resamples == boot.resamples);
  CHECK(parsed.bootstrap->seed == boot.seed);
  CHECK(parsed.params.char_order == report.params.char_order);
  CHECK(parsed.params.eps_smoothing == report.params.eps_smoothing);

  CHECK_THROWS_WITH_AS(report_from_json_string("{nope", "broken"), doctest::Contains("broken"),
                       data_error);
}

TEST_CASE("the text table lists languages, the macro average, and the bootstrap line") {
  std::map<std::string, double> scores = {{"aym", 20.0}, {"quy", 24.0}};
  auto report = group_report(scores, {{"HRL", {"aym", "quy"}}});
  BootstrapResult boot;
  boot.mean = 22.0;
  boot.std_dev = 0.5;
  boot.resamples = 100;
  boot.seed = 9;
  report.bootstrap = boot;
  const std::string table = report_table(report);
  CHECK(table.find("aym") != std::string::npos);
  CHECK(table.find("20.00") != std::string::npos);
  CHECK(table.find("macro average") != std::string::npos);
  CHECK(table.find("22.00") != std::string::npos);
  CHECK(table.find("HRL") != std::string::npos);
  CHECK(table.find("resamples 100") != std::string::npos);
}
