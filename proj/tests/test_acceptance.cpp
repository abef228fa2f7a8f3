// Acceptance suite: one criterion per check, one [PASS]/[FAIL] line each.
// Exit code is the number of failed criteria, so a zero exit means the build
// satisfies every shipping requirement checked here.

#include "mtkit/corpus.hpp"
#include "mtkit/cpt.hpp"
#include "mtkit/eval.hpp"
#include "mtkit/rng.hpp"
#include "mtkit/sampling.hpp"
#include "mtkit/sft.hpp"
#include "mtkit/tokenize.hpp"
#include "mtkit/util.hpp"
#include "mtkit/xqa.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace mtkit;
using nlohmann::json;

namespace {

struct check_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw check_failure(msg);
}

void require_close(double actual, double expected, double tol, const std::string& what) {
  if (!(std::abs(actual - expected) <= tol)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": got " << actual << ", want " << expected << " +/- " << tol;
    throw check_failure(os.str());
  }
}

int failures = 0;

void criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
    std::cout << "[PASS] " << name << "\n";
  } catch (const std::exception& e) {
    ++failures;
    std::cout << "[FAIL] " << name << ": " << e.what() << "\n";
  }
}

std::filesystem::path data_dir() { return MTKIT_TEST_DATA_DIR; }

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "mtkit_acceptance";
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_scratch(const std::string& name, const std::string& content) {
  const auto path = scratch_dir() / name;
  atomic_write_file(path, content);
  return path;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const auto out_path = scratch_dir() / ("acc_out_" + std::to_string(counter) + ".txt");
  const auto err_path = scratch_dir() / ("acc_err_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(MTKIT_CLI_PATH) + " " + args + " >" + out_path.string() +
                          " 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

std::vector<MonoRecord> make_mono(const std::string& lang, int n) {
  std::vector<MonoRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back({lang, lang + " sentence " + std::to_string(i), "acc"});
  return out;
}

std::vector<ParallelRecord> make_pairs(const std::string& src, const std::string& tgt, int n,
                                       const std::string& tag = "") {
  std::vector<ParallelRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back({src, tgt, src + " " + tag + "source " + std::to_string(i),
                   tgt + " " + tag + "target " + std::to_string(i), "acc"});
  }
  return out;
}

std::vector<SftRecord> make_sft_pool(const std::string& label, SftTask task, int n) {
  std::vector<SftRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SftRecord r;
    r.instruction = label + " instruction " + std::to_string(i);
    r.output = label + " output " + std::to_string(i);
    r.task = task;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 1: segment and corpus chrF++ parity with the reference scorer on
// the bundled 50-pair multilingual fixture, in both smoothing modes, < 5 s.

void check_chrf_reference_parity() {
  const json fixture = json::parse(read_file(data_dir() / "chrf_fixture.json"));
  const auto& segments = fixture.at("segments");
  require(segments.size() == 50, "fixture must hold 50 segment pairs");

  ChrfParams effective;
  ChrfParams eps;
  eps.eps_smoothing = true;

  const auto start = std::chrono::steady_clock::now();

  std::map<std::string, EvalSet> sets;
  for (const auto& seg : segments) {
    const std::string lang = seg.at("lang").get<std::string>();
    const std::string hyp = seg.at("hyp").get<std::string>();
    const std::string ref = seg.at("ref").get<std::string>();
    require_close(chrf_segment(hyp, ref, effective), seg.at("score").get<double>(), 1e-3,
                  "segment score (" + lang + ")");
    require_close(chrf_segment(hyp, ref, eps), seg.at("score_eps").get<double>(), 1e-3,
                  "segment eps score (" + lang + ")");
    EvalSet& set = sets[lang];
    set.lang = lang;
    set.hypotheses.push_back(hyp);
    set.references.push_back(ref);
  }
  for (const auto& [lang, expected] : fixture.at("corpus").items()) {
    const EvalSet& set = sets.at(lang);
    require(set.hypotheses.size() == expected.at("segments").get<std::size_t>(),
            "corpus segment count (" + lang + ")");
    require_close(chrf_corpus(set, effective), expected.at("score").get<double>(), 1e-3,
                  "corpus score (" + lang + ")");
    require_close(chrf_corpus(set, eps), expected.at("score_eps").get<double>(), 1e-3,
                  "corpus eps score (" + lang + ")");
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(elapsed < 5.0, "scoring took " + std::to_string(elapsed) + " s (budget 5 s)");
}

// ---------------------------------------------------------------------------
// Criterion 2: feeding the published per-language chrF++ scores into the
// grouped report reproduces the printed aggregate row within rounding.

void check_grouped_score_arithmetic() {
  const std::map<std::string, double> per_language = {
      {"aym", 20.2}, {"bzd", 15.8}, {"cni", 18.0}, {"ctp", 26.0}, {"grn", 25.8}, {"hch", 21.6},
      {"nhe", 18.2}, {"ote", 11.2}, {"quy", 24.9}, {"shp", 14.8}, {"tar", 9.5}};
  const EvalReport report = group_report(per_language, american_default_groups());
  require_close(report.macro_average, 18.7, 0.05, "macro average");
  require_close(report.groups.at("HRL"), 23.6, 0.05, "HRL group mean");
  require_close(report.groups.at("LRL"), 16.9, 0.05, "LRL group mean");
}

// ---------------------------------------------------------------------------
// Criterion 3: temperature allocation matches the frozen independently
// computed apportionment exactly; the two-language tau=2 case is exact.

void check_temperature_allocation_exactness() {
  const json fixture = json::parse(read_file(data_dir() / "allocation_fixture.json"));
  const auto sizes = fixture.at("sizes").get<std::map<std::string, double>>();
  std::set<double> taus_seen;
  for (const auto& c : fixture.at("cases")) {
    const double tau = c.at("tau").get<double>();
    taus_seen.insert(tau);
    const auto expected_probs = c.at("probabilities").get<std::map<std::string, double>>();
    const auto expected_counts = c.at("counts").get<std::map<std::string, std::uint64_t>>();
    const std::uint64_t target = c.at("target").get<std::uint64_t>();

    const auto probs = temperature_distribution(sizes, tau);
    require(probs.size() == expected_probs.size(), "probability map size (tau " +
                                                       std::to_string(tau) + ")");
    for (const auto& [lang, p] : expected_probs) {
      require_close(probs.at(lang), p, 1e-15,
                    "probability " + lang + " (tau " + std::to_string(tau) + ")");
    }
    const auto counts = allocate(probs, target);
    require(counts == expected_counts,
            "allocation mismatch at tau " + std::to_string(tau));
  }
  require(taus_seen == std::set<double>{1.0, 2.0, 30.0, 80.0},
          "fixture must cover tau in {1, 2, 30, 80}");

  // Two languages sized 900/100 flatten to exactly {0.75, 0.25} at tau = 2.
  const auto two = temperature_distribution({{"hi", 900.0}, {"lo", 100.0}}, 2.0);
  require(two.at("hi") == 0.75 && two.at("lo") == 0.25,
          "tau=2 two-language distribution must be exactly {0.75, 0.25}");
}

// ---------------------------------------------------------------------------
// Criterion 4: the concat-line count equals floor(ratio * size) exactly across
// the ratio grid, and ratio 0 is byte-identical to the all-mono build.

void check_parallel_ratio_exactness() {
  std::vector<MonoRecord> mono = make_mono("aym", 500);
  const std::vector<MonoRecord> mono_b = make_mono("quy", 500);
  mono.insert(mono.end(), mono_b.begin(), mono_b.end());
  std::vector<ParallelRecord> pairs = make_pairs("spa", "aym", 3000);
  const std::vector<ParallelRecord> pairs_b = make_pairs("spa", "quy", 3000);
  pairs.insert(pairs.end(), pairs_b.begin(), pairs_b.end());

  for (const std::uint64_t n : {std::uint64_t{100}, std::uint64_t{999}, std::uint64_t{10000}}) {
    for (const double ratio : {0.0, 0.1, 0.25, 0.5}) {
      MixerConfig mc;
      mc.strategy = MixStrategy::mono_parallel_concat;
      mc.parallel_ratio = ratio;
      mc.target_size = n;
      mc.seed = 7;
      const CptBuildResult result = build_cpt(mono, pairs, mc);
      require(result.sequences.size() == n,
              "record count at ratio " + std::to_string(ratio) + ", size " + std::to_string(n));
      std::uint64_t concat = 0;
      for (const auto& seq : result.sequences) {
        if (seq.origin == CptOrigin::parallel_concat) ++concat;
      }
      const auto expected = static_cast<std::uint64_t>(ratio * static_cast<double>(n));
      require(concat == expected, "concat count at ratio " + std::to_string(ratio) + ", size " +
                                      std::to_string(n) + ": got " + std::to_string(concat) +
                                      ", want " + std::to_string(expected));
    }

    MixerConfig zero;
    zero.strategy = MixStrategy::mono_parallel_concat;
    zero.parallel_ratio = 0.0;
    zero.target_size = n;
    zero.seed = 7;
    MixerConfig all_mono = zero;
    all_mono.strategy = MixStrategy::all_mono;
    const std::string concat_bytes = emit_cpt_jsonl(build_cpt(mono, pairs, zero).sequences);
    const std::string mono_bytes = emit_cpt_jsonl(build_cpt(mono, pairs, all_mono).sequences);
    require(concat_bytes == mono_bytes,
            "ratio-0 build must be byte-identical to all-mono at size " + std::to_string(n));
  }
}

// ---------------------------------------------------------------------------
// Criterion 5: every published mixture row and ratio-grid point, built at
// 1/1000 scale, reproduces its component and task counts exactly; the MT-only
// ablation datasets contain no non-MT records.

void check_mixture_composition_exactness() {
  std::map<std::string, std::vector<SftRecord>> datasets;
  datasets["spa_mt"] = make_sft_pool("spa-x mt", SftTask::mt, 600);
  datasets["eng_mt"] = make_sft_pool("eng-x mt", SftTask::mt, 550);
  datasets["por_mt"] = make_sft_pool("por-x mt", SftTask::mt, 550);
  datasets["spa_eng_mt"] = make_sft_pool("spa-eng mt", SftTask::mt, 550);
  datasets["xqa"] = make_sft_pool("xqa", SftTask::xqa, 550);
  datasets["aya"] = make_sft_pool("aya", SftTask::general, 550);

  const auto component = [](const std::string& name, std::uint64_t count) {
    MixtureComponent c;
    c.name = name;
    c.dataset = name;
    c.count = count;
    return c;
  };
  const auto run_row = [&](const std::vector<std::pair<std::string, std::uint64_t>>& parts,
                           std::uint64_t epochs,
                           const std::map<std::string, std::uint64_t>& expected_tasks) {
    MixtureSpec spec;
    spec.seed = 13;
    spec.epochs = epochs;
    std::uint64_t total = 0;
    std::map<std::string, std::uint64_t> expected_components;
    for (const auto& [name, count] : parts) {
      spec.components.push_back(component(name, count));
      expected_components[name] = count;
      total += count;
    }
    spec.total = total;
    const MixtureResult result = compose_mixture(spec, datasets);
    require(result.component_counts == expected_components, "component counts");
    require(result.task_counts == expected_tasks, "task counts");
    require(result.records.size() == total * epochs, "record count");
    return result;
  };

  // Published same-size comparison rows (at 1/1000 scale).
  run_row({{"spa_mt", 166}, {"eng_mt", 166}, {"por_mt", 166}}, 1, {{"mt", 498}});
  run_row({{"spa_eng_mt", 250}, {"spa_mt", 250}}, 1, {{"mt", 500}});
  run_row({{"spa_mt", 500}}, 1, {{"mt", 500}});
  run_row({{"spa_mt", 250}, {"xqa", 250}}, 1, {{"mt", 250}, {"xqa", 250}});
  run_row({{"spa_mt", 250}, {"aya", 250}}, 1, {{"mt", 250}, {"general", 250}});

  // The two-epoch row: 250 records repeated twice, every record exactly twice.
  const MixtureResult doubled = run_row({{"spa_mt", 250}}, 2, {{"mt", 500}});
  std::map<std::string, int> multiplicity;
  for (const auto& r : doubled.records) ++multiplicity[r.instruction];
  require(multiplicity.size() == 250, "two-epoch row must hold 250 distinct records");
  for (const auto& [_, m] : multiplicity) require(m == 2, "every record must appear exactly twice");

  // Task-vs-MT ratio grid: companion share of 0/10/25/50/75/100% of 500.
  const std::vector<std::pair<std::string, std::string>> companions = {
      {"xqa", "xqa"}, {"aya", "general"}, {"eng_mt", "mt"}, {"spa_eng_mt", "mt"}};
  const std::vector<std::uint64_t> shares = {0, 50, 125, 250, 375, 500};
  for (const auto& [name, task] : companions) {
    for (const std::uint64_t share : shares) {
      std::map<std::string, std::uint64_t> expected_tasks;
      if (share > 0) expected_tasks[task] += share;
      if (share < 500) expected_tasks["mt"] += 500 - share;
      run_row({{name, share}, {"spa_mt", 500 - share}}, 1, expected_tasks);
    }
  }

  // MT-only ablation: the same MT quantities with the companion removed.
  for (const std::uint64_t count : {std::uint64_t{500}, std::uint64_t{450}, std::uint64_t{375},
                                    std::uint64_t{250}, std::uint64_t{125}, std::uint64_t{0}}) {
    std::map<std::string, std::uint64_t> expected_tasks;
    if (count > 0) expected_tasks["mt"] = count;
    const MixtureResult result = run_row({{"spa_mt", count}}, 1, expected_tasks);
    for (const auto& r : result.records) {
      require(r.task == SftTask::mt, "MT-only ablation must contain zero non-MT records");
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 6: random template choice is uniform over the 14 translation
// prompts (chi-squared, df 13, p > 0.001); constant mode always emits the
// first template.

void check_template_distribution() {
  const auto& registry = LanguageRegistry::builtin();
  const auto& templates = mt_templates();
  require(templates.size() == 14, "there must be 14 translation prompt templates");

  const std::vector<ParallelRecord> pairs = make_pairs("spa", "aym", 14000);
  std::map<int, std::uint64_t> counts;
  const auto records =
      build_mt_dataset(pairs, templates, TemplateMode::random_templates, 5, registry, &counts);
  require(records.size() == 14000, "render count");
  std::uint64_t total = 0;
  double chi_squared = 0.0;
  for (const auto& tmpl : templates) {
    const double observed =
        counts.count(tmpl.id) ? static_cast<double>(counts.at(tmpl.id)) : 0.0;
    total += static_cast<std::uint64_t>(observed);
    const double expected = 1000.0;
    chi_squared += (observed - expected) * (observed - expected) / expected;
  }
  require(total == 14000, "template draw total");
  // 34.528 is the chi-squared critical value for df=13 at p = 0.001.
  require(chi_squared < 34.528,
          "chi-squared " + std::to_string(chi_squared) + " exceeds the 34.528 uniformity bound");

  std::map<int, std::uint64_t> constant_counts;
  const auto constant = build_mt_dataset(
      std::vector<ParallelRecord>(pairs.begin(), pairs.begin() + 100), templates,
      TemplateMode::constant_template, 5, registry, &constant_counts);
  require(constant_counts == std::map<int, std::uint64_t>{{1, 100}},
          "constant mode must emit template 1 with frequency 1.0");
  const std::string expected_instruction =
      render_mt(pairs[0], templates[0], registry).instruction;
  for (const auto& r : constant) {
    require(r.instruction == expected_instruction, "constant-mode instruction text");
  }
}

// ---------------------------------------------------------------------------
// Criterion 7: bootstrap sanity — zero-variance inputs give std 0 for any
// resample count; a tiny two-language fixture matches the exhaustively
// enumerated resampling expectation within 3 standard errors.

void check_bootstrap_statistics() {
  const ChrfParams params;

  // (a) Identical hypothesis/reference sets: every resample scores 100.
  std::vector<EvalSet> perfect(2);
  perfect[0] = {"aym", {"kamisaraki", "waliki jilata"}, {"kamisaraki", "waliki jilata"}};
  perfect[1] = {"quy", {"allinllachu"}, {"allinllachu"}};
  for (const std::uint64_t b : {std::uint64_t{1}, std::uint64_t{10}, std::uint64_t{1000}}) {
    const BootstrapResult r = bootstrap_ci(perfect, params, b, 3, 2);
    require(r.mean == 100.0, "perfect sets must average 100");
    require(r.std_dev == 0.0, "zero-variance std at B=" + std::to_string(b));
  }

  // Single-segment sets are also zero-variance: every resample is that segment.
  std::vector<EvalSet> single(1);
  single[0] = {"aym", {"kamisaraki kullaka"}, {"kamisaraki"}};
  const BootstrapResult fixed_draw = bootstrap_ci(single, params, 500, 9, 1);
  require(fixed_draw.std_dev == 0.0, "single-segment set must have zero bootstrap variance");
  require(fixed_draw.mean > 0.0 && fixed_draw.mean < 100.0,
          "single imperfect segment must score strictly between 0 and 100");

  // (b) Two languages x two segments: enumerate all with-replacement draws.
  // Each language independently draws (i, j) uniformly from {0,1}^2, so the
  // corpus statistics take the multiset values {00, 01, 11} with probability
  // {1/4, 1/2, 1/4}; the macro mean is the average of the two expectations.
  std::vector<EvalSet> sets(2);
  sets[0] = {"aym", {"kamisaraki kullaka", "suma uru"}, {"kamisaraki", "suma urukipan"}};
  sets[1] = {"quy", {"allinllachu tura", "imaynalla"}, {"allinllachu", "imaynalla kasanki"}};
  double expectation = 0.0;
  for (const EvalSet& set : sets) {
    const ChrfStats s0 = chrf_segment_stats(set.hypotheses[0], set.references[0], params);
    const ChrfStats s1 = chrf_segment_stats(set.hypotheses[1], set.references[1], params);
    ChrfStats both = s0;
    both += s1;
    ChrfStats twice0 = s0;
    twice0 += s0;
    ChrfStats twice1 = s1;
    twice1 += s1;
    expectation += 0.25 * chrf_from_stats(twice0, params) + 0.5 * chrf_from_stats(both, params) +
                   0.25 * chrf_from_stats(twice1, params);
  }
  expectation /= 2.0;

  const std::uint64_t kResamples = 10000;
  const BootstrapResult r = bootstrap_ci(sets, params, kResamples, 11, 2);
  require(r.std_dev > 0.0, "mixed fixture must have positive bootstrap variance");
  const double standard_error = r.std_dev / std::sqrt(static_cast<double>(kResamples));
  require_close(r.mean, expectation, 3.0 * standard_error,
                "bootstrap mean vs exhaustive expectation");
}

// ---------------------------------------------------------------------------
// Criterion 8: question synthesis contract under the deterministic mock
// client — single-line questions with the language suffix, and planted blank
// generations are skipped and counted exactly.

void check_xqa_generation_contract() {
  const auto& registry = LanguageRegistry::builtin();
  const std::vector<ParallelRecord> pairs = make_pairs("spa", "aym", 100);

  MockGenerationClient clean;
  for (const auto& pair : pairs) {
    clean.add_response(make_question_prompt(pair.src),
                       "What does \"" + pair.src + "\" mean?\nExtra trailing commentary.");
  }
  const XqaBuildResult full = build_xqa_dataset(pairs, clean, pairs.size(), 3, registry);
  require(full.processed == 100 && full.skipped_blank == 0, "clean fixture counters");
  require(full.records.size() == 100, "clean fixture record count");
  for (const auto& r : full.records) {
    require(r.instruction.find('\n') == std::string::npos, "question must be single-line");
    const std::string suffix = " Answer in Aymara.";
    require(r.instruction.size() > suffix.size() &&
                r.instruction.compare(r.instruction.size() - suffix.size(), suffix.size(),
                                      suffix) == 0,
            "question must end with the target-language suffix");
    require(r.task == SftTask::xqa && r.input.empty(), "record shape");
  }

  // Plant 7 blank generations; those pairs are skipped and counted.
  const std::set<std::size_t> faulty = {4, 17, 23, 42, 58, 71, 99};
  MockGenerationClient planted;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string text =
        faulty.count(i) ? "\n  \n" : "What is sentence " + std::to_string(i) + " about?";
    planted.add_response(make_question_prompt(pairs[i].src), text);
  }
  const XqaBuildResult partial = build_xqa_dataset(pairs, planted, pairs.size(), 3, registry);
  require(partial.processed == 100, "planted fixture must process all 100 pairs");
  require(partial.skipped_blank == 7,
          "skip count: got " + std::to_string(partial.skipped_blank) + ", want 7");
  require(partial.records.size() == 93,
          "record count: got " + std::to_string(partial.records.size()) + ", want 93");
}

// ---------------------------------------------------------------------------
// Criterion 9: every CLI subcommand, run twice with the same config and seed,
// produces byte-identical outputs and manifests; the worker count never
// changes evaluate's bytes.

void check_cli_determinism() {
  const auto dir = scratch_dir();

  // Shared inputs.
  const auto mono_txt = write_scratch("det_mono.txt", "kamisaraki\nwaliki jilata\nsuma uru\n");
  const auto pairs_tsv =
      write_scratch("det_pairs.tsv", "hola\tkamisaraki\nbuenos dias\twaliki\nadios\tjikisinkama\n");
  std::vector<MonoRecord> mono = make_mono("aym", 40);
  const std::vector<MonoRecord> mono_b = make_mono("quy", 40);
  mono.insert(mono.end(), mono_b.begin(), mono_b.end());
  const auto mono_jsonl = write_scratch("det_mono.jsonl", emit_mono_jsonl(mono));
  const std::vector<ParallelRecord> pairs = make_pairs("spa", "aym", 30);
  const auto pairs_jsonl = write_scratch("det_pairs.jsonl", emit_parallel_jsonl(pairs));

  const auto sft_pool = write_scratch(
      "det_sft_pool.jsonl", emit_sft_jsonl(make_sft_pool("det mt", SftTask::mt, 40)));
  const auto spec = write_scratch("det_spec.json",
                                  "{\"seed\": 4, \"total\": 30, \"epochs\": 2, \"components\": "
                                  "[{\"dataset\": \"det_sft_pool.jsonl\", \"task\": \"mt\", "
                                  "\"count\": 30}]}");

  std::string mock_fixture;
  for (const auto& pair : pairs) {
    mock_fixture +=
        json{{"prompt", make_question_prompt(pair.src)}, {"text", "What is " + pair.src + "?"}}
            .dump() +
        "\n";
  }
  const auto mock = write_scratch("det_mock.jsonl", mock_fixture);

  const auto hyp_a = write_scratch("det_a.hyp", "kamisaraki kullaka\nwaliki\nsuma uru\n");
  const auto ref_a = write_scratch("det_a.ref", "kamisaraki kullaka\nwalikiwa\nsuma urukipan\n");
  const auto hyp_b = write_scratch("det_b.hyp", "allinllachu\nimaynalla kasanki\n");
  const auto ref_b = write_scratch("det_b.ref", "allinllachu tura\nimaynalla\n");
  const auto sets = write_scratch("det_sets.json",
                                  "[{\"lang\": \"aym\", \"hyp_path\": \"det_a.hyp\", "
                                  "\"ref_path\": \"det_a.ref\"},"
                                  " {\"lang\": \"quy\", \"hyp_path\": \"det_b.hyp\", "
                                  "\"ref_path\": \"det_b.ref\"}]");

  // Each entry: subcommand arguments plus the files whose bytes must repeat.
  struct Run {
    std::string name;
    std::string args;
    std::vector<std::filesystem::path> outputs;
  };
  std::vector<Run> runs;
  const auto out = [&](const std::string& name) { return dir / name; };

  runs.push_back({"ingest-mono",
                  "ingest-mono --input " + mono_txt.string() + " --lang aym --output " +
                      out("det_im.jsonl").string(),
                  {out("det_im.jsonl")}});
  runs.push_back({"ingest-parallel",
                  "ingest-parallel --tsv " + pairs_tsv.string() +
                      " --src-lang spa --tgt-lang aym --output " + out("det_ip.jsonl").string(),
                  {out("det_ip.jsonl")}});
  runs.push_back({"stats",
                  "stats --mono " + mono_jsonl.string() + " --fertility --output " +
                      out("det_stats.json").string(),
                  {out("det_stats.json")}});
  runs.push_back({"build-cpt",
                  "build-cpt --strategy concat --mono " + mono_jsonl.string() + " --parallel " +
                      pairs_jsonl.string() + " --parallel-ratio 0.25 --size 60 --seed 7 --output " +
                      out("det_cpt.jsonl").string() + " --text-output " +
                      out("det_cpt.txt").string(),
                  {out("det_cpt.jsonl"), out("det_cpt.txt")}});
  runs.push_back({"build-sft",
                  "build-sft --spec " + spec.string() + " --seed 4 --output " +
                      out("det_sft.jsonl").string(),
                  {out("det_sft.jsonl")}});
  runs.push_back({"synth-xqa",
                  "synth-xqa --pairs " + pairs_jsonl.string() + " --mock " + mock.string() +
                      " --seed 2 --output " + out("det_xqa.jsonl").string(),
                  {out("det_xqa.jsonl")}});
  runs.push_back({"evaluate",
                  "evaluate --manifest " + sets.string() + " --bootstrap 400 --seed 1 --output " +
                      out("det_eval.json").string(),
                  {out("det_eval.json")}});

  for (const Run& run : runs) {
    const CliResult first = run_cli(run.args);
    require(first.code == 0, run.name + " first run failed: " + first.err);
    std::vector<std::string> bytes;
    for (const auto& path : run.outputs) {
      bytes.push_back(read_file(path));
      bytes.push_back(read_file(path.string() + ".manifest.json"));
    }
    const CliResult second = run_cli(run.args);
    require(second.code == 0, run.name + " second run failed: " + second.err);
    require(second.out == first.out, run.name + ": stdout differs between runs");
    std::size_t i = 0;
    for (const auto& path : run.outputs) {
      require(read_file(path) == bytes[i++], run.name + ": output bytes differ between runs");
      require(read_file(path.string() + ".manifest.json") == bytes[i++],
              run.name + ": manifest bytes differ between runs");
    }
  }

  // report renders to stdout: identical across runs.
  const std::string report_args = "report --input " + out("det_eval.json").string();
  const CliResult report_first = run_cli(report_args);
  require(report_first.code == 0, "report failed: " + report_first.err);
  require(report_first.out == run_cli(report_args).out, "report: stdout differs between runs");

  // The worker count must never change evaluate's bytes.
  const std::string eval_tail = "evaluate --manifest " + sets.string() +
                                " --bootstrap 400 --seed 1 --output " +
                                out("det_eval_jobs.json").string();
  require(run_cli("--jobs 1 " + eval_tail).code == 0, "evaluate --jobs 1 failed");
  const std::string jobs1 = read_file(out("det_eval_jobs.json"));
  require(run_cli("--jobs 8 " + eval_tail).code == 0, "evaluate --jobs 8 failed");
  require(read_file(out("det_eval_jobs.json")) == jobs1,
          "evaluate bytes depend on the worker count");
}

// ---------------------------------------------------------------------------
// Criterion 10: fertility arithmetic reproduces hand-computed fixtures
// exactly, and a whitespace counter yields fertility exactly 1 on
// whitespace-normalized text.

void check_fertility_exactness() {
  const FertilityReport report = fertility_from_totals({{"kha", {10, 4}}, {"lus", {6, 4}}});
  require(report.per_language.at("kha").fertility == 2.5, "kha fertility must be exactly 2.5");
  require(report.per_language.at("lus").fertility == 1.5, "lus fertility must be exactly 1.5");
  require(report.average == 2.0, "average fertility must be exactly 2.0");
  require(report.excluded.empty(), "no language may be excluded");

  const std::vector<MonoRecord> records = {
      {"aym", "kamisaraki kullaka suma", "acc"},
      {"aym", "waliki", "acc"},
      {"quy", "allinllachu tura imaynalla kasanki", "acc"},
  };
  const WhitespaceCounter counter;
  const FertilityReport ws = fertility(records, counter);
  require(ws.per_language.at("aym").fertility == 1.0, "aym whitespace fertility must be 1.0");
  require(ws.per_language.at("quy").fertility == 1.0, "quy whitespace fertility must be 1.0");
  require(ws.average == 1.0, "whitespace-counter average fertility must be 1.0");
}

}  // namespace

int main() {
  criterion("chrf-reference-parity", check_chrf_reference_parity);
  criterion("grouped-score-arithmetic", check_grouped_score_arithmetic);
  criterion("temperature-allocation-exactness", check_temperature_allocation_exactness);
  criterion("parallel-ratio-exactness", check_parallel_ratio_exactness);
  criterion("mixture-composition-exactness", check_mixture_composition_exactness);
  criterion("template-distribution", check_template_distribution);
  criterion("bootstrap-statistics", check_bootstrap_statistics);
  criterion("xqa-generation-contract", check_xqa_generation_contract);
  criterion("cli-determinism", check_cli_determinism);
  criterion("fertility-exactness", check_fertility_exactness);

  if (failures == 0) {
    std::cout << "all 10 criteria passed\n";
  } else {
    std::cout << failures << " criteria failed\n";
  }
  return failures;
}
