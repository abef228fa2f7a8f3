#include "mtkit/sft.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "mtkit/rng.hpp"
#include "mtkit/sampling.hpp"
#include "mtkit/util.hpp"

namespace mtkit {

using nlohmann::json;

std::string to_string(SftTask t) {
  switch (t) {
    case SftTask::mt:
      return "mt";
    case SftTask::xqa:
      return "xqa";
    case SftTask::general:
      return "general";
  }
  return "general";
}

SftTask parse_task(std::string_view name) {
  if (name == "mt") return SftTask::mt;
  if (name == "xqa") return SftTask::xqa;
  if (name == "general") return SftTask::general;
  throw data_error("unknown task tag: " + std::string(name));
}

const std::vector<PromptTemplate>& mt_templates() {
  static const std::vector<PromptTemplate> templates = {
      {1, "Translate the following sentence from {src_lang} to {tgt_lang}."},
      {2, "Can you convert the following sentence from {src_lang} to {tgt_lang}."},
      {3, "Kindly translate this sentence from {src_lang} into {tgt_lang}."},
      {4, "Could you translate the following from {src_lang} to {tgt_lang}?"},
      {5, "Proceed to translate the subsequent sentence from {src_lang} to {tgt_lang}."},
      {6, "Change the following sentence from {src_lang} to {tgt_lang}."},
      {7, "Render the sentence below from {src_lang} into {tgt_lang}."},
      {8, "Switch the following sentence from {src_lang} into {tgt_lang} language."},
      {9, "Rephrase the following sentence into {tgt_lang} from {src_lang}."},
      {10, "Transform the following text from {src_lang} to {tgt_lang}."},
      {11, "Can you restate the following sentence from {src_lang} in {tgt_lang}?"},
      {12, "Please provide a translation for this sentence from {src_lang} to {tgt_lang}."},
      {13, "Adapt the following into {tgt_lang} from the original {src_lang}."},
      {14, "Translate the subsequent text from {src_lang} into the {tgt_lang} language."},
  };
  return templates;
}

namespace {

// Replaces exactly one occurrence of placeholder; a missing or repeated
// placeholder violates the template invariant.
std::string substitute_once(const std::string& pattern, std::string_view placeholder,
                            const std::string& value) {
  const std::size_t pos = pattern.find(placeholder);
  if (pos == std::string::npos || pattern.find(placeholder, pos + 1) != std::string::npos)
    throw config_error("template must contain \"" + std::string(placeholder) +
                       "\" exactly once: " + pattern);
  std::string out = pattern;
  out.replace(pos, placeholder.size(), value);
  return out;
}

}  // namespace

SftRecord render_mt(const ParallelRecord& pair, const PromptTemplate& tmpl,
                    const LanguageRegistry& registry) {
  SftRecord record;
  record.instruction = substitute_once(
      substitute_once(tmpl.pattern, "{src_lang}", registry.display_name(pair.src_lang)),
      "{tgt_lang}", registry.display_name(pair.tgt_lang));
  record.input = pair.src;
  record.output = pair.tgt;
  record.task = SftTask::mt;
  record.pair = pair_key(pair);
  return record;
}

std::vector<SftRecord> build_mt_dataset(const std::vector<ParallelRecord>& pairs,
                                        const std::vector<PromptTemplate>& templates,
                                        TemplateMode mode, std::uint64_t seed,
                                        const LanguageRegistry& registry,
                                        std::map<int, std::uint64_t>* template_counts) {
  if (templates.empty()) throw config_error("no prompt templates supplied");
  std::vector<SftRecord> records;
  records.reserve(pairs.size());
  Rng rng(derive_seed(seed, "templates"));
  for (const auto& pair : pairs) {
    const PromptTemplate& tmpl =
        mode == TemplateMode::constant_template
            ? templates.front()
            : templates[static_cast<std::size_t>(rng.below(templates.size()))];
    records.push_back(render_mt(pair, tmpl, registry));
    if (template_counts) ++(*template_counts)[tmpl.id];
  }
  return records;
}

std::vector<SftRecord> ingest_general(const std::filesystem::path& path, SftTask task_tag,
                                      const std::map<std::string, std::string>& key_map,
                                      std::string_view lang) {
  // Invert the user mapping: destination field -> source key.
  std::string instruction_key = "instruction", input_key = "input", output_key = "output";
  bool input_required = false;
  for (const auto& [src_key, dst_field] : key_map) {
    if (dst_field == "instruction") {
      instruction_key = src_key;
    } else if (dst_field == "input") {
      input_key = src_key;
      input_required = true;
    } else if (dst_field == "output") {
      output_key = src_key;
    } else {
      throw config_error("key mapping target must be instruction/input/output, got \"" +
                         dst_field + "\"");
    }
  }

  const std::string content = read_file(path);
  std::vector<SftRecord> records;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    const std::string_view line(content.data() + start, end - start);
    start = end + 1;
    ++lineno;
    if (is_blank(line)) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw data_error(path.string() + ":" + std::to_string(lineno) + ": malformed JSON record");
    auto fetch = [&](const std::string& key, bool required) -> std::string {
      auto it = j.find(key);
      if (it == j.end() || !it->is_string()) {
        if (required)
          throw data_error(path.string() + ":" + std::to_string(lineno) + ": missing key \"" +
                           key + "\"");
        return "";
      }
      return it->get<std::string>();
    };
    SftRecord r;
    r.instruction = fetch(instruction_key, true);
    r.input = fetch(input_key, input_required);
    r.output = fetch(output_key, true);
    r.task = task_tag;
    r.lang = lang.empty() ? fetch("lang", false) : std::string(lang);
    records.push_back(std::move(r));
  }
  return records;
}

// -- Mixtures -----------------------------------------------------------------

MixtureSpec MixtureSpec::from_json(const std::string& text, std::string_view origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw config_error(std::string(origin) + ": malformed mixture spec JSON");
  for (const auto& [key, _] : j.items())
    if (key != "components" && key != "total" && key != "epochs" && key != "seed")
      throw config_error(std::string(origin) + ": unknown key \"" + key + "\"");
  if (!j.contains("components") || !j["components"].is_array() || !j.contains("total") ||
      !j["total"].is_number_unsigned())
    throw config_error(std::string(origin) +
                       ": mixture spec needs \"components\" (array) and \"total\" (count)");
  MixtureSpec spec;
  spec.total = j["total"].get<std::uint64_t>();
  if (j.contains("epochs")) {
    if (!j["epochs"].is_number_unsigned() || j["epochs"].get<std::uint64_t>() == 0)
      throw config_error(std::string(origin) + ": \"epochs\" must be a positive integer");
    spec.epochs = j["epochs"].get<std::uint64_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      throw config_error(std::string(origin) + ": \"seed\" must be an unsigned integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  std::size_t index = 0;
  for (const auto& c : j["components"]) {
    ++index;
    if (!c.is_object() || !c.contains("dataset") || !c["dataset"].is_string())
      throw config_error(std::string(origin) + ": component " + std::to_string(index) +
                         " needs a \"dataset\" reference");
    for (const auto& [key, _] : c.items())
      if (key != "dataset" && key != "name" && key != "count" && key != "fraction" &&
          key != "task")
        throw config_error(std::string(origin) + ": component " + std::to_string(index) +
                           ": unknown key \"" + key + "\"");
    MixtureComponent comp;
    comp.dataset = c["dataset"].get<std::string>();
    comp.name = c.contains("name") && c["name"].is_string() ? c["name"].get<std::string>()
                                                            : comp.dataset;
    if (c.contains("task")) {
      if (!c["task"].is_string())
        throw config_error(std::string(origin) + ": component " + std::to_string(index) +
                           ": \"task\" must be a string");
      comp.expected_task = c["task"].get<std::string>();
      parse_task(comp.expected_task);  // validate early
    }
    const bool has_count = c.contains("count");
    const bool has_fraction = c.contains("fraction");
    if (has_count == has_fraction)
      throw config_error(std::string(origin) + ": component " + std::to_string(index) +
                         " needs exactly one of \"count\" or \"fraction\"");
    if (has_count) {
      if (!c["count"].is_number_unsigned())
        throw config_error(std::string(origin) + ": component " + std::to_string(index) +
                           ": \"count\" must be a non-negative integer");
      comp.count = c["count"].get<std::uint64_t>();
    } else {
      if (!c["fraction"].is_number() || c["fraction"].get<double>() < 0.0 ||
          c["fraction"].get<double>() > 1.0)
        throw config_error(std::string(origin) + ": component " + std::to_string(index) +
                           ": \"fraction\" must lie in [0, 1]");
      comp.fraction = c["fraction"].get<double>();
      comp.by_fraction = true;
    }
    spec.components.push_back(std::move(comp));
  }
  if (spec.components.empty())
    throw config_error(std::string(origin) + ": mixture spec has no components");
  std::set<std::string> names;
  for (const auto& comp : spec.components)
    if (!names.insert(comp.name).second)
      throw config_error(std::string(origin) + ": duplicate component name \"" + comp.name +
                         "\"");
  return spec;
}

MixtureSpec MixtureSpec::from_json_file(const std::filesystem::path& path) {
  return from_json(read_file(path), path.string());
}

std::map<std::string, std::uint64_t> MixtureSpec::resolved_counts() const {
  const bool any_fraction =
      std::any_of(components.begin(), components.end(),
                  [](const MixtureComponent& c) { return c.by_fraction; });
  const bool all_fraction =
      std::all_of(components.begin(), components.end(),
                  [](const MixtureComponent& c) { return c.by_fraction; });
  if (any_fraction && !all_fraction)
    throw config_error("mixture spec mixes \"count\" and \"fraction\" components");

  std::map<std::string, std::uint64_t> counts;
  if (all_fraction) {
    std::map<std::string, double> fractions;
    double sum = 0.0;
    for (const auto& comp : components) {
      fractions.emplace(comp.name, comp.fraction);
      sum += comp.fraction;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw config_error("mixture fractions sum to " + std::to_string(sum) + ", expected 1");
    counts = allocate(fractions, total);
  } else {
    std::uint64_t sum = 0;
    for (const auto& comp : components) {
      counts.emplace(comp.name, comp.count);
      sum += comp.count;
    }
    if (sum != total)
      throw config_error("mixture component counts sum to " + std::to_string(sum) +
                         ", expected total " + std::to_string(total));
  }
  return counts;
}

MixtureResult compose_mixture(const MixtureSpec& spec,
                              const std::map<std::string, std::vector<SftRecord>>& datasets) {
  const auto counts = spec.resolved_counts();
  MixtureResult result;
  std::size_t index = 0;
  for (const auto& comp : spec.components) {
    ++index;
    auto it = datasets.find(comp.dataset);
    if (it == datasets.end())
      throw config_error("mixture component \"" + comp.name + "\" references unknown dataset \"" +
                         comp.dataset + "\"");
    const auto& dataset = it->second;
    const std::uint64_t want = counts.at(comp.name);
    if (dataset.size() < want)
      throw data_error("mixture shortfall in component \"" + comp.name + "\": needs " +
                       std::to_string(want) + ", dataset has " + std::to_string(dataset.size()) +
                       " (deficit " + std::to_string(want - dataset.size()) + ")");
    if (!comp.expected_task.empty()) {
      const SftTask expected = parse_task(comp.expected_task);
      for (const auto& r : dataset)
        if (r.task != expected)
          throw data_error("mixture component \"" + comp.name + "\" expects task \"" +
                           comp.expected_task + "\" but dataset contains \"" +
                           to_string(r.task) + "\" records");
    }
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    seeded_shuffle(order, derive_seed(spec.seed, "component", index));
    for (std::uint64_t i = 0; i < want; ++i) result.records.push_back(dataset[order[i]]);
    result.component_counts.emplace(comp.name, want);
  }
  seeded_shuffle(result.records, derive_seed(spec.seed, "mixture"));
  if (spec.epochs > 1) result.records = repeat_epochs(result.records, spec.epochs, spec.seed);
  for (const auto& r : result.records) ++result.task_counts[to_string(r.task)];
  return result;
}

std::vector<SftRecord> repeat_epochs(const std::vector<SftRecord>& dataset, std::uint64_t epochs,
                                     std::uint64_t seed) {
  if (epochs == 0) throw config_error("epochs must be >= 1");
  std::vector<SftRecord> out;
  out.reserve(dataset.size() * epochs);
  for (std::uint64_t e = 0; e < epochs; ++e) {
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    seeded_shuffle(order, derive_seed(seed, "epoch", e));
    for (std::size_t i : order) out.push_back(dataset[i]);
  }
  return out;
}

// -- JSONL --------------------------------------------------------------------

std::string emit_sft_jsonl(const std::vector<SftRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j{{"instruction", r.instruction},
           {"input", r.input},
           {"output", r.output},
           {"task", to_string(r.task)}};
    if (!r.pair.empty())
      j["pair"] = r.pair;
    else if (!r.lang.empty())
      j["lang"] = r.lang;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<SftRecord> parse_sft_jsonl(std::string_view content, std::string_view origin) {
  std::vector<SftRecord> records;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    const std::string_view line = content.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (is_blank(line)) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("instruction") ||
        !j.contains("output") || !j.contains("task"))
      throw data_error(std::string(origin) + ":" + std::to_string(lineno) +
                       ": malformed SFT record");
    SftRecord r;
    r.instruction = j["instruction"].get<std::string>();
    r.input = j.contains("input") && j["input"].is_string() ? j["input"].get<std::string>() : "";
    r.output = j["output"].get<std::string>();
    r.task = parse_task(j["task"].get<std::string>());
    if (j.contains("pair") && j["pair"].is_string()) r.pair = j["pair"].get<std::string>();
    if (j.contains("lang") && j["lang"].is_string()) r.lang = j["lang"].get<std::string>();
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<SftRecord> load_sft_jsonl(const std::filesystem::path& path) {
  return parse_sft_jsonl(read_file(path), path.string());
}

}  // namespace mtkit
