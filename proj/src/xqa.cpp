#include "mtkit/xqa.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "mtkit/rng.hpp"
#include "mtkit/util.hpp"

namespace mtkit {

using nlohmann::json;

namespace {

constexpr std::string_view kQuestionTemplate =
    "Consider this sentence: {input}\nWhat kind of specific instruction X could this be the "
    "unique answer to? Output ONLY the instruction, followed by a newline.";

// First non-blank line of a generation, trimmed; empty when all lines blank.
std::string first_non_blank_line(std::string_view text) {
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    if (!is_blank(line)) return std::string(trim(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return "";
}

}  // namespace

std::string make_question_prompt(std::string_view x) {
  std::string prompt(kQuestionTemplate);
  const std::size_t pos = prompt.find("{input}");
  prompt.replace(pos, 7, x);
  return prompt;
}

std::string prompt_digest(std::string_view prompt) { return sha256_hex(prompt); }

// -- HTTP client ----------------------------------------------------------

HttpGenerationClient::HttpGenerationClient(std::string url, std::string auth_token)
    : url_(std::move(url)), auth_token_(std::move(auth_token)) {}

std::string HttpGenerationClient::generate(const std::string& prompt,
                                           const GenerationParams& params) {
  // Split "http://host:port/path" into client base and request path.
  std::string base = url_;
  std::string path = "/";
  const std::size_t scheme = base.find("://");
  if (scheme != std::string::npos) {
    const std::size_t slash = base.find('/', scheme + 3);
    if (slash != std::string::npos) {
      path = base.substr(slash);
      base = base.substr(0, slash);
    }
  }

  json body{{"prompt", prompt},
            {"max_tokens", params.max_tokens},
            {"temperature", params.temperature}};
  const std::string payload = body.dump();

  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt <= params.retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
    httplib::Client client(base);
    client.set_connection_timeout(0, params.timeout_ms * 1000);
    client.set_read_timeout(params.timeout_ms / 1000, (params.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!auth_token_.empty()) headers.emplace("Authorization", "Bearer " + auth_token_);
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_failure = "transport error (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status != 200) {
      last_failure = "HTTP status " + std::to_string(res->status);
      continue;
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") ||
        !reply["text"].is_string()) {
      last_failure = "malformed response body";
      continue;
    }
    return reply["text"].get<std::string>();
  }
  throw endpoint_error("generation endpoint " + url_ + " failed after " +
                       std::to_string(params.retries + 1) + " attempts: " + last_failure);
}

// -- Mock client ----------------------------------------------------------

MockGenerationClient MockGenerationClient::from_jsonl_file(const std::filesystem::path& path) {
  MockGenerationClient mock;
  mock.fixture_ = path.string();
  const std::string content = read_file(path);
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
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string() ||
        (!j.contains("digest") && !j.contains("prompt")))
      throw data_error(path.string() + ":" + std::to_string(lineno) +
                       ": expected {\"digest\"|\"prompt\", \"text\"}");
    if (j.contains("digest") && j["digest"].is_string())
      mock.by_digest_[j["digest"].get<std::string>()] = j["text"].get<std::string>();
    if (j.contains("prompt") && j["prompt"].is_string())
      mock.by_prompt_[j["prompt"].get<std::string>()] = j["text"].get<std::string>();
  }
  return mock;
}

void MockGenerationClient::add_response(const std::string& prompt, std::string text) {
  by_digest_[prompt_digest(prompt)] = std::move(text);
}

std::string MockGenerationClient::generate(const std::string& prompt,
                                           const GenerationParams& /*params*/) {
  auto it = by_digest_.find(prompt_digest(prompt));
  if (it != by_digest_.end()) return it->second;
  auto pit = by_prompt_.find(prompt);
  if (pit != by_prompt_.end()) return pit->second;
  throw endpoint_error("mock client has no canned response for prompt digest " +
                       prompt_digest(prompt));
}

// -- Synthesis --------------------------------------------------------------

std::optional<XqaRecord> synthesize(const ParallelRecord& pair, GenerationClient& client,
                                    const LanguageRegistry& registry,
                                    const GenerationParams& params) {
  const std::string generation = client.generate(make_question_prompt(pair.src), params);
  const std::string q = first_non_blank_line(generation);
  if (q.empty()) return std::nullopt;  // blank generation: caller skips and counts
  XqaRecord record;
  record.question = q + " Answer in " + registry.display_name(pair.tgt_lang) + ".";
  record.answer = pair.tgt;
  record.src_sentence = pair.src;
  record.pair = pair_key(pair);
  return record;
}

XqaBuildResult build_xqa_dataset(const std::vector<ParallelRecord>& pairs,
                                 GenerationClient& client, std::uint64_t limit,
                                 std::uint64_t seed, const LanguageRegistry& registry,
                                 const GenerationParams& params) {
  XqaBuildResult result;
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  seeded_shuffle(order, derive_seed(seed, "xqa"));
  const std::uint64_t take = std::min<std::uint64_t>(limit, order.size());
  for (std::uint64_t i = 0; i < take; ++i) {
    const ParallelRecord& pair = pairs[order[i]];
    ++result.processed;
    const auto record = synthesize(pair, client, registry, params);
    if (!record) {
      ++result.skipped_blank;
      continue;
    }
    SftRecord sft;
    sft.instruction = record->question;
    sft.input = "";
    sft.output = record->answer;
    sft.task = SftTask::xqa;
    sft.pair = record->pair;
    result.records.push_back(std::move(sft));
  }
  return result;
}

}  // namespace mtkit
