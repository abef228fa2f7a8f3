#pragma once

// Synthetic cross-lingual QA: prompt an external generator for a question Q
// whose unique answer is the pair's source sentence X; the pair's target side
// Y becomes the answer, with a target-language requirement appended to Q.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtkit/corpus.hpp"
#include "mtkit/sft.hpp"

namespace mtkit {

struct GenerationParams {
  double temperature = 0.7;
  int max_tokens = 128;
  int retries = 3;
  int timeout_ms = 30000;
};

class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual std::string descriptor() const = 0;
  // Returns generated text; throws endpoint_error after bounded retries.
  virtual std::string generate(const std::string& prompt, const GenerationParams& params) = 0;
};

// JSON-over-HTTP POST {"prompt", "max_tokens", "temperature"} -> {"text"}.
// An optional bearer token is sent as an Authorization header.
class HttpGenerationClient final : public GenerationClient {
 public:
  HttpGenerationClient(std::string url, std::string auth_token = "");
  std::string descriptor() const override { return url_; }
  std::string generate(const std::string& prompt, const GenerationParams& params) override;

 private:
  std::string url_;
  std::string auth_token_;
};

// Canned responses from a JSONL fixture: {"digest": sha256-hex-of-prompt,
// "text": ...} or {"prompt": ..., "text": ...}. A prompt with no fixture entry
// raises the endpoint error.
class MockGenerationClient final : public GenerationClient {
 public:
  static MockGenerationClient from_jsonl_file(const std::filesystem::path& path);
  std::string descriptor() const override { return "mock:" + fixture_; }
  std::string generate(const std::string& prompt, const GenerationParams& params) override;

  void add_response(const std::string& prompt, std::string text);

 private:
  std::string fixture_ = "inline";
  std::map<std::string, std::string> by_digest_;
  std::map<std::string, std::string> by_prompt_;
};

// The question-generation prompt with {input} = x substituted.
std::string make_question_prompt(std::string_view x);

// sha256 hex of a prompt; the key used by mock fixtures.
std::string prompt_digest(std::string_view prompt);

struct XqaRecord {
  std::string question;      // Q + " Answer in {display name}."
  std::string answer;        // the pair's target side, verbatim
  std::string src_sentence;  // X
  std::string pair;          // "spa-aym"
};

// Q = first non-blank line of the generation, trimmed, plus the language
// requirement suffix. Returns nullopt when the generation is blank (the
// caller skips and counts); transport failures propagate as endpoint errors.
std::optional<XqaRecord> synthesize(const ParallelRecord& pair, GenerationClient& client,
                                    const LanguageRegistry& registry,
                                    const GenerationParams& params = {});

struct XqaBuildResult {
  std::vector<SftRecord> records;  // instruction=Q, input="", output=Y, task=xqa
  std::uint64_t processed = 0;
  std::uint64_t skipped_blank = 0;
};

// Processes a seeded sample of min(limit, |pairs|) pairs (seeded shuffle,
// first `limit`); emits records in processing order.
XqaBuildResult build_xqa_dataset(const std::vector<ParallelRecord>& pairs,
                                 GenerationClient& client, std::uint64_t limit,
                                 std::uint64_t seed, const LanguageRegistry& registry,
                                 const GenerationParams& params = {});

}  // namespace mtkit
