#pragma once

// Small shared helpers: error types mapped to CLI exit codes, UTF-8
// validation/decoding, SHA-256 digests, and atomic file writes.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mtkit {

// Error categories. The CLI maps these to distinct exit codes
// (config 2, data 3, endpoint 4); library code throws, never exits.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct data_error : std::runtime_error {
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct endpoint_error : std::runtime_error {
  explicit endpoint_error(const std::string& msg) : std::runtime_error(msg) {}
};

// True if `s` is well-formed UTF-8 (rejects overlongs, surrogates, > U+10FFFF).
bool utf8_valid(std::string_view s);

// Decodes UTF-8 to code points. Throws data_error on malformed input.
std::vector<char32_t> utf8_decode(std::string_view s);

// Encodes a single code point as UTF-8.
std::string utf8_encode(char32_t cp);

// Maximal runs of non-whitespace bytes (ASCII whitespace: space \t \n \r \f \v).
std::vector<std::string_view> split_words(std::string_view s);

// Number of whitespace-delimited words; split_words().size() without allocation.
std::size_t count_words(std::string_view s);

// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

// True if the string contains only ASCII whitespace (or is empty).
bool is_blank(std::string_view s);

// Hex-encoded SHA-256 of a buffer / of a file's bytes.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Reads a whole file; throws data_error if unreadable.
std::string read_file(const std::filesystem::path& path);

// Writes via `<path>.tmp` + rename so readers never observe a torn file.
void atomic_write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace mtkit
