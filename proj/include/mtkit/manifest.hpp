#pragma once

// Dataset manifests: a JSON sidecar written next to every emitted dataset
// recording inputs (path + SHA-256), the effective configuration and its
// digest, the seed, the record count, and operation-specific details. No
// timestamps or environment data — reruns produce byte-identical manifests.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace mtkit {

struct InputDigest {
  std::string path;
  std::string sha256;

  bool operator==(const InputDigest&) const = default;
};

struct DatasetManifest {
  std::string strategy;  // tag of the producing operation
  std::uint64_t seed = 0;
  std::uint64_t record_count = 0;
  std::vector<InputDigest> created_from;
  nlohmann::json config = nlohmann::json::object();   // effective merged config
  nlohmann::json details = nlohmann::json::object();  // counts, warnings, notes
  std::string config_digest;  // SHA-256 of the serialized config

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j, std::string_view origin);
  static DatasetManifest load(const std::string& path);
};

// Digest of a config object's canonical serialization (sorted keys).
std::string config_digest_of(const nlohmann::json& config);

// Digests an input file for created_from.
InputDigest digest_input(const std::string& path);

// Sidecar path: dataset path + ".manifest.json".
std::string manifest_path_for(const std::string& dataset_path);

// Fills config_digest, serializes deterministically, writes atomically to the
// sidecar path, and returns that path.
std::string write_manifest(const std::string& dataset_path, DatasetManifest manifest);

}  // namespace mtkit
