#include "mtkit/manifest.hpp"

#include "mtkit/util.hpp"

namespace mtkit {

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json inputs = nlohmann::json::array();
  for (const InputDigest& in : created_from)
    inputs.push_back({{"path", in.path}, {"sha256", in.sha256}});
  return nlohmann::json{{"strategy", strategy},
                        {"seed", seed},
                        {"record_count", record_count},
                        {"created_from", inputs},
                        {"config", config},
                        {"config_digest", config_digest},
                        {"details", details}};
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j, std::string_view origin) {
  const std::string where(origin);
  if (!j.is_object()) throw data_error(where + ": manifest is not a JSON object");
  DatasetManifest m;
  try {
    m.strategy = j.at("strategy").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.record_count = j.at("record_count").get<std::uint64_t>();
    for (const auto& in : j.at("created_from")) {
      m.created_from.push_back(
          {in.at("path").get<std::string>(), in.at("sha256").get<std::string>()});
    }
    m.config = j.at("config");
    m.config_digest = j.at("config_digest").get<std::string>();
    m.details = j.value("details", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw data_error(where + ": not a valid manifest: " + e.what());
  }
  return m;
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  const nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw data_error(path + ": manifest is not valid JSON");
  return from_json(j, path);
}

std::string config_digest_of(const nlohmann::json& config) { return sha256_hex(config.dump()); }

InputDigest digest_input(const std::string& path) { return {path, sha256_file(path)}; }

std::string manifest_path_for(const std::string& dataset_path) {
  return dataset_path + ".manifest.json";
}

std::string write_manifest(const std::string& dataset_path, DatasetManifest manifest) {
  manifest.config_digest = config_digest_of(manifest.config);
  const std::string path = manifest_path_for(dataset_path);
  atomic_write_file(path, manifest.to_json().dump(2) + "\n");
  return path;
}

}  // namespace mtkit
