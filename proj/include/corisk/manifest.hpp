// Run manifests: JSON sidecars recording the command, arguments, seed and
// content hashes of every input and output, so a run can be audited and
// repeated byte for byte.
#pragma once

#include <cstdint>
#include <ctime>
#include <string>
#include <vector>

#include "corisk/io.hpp"
#include "corisk/rng.hpp"
#include "vendor/json.hpp"

namespace corisk {

inline constexpr const char* kToolVersion = "0.1.0";

struct FileStamp {
  std::string path;
  std::string hash;  // fnv1a64 of the file bytes, 16 hex digits
};

struct RunManifest {
  std::string version = kToolVersion;
  std::string command;
  std::vector<std::string> arguments;
  std::uint64_t seed = 0;
  std::string created;  // UTC, ISO-8601
  std::vector<FileStamp> inputs;
  std::vector<FileStamp> outputs;
};

inline std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

inline std::string hash_bytes(const std::string& bytes) {
  std::uint64_t h = fnv1a64(bytes);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline FileStamp stamp_file(const std::string& path) {
  return FileStamp{path, hash_bytes(read_text_file(path))};
}

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["command"] = m.command;
  j["arguments"] = m.arguments;
  j["seed"] = m.seed;
  j["created"] = m.created;
  auto stamps = [](const std::vector<FileStamp>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : v) arr.push_back({{"path", s.path}, {"hash", s.hash}});
    return arr;
  };
  j["inputs"] = stamps(m.inputs);
  j["outputs"] = stamps(m.outputs);
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.version = j.at("version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  m.arguments = j.at("arguments").get<std::vector<std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.created = j.value("created", "");
  auto stamps = [](const nlohmann::json& arr) {
    std::vector<FileStamp> v;
    for (const auto& s : arr) v.push_back({s.at("path").get<std::string>(), s.at("hash").get<std::string>()});
    return v;
  };
  m.inputs = stamps(j.at("inputs"));
  m.outputs = stamps(j.at("outputs"));
  return m;
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
  atomic_write_text(path, manifest_to_json(m).dump(2) + "\n");
}

inline RunManifest read_manifest(const std::string& path) {
  return manifest_from_json(nlohmann::json::parse(read_text_file(path)));
}

inline std::string manifest_path_for(const std::string& artifact_path) {
  return artifact_path + ".manifest.json";
}

}  // namespace corisk
