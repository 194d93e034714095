#pragma once

// JSON sidecar written next to every CLI run: effective config, seed, version,
// timestamps, emitted files and exclusion counts, plus a content hash of the
// inputs so reruns can be matched to their configuration.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "alloylab/csv.hpp"
#include "alloylab/version.hpp"
#include "json.hpp"

namespace alloylab {

inline std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct RunManifest {
  std::string tool_version = kVersion;
  std::string subcommand;
  std::uint64_t seed = 0;
  int samples = 0;
  int workers = 1;
  std::string config_text;                       // effective model config, key=value form
  std::map<std::string, std::string> params;     // subcommand parameters after overrides
  std::vector<std::pair<std::string, std::size_t>> outputs;  // file, row count
  std::map<std::string, int> exclusions;
  std::string started_at;
  std::string finished_at;

  std::string content_hash() const {
    std::string blob = config_text;
    for (const auto& [k, v] : params) blob += "\n" + k + "=" + v;
    return hex64(fnv1a64(blob));
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["samples"] = samples;
    j["workers"] = workers;
    j["config"] = config_text;
    j["params"] = params;
    j["content_fnv1a64"] = content_hash();
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [path, rows] : outputs)
      outs.push_back({{"file", path}, {"rows", rows}});
    j["outputs"] = outs;
    j["exclusions"] = exclusions;
    return j;
  }

  void write(const std::filesystem::path& dir) const {
    atomic_write_text(dir / "manifest.json", to_json().dump(2) + "\n");
  }
};

}  // namespace alloylab
