#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "entswitch/version.hpp"

namespace entswitch {

/// Record of one CLI run: the subcommand, the library version, every
/// parameter that influenced the results, and the files written.  Feeding a
/// manifest back through the `rerun` command reproduces the outputs
/// bit-exactly.
struct RunManifest {
  std::string command;
  std::string version = kVersion;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> outputs;
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["params"] = m.params;
  j["outputs"] = m.outputs;
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.params = j.at("params");
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << to_json(m).dump(2) << "\n";
}

inline RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest: " + path);
  nlohmann::json j;
  in >> j;
  return manifest_from_json(j);
}

}  // namespace entswitch
