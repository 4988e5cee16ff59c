#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace rassoc::cli {

// FNV-1a 64-bit digest of a file's bytes, as "fnv1a64:<16 hex digits>".
std::string file_digest(const std::filesystem::path& path);
std::string text_digest(const std::string& text);

// Record of one command run. Written next to its outputs as manifest.json;
// every CSV output starts with a comment line naming it.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;  // full command line, enough to rerun
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::map<std::string, std::string> inputs;   // path -> digest
  std::map<std::string, std::string> outputs;  // file name -> digest
  std::string started_at;
  std::string finished_at;

  // Digest of command, config, seeds and inputs; timestamps excluded.
  std::string config_hash() const;
  // "manifest: manifest.json config_hash=<hash>"
  std::string csv_comment() const;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);  // throws DataError
};

std::string utc_timestamp();

void save_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace rassoc::cli
