#pragma once

// Output files of one command. Contents are held in memory and written only
// on commit, through temporary names and renames, so a failing command leaves
// nothing behind. The manifest lists every file with its SHA-256.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rfls/serialize.hpp"

namespace rfls::cli {

struct ManifestInfo {
  std::string command;
  std::string config;
  std::uint64_t master_seed = 0;
  serialize::json arguments;
};

std::string sha256_hex(const std::string& bytes);

/// SOURCE_DATE_EPOCH when set, the current time otherwise; ISO 8601 UTC.
std::string manifest_timestamp();

std::string toolkit_version();

class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path out_dir);

  void add(const std::string& name, std::string content);
  bool empty() const { return files_.empty(); }

  /// Writes every artifact plus manifest.json; returns the manifest.
  serialize::json commit(const ManifestInfo& info);

 private:
  std::filesystem::path out_dir_;
  std::map<std::string, std::string> files_;
};

}  // namespace rfls::cli
