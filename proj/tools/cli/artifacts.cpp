#include "cli/artifacts.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "rfls/errors.hpp"

#ifndef RFLS_VERSION
#define RFLS_VERSION "unknown"
#endif

namespace rfls::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string manifest_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string toolkit_version() { return RFLS_VERSION; }

ArtifactSet::ArtifactSet(fs::path out_dir) : out_dir_(std::move(out_dir)) {}

void ArtifactSet::add(const std::string& name, std::string content) {
  files_[name] = std::move(content);
}

serialize::json ArtifactSet::commit(const ManifestInfo& info) {
  serialize::json listing = serialize::json::array();
  for (const auto& [name, content] : files_) {
    listing.push_back({{"file", name},
                       {"bytes", content.size()},
                       {"sha256", sha256_hex(content)}});
  }
  serialize::json manifest;
  manifest["command"] = info.command;
  manifest["config"] = info.config;
  manifest["timestamp"] = manifest_timestamp();
  manifest["toolkit_version"] = toolkit_version();
  manifest["master_seed"] = info.master_seed;
  manifest["output_directory"] = out_dir_.generic_string();
  manifest["arguments"] = info.arguments;
  manifest["artifacts"] = listing;

  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir_.string() + "'");

  auto all = files_;
  all["manifest.json"] = serialize::dump(manifest);
  std::vector<std::pair<fs::path, fs::path>> staged;
  try {
    for (const auto& [name, content] : all) {
      const fs::path final_path = out_dir_ / name;
      const fs::path tmp = out_dir_ / ("." + name + ".tmp");
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      os.write(content.data(), static_cast<std::streamsize>(content.size()));
      os.close();
      if (!os) throw ConfigError("cannot write '" + tmp.string() + "'");
      staged.emplace_back(tmp, final_path);
    }
  } catch (...) {
    for (const auto& [tmp, final_path] : staged) fs::remove(tmp, ec);
    throw;
  }
  // The manifest goes last so its presence marks a complete set.
  std::stable_partition(staged.begin(), staged.end(),
                        [](const auto& p) { return p.second.filename() != "manifest.json"; });
  for (const auto& [tmp, final_path] : staged) fs::rename(tmp, final_path);
  return manifest;
}

}  // namespace rfls::cli
