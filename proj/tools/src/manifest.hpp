/// @file manifest.hpp
/// Output directory bookkeeping: SHA-256 manifest and version stamp.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace blowup::cli {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kManifestName = "manifest.sha256";
inline constexpr const char* kVersionName = "version.txt";
inline constexpr const char* kConfigName = "resolved_config.txt";

/// Lowercase hex digest of a file.
std::string sha256_file(const std::string& path);
std::string sha256_bytes(const std::string& bytes);

/// Writes "<digest>  <name>" lines for every regular file in dir except the
/// manifest itself, sorted by name.
void write_manifest(const std::string& dir);

struct ManifestCheck {
  bool present = false;
  std::vector<std::string> mismatched;  // digest differs
  std::vector<std::string> missing;     // listed but absent
  bool ok() const { return mismatched.empty() && missing.empty(); }
};
/// Compares dir against its manifest; absent manifest gives present = false.
ManifestCheck check_manifest(const std::string& dir);

/// Writes the version stamp file.
void write_version_stamp(const std::string& dir);
std::string version_string();

}  // namespace blowup::cli
