#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pvkit {

// SHA-256 hex digest of a file's bytes.
std::string sha256_file(const std::string& path);
std::string sha256_bytes(const void* data, std::size_t len);

struct ManifestEntry {
  std::string path;
  std::string sha256;
};

// Reproducibility record written next to every command's outputs. For
// deterministic methods the manifest pins everything needed to reproduce the
// primary outputs byte-identically.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string timestamp;  // ISO 8601 UTC
  std::optional<std::uint64_t> seed;
  std::string method;
  std::map<std::string, std::string> hyperparameters;
  std::vector<ManifestEntry> inputs;
  std::vector<ManifestEntry> outputs;

  void add_input(const std::string& path);
  void add_output(const std::string& path);

  std::string to_json() const;
  static RunManifest from_json_file(const std::string& path);

  void write(const std::string& path) const;
};

std::string current_utc_timestamp();

}  // namespace pvkit
