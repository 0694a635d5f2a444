#include "pvkit/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "pvkit/errors.hpp"
#include "pvkit/io.hpp"

namespace pvkit {

std::string sha256_bytes(const void* data, std::size_t len) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  if (EVP_Digest(data, len, digest, &digest_len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::string hex;
  hex.reserve(digest_len * 2);
  for (unsigned int i = 0; i < digest_len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::string& path) {
  const std::string content = read_text_file(path);
  return sha256_bytes(content.data(), content.size());
}

void RunManifest::add_input(const std::string& path) {
  inputs.push_back({path, sha256_file(path)});
}

void RunManifest::add_output(const std::string& path) {
  outputs.push_back({path, sha256_file(path)});
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  if (seed) j["seed"] = *seed;
  if (!method.empty()) j["method"] = method;
  j["hyperparameters"] = hyperparameters;
  auto entries = [](const std::vector<ManifestEntry>& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : v) arr.push_back({{"path", e.path}, {"sha256", e.sha256}});
    return arr;
  };
  j["inputs"] = entries(inputs);
  j["outputs"] = entries(outputs);
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest parse error in " + path + ": " + e.what());
  }
  RunManifest m;
  m.command = j.value("command", "");
  m.tool_version = j.value("tool_version", "");
  m.timestamp = j.value("timestamp", "");
  if (j.contains("seed")) m.seed = j["seed"].get<std::uint64_t>();
  m.method = j.value("method", "");
  if (j.contains("hyperparameters"))
    m.hyperparameters =
        j["hyperparameters"].get<std::map<std::string, std::string>>();
  auto read_entries = [](const nlohmann::json& arr) {
    std::vector<ManifestEntry> out;
    for (const auto& e : arr)
      out.push_back({e.at("path").get<std::string>(),
                     e.at("sha256").get<std::string>()});
    return out;
  };
  if (j.contains("inputs")) m.inputs = read_entries(j["inputs"]);
  if (j.contains("outputs")) m.outputs = read_entries(j["outputs"]);
  return m;
}

void RunManifest::write(const std::string& path) const {
  write_text_file(path, to_json());
}

std::string current_utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace pvkit
