#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smoge/common.hpp"
#include "smoge/measure_io.hpp"

namespace smoge {

inline constexpr const char* kToolVersion = "smoge 0.1.0";

inline std::string iso_timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::uint64_t fnv1a_bytes(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw ParseError("cannot open '" + path + "' for checksum");
  std::stringstream ss;
  ss << in.rdbuf();
  return fnv1a_bytes(ss.str());
}

// Run record written next to every command's outputs: the resolved
// configuration (enough to reproduce the run), timing, and per-output
// checksums.
struct RunManifest {
  std::string subcommand;
  std::uint64_t master_seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<std::pair<std::string, std::string>> config;   // key -> formatted value
  std::vector<std::pair<std::string, std::string>> outputs;  // path -> checksum
};

inline void manifest_add_output(RunManifest& m, const std::string& path) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a_file(path)));
  m.outputs.emplace_back(path, buf);
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  out << "tool = \"" << kToolVersion << "\"\n";
  out << "subcommand = \"" << m.subcommand << "\"\n";
  out << "master_seed = " << m.master_seed << "\n";
  out << "started_at = \"" << m.started_at << "\"\n";
  out << "finished_at = \"" << m.finished_at << "\"\n";
  out << "\n[config]\n";
  for (const auto& [k, v] : m.config) out << k << " = " << v << "\n";
  out << "\n[outputs]\n";
  for (const auto& [k, v] : m.outputs) out << "\"" << k << "\" = \"" << v << "\"\n";
}

// The [config] section, re-parsed; keys and formatted values round-trip.
inline std::vector<std::pair<std::string, std::string>> parse_manifest_config(
    const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ParseError("cannot open '" + path + "'");
  std::vector<std::pair<std::string, std::string>> config;
  std::string line;
  bool in_config = false;
  while (std::getline(in, line)) {
    const std::string t = mio::trim(mio::strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      in_config = (t == "[config]");
      continue;
    }
    if (!in_config) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(path + ": bad manifest line '" + t + "'");
    config.emplace_back(mio::trim(t.substr(0, eq)), mio::trim(t.substr(eq + 1)));
  }
  return config;
}

}  // namespace smoge
