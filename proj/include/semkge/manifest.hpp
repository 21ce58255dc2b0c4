#pragma once
// Run manifests: every run directory gets exactly one manifest.json with the
// resolved configuration, SHA-256 digests of every input file, seeds, the
// code version, and wall-clock timings per stage. A run is reproducible from
// its manifest alone.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "semkge/error.hpp"
#include "semkge/sha256.hpp"

namespace semkge {

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::uint64_t> timings_ms;
  std::string started_utc;
  std::string finished_utc;

  void add_input(const std::filesystem::path& path) {
    if (path.empty()) return;
    input_digests[path.string()] = sha256_file_hex(path);
  }

  static std::string now_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  void write(const std::filesystem::path& dir) const {
    nlohmann::json j;
    j["tool"] = "semkge";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["argv"] = argv;
    j["config"] = config;
    j["inputs"] = input_digests;
    j["seeds"] = seeds;
    j["timings_ms"] = timings_ms;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) fail(Errc::io, "cannot create " + (dir / "manifest.json").string());
    out << j.dump(2) << '\n';
    if (!out) fail(Errc::io, "write failed: " + (dir / "manifest.json").string());
  }
};

// Accumulates wall time for one named pipeline stage.
class StageTimer {
 public:
  StageTimer(RunManifest& manifest, std::string name)
      : manifest_(manifest), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

  ~StageTimer() {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    manifest_.timings_ms[name_] = static_cast<std::uint64_t>(ms);
  }

 private:
  RunManifest& manifest_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace semkge
