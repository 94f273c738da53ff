#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

namespace ctgca {

// Library / file-format version stamped into every manifest and model file.
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kModelFormat = "ctgca-model-v1";

// FNV-1a 64-bit over raw bytes; the same hash family the predictor uses for
// split hashes, so manifests stay dependency-free and reproducible.
std::uint64_t fnv1a_bytes(const void* data, std::size_t n,
                          std::uint64_t seed = 0xCBF29CE484222325ULL);
std::string fnv1a_hex(const std::string& bytes);

// Reads a whole file as bytes; throws ctgca::Error when unreadable.
std::string read_file_bytes(const std::filesystem::path& path);
// Writes bytes atomically enough for our purposes; throws ctgca::Error on
// failure. Parent directories must already exist.
void write_file_bytes(const std::filesystem::path& path,
                      const std::string& bytes);

// Wall-clock stage timer (seconds, double).
class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Accumulates the run manifest every command writes exactly once per output
// directory: command line, config snapshot, master seed, input-file hashes,
// artifact versions and wall-clock timings.
class RunManifest {
 public:
  explicit RunManifest(const std::string& command);

  void set_seed(std::uint64_t seed);
  void set_config(const nlohmann::json& config);
  void add_input(const std::string& label, const std::string& bytes);
  void add_input_file(const std::filesystem::path& path);
  void add_stage_seconds(const std::string& stage, double seconds);
  void add_scan_seconds(const std::string& scan_id, double seconds);

  // Serializes and writes <out_dir>/manifest.json.
  void write(const std::filesystem::path& out_dir) const;
  const nlohmann::json& json() const { return j_; }

 private:
  nlohmann::json j_;
};

}  // namespace ctgca
