#include "ctgca/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctgca/errors.hpp"

namespace ctgca {

std::uint64_t fnv1a_bytes(const void* data, std::size_t n,
                          std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string fnv1a_hex(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a_bytes(bytes.data(), bytes.size())));
  return buf;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof())
    throw Error("error while reading file: " + path.string());
  return ss.str();
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out.good()) throw Error("error while writing file: " + path.string());
}

RunManifest::RunManifest(const std::string& command) {
  j_["command"] = command;
  j_["versions"]["ctgca"] = kToolVersion;
  j_["versions"]["model_format"] = kModelFormat;
  j_["inputs"] = nlohmann::json::object();
  j_["timings"]["stages"] = nlohmann::json::object();
  j_["timings"]["per_scan"] = nlohmann::json::object();
}

void RunManifest::set_seed(std::uint64_t seed) { j_["master_seed"] = seed; }

void RunManifest::set_config(const nlohmann::json& config) {
  j_["config"] = config;
}

void RunManifest::add_input(const std::string& label,
                            const std::string& bytes) {
  j_["inputs"][label] = "fnv1a:" + fnv1a_hex(bytes);
}

void RunManifest::add_input_file(const std::filesystem::path& path) {
  add_input(path.filename().string(), read_file_bytes(path));
}

void RunManifest::add_stage_seconds(const std::string& stage, double seconds) {
  j_["timings"]["stages"][stage] = seconds;
}

void RunManifest::add_scan_seconds(const std::string& scan_id,
                                   double seconds) {
  j_["timings"]["per_scan"][scan_id] = seconds;
}

void RunManifest::write(const std::filesystem::path& out_dir) const {
  write_file_bytes(out_dir / "manifest.json", j_.dump(2) + "\n");
}

}  // namespace ctgca
