#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace monreco {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Fixed-precision decimal rendering; reports must be byte-identical across
// reruns, so every double goes through here.
std::string fmt_double(double value, int decimals = 6);

void write_text_file(const std::filesystem::path& path, const std::string& content);

// FNV-1a 64-bit over raw bytes; used for manifest content hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

struct RunManifest {
    std::string subcommand;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string dataset_path;              // empty if the run takes no dataset
    std::uint64_t dataset_hash = 0;        // fnv1a64 of its bytes
    std::vector<std::pair<std::string, std::string>> config;  // resolved flags
    std::vector<std::string> outputs;      // files written beside the manifest
    double duration_seconds = 0.0;
};

// Writes <out_dir>/manifest.json. The duration is the only field expected to
// vary between identical reruns.
void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

} // namespace monreco
