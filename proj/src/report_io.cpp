#include "monreco/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "monreco/errors.hpp"

namespace monreco {

std::string fmt_double(double value, int decimals) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << content;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char ch : bytes) {
        hash ^= static_cast<unsigned char>(ch);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return fnv1a64(buffer.str());
}

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest) {
    nlohmann::ordered_json doc;
    doc["artifact_version"] = kArtifactVersion;
    doc["subcommand"] = manifest.subcommand;
    doc["seed"] = manifest.seed;
    doc["jobs"] = manifest.jobs;
    if (!manifest.dataset_path.empty()) {
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(manifest.dataset_hash));
        doc["dataset"] = {{"path", manifest.dataset_path}, {"fnv1a64", hash}};
    }
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const auto& [key, value] : manifest.config) config[key] = value;
    doc["config"] = std::move(config);
    doc["outputs"] = manifest.outputs;
    doc["duration_seconds"] = manifest.duration_seconds;
    write_text_file(out_dir / "manifest.json", doc.dump(2) + "\n");
}

} // namespace monreco
