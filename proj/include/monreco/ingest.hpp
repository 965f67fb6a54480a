#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "monreco/core_model.hpp"

namespace monreco {

// Which service property a one-hot encoding is built from.
enum class FeatureKind { Upstream, Downstream, Components, UpstreamPlusComponents };
inline constexpr std::size_t kFeatureKindCount = 4;

std::string to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view name);

// Vocabulary-indexed encoding basis. The vocabulary is sorted and `index` is
// its exact inverse, so encodings are reproducible across runs.
struct FeatureSpace {
    FeatureKind kind = FeatureKind::Upstream;
    std::vector<std::string> vocabulary;
    std::unordered_map<std::string, std::size_t> index;

    std::size_t dimension() const { return vocabulary.size(); }
};

// Sparse one-hot vector: positions strictly increasing, all < dimension.
struct BinaryVector {
    std::size_t dimension = 0;
    std::vector<std::size_t> set_bits;

    std::size_t popcount() const { return set_bits.size(); }

    bool operator==(const BinaryVector&) const = default;
};

enum class ClassKind { Resource, Slo };

std::string to_string(ClassKind kind);

// Service x class occurrence matrix. binary[i][c] flags whether service i has
// at least one monitor of class c; normalized[i][c] is that class's share of
// the service's monitors (zero row when the service has none).
struct LabelMatrix {
    ClassKind kind = ClassKind::Resource;
    std::vector<std::string> service_order;
    std::vector<std::string> class_names;  // canonical enumeration order
    std::vector<std::vector<std::uint8_t>> binary;
    std::vector<std::vector<double>> normalized;

    std::optional<std::size_t> row_of(const std::string& service_id) const;
    std::size_t class_count() const { return class_names.size(); }

    // Call after filling service_order by hand (e.g. when reloading from a
    // serialized context); build_label_matrix does this itself.
    void rebuild_index();

private:
    std::unordered_map<std::string, std::size_t> row_index_;
};

// Canonical column labels for a label matrix of the given kind.
std::vector<std::string> canonical_class_names(ClassKind kind);

// Dataset file format: UTF-8 JSONL, one service object per line, preceded by
// a {"schema_version": 1} header line. See README for the field list.
Dataset load_dataset(const std::filesystem::path& path);
Dataset read_dataset_jsonl(std::istream& in, const std::string& origin);

void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
void write_dataset_jsonl(std::ostream& out, const Dataset& dataset);
std::string dataset_to_jsonl(const Dataset& dataset);

// Tokens contributed by one service to a feature space of the given kind.
// UpstreamPlusComponents prefixes "up:" / "comp:" to keep the blocks disjoint.
std::vector<std::string> service_tokens(const ServiceRecord& service, FeatureKind kind);

FeatureSpace build_feature_space(const Dataset& dataset, FeatureKind kind);

// Tokens absent from the vocabulary are dropped: new services legitimately
// carry dependencies a training-time space has never seen.
BinaryVector encode_service(const ServiceRecord& service, const FeatureSpace& space);

LabelMatrix build_label_matrix(const Dataset& dataset, ClassKind kind);

} // namespace monreco
