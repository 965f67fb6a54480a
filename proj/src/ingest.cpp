#include "monreco/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "monreco/errors.hpp"

namespace monreco {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string where(const std::string& origin, std::size_t line) {
    return origin + ":" + std::to_string(line);
}

std::set<std::string> parse_string_set(const nlohmann::json& value, const std::string& field,
                                       const std::string& location) {
    if (!value.is_array())
        throw ParseError(location + ": field '" + field + "' must be an array of strings");
    std::set<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string())
            throw ParseError(location + ": field '" + field + "' must contain only strings");
        out.insert(item.get<std::string>());
    }
    return out;
}

std::string parse_string(const nlohmann::json& obj, const char* field, const std::string& location) {
    const auto it = obj.find(field);
    if (it == obj.end() || !it->is_string())
        throw ParseError(location + ": missing string field '" + std::string(field) + "'");
    return it->get<std::string>();
}

MonitorRecord parse_monitor(const nlohmann::json& obj, const std::string& location) {
    if (!obj.is_object()) throw ParseError(location + ": monitor entries must be objects");
    MonitorRecord monitor;
    monitor.monitor_id = parse_string(obj, "monitor_id", location);
    monitor.functionality_group = parse_string(obj, "functionality_group", location);
    monitor.metric_name = parse_string(obj, "metric", location);
    monitor.alerting_logic = parse_string(obj, "alerting_logic", location);
    const std::string resource_name = parse_string(obj, "resource_class", location);
    const auto resource = parse_resource_class(resource_name);
    if (!resource)
        throw ParseError(location + ": unknown resource class '" + resource_name + "'");
    monitor.resource_class = *resource;
    const std::string slo_name = parse_string(obj, "slo_class", location);
    const auto slo = parse_slo_class(slo_name);
    if (!slo) throw ParseError(location + ": unknown slo class '" + slo_name + "'");
    monitor.slo_class = *slo;
    return monitor;
}

ordered_json monitor_to_json(const MonitorRecord& monitor) {
    ordered_json obj;
    obj["monitor_id"] = monitor.monitor_id;
    obj["functionality_group"] = monitor.functionality_group;
    obj["metric"] = monitor.metric_name;
    obj["alerting_logic"] = monitor.alerting_logic;
    obj["resource_class"] = to_string(monitor.resource_class);
    obj["slo_class"] = to_string(monitor.slo_class);
    return obj;
}

} // namespace

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::Upstream: return "upstream";
        case FeatureKind::Downstream: return "downstream";
        case FeatureKind::Components: return "components";
        case FeatureKind::UpstreamPlusComponents: return "both";
    }
    return "upstream";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view name) {
    if (name == "upstream") return FeatureKind::Upstream;
    if (name == "downstream") return FeatureKind::Downstream;
    if (name == "components") return FeatureKind::Components;
    if (name == "both" || name == "upstream+components") return FeatureKind::UpstreamPlusComponents;
    return std::nullopt;
}

std::string to_string(ClassKind kind) {
    return kind == ClassKind::Resource ? "resource" : "slo";
}

std::optional<std::size_t> LabelMatrix::row_of(const std::string& service_id) const {
    const auto it = row_index_.find(service_id);
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
}

void LabelMatrix::rebuild_index() {
    row_index_.clear();
    row_index_.reserve(service_order.size());
    for (std::size_t i = 0; i < service_order.size(); ++i) row_index_.emplace(service_order[i], i);
}

std::vector<std::string> canonical_class_names(ClassKind kind) {
    std::vector<std::string> names;
    if (kind == ClassKind::Resource)
        for (const auto cls : all_resource_classes()) names.push_back(to_string(cls));
    else
        for (const auto cls : all_slo_classes()) names.push_back(to_string(cls));
    return names;
}

Dataset read_dataset_jsonl(std::istream& in, const std::string& origin) {
    Dataset dataset;
    std::string line;
    std::size_t line_number = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& err) {
            throw ParseError(where(origin, line_number) + ": invalid JSON (" + err.what() + ")");
        }
        if (!obj.is_object())
            throw ParseError(where(origin, line_number) + ": expected a JSON object");
        if (!saw_header) {
            const auto it = obj.find("schema_version");
            if (it == obj.end() || !it->is_number_integer())
                throw SchemaVersionError(where(origin, line_number) +
                                         ": first line must declare an integer schema_version");
            const int version = it->get<int>();
            if (version != 1)
                throw SchemaVersionError(where(origin, line_number) + ": unsupported schema_version " +
                                         std::to_string(version));
            dataset.schema_version = version;
            saw_header = true;
            continue;
        }
        const std::string location = where(origin, line_number);
        ServiceRecord service;
        service.service_id = parse_string(obj, "service_id", location);
        service.upstream = parse_string_set(obj.value("upstream", nlohmann::json::array()), "upstream", location);
        service.downstream =
            parse_string_set(obj.value("downstream", nlohmann::json::array()), "downstream", location);
        service.components =
            parse_string_set(obj.value("components", nlohmann::json::array()), "components", location);
        const auto monitors = obj.find("monitors");
        if (monitors != obj.end()) {
            if (!monitors->is_array())
                throw ParseError(location + ": field 'monitors' must be an array");
            for (const auto& entry : *monitors) service.monitors.push_back(parse_monitor(entry, location));
        }
        dataset.services.push_back(std::move(service));
    }
    if (!saw_header && line_number > 0)
        throw SchemaVersionError(origin + ": no schema_version header line found");
    const ValidationReport report = validate(dataset);
    if (!report.valid()) {
        std::string message = origin + ": dataset violates invariants:";
        for (const auto& violation : report.violations)
            message += "\n  [" + violation.rule + "] " + violation.service_id + ": " + violation.detail;
        throw ValidationError(message);
    }
    return dataset;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path.string());
    return read_dataset_jsonl(in, path.filename().string());
}

void write_dataset_jsonl(std::ostream& out, const Dataset& dataset) {
    ordered_json header;
    header["schema_version"] = dataset.schema_version;
    out << header.dump() << '\n';
    for (const auto& service : dataset.services) {
        ordered_json obj;
        obj["service_id"] = service.service_id;
        obj["upstream"] = service.upstream;
        obj["downstream"] = service.downstream;
        obj["components"] = service.components;
        ordered_json monitors = ordered_json::array();
        for (const auto& monitor : service.monitors) monitors.push_back(monitor_to_json(monitor));
        obj["monitors"] = std::move(monitors);
        out << obj.dump() << '\n';
    }
}

std::string dataset_to_jsonl(const Dataset& dataset) {
    std::ostringstream out;
    write_dataset_jsonl(out, dataset);
    return out.str();
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file: " + path.string());
    write_dataset_jsonl(out, dataset);
}

std::vector<std::string> service_tokens(const ServiceRecord& service, FeatureKind kind) {
    std::vector<std::string> tokens;
    switch (kind) {
        case FeatureKind::Upstream:
            tokens.assign(service.upstream.begin(), service.upstream.end());
            break;
        case FeatureKind::Downstream:
            tokens.assign(service.downstream.begin(), service.downstream.end());
            break;
        case FeatureKind::Components:
            tokens.assign(service.components.begin(), service.components.end());
            break;
        case FeatureKind::UpstreamPlusComponents:
            tokens.reserve(service.upstream.size() + service.components.size());
            for (const auto& token : service.upstream) tokens.push_back("up:" + token);
            for (const auto& token : service.components) tokens.push_back("comp:" + token);
            break;
    }
    return tokens;
}

FeatureSpace build_feature_space(const Dataset& dataset, FeatureKind kind) {
    FeatureSpace space;
    space.kind = kind;
    std::set<std::string> vocabulary;
    for (const auto& service : dataset.services)
        for (auto& token : service_tokens(service, kind)) vocabulary.insert(std::move(token));
    space.vocabulary.assign(vocabulary.begin(), vocabulary.end());
    space.index.reserve(space.vocabulary.size());
    for (std::size_t i = 0; i < space.vocabulary.size(); ++i) space.index.emplace(space.vocabulary[i], i);
    return space;
}

BinaryVector encode_service(const ServiceRecord& service, const FeatureSpace& space) {
    BinaryVector vec;
    vec.dimension = space.dimension();
    for (const auto& token : service_tokens(service, space.kind)) {
        const auto it = space.index.find(token);
        if (it != space.index.end()) vec.set_bits.push_back(it->second);
    }
    std::sort(vec.set_bits.begin(), vec.set_bits.end());
    vec.set_bits.erase(std::unique(vec.set_bits.begin(), vec.set_bits.end()), vec.set_bits.end());
    return vec;
}

LabelMatrix build_label_matrix(const Dataset& dataset, ClassKind kind) {
    LabelMatrix matrix;
    matrix.kind = kind;
    matrix.class_names = canonical_class_names(kind);
    const std::size_t columns = matrix.class_names.size();
    for (const auto& service : dataset.services) {
        matrix.service_order.push_back(service.service_id);
        std::vector<std::uint8_t> binary_row(columns, 0);
        std::vector<double> counts(columns, 0.0);
        for (const auto& monitor : service.monitors) {
            const std::size_t column = kind == ClassKind::Resource
                                           ? static_cast<std::size_t>(monitor.resource_class)
                                           : static_cast<std::size_t>(monitor.slo_class);
            binary_row[column] = 1;
            counts[column] += 1.0;
        }
        std::vector<double> normalized_row(columns, 0.0);
        if (!service.monitors.empty()) {
            const double total = static_cast<double>(service.monitors.size());
            for (std::size_t c = 0; c < columns; ++c) normalized_row[c] = counts[c] / total;
        }
        matrix.binary.push_back(std::move(binary_row));
        matrix.normalized.push_back(std::move(normalized_row));
    }
    matrix.rebuild_index();
    return matrix;
}

} // namespace monreco
