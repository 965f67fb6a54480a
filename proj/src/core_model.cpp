#include "monreco/core_model.hpp"

#include <cctype>
#include <unordered_map>
#include <unordered_set>

namespace monreco {

namespace {

const std::array<ResourceClass, kResourceClassCount> kResourceClasses = {
    ResourceClass::ServiceLevel, ResourceClass::Api,          ResourceClass::Dependency,
    ResourceClass::Cpu,          ResourceClass::ComputeCluster, ResourceClass::Storage,
    ResourceClass::RamMemory,    ResourceClass::CacheMemory,  ResourceClass::Container,
    ResourceClass::Certificate,  ResourceClass::Io,           ResourceClass::PagingMemory,
    ResourceClass::NoneOfTheAbove,
};

const std::array<SloClass, kSloClassCount> kSloClasses = {
    SloClass::SuccessRate, SloClass::Capacity,        SloClass::Latency,
    SloClass::Availability, SloClass::Throughput,     SloClass::SuccessRateQos,
    SloClass::InterruptionRate, SloClass::Freshness,  SloClass::Others,
};

const char* kResourceNames[kResourceClassCount] = {
    "service level", "api",          "dependency", "cpu",        "compute cluster",
    "storage",       "ram-memory",   "cache-memory", "container", "certificate",
    "io",            "paging memory", "none-of-the-above",
};

const char* kSloNames[kSloClassCount] = {
    "success rate", "capacity", "latency", "availability", "throughput",
    "success rate - qos", "interruption rate", "freshness", "others",
};

// Lowercase, hyphens to spaces, whitespace runs collapsed, trimmed.
std::string normalize_class_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    for (char raw : name) {
        char ch = raw;
        if (ch == '-' || ch == '_') ch = ' ';
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (std::isspace(static_cast<unsigned char>(ch))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(ch);
    }
    return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_class(std::string_view name, const std::array<Enum, N>& values,
                                const char* const (&names)[N]) {
    static const std::unordered_map<std::string, std::size_t>* lookup = [&] {
        auto* map = new std::unordered_map<std::string, std::size_t>();
        for (std::size_t i = 0; i < N; ++i) map->emplace(normalize_class_name(names[i]), i);
        return map;
    }();
    const auto it = lookup->find(normalize_class_name(name));
    if (it == lookup->end()) return std::nullopt;
    return values[it->second];
}

} // namespace

const std::array<ResourceClass, kResourceClassCount>& all_resource_classes() {
    return kResourceClasses;
}

const std::array<SloClass, kSloClassCount>& all_slo_classes() {
    return kSloClasses;
}

std::string to_string(ResourceClass c) {
    return kResourceNames[static_cast<std::size_t>(c)];
}

std::string to_string(SloClass c) {
    return kSloNames[static_cast<std::size_t>(c)];
}

std::string slug(ResourceClass c) {
    std::string s = to_string(c);
    for (char& ch : s)
        if (ch == ' ') ch = '-';
    return s;
}

std::optional<ResourceClass> parse_resource_class(std::string_view name) {
    return parse_class(name, kResourceClasses, kResourceNames);
}

std::optional<SloClass> parse_slo_class(std::string_view name) {
    return parse_class(name, kSloClasses, kSloNames);
}

ValidationReport validate(const Dataset& dataset) {
    ValidationReport report;
    std::unordered_set<std::string> ids;
    for (const auto& service : dataset.services) {
        if (service.service_id.empty())
            report.violations.push_back({service.service_id, "EmptyServiceId", "service with empty id"});
        if (!ids.insert(service.service_id).second)
            report.violations.push_back(
                {service.service_id, "DuplicateServiceId", "service id occurs more than once"});
    }
    for (const auto& service : dataset.services) {
        if (service.upstream.count(service.service_id) || service.downstream.count(service.service_id))
            report.violations.push_back(
                {service.service_id, "SelfDependency", "service lists itself as a dependency"});
        for (const auto& component : service.components)
            if (component.empty())
                report.violations.push_back({service.service_id, "EmptyComponent", "empty component string"});
        std::unordered_set<std::string> monitor_ids;
        for (const auto& monitor : service.monitors) {
            if (monitor.monitor_id.empty())
                report.violations.push_back({service.service_id, "EmptyMonitorId", "monitor with empty id"});
            else if (!monitor_ids.insert(monitor.monitor_id).second)
                report.violations.push_back({service.service_id, "DuplicateMonitorId",
                                             "monitor id '" + monitor.monitor_id + "' repeats within the service"});
        }
        for (const auto& dep : service.upstream)
            if (!ids.count(dep)) report.external_ids.insert(dep);
        for (const auto& dep : service.downstream)
            if (!ids.count(dep)) report.external_ids.insert(dep);
    }
    return report;
}

ClassSets service_class_sets(const ServiceRecord& service) {
    ClassSets sets;
    for (const auto& monitor : service.monitors) {
        sets.resource.insert(monitor.resource_class);
        sets.slo.insert(monitor.slo_class);
    }
    return sets;
}

} // namespace monreco
