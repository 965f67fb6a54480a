#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace monreco {

// Broad categories of monitored resources. Closed enumeration: anything a
// production monitor watches that is not one of the named classes belongs to
// NoneOfTheAbove.
enum class ResourceClass {
    ServiceLevel,
    Api,
    Dependency,
    Cpu,
    ComputeCluster,
    Storage,
    RamMemory,
    CacheMemory,
    Container,
    Certificate,
    Io,
    PagingMemory,
    NoneOfTheAbove,
};
inline constexpr std::size_t kResourceClassCount = 13;

// Categories of the objective a monitor's metric measures.
enum class SloClass {
    SuccessRate,
    Capacity,
    Latency,
    Availability,
    Throughput,
    SuccessRateQos,
    InterruptionRate,
    Freshness,
    Others,
};
inline constexpr std::size_t kSloClassCount = 9;

const std::array<ResourceClass, kResourceClassCount>& all_resource_classes();
const std::array<SloClass, kSloClassCount>& all_slo_classes();

// Canonical lowercase names ("service level", "ram-memory", ...).
std::string to_string(ResourceClass c);
std::string to_string(SloClass c);

// Canonical name with separators squashed, usable in file names ("ram-memory",
// "compute-cluster").
std::string slug(ResourceClass c);

// Parsing is case-insensitive and treats hyphens and spaces as equivalent
// ("Ram Memory" == "ram-memory"). Names outside the closed enumeration fail.
std::optional<ResourceClass> parse_resource_class(std::string_view name);
std::optional<SloClass> parse_slo_class(std::string_view name);

struct MonitorRecord {
    std::string monitor_id;
    std::string functionality_group;
    std::string metric_name;
    std::string alerting_logic;
    ResourceClass resource_class = ResourceClass::NoneOfTheAbove;
    SloClass slo_class = SloClass::Others;

    bool operator==(const MonitorRecord&) const = default;
};

struct ServiceRecord {
    std::string service_id;
    std::set<std::string> upstream;
    std::set<std::string> downstream;
    std::set<std::string> components;
    std::vector<MonitorRecord> monitors;

    bool operator==(const ServiceRecord&) const = default;
};

struct Dataset {
    int schema_version = 1;
    std::vector<ServiceRecord> services;

    bool operator==(const Dataset&) const = default;
};

struct Violation {
    std::string service_id;
    std::string rule;   // stable rule name, e.g. "DuplicateServiceId"
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    // Dependency ids that do not resolve to a service in the dataset. Allowed
    // (the fleet is a subgraph); surfaced for reporting only.
    std::set<std::string> external_ids;

    bool valid() const { return violations.empty(); }
};

// Checks every dataset invariant and returns all violations; never throws.
ValidationReport validate(const Dataset& dataset);

struct ClassSets {
    std::set<ResourceClass> resource;
    std::set<SloClass> slo;
};

// Distinct resource and SLO classes over a service's monitors.
ClassSets service_class_sets(const ServiceRecord& service);

} // namespace monreco
