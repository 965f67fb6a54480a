#include <doctest.h>

#include "monreco/core_model.hpp"

using namespace monreco;

namespace {

ServiceRecord make_service(const std::string& id) {
    ServiceRecord service;
    service.service_id = id;
    return service;
}

MonitorRecord make_monitor(const std::string& id, ResourceClass cls, SloClass slo) {
    MonitorRecord monitor;
    monitor.monitor_id = id;
    monitor.functionality_group = "fg";
    monitor.metric_name = "metric";
    monitor.alerting_logic = "alert";
    monitor.resource_class = cls;
    monitor.slo_class = slo;
    return monitor;
}

} // namespace

TEST_SUITE("core_model") {

TEST_CASE("class enumerations round-trip through their canonical names") {
    CHECK(all_resource_classes().size() == 13);
    CHECK(all_slo_classes().size() == 9);
    for (const ResourceClass cls : all_resource_classes()) {
        const auto parsed = parse_resource_class(to_string(cls));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == cls);
    }
    for (const SloClass cls : all_slo_classes()) {
        const auto parsed = parse_slo_class(to_string(cls));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == cls);
    }
}

TEST_CASE("parsing is case-insensitive with hyphen/space equivalence") {
    CHECK(parse_resource_class("Ram Memory") == ResourceClass::RamMemory);
    CHECK(parse_resource_class("ram-memory") == ResourceClass::RamMemory);
    CHECK(parse_resource_class("RAM-MEMORY") == ResourceClass::RamMemory);
    CHECK(parse_resource_class("None Of The Above") == ResourceClass::NoneOfTheAbove);
    CHECK(parse_resource_class("Compute   Cluster") == ResourceClass::ComputeCluster);
    CHECK(parse_slo_class("Success Rate - QoS") == SloClass::SuccessRateQos);
    CHECK(parse_slo_class("success-rate-qos") == SloClass::SuccessRateQos);
}

TEST_CASE("enumerations are closed") {
    CHECK_FALSE(parse_resource_class("gpu").has_value());
    CHECK_FALSE(parse_resource_class("").has_value());
    CHECK_FALSE(parse_slo_class("error budget").has_value());
}

TEST_CASE("validate reports duplicate service ids") {
    Dataset dataset;
    dataset.services.push_back(make_service("a"));
    dataset.services.push_back(make_service("a"));
    const ValidationReport report = validate(dataset);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].rule == "DuplicateServiceId");
    CHECK(report.violations[0].service_id == "a");
}

TEST_CASE("validate reports self-dependencies") {
    Dataset dataset;
    ServiceRecord service = make_service("a");
    service.upstream = {"a", "b"};
    dataset.services.push_back(service);
    const ValidationReport report = validate(dataset);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].rule == "SelfDependency");
}

TEST_CASE("validate accepts a well-formed dataset and flags externals") {
    Dataset dataset;
    ServiceRecord a = make_service("a");
    a.upstream = {"b", "external-dep"};
    ServiceRecord b = make_service("b");
    b.downstream = {"a"};
    ServiceRecord c = make_service("c");
    c.components = {"vm", "role"};
    c.monitors.push_back(make_monitor("m1", ResourceClass::Cpu, SloClass::Capacity));
    dataset.services = {a, b, c};
    const ValidationReport report = validate(dataset);
    CHECK(report.valid());
    CHECK(report.external_ids == std::set<std::string>{"external-dep"});
}

TEST_CASE("validate reports duplicate and empty monitor ids") {
    Dataset dataset;
    ServiceRecord service = make_service("a");
    service.monitors.push_back(make_monitor("m1", ResourceClass::Cpu, SloClass::Capacity));
    service.monitors.push_back(make_monitor("m1", ResourceClass::Api, SloClass::Latency));
    service.monitors.push_back(make_monitor("", ResourceClass::Api, SloClass::Latency));
    dataset.services.push_back(service);
    const ValidationReport report = validate(dataset);
    REQUIRE(report.violations.size() == 2);
    CHECK(report.violations[0].rule == "DuplicateMonitorId");
    CHECK(report.violations[1].rule == "EmptyMonitorId");
}

TEST_CASE("service_class_sets returns distinct classes") {
    ServiceRecord service = make_service("a");
    service.monitors.push_back(make_monitor("m1", ResourceClass::Cpu, SloClass::Capacity));
    service.monitors.push_back(make_monitor("m2", ResourceClass::Cpu, SloClass::Latency));
    const ClassSets sets = service_class_sets(service);
    CHECK(sets.resource == std::set<ResourceClass>{ResourceClass::Cpu});
    CHECK(sets.slo == std::set<SloClass>{SloClass::Capacity, SloClass::Latency});
}

TEST_CASE("service_class_sets of an empty service is empty") {
    const ClassSets sets = service_class_sets(make_service("a"));
    CHECK(sets.resource.empty());
    CHECK(sets.slo.empty());
}

TEST_CASE("service_class_sets covers all thirteen classes") {
    ServiceRecord service = make_service("a");
    int i = 0;
    for (const ResourceClass cls : all_resource_classes())
        service.monitors.push_back(make_monitor("m" + std::to_string(i++), cls, SloClass::Others));
    CHECK(service_class_sets(service).resource.size() == 13);
}

TEST_CASE("service_class_sets is idempotent under monitor duplication") {
    ServiceRecord service = make_service("a");
    service.monitors.push_back(make_monitor("m1", ResourceClass::Storage, SloClass::Capacity));
    const ClassSets before = service_class_sets(service);
    MonitorRecord duplicate = service.monitors.front();
    duplicate.monitor_id = "m2";  // same tuple, fresh id
    service.monitors.push_back(duplicate);
    const ClassSets after = service_class_sets(service);
    CHECK(before.resource == after.resource);
    CHECK(before.slo == after.slo);
}

} // TEST_SUITE
