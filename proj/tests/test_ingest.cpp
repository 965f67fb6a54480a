#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "monreco/errors.hpp"
#include "monreco/ingest.hpp"
#include "monreco/synth.hpp"

using namespace monreco;

namespace {

Dataset parse_text(const std::string& text) {
    std::istringstream in(text);
    return read_dataset_jsonl(in, "test");
}

ServiceRecord service_with(const std::string& id, std::set<std::string> upstream,
                           std::set<std::string> components = {}) {
    ServiceRecord service;
    service.service_id = id;
    service.upstream = std::move(upstream);
    service.components = std::move(components);
    return service;
}

const char* kOneServiceLine =
    R"({"schema_version": 1})"
    "\n"
    R"({"service_id": "a", "upstream": ["x"], "downstream": [], "components": ["vm"], "monitors": [{"monitor_id": "m1", "functionality_group": "fg", "metric": "cpu.pct", "alerting_logic": "avg > 0.9", "resource_class": "cpu", "slo_class": "capacity"}]})"
    "\n";

} // namespace

TEST_SUITE("ingest") {

TEST_CASE("a well-formed line parses into one service") {
    const Dataset dataset = parse_text(kOneServiceLine);
    REQUIRE(dataset.services.size() == 1);
    CHECK(dataset.schema_version == 1);
    const ServiceRecord& service = dataset.services.front();
    CHECK(service.service_id == "a");
    REQUIRE(service.monitors.size() == 1);
    CHECK(service.monitors[0].resource_class == ResourceClass::Cpu);
    CHECK(service.monitors[0].slo_class == SloClass::Capacity);
}

TEST_CASE("unknown resource class names fail with the offending name") {
    const std::string text =
        "{\"schema_version\": 1}\n"
        R"({"service_id": "a", "monitors": [{"monitor_id": "m", "functionality_group": "f", "metric": "m", "alerting_logic": "a", "resource_class": "gpu", "slo_class": "capacity"}]})"
        "\n";
    CHECK_THROWS_WITH_AS(parse_text(text), doctest::Contains("gpu"), ParseError);
}

TEST_CASE("empty file yields an empty dataset") {
    const Dataset dataset = parse_text("");
    CHECK(dataset.services.empty());
}

TEST_CASE("unsupported schema versions are rejected") {
    CHECK_THROWS_AS(parse_text("{\"schema_version\": 2}\n"), SchemaVersionError);
    CHECK_THROWS_AS(parse_text("{\"service_id\": \"a\"}\n"), SchemaVersionError);
}

TEST_CASE("invariant violations surface as ValidationError") {
    const std::string text =
        "{\"schema_version\": 1}\n"
        R"({"service_id": "a", "upstream": ["a"]})"
        "\n";
    CHECK_THROWS_WITH_AS(parse_text(text), doctest::Contains("SelfDependency"), ValidationError);
}

TEST_CASE("save then load preserves the dataset exactly") {
    const SynthConfig config = [] {
        SynthConfig c = desk_preset(7);
        c.n_services = 40;
        return c;
    }();
    const Dataset dataset = generate(config);
    const auto path = std::filesystem::temp_directory_path() / "monreco_roundtrip.jsonl";
    save_dataset(path, dataset);
    const Dataset reloaded = load_dataset(path);
    CHECK(dataset == reloaded);
    std::filesystem::remove(path);
}

TEST_CASE("feature space is the sorted token union") {
    Dataset dataset;
    dataset.services.push_back(service_with("s1", {"b"}));
    dataset.services.push_back(service_with("s2", {"a", "b"}));
    const FeatureSpace space = build_feature_space(dataset, FeatureKind::Upstream);
    CHECK(space.vocabulary == std::vector<std::string>{"a", "b"});
    CHECK(space.index.at("a") == 0);
    CHECK(space.index.at("b") == 1);
}

TEST_CASE("feature space over absent properties is empty") {
    Dataset dataset;
    dataset.services.push_back(service_with("s1", {"a"}));
    const FeatureSpace space = build_feature_space(dataset, FeatureKind::Components);
    CHECK(space.vocabulary.empty());
}

TEST_CASE("combined kind prefixes upstream and component tokens") {
    Dataset dataset;
    dataset.services.push_back(service_with("s1", {"x"}, {"x"}));
    const FeatureSpace space = build_feature_space(dataset, FeatureKind::UpstreamPlusComponents);
    CHECK(space.vocabulary == std::vector<std::string>{"comp:x", "up:x"});
}

TEST_CASE("encoding sets exactly the vocabulary positions of known tokens") {
    Dataset dataset;
    dataset.services.push_back(service_with("s1", {"a", "b", "c"}));
    const FeatureSpace space = build_feature_space(dataset, FeatureKind::Upstream);

    CHECK(encode_service(service_with("t", {"b"}), space).set_bits ==
          std::vector<std::size_t>{1});
    CHECK(encode_service(service_with("t", {"a", "b", "c"}), space).set_bits ==
          std::vector<std::size_t>{0, 1, 2});
    CHECK(encode_service(service_with("t", {"z"}), space).set_bits.empty());
}

TEST_CASE("encoding popcount never exceeds the token count") {
    Dataset dataset;
    dataset.services.push_back(service_with("s1", {"a", "b"}));
    const FeatureSpace space = build_feature_space(dataset, FeatureKind::Upstream);
    const ServiceRecord probe = service_with("t", {"a", "b", "unseen"});
    const BinaryVector vec = encode_service(probe, space);
    CHECK(vec.popcount() <= probe.upstream.size());
    CHECK(vec.popcount() == 2);  // equality only without out-of-vocabulary tokens
}

TEST_CASE("label matrix binary and normalized rows follow the monitor counts") {
    const std::string text =
        "{\"schema_version\": 1}\n"
        R"({"service_id": "a", "monitors": [)"
        R"({"monitor_id": "m1", "functionality_group": "f", "metric": "m", "alerting_logic": "x", "resource_class": "cpu", "slo_class": "capacity"},)"
        R"({"monitor_id": "m2", "functionality_group": "f", "metric": "m", "alerting_logic": "x", "resource_class": "cpu", "slo_class": "capacity"},)"
        R"({"monitor_id": "m3", "functionality_group": "f", "metric": "m", "alerting_logic": "x", "resource_class": "api", "slo_class": "latency"}]})"
        "\n";
    const Dataset dataset = parse_text(text);
    const LabelMatrix matrix = build_label_matrix(dataset, ClassKind::Resource);
    const auto cpu = static_cast<std::size_t>(ResourceClass::Cpu);
    const auto api = static_cast<std::size_t>(ResourceClass::Api);
    CHECK(matrix.binary[0][cpu] == 1);
    CHECK(matrix.binary[0][api] == 1);
    CHECK(matrix.binary[0][static_cast<std::size_t>(ResourceClass::Storage)] == 0);
    CHECK(matrix.normalized[0][cpu] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(matrix.normalized[0][api] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("label matrix rows of monitor-free services are all zero") {
    Dataset dataset;
    dataset.services.push_back(service_with("quiet", {}));
    const LabelMatrix matrix = build_label_matrix(dataset, ClassKind::Resource);
    for (std::size_t c = 0; c < matrix.class_count(); ++c) {
        CHECK(matrix.binary[0][c] == 0);
        CHECK(matrix.normalized[0][c] == 0.0);
    }
}

TEST_CASE("identical services produce identical rows") {
    Dataset dataset = parse_text(kOneServiceLine);
    ServiceRecord clone = dataset.services[0];
    clone.service_id = "b";
    dataset.services.push_back(clone);
    const LabelMatrix matrix = build_label_matrix(dataset, ClassKind::Resource);
    CHECK(matrix.binary[0] == matrix.binary[1]);
    CHECK(matrix.normalized[0] == matrix.normalized[1]);
}

TEST_CASE("normalized rows of monitored services sum to one") {
    const Dataset dataset = generate(desk_preset(11));
    const LabelMatrix matrix = build_label_matrix(dataset, ClassKind::Resource);
    for (std::size_t i = 0; i < dataset.services.size(); ++i) {
        if (dataset.services[i].monitors.empty()) continue;
        double sum = 0.0;
        for (const double v : matrix.normalized[i]) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

} // TEST_SUITE
