#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "monreco/core_model.hpp"
#include "monreco/ingest.hpp"

namespace monreco {

// Ground-truth correlation between a feature token and a resource class: when
// the token is present the class is planted with p_given_trigger, otherwise
// with p_without. The rule table doubles as the oracle for every downstream
// AUC claim.
struct PlantedRule {
    FeatureKind kind = FeatureKind::Components;  // Upstream / Downstream / Components
    std::string trigger_token;
    ResourceClass cls = ResourceClass::CacheMemory;
    double p_given_trigger = 0.95;
    double p_without = 0.05;
    int monitors_per_hit = 1;
};

struct SynthConfig {
    int n_services = 500;
    double mean_upstream = 43.0;
    double mean_downstream = 20.0;
    double mean_components = 29.0;
    // Pools are sized so a cluster's preferred block comfortably holds a
    // service's token budget; cramped blocks force global redraws, which blur
    // the clusters and leak trigger tokens across them.
    int upstream_vocab = 400;
    int downstream_vocab = 400;
    int components_vocab = 250;

    // Services are drawn from per-kind archetype clusters: each service takes
    // its cluster's core tokens plus preferred-pool and fleet-wide draws.
    // Without this structure, feature similarity would carry no signal about
    // any planted class. Cluster assignments are independent across kinds.
    int clusters_per_kind = 5;
    int cluster_core_size = 8;
    double cluster_affinity = 0.90;  // share of non-core draws from the cluster pool

    std::vector<PlantedRule> rules;        // each rule's trigger joins one cluster core
    std::vector<ResourceClass> noise_classes;  // planted independently of all features
    double noise_rate = 0.5;
    int noise_monitors = 2;

    // SLO mix per resource class; classes without an entry draw uniformly.
    std::map<ResourceClass, std::vector<std::pair<SloClass, double>>> slo_conditional;

    std::uint64_t seed = 42;
};

// Seeded synthetic fleet with the planted correlations above. Deterministic:
// the same config yields the same dataset bit for bit.
Dataset generate(const SynthConfig& config);

// 500 services; one cache-memory and one cpu component rule, one api upstream
// rule, storage and service-level noise.
SynthConfig desk_preset(std::uint64_t seed = 42);

// Same structure at the published fleet size of 791 services.
SynthConfig paper_scale_preset(std::uint64_t seed = 42);

} // namespace monreco
