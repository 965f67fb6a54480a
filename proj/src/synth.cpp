#include "monreco/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "monreco/errors.hpp"
#include "monreco/rng.hpp"

namespace monreco {

namespace {

std::string numbered_token(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%03zu", prefix, i);
    return buf;
}

struct KindPool {
    std::vector<std::string> vocabulary;
    // Contiguous per-cluster blocks; the first cluster_core_size entries of a
    // block are that cluster's core tokens.
    std::size_t clusters = 0;
    std::size_t block = 0;
    std::size_t core = 0;

    std::size_t cluster_begin(std::size_t cluster) const { return cluster * block; }
};

KindPool make_pool(const char* prefix, int vocab, int clusters, int core) {
    KindPool pool;
    pool.clusters = static_cast<std::size_t>(clusters);
    pool.block = static_cast<std::size_t>(vocab) / pool.clusters;
    pool.core = static_cast<std::size_t>(core);
    if (pool.block < pool.core)
        throw ConfigError("synth: vocabulary too small for the cluster core size");
    pool.vocabulary.reserve(vocab);
    for (int i = 0; i < vocab; ++i) pool.vocabulary.push_back(numbered_token(prefix, i));
    return pool;
}

void check_config(const SynthConfig& config) {
    if (config.n_services < 1) throw ConfigError("synth: n_services must be positive");
    if (config.mean_upstream < 0 || config.mean_downstream < 0 || config.mean_components < 0)
        throw ConfigError("synth: feature means must be nonnegative");
    if (config.upstream_vocab < 1 || config.downstream_vocab < 1 || config.components_vocab < 1)
        throw ConfigError("synth: vocabulary sizes must be positive");
    if (config.clusters_per_kind < 1 || config.cluster_core_size < 0)
        throw ConfigError("synth: cluster shape invalid");
    if (config.cluster_affinity < 0.0 || config.cluster_affinity > 1.0)
        throw ConfigError("synth: cluster_affinity must be in [0, 1]");
    if (config.noise_rate < 0.0 || config.noise_rate > 1.0)
        throw ConfigError("synth: noise_rate must be in [0, 1]");
    if (config.noise_monitors < 1) throw ConfigError("synth: noise_monitors must be positive");
    std::set<ResourceClass> noise(config.noise_classes.begin(), config.noise_classes.end());
    std::set<std::pair<FeatureKind, std::string>> triggers;
    for (const auto& rule : config.rules) {
        if (rule.kind == FeatureKind::UpstreamPlusComponents)
            throw ConfigError("synth: rules must target a single feature kind");
        if (rule.trigger_token.empty()) throw ConfigError("synth: rule trigger token empty");
        if (rule.p_given_trigger < 0.0 || rule.p_given_trigger > 1.0 || rule.p_without < 0.0 ||
            rule.p_without > 1.0)
            throw ConfigError("synth: rule probabilities must be in [0, 1]");
        if (rule.p_given_trigger <= rule.p_without)
            throw ConfigError("synth: rule must satisfy p_given_trigger > p_without");
        if (rule.monitors_per_hit < 1)
            throw ConfigError("synth: monitors_per_hit must be positive");
        if (noise.count(rule.cls))
            throw ConfigError("synth: rule class overlaps the noise classes");
        if (!triggers.insert({rule.kind, rule.trigger_token}).second)
            throw ConfigError("synth: duplicate trigger token within a feature kind");
    }
    for (const auto& [cls, mix] : config.slo_conditional) {
        double sum = 0.0;
        for (const auto& [slo, weight] : mix) {
            if (weight < 0.0) throw ConfigError("synth: slo_conditional weights must be nonnegative");
            sum += weight;
        }
        if (sum <= 0.0) throw ConfigError("synth: slo_conditional mix must have positive mass");
    }
}

SloClass draw_slo(const SynthConfig& config, ResourceClass cls, SeededRng& rng) {
    const auto it = config.slo_conditional.find(cls);
    if (it == config.slo_conditional.end())
        return all_slo_classes()[rng.uniform_index(kSloClassCount)];
    double total = 0.0;
    for (const auto& [slo, weight] : it->second) total += weight;
    double draw = rng.uniform() * total;
    for (const auto& [slo, weight] : it->second) {
        draw -= weight;
        if (draw < 0.0) return slo;
    }
    return it->second.back().first;
}

std::set<std::string> draw_tokens(const KindPool& pool, double mean, double affinity,
                                  std::size_t cluster, SeededRng& rng) {
    std::set<std::string> tokens;
    if (pool.vocabulary.empty() || mean <= 0.0) return tokens;
    std::size_t target = static_cast<std::size_t>(rng.poisson(mean));
    target = std::clamp(target, pool.core, pool.vocabulary.size());
    const std::size_t begin = pool.cluster_begin(cluster);
    for (std::size_t i = 0; i < pool.core; ++i) tokens.insert(pool.vocabulary[begin + i]);
    std::size_t guard = 0;
    const std::size_t guard_limit = 64 * pool.vocabulary.size() + 64;
    while (tokens.size() < target && guard++ < guard_limit) {
        std::size_t pick;
        if (rng.bernoulli(affinity))
            pick = begin + rng.uniform_index(pool.block);
        else
            pick = rng.uniform_index(pool.vocabulary.size());
        tokens.insert(pool.vocabulary[pick]);
    }
    return tokens;
}

void add_monitors(ServiceRecord& service, ResourceClass cls, int count, const SynthConfig& config,
                  SeededRng& rng) {
    for (int i = 0; i < count; ++i) {
        MonitorRecord monitor;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%s-m%03zu", service.service_id.c_str(),
                      service.monitors.size());
        monitor.monitor_id = buf;
        monitor.functionality_group = "fg-" + slug(cls);
        monitor.slo_class = draw_slo(config, cls, rng);
        monitor.metric_name = slug(cls) + "." + to_string(monitor.slo_class);
        for (char& ch : monitor.metric_name)
            if (ch == ' ') ch = '_';
        monitor.alerting_logic = "avg(" + monitor.metric_name + ") breaches for 5 samples";
        monitor.resource_class = cls;
        service.monitors.push_back(std::move(monitor));
    }
}

} // namespace

Dataset generate(const SynthConfig& config) {
    check_config(config);
    SeededRng rng(config.seed);

    KindPool upstream_pool = make_pool("node", config.upstream_vocab, config.clusters_per_kind,
                                       config.cluster_core_size);
    KindPool downstream_pool = make_pool("node", config.downstream_vocab, config.clusters_per_kind,
                                         config.cluster_core_size);
    KindPool components_pool = make_pool("comp", config.components_vocab, config.clusters_per_kind,
                                         config.cluster_core_size);
    auto pool_for = [&](FeatureKind kind) -> KindPool& {
        switch (kind) {
            case FeatureKind::Upstream: return upstream_pool;
            case FeatureKind::Downstream: return downstream_pool;
            default: return components_pool;
        }
    };

    // Each rule's trigger becomes a core token of the next unused cluster for
    // its kind, so services of that archetype reliably carry it.
    std::map<FeatureKind, std::size_t> next_cluster;
    for (const auto& rule : config.rules) {
        KindPool& pool = pool_for(rule.kind);
        const std::size_t cluster = next_cluster[rule.kind]++;
        if (cluster >= pool.clusters)
            throw ConfigError("synth: more rules than clusters for kind " + to_string(rule.kind));
        if (pool.core == 0) throw ConfigError("synth: rules require a nonzero cluster core");
        pool.vocabulary[pool.cluster_begin(cluster)] = rule.trigger_token;
    }

    Dataset dataset;
    dataset.schema_version = 1;
    dataset.services.reserve(config.n_services);
    for (int i = 0; i < config.n_services; ++i) {
        ServiceRecord service;
        char buf[24];
        std::snprintf(buf, sizeof(buf), "svc-%04d", i);
        service.service_id = buf;

        const std::size_t upstream_cluster = rng.uniform_index(upstream_pool.clusters);
        const std::size_t downstream_cluster = rng.uniform_index(downstream_pool.clusters);
        const std::size_t components_cluster = rng.uniform_index(components_pool.clusters);
        service.upstream = draw_tokens(upstream_pool, config.mean_upstream,
                                       config.cluster_affinity, upstream_cluster, rng);
        service.downstream = draw_tokens(downstream_pool, config.mean_downstream,
                                         config.cluster_affinity, downstream_cluster, rng);
        service.components = draw_tokens(components_pool, config.mean_components,
                                         config.cluster_affinity, components_cluster, rng);

        for (const auto& rule : config.rules) {
            const std::set<std::string>& tokens = rule.kind == FeatureKind::Upstream
                                                      ? service.upstream
                                                      : rule.kind == FeatureKind::Downstream
                                                            ? service.downstream
                                                            : service.components;
            const double p = tokens.count(rule.trigger_token) ? rule.p_given_trigger : rule.p_without;
            if (rng.bernoulli(p)) add_monitors(service, rule.cls, rule.monitors_per_hit, config, rng);
        }
        for (const ResourceClass cls : config.noise_classes)
            if (rng.bernoulli(config.noise_rate))
                add_monitors(service, cls, config.noise_monitors, config, rng);

        dataset.services.push_back(std::move(service));
    }
    return dataset;
}

SynthConfig desk_preset(std::uint64_t seed) {
    SynthConfig config;
    config.n_services = 500;
    config.seed = seed;
    config.rules = {
        {FeatureKind::Components, "redis-cache", ResourceClass::CacheMemory, 0.95, 0.05, 2},
        {FeatureKind::Components, "vm-pool", ResourceClass::Cpu, 0.95, 0.05, 2},
        {FeatureKind::Upstream, "node-gateway", ResourceClass::Api, 0.90, 0.10, 2},
    };
    config.noise_classes = {ResourceClass::Storage, ResourceClass::ServiceLevel};
    config.slo_conditional = {
        {ResourceClass::Cpu,
         {{SloClass::Capacity, 0.7}, {SloClass::Latency, 0.2}, {SloClass::Others, 0.1}}},
        {ResourceClass::CacheMemory,
         {{SloClass::SuccessRate, 0.45}, {SloClass::Capacity, 0.45}, {SloClass::Freshness, 0.1}}},
        {ResourceClass::Api,
         {{SloClass::SuccessRate, 0.5}, {SloClass::Latency, 0.4}, {SloClass::Availability, 0.1}}},
        {ResourceClass::Storage, {{SloClass::Capacity, 0.8}, {SloClass::Availability, 0.2}}},
        {ResourceClass::ServiceLevel,
         {{SloClass::SuccessRate, 0.6}, {SloClass::Availability, 0.25}, {SloClass::Latency, 0.15}}},
    };
    return config;
}

SynthConfig paper_scale_preset(std::uint64_t seed) {
    SynthConfig config = desk_preset(seed);
    config.n_services = 791;
    return config;
}

} // namespace monreco
