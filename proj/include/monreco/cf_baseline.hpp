#pragma once

#include <string>
#include <vector>

#include "monreco/core_model.hpp"
#include "monreco/evalkit.hpp"
#include "monreco/ingest.hpp"
#include "monreco/split.hpp"

namespace monreco {

// |bits(u) & bits(v)| / sqrt(|bits(u)| * |bits(v)|); 0 when either is empty.
double cosine_similarity(const BinaryVector& u, const BinaryVector& v);

struct Neighbor {
    std::string service_id;
    double similarity = 0.0;
};

struct SimilarityList {
    std::string target;
    FeatureKind kind = FeatureKind::Upstream;
    std::vector<Neighbor> neighbors;  // similarity nonincreasing, ties by ascending id
};

struct EncodedService {
    std::string service_id;
    BinaryVector vec;
};

// The n most similar services to `target` within `fleet`, target excluded.
// Fewer than n come back only when the fleet is smaller.
SimilarityList top_n_similar(const std::string& target, const std::vector<EncodedService>& fleet,
                             std::size_t n, FeatureKind kind);

// Score(S_i, C) = sum over neighbors of similarity x normalized occurrence of
// the class in that neighbor. A ranking signal, not a probability.
double cf_score(ResourceClass cls, const SimilarityList& neighbors, const LabelMatrix& labels);

struct CfCell {
    ResourceClass cls = ResourceClass::ServiceLevel;
    int top_n = 1;
    double auc = 0.0;
    double youden_threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct CfExperimentReport {
    FeatureKind kind = FeatureKind::Upstream;
    int topn_max = 5;
    double prevalence_floor = 0.05;
    std::vector<CfCell> cells;
    std::vector<std::string> notes;  // skipped classes and why
};

struct CfOptions {
    int topn_max = 5;
    // Classes whose train-set service-level prevalence is at or below the
    // floor are not evaluated.
    double prevalence_floor = 0.05;
};

// Neighbor search, feature space, and label matrix all come from the training
// services only; test services are scored against them.
CfExperimentReport run_cf_experiment(const Dataset& dataset, FeatureKind kind,
                                     const SplitIndices& split, const CfOptions& options = {});

} // namespace monreco
