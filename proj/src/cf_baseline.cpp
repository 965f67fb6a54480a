#include "monreco/cf_baseline.hpp"

#include <algorithm>
#include <cmath>

#include "monreco/errors.hpp"

namespace monreco {

namespace {

std::size_t intersection_size(const BinaryVector& u, const BinaryVector& v) {
    std::size_t count = 0, i = 0, j = 0;
    while (i < u.set_bits.size() && j < v.set_bits.size()) {
        if (u.set_bits[i] == v.set_bits[j]) {
            ++count;
            ++i;
            ++j;
        } else if (u.set_bits[i] < v.set_bits[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return count;
}

} // namespace

double cosine_similarity(const BinaryVector& u, const BinaryVector& v) {
    if (u.dimension != v.dimension)
        throw DimensionMismatch("cosine_similarity: vectors have different dimensions");
    if (u.set_bits.empty() || v.set_bits.empty()) return 0.0;
    const double overlap = static_cast<double>(intersection_size(u, v));
    return overlap / std::sqrt(static_cast<double>(u.popcount()) * static_cast<double>(v.popcount()));
}

SimilarityList top_n_similar(const std::string& target, const std::vector<EncodedService>& fleet,
                             std::size_t n, FeatureKind kind) {
    if (n == 0) throw DomainError("top_n_similar: n must be at least 1");
    const EncodedService* target_entry = nullptr;
    for (const auto& entry : fleet)
        if (entry.service_id == target) {
            target_entry = &entry;
            break;
        }
    if (!target_entry) throw UnknownService("top_n_similar: target '" + target + "' not in fleet");
    SimilarityList list;
    list.target = target;
    list.kind = kind;
    list.neighbors.reserve(fleet.size() > 0 ? fleet.size() - 1 : 0);
    for (const auto& entry : fleet) {
        if (entry.service_id == target) continue;
        list.neighbors.push_back({entry.service_id, cosine_similarity(target_entry->vec, entry.vec)});
    }
    std::sort(list.neighbors.begin(), list.neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.service_id < b.service_id;
    });
    if (list.neighbors.size() > n) list.neighbors.resize(n);
    return list;
}

double cf_score(ResourceClass cls, const SimilarityList& neighbors, const LabelMatrix& labels) {
    const std::size_t column = static_cast<std::size_t>(cls);
    double score = 0.0;
    for (const auto& neighbor : neighbors.neighbors) {
        const auto row = labels.row_of(neighbor.service_id);
        if (!row)
            throw UnknownNeighbor("cf_score: neighbor '" + neighbor.service_id +
                                  "' missing from the label matrix");
        score += neighbor.similarity * labels.normalized[*row][column];
    }
    return score;
}

CfExperimentReport run_cf_experiment(const Dataset& dataset, FeatureKind kind,
                                     const SplitIndices& split, const CfOptions& options) {
    CfExperimentReport report;
    report.kind = kind;
    report.topn_max = options.topn_max;
    report.prevalence_floor = options.prevalence_floor;

    Dataset train;
    std::vector<const ServiceRecord*> test_services;
    for (const auto& service : dataset.services) {
        if (split.train_ids.count(service.service_id))
            train.services.push_back(service);
        else if (split.test_ids.count(service.service_id))
            test_services.push_back(&service);
    }
    if (test_services.empty()) throw EmptyTestSet("run_cf_experiment: split has no test services");
    if (train.services.empty()) throw EmptyTestSet("run_cf_experiment: split has no train services");

    const FeatureSpace space = build_feature_space(train, kind);
    const LabelMatrix labels = build_label_matrix(train, ClassKind::Resource);

    std::vector<EncodedService> train_fleet;
    train_fleet.reserve(train.services.size());
    for (const auto& service : train.services)
        train_fleet.push_back({service.service_id, encode_service(service, space)});

    // Neighbor ranking per test service, computed once; top-n for any n is a
    // prefix of the full sorted list.
    std::vector<SimilarityList> ranked(test_services.size());
    for (std::size_t t = 0; t < test_services.size(); ++t) {
        std::vector<EncodedService> fleet = train_fleet;
        fleet.push_back({test_services[t]->service_id, encode_service(*test_services[t], space)});
        ranked[t] = top_n_similar(test_services[t]->service_id, fleet, train_fleet.size(), kind);
    }

    for (const ResourceClass cls : all_resource_classes()) {
        const std::size_t column = static_cast<std::size_t>(cls);
        std::size_t train_positive = 0;
        for (const auto& row : labels.binary) train_positive += row[column];
        if (train_positive == 0) {
            report.notes.push_back("class '" + to_string(cls) + "' absent from training; skipped");
            continue;
        }
        const double prevalence =
            static_cast<double>(train_positive) / static_cast<double>(train.services.size());
        if (prevalence <= options.prevalence_floor) {
            report.notes.push_back("class '" + to_string(cls) + "' below prevalence floor; skipped");
            continue;
        }
        std::vector<int> truth(test_services.size());
        bool any_positive = false, any_negative = false;
        for (std::size_t t = 0; t < test_services.size(); ++t) {
            const ClassSets sets = service_class_sets(*test_services[t]);
            truth[t] = sets.resource.count(cls) ? 1 : 0;
            (truth[t] ? any_positive : any_negative) = true;
        }
        if (!any_positive || !any_negative) {
            report.notes.push_back("class '" + to_string(cls) +
                                   "' single-class in the test set; skipped");
            continue;
        }
        for (int n = 1; n <= options.topn_max; ++n) {
            ScoredSet scored;
            scored.labels = truth;
            scored.scores.resize(test_services.size());
            for (std::size_t t = 0; t < test_services.size(); ++t) {
                SimilarityList prefix = ranked[t];
                if (prefix.neighbors.size() > static_cast<std::size_t>(n))
                    prefix.neighbors.resize(static_cast<std::size_t>(n));
                scored.scores[t] = cf_score(cls, prefix, labels);
            }
            CfCell cell;
            cell.cls = cls;
            cell.top_n = n;
            cell.auc = auc(scored);
            const YoudenPoint point = youden_threshold(scored);
            cell.youden_threshold = point.threshold;
            const PrecisionRecall pr = precision_recall_at(scored, point.threshold);
            cell.precision = pr.precision;
            cell.recall = pr.recall;
            report.cells.push_back(cell);
        }
    }
    return report;
}

} // namespace monreco
