#include "monreco/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "monreco/errors.hpp"

namespace monreco {

namespace {

struct ClassCounts {
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

ClassCounts check_set(const ScoredSet& set) {
    if (set.scores.size() != set.labels.size())
        throw LengthMismatch("scored set: scores and labels have different lengths");
    if (set.scores.empty()) throw LengthMismatch("scored set: must be nonempty");
    ClassCounts counts;
    for (const int label : set.labels) {
        if (label == 1)
            ++counts.positives;
        else if (label == 0)
            ++counts.negatives;
        else
            throw DomainError("scored set: labels must be 0 or 1");
    }
    return counts;
}

ClassCounts require_both_classes(const ScoredSet& set) {
    const ClassCounts counts = check_set(set);
    if (counts.positives == 0 || counts.negatives == 0)
        throw SingleClassError("scored set: needs at least one positive and one negative label");
    return counts;
}

// Indices sorted ascending by score.
std::vector<std::size_t> order_by_score(const ScoredSet& set) {
    std::vector<std::size_t> order(set.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return set.scores[a] < set.scores[b]; });
    return order;
}

} // namespace

double auc(const ScoredSet& set) {
    const ClassCounts counts = require_both_classes(set);
    const auto order = order_by_score(set);
    const std::size_t n = order.size();
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && set.scores[order[j]] == set.scores[order[i]]) ++j;
        const double average_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k)
            if (set.labels[order[k]] == 1) positive_rank_sum += average_rank;
        i = j;
    }
    const double np = static_cast<double>(counts.positives);
    const double nn = static_cast<double>(counts.negatives);
    const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * nn);
}

double auc_trapezoid(const ScoredSet& set) {
    const ClassCounts counts = require_both_classes(set);
    const auto order = order_by_score(set);
    const std::size_t n = order.size();
    // Sweep thresholds from high to low; each unique score adds one ROC vertex.
    double tp = 0, fp = 0;
    double prev_tpr = 0.0, prev_fpr = 0.0;
    double area = 0.0;
    std::size_t i = n;
    while (i > 0) {
        std::size_t j = i;
        while (j > 0 && set.scores[order[j - 1]] == set.scores[order[i - 1]]) --j;
        for (std::size_t k = j; k < i; ++k) {
            if (set.labels[order[k]] == 1)
                ++tp;
            else
                ++fp;
        }
        const double tpr = tp / static_cast<double>(counts.positives);
        const double fpr = fp / static_cast<double>(counts.negatives);
        area += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        prev_tpr = tpr;
        prev_fpr = fpr;
        i = j;
    }
    return area;
}

YoudenPoint youden_threshold(const ScoredSet& set) {
    const ClassCounts counts = require_both_classes(set);
    const auto order = order_by_score(set);
    const std::size_t n = order.size();
    YoudenPoint best;
    best.threshold = std::numeric_limits<double>::infinity();  // predict nothing: J = 0
    double tp = 0, fp = 0;
    std::size_t i = n;
    while (i > 0) {
        std::size_t j = i;
        while (j > 0 && set.scores[order[j - 1]] == set.scores[order[i - 1]]) --j;
        for (std::size_t k = j; k < i; ++k) {
            if (set.labels[order[k]] == 1)
                ++tp;
            else
                ++fp;
        }
        const double tpr = tp / static_cast<double>(counts.positives);
        const double fpr = fp / static_cast<double>(counts.negatives);
        const double jval = tpr - fpr;
        // Strict improvement keeps the largest threshold among J ties, since
        // we visit candidates in descending order.
        if (jval > best.j) {
            best.threshold = set.scores[order[i - 1]];
            best.j = jval;
            best.tpr = tpr;
            best.fpr = fpr;
        }
        i = j;
    }
    return best;
}

PrecisionRecall precision_recall_at(const ScoredSet& set, double threshold) {
    const ClassCounts counts = check_set(set);
    if (counts.positives == 0)
        throw NoPositiveLabels("precision_recall_at: recall undefined without positive labels");
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < set.scores.size(); ++i) {
        if (set.scores[i] >= threshold) {
            if (set.labels[i] == 1)
                ++tp;
            else
                ++fp;
        }
    }
    PrecisionRecall out;
    out.precision = (tp + fp) == 0 ? 1.0 : tp / (tp + fp);
    out.recall = tp / static_cast<double>(counts.positives);
    return out;
}

DensityReport density_report(const ScoredSet& set, int bins) {
    const ClassCounts counts = check_set(set);
    if (bins < 1) throw DomainError("density_report: bins must be positive");
    DensityReport report;
    report.positives_empty = counts.positives == 0;
    report.negatives_empty = counts.negatives == 0;
    report.bin_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        report.bin_edges[b] = static_cast<double>(b) / static_cast<double>(bins);
    report.positive_density.assign(bins, 0.0);
    report.negative_density.assign(bins, 0.0);
    for (std::size_t i = 0; i < set.scores.size(); ++i) {
        double score = set.scores[i];
        if (score < 0.0 || score > 1.0) {
            score = std::clamp(score, 0.0, 1.0);
            ++report.clamped;
        }
        const int bin = std::min(bins - 1, static_cast<int>(score * bins));
        if (set.labels[i] == 1)
            report.positive_density[bin] += 1.0;
        else
            report.negative_density[bin] += 1.0;
    }
    if (counts.positives > 0)
        for (double& v : report.positive_density) v /= static_cast<double>(counts.positives);
    if (counts.negatives > 0)
        for (double& v : report.negative_density) v /= static_cast<double>(counts.negatives);
    return report;
}

} // namespace monreco
