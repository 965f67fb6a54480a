#pragma once

#include <vector>

namespace monreco {

struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;  // each 0 or 1, same length as scores
};

// Mann-Whitney AUC: over all (positive, negative) pairs, the fraction where
// the positive outscores the negative, ties counted 0.5. Computed via rank
// sums; exact for tied scores.
double auc(const ScoredSet& set);

// Same quantity via trapezoidal integration of the ROC curve. Kept as a
// second route; agrees with auc() to floating-point accuracy.
double auc_trapezoid(const ScoredSet& set);

struct YoudenPoint {
    double threshold = 0.0;  // +inf when no finite candidate improves on J = 0
    double j = 0.0;          // TPR - FPR at the threshold
    double tpr = 0.0;
    double fpr = 0.0;
};

// Scans candidate thresholds (unique scores plus +inf) under the inclusive
// decision rule score >= threshold and returns the J maximizer; ties in J
// resolve to the larger threshold.
YoudenPoint youden_threshold(const ScoredSet& set);

struct PrecisionRecall {
    double precision = 1.0;  // 1.0 by convention when nothing is predicted positive
    double recall = 0.0;
};

PrecisionRecall precision_recall_at(const ScoredSet& set, double threshold);

struct DensityReport {
    std::vector<double> bin_edges;  // bins + 1 ascending edges over [0, 1]
    std::vector<double> positive_density;
    std::vector<double> negative_density;
    bool positives_empty = false;
    bool negatives_empty = false;
    int clamped = 0;  // scores outside [0, 1] clamped into range
};

// Equal-width per-class score histograms over [0, 1], each normalized to sum
// to 1 when its class is nonempty.
DensityReport density_report(const ScoredSet& set, int bins);

} // namespace monreco
