#pragma once

#include <cstdint>
#include <vector>

#include "monreco/core_model.hpp"
#include "monreco/ingest.hpp"
#include "monreco/matrix.hpp"

namespace monreco {

struct Distribution {
    std::vector<std::string> labels;
    std::vector<std::int64_t> counts;
    std::vector<double> fractions;  // counts / total, all zero when total is 0

    std::int64_t total() const;
};

enum class CountLevel { Monitor, Service };

// Monitor level counts every monitor once; service level counts each
// (service, class) pair once, so a service contributes at most 1 per class.
Distribution class_distribution(const Dataset& dataset, ClassKind kind, CountLevel level);

// Row r: the SLO mix of monitors whose resource class is r. Indexed in
// canonical resource-class order; zero row for classes with no monitors.
std::vector<Distribution> slo_within_resource(const Dataset& dataset);

// Mean square contingency coefficient over the 2x2 table of two binary
// columns. Returns 0 when any marginal is empty (degenerate column) so
// downstream matrices stay finite.
double phi_coefficient(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

// Pairwise phi over the class columns of a binary label matrix. Symmetric;
// diagonal is 1 for non-degenerate columns and 0 for degenerate ones.
Matrix phi_matrix(const LabelMatrix& labels);

struct ChiSquaredResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool reject_at_5pct = false;
    int low_expected_cells = 0;  // retained cells with expected count < 5
};

// Pearson goodness-of-fit of observed counts against expected fractions.
// Cells with zero expected fraction and zero observation are dropped from the
// degrees of freedom; a zero-expectation cell with observations is an error.
ChiSquaredResult chi2_goodness_of_fit(const std::vector<double>& observed,
                                      const std::vector<double>& expected_fractions);

// Pearson test of independence over an R x K contingency table of counts.
// All-zero rows and columns are dropped before computing expectations.
ChiSquaredResult chi2_independence(const Matrix& contingency);

// Upper regularized incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s),
// series for x < s + 1 and continued fraction otherwise. Absolute error
// is bounded by 1e-10 over the chi-squared use range.
double regularized_gamma_q(double s, double x);

} // namespace monreco
