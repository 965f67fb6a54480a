#include "monreco/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "monreco/errors.hpp"

namespace monreco {

namespace {

std::vector<std::string> class_labels(ClassKind kind) {
    std::vector<std::string> labels;
    if (kind == ClassKind::Resource)
        for (const auto cls : all_resource_classes()) labels.push_back(to_string(cls));
    else
        for (const auto cls : all_slo_classes()) labels.push_back(to_string(cls));
    return labels;
}

void fill_fractions(Distribution& dist) {
    const std::int64_t total = dist.total();
    dist.fractions.assign(dist.counts.size(), 0.0);
    if (total == 0) return;
    for (std::size_t i = 0; i < dist.counts.size(); ++i)
        dist.fractions[i] = static_cast<double>(dist.counts[i]) / static_cast<double>(total);
}

ChiSquaredResult chi2_from_cells(const std::vector<double>& observed,
                                 const std::vector<double>& expected, int dof) {
    ChiSquaredResult result;
    result.dof = dof;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] < 5.0) ++result.low_expected_cells;
        const double diff = observed[i] - expected[i];
        result.statistic += diff * diff / expected[i];
    }
    result.p_value = regularized_gamma_q(0.5 * dof, 0.5 * result.statistic);
    result.reject_at_5pct = result.p_value < 0.05;
    return result;
}

} // namespace

std::int64_t Distribution::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

Distribution class_distribution(const Dataset& dataset, ClassKind kind, CountLevel level) {
    Distribution dist;
    dist.labels = class_labels(kind);
    dist.counts.assign(dist.labels.size(), 0);
    for (const auto& service : dataset.services) {
        if (level == CountLevel::Monitor) {
            for (const auto& monitor : service.monitors) {
                const std::size_t column = kind == ClassKind::Resource
                                               ? static_cast<std::size_t>(monitor.resource_class)
                                               : static_cast<std::size_t>(monitor.slo_class);
                ++dist.counts[column];
            }
        } else {
            const ClassSets sets = service_class_sets(service);
            if (kind == ClassKind::Resource)
                for (const auto cls : sets.resource) ++dist.counts[static_cast<std::size_t>(cls)];
            else
                for (const auto cls : sets.slo) ++dist.counts[static_cast<std::size_t>(cls)];
        }
    }
    fill_fractions(dist);
    return dist;
}

std::vector<Distribution> slo_within_resource(const Dataset& dataset) {
    std::vector<Distribution> table(kResourceClassCount);
    for (auto& dist : table) {
        dist.labels = class_labels(ClassKind::Slo);
        dist.counts.assign(dist.labels.size(), 0);
    }
    for (const auto& service : dataset.services)
        for (const auto& monitor : service.monitors)
            ++table[static_cast<std::size_t>(monitor.resource_class)]
                  .counts[static_cast<std::size_t>(monitor.slo_class)];
    for (auto& dist : table) fill_fractions(dist);
    return table;
}

double phi_coefficient(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    if (a.size() != b.size())
        throw LengthMismatch("phi_coefficient: columns have different lengths");
    if (a.empty()) throw LengthMismatch("phi_coefficient: columns must be nonempty");
    double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool ai = a[i] != 0;
        const bool bi = b[i] != 0;
        if (ai && bi)
            ++n11;
        else if (ai)
            ++n10;
        else if (bi)
            ++n01;
        else
            ++n00;
    }
    const double row1 = n11 + n10;
    const double row0 = n01 + n00;
    const double col1 = n11 + n01;
    const double col0 = n10 + n00;
    if (row1 == 0 || row0 == 0 || col1 == 0 || col0 == 0) return 0.0;
    return (n11 * n00 - n10 * n01) / std::sqrt(row1 * row0 * col1 * col0);
}

Matrix phi_matrix(const LabelMatrix& labels) {
    if (labels.binary.empty()) throw LengthMismatch("phi_matrix: needs at least one service row");
    const std::size_t classes = labels.class_count();
    const std::size_t services = labels.binary.size();
    std::vector<std::vector<std::uint8_t>> columns(classes, std::vector<std::uint8_t>(services, 0));
    for (std::size_t i = 0; i < services; ++i)
        for (std::size_t c = 0; c < classes; ++c) columns[c][i] = labels.binary[i][c];
    Matrix phi(classes, classes);
    for (std::size_t i = 0; i < classes; ++i) {
        for (std::size_t j = i; j < classes; ++j) {
            const double value = phi_coefficient(columns[i], columns[j]);
            phi.at(i, j) = value;
            phi.at(j, i) = value;
        }
    }
    return phi;
}

ChiSquaredResult chi2_goodness_of_fit(const std::vector<double>& observed,
                                      const std::vector<double>& expected_fractions) {
    if (observed.size() != expected_fractions.size())
        throw LengthMismatch("chi2_goodness_of_fit: observed and expected sizes differ");
    const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
    if (total <= 0.0) throw DomainError("chi2_goodness_of_fit: observed counts sum to zero");
    const double fraction_sum =
        std::accumulate(expected_fractions.begin(), expected_fractions.end(), 0.0);
    if (std::fabs(fraction_sum - 1.0) > 1e-9)
        throw DomainError("chi2_goodness_of_fit: expected fractions must sum to 1");
    std::vector<double> kept_observed, kept_expected;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double expected = total * expected_fractions[i];
        if (expected_fractions[i] <= 0.0) {
            if (observed[i] > 0.0)
                throw DegenerateExpected(
                    "chi2_goodness_of_fit: observed counts in a zero-expectation cell");
            continue;  // dropped from dof
        }
        kept_observed.push_back(observed[i]);
        kept_expected.push_back(expected);
    }
    if (kept_observed.size() < 2)
        throw DomainError("chi2_goodness_of_fit: fewer than two cells retained");
    return chi2_from_cells(kept_observed, kept_expected, static_cast<int>(kept_observed.size()) - 1);
}

ChiSquaredResult chi2_independence(const Matrix& contingency) {
    std::vector<std::size_t> rows, cols;
    for (std::size_t r = 0; r < contingency.rows; ++r) {
        double sum = 0;
        for (std::size_t c = 0; c < contingency.cols; ++c) sum += contingency.at(r, c);
        if (sum > 0) rows.push_back(r);
    }
    for (std::size_t c = 0; c < contingency.cols; ++c) {
        double sum = 0;
        for (std::size_t r = 0; r < contingency.rows; ++r) sum += contingency.at(r, c);
        if (sum > 0) cols.push_back(c);
    }
    if (rows.size() < 2 || cols.size() < 2)
        throw DomainError("chi2_independence: needs at least two non-empty rows and columns");
    double total = 0.0;
    std::vector<double> row_sums(rows.size(), 0.0), col_sums(cols.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const double v = contingency.at(rows[i], cols[j]);
            if (v < 0) throw DomainError("chi2_independence: negative cell count");
            row_sums[i] += v;
            col_sums[j] += v;
            total += v;
        }
    std::vector<double> observed, expected;
    observed.reserve(rows.size() * cols.size());
    expected.reserve(rows.size() * cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) {
            observed.push_back(contingency.at(rows[i], cols[j]));
            expected.push_back(row_sums[i] * col_sums[j] / total);
        }
    const int dof = static_cast<int>((rows.size() - 1) * (cols.size() - 1));
    return chi2_from_cells(observed, expected, dof);
}

double regularized_gamma_q(double s, double x) {
    if (s <= 0.0) throw DomainError("regularized_gamma_q: s must be positive");
    if (x < 0.0) throw DomainError("regularized_gamma_q: x must be nonnegative");
    if (x == 0.0) return 1.0;
    const double log_prefactor = -x + s * std::log(x) - std::lgamma(s);
    if (x < s + 1.0) {
        // Series for the lower function P(s, x); Q = 1 - P.
        double term = 1.0 / s;
        double sum = term;
        double a = s;
        for (int i = 0; i < 1000; ++i) {
            a += 1.0;
            term *= x / a;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
        }
        const double p = sum * std::exp(log_prefactor);
        return std::clamp(1.0 - p, 0.0, 1.0);
    }
    // Continued fraction for Q(s, x), modified Lentz.
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::clamp(std::exp(log_prefactor) * h, 0.0, 1.0);
}

} // namespace monreco
