#include "monreco/svd_ablation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "monreco/errors.hpp"
#include "monreco/evalkit.hpp"
#include "monreco/ingest.hpp"
#include "monreco/rng.hpp"

namespace monreco {

namespace {

FeatureKind scenario_feature_kind(Scenario scenario) {
    switch (scenario) {
        case Scenario::UpstreamOnly: return FeatureKind::Upstream;
        case Scenario::ComponentsOnly: return FeatureKind::Components;
        case Scenario::Both: return FeatureKind::UpstreamPlusComponents;
    }
    return FeatureKind::Upstream;
}

Matrix gram_matrix(const Matrix& a, bool on_cols) {
    const std::size_t m = on_cols ? a.cols : a.rows;
    Matrix g(m, m);
    if (on_cols) {
        for (std::size_t r = 0; r < a.rows; ++r)
            for (std::size_t i = 0; i < a.cols; ++i) {
                const double v = a.at(r, i);
                if (v == 0.0) continue;
                for (std::size_t j = i; j < a.cols; ++j) g.at(i, j) += v * a.at(r, j);
            }
    } else {
        for (std::size_t i = 0; i < a.rows; ++i)
            for (std::size_t j = i; j < a.rows; ++j) {
                double s = 0.0;
                for (std::size_t c = 0; c < a.cols; ++c) s += a.at(i, c) * a.at(j, c);
                g.at(i, j) = s;
            }
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < i; ++j) g.at(i, j) = g.at(j, i);
    return g;
}

// Modified Gram-Schmidt on the columns; near-null columns are replaced with
// seeded random directions so the basis always has full column rank.
void orthonormalize_columns(Matrix& q, SeededRng& rng) {
    const std::size_t m = q.rows, k = q.cols;
    for (std::size_t j = 0; j < k; ++j) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            for (std::size_t prev = 0; prev < j; ++prev) {
                double dot = 0.0;
                for (std::size_t r = 0; r < m; ++r) dot += q.at(r, prev) * q.at(r, j);
                for (std::size_t r = 0; r < m; ++r) q.at(r, j) -= dot * q.at(r, prev);
            }
            double norm = 0.0;
            for (std::size_t r = 0; r < m; ++r) norm += q.at(r, j) * q.at(r, j);
            norm = std::sqrt(norm);
            if (norm > 1e-150) {
                for (std::size_t r = 0; r < m; ++r) q.at(r, j) /= norm;
                break;
            }
            for (std::size_t r = 0; r < m; ++r) q.at(r, j) = rng.uniform_range(-1.0, 1.0);
        }
    }
}

// Cyclic Jacobi eigensolver for the small projected matrix. Returns
// eigenvalues in `values` (descending) with matching rotation columns in `s`.
void jacobi_small(Matrix b, std::vector<double>& values, Matrix& s) {
    const std::size_t k = b.rows;
    s = Matrix(k, k);
    for (std::size_t i = 0; i < k; ++i) s.at(i, i) = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t r = p + 1; r < k; ++r) off += b.at(p, r) * b.at(p, r);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t r = p + 1; r < k; ++r) {
                const double apq = b.at(p, r);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (b.at(r, r) - b.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t i = 0; i < k; ++i) {
                    const double bip = b.at(i, p), bir = b.at(i, r);
                    b.at(i, p) = c * bip - sn * bir;
                    b.at(i, r) = sn * bip + c * bir;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double bpi = b.at(p, i), bri = b.at(r, i);
                    b.at(p, i) = c * bpi - sn * bri;
                    b.at(r, i) = sn * bpi + c * bri;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double sip = s.at(i, p), sir = s.at(i, r);
                    s.at(i, p) = c * sip - sn * sir;
                    s.at(i, r) = sn * sip + c * sir;
                }
            }
        }
    }
    values.resize(k);
    for (std::size_t i = 0; i < k; ++i) values[i] = b.at(i, i);
    // Sort descending, permuting rotation columns alongside.
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t c) { return values[a] > values[c]; });
    std::vector<double> sorted_values(k);
    Matrix sorted_s(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        sorted_values[i] = values[order[i]];
        for (std::size_t r = 0; r < k; ++r) sorted_s.at(r, i) = s.at(r, order[i]);
    }
    values = std::move(sorted_values);
    s = std::move(sorted_s);
}

// First standard basis vectors orthogonalized against the existing columns;
// used to complete U (or V) where singular values vanish.
std::vector<double> orthonormal_completion(const Matrix& basis, std::size_t upto_col) {
    const std::size_t m = basis.rows;
    for (std::size_t candidate = 0; candidate < m; ++candidate) {
        std::vector<double> v(m, 0.0);
        v[candidate] = 1.0;
        for (std::size_t j = 0; j < upto_col; ++j) {
            double dot = 0.0;
            for (std::size_t r = 0; r < m; ++r) dot += basis.at(r, j) * v[r];
            for (std::size_t r = 0; r < m; ++r) v[r] -= dot * basis.at(r, j);
        }
        double norm = 0.0;
        for (const double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0.5) {
            for (double& x : v) x /= norm;
            return v;
        }
    }
    throw ConvergenceError("truncated_svd: failed to complete an orthonormal basis");
}

} // namespace

std::string to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::UpstreamOnly: return "upstream-only";
        case Scenario::ComponentsOnly: return "components-only";
        case Scenario::Both: return "both";
    }
    return "upstream-only";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
    if (name == "upstream-only" || name == "upstream") return Scenario::UpstreamOnly;
    if (name == "components-only" || name == "components") return Scenario::ComponentsOnly;
    if (name == "both") return Scenario::Both;
    return std::nullopt;
}

CombinedMatrix build_combined_matrix(const Dataset& dataset, const SplitIndices& split,
                                     Scenario scenario) {
    CombinedMatrix combined;
    const FeatureSpace space = build_feature_space(dataset, scenario_feature_kind(scenario));
    combined.feature_columns = space.dimension();
    combined.column_order = space.vocabulary;
    for (const ResourceClass cls : all_resource_classes())
        combined.column_order.push_back("class:" + to_string(cls));
    const std::size_t total_columns = combined.column_order.size();
    combined.values = Matrix(dataset.services.size(), total_columns);
    for (std::size_t i = 0; i < dataset.services.size(); ++i) {
        const ServiceRecord& service = dataset.services[i];
        combined.row_order.push_back(service.service_id);
        const BinaryVector vec = encode_service(service, space);
        for (const std::size_t bit : vec.set_bits) combined.values.at(i, bit) = 1.0;
        const bool is_test = split.test_ids.count(service.service_id) > 0;
        const ClassSets sets = service_class_sets(service);
        for (const ResourceClass cls : all_resource_classes()) {
            const std::size_t col = combined.feature_columns + static_cast<std::size_t>(cls);
            if (is_test) {
                combined.mask.push_back({i, col, service.service_id, cls});
                // imputed as 0 for the factorization
            } else if (sets.resource.count(cls)) {
                combined.values.at(i, col) = 1.0;
            }
        }
    }
    return combined;
}

SvdFactorization truncated_svd(const Matrix& matrix, int k, const SvdOptions& options) {
    if (matrix.rows == 0 || matrix.cols == 0)
        throw DomainError("truncated_svd: matrix must be nonempty");
    const std::size_t min_dim = std::min(matrix.rows, matrix.cols);
    if (k < 1 || static_cast<std::size_t>(k) > min_dim)
        throw DomainError("truncated_svd: k must be in [1, min(rows, cols)]");

    const bool gram_on_cols = matrix.cols <= matrix.rows;
    const Matrix g = gram_matrix(matrix, gram_on_cols);
    const std::size_t m = g.rows;
    SeededRng rng(options.seed);

    Matrix q(m, static_cast<std::size_t>(k));
    for (double& v : q.data) v = rng.uniform_range(-1.0, 1.0);
    orthonormalize_columns(q, rng);

    std::vector<double> ritz(static_cast<std::size_t>(k),
                             std::numeric_limits<double>::infinity());
    std::vector<double> values;
    Matrix rotation;
    bool converged = false;
    for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
        const Matrix y = matmul(g, q);
        // Rayleigh-Ritz values in the current basis.
        Matrix b(static_cast<std::size_t>(k), static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < b.rows; ++i)
            for (std::size_t j = 0; j < b.cols; ++j) {
                double dot = 0.0;
                for (std::size_t r = 0; r < m; ++r) dot += q.at(r, i) * y.at(r, j);
                b.at(i, j) = dot;
            }
        for (std::size_t i = 0; i < b.rows; ++i)
            for (std::size_t j = i + 1; j < b.cols; ++j) {
                const double avg = 0.5 * (b.at(i, j) + b.at(j, i));
                b.at(i, j) = avg;
                b.at(j, i) = avg;
            }
        jacobi_small(b, values, rotation);
        const double scale = std::max(1.0, std::fabs(values.front()));
        double drift = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            drift = std::max(drift, std::fabs(values[i] - ritz[i]));
        ritz = values;
        if (iteration >= 2 && drift <= options.tolerance * scale) {
            converged = true;
            break;
        }
        q = y;  // power step
        orthonormalize_columns(q, rng);
    }
    if (!converged)
        throw ConvergenceError("truncated_svd: Ritz values did not stabilize within the iteration cap");

    // Rotate the basis into Ritz vectors.
    const Matrix eigvecs = matmul(q, rotation);

    SvdFactorization factorization;
    factorization.rank = k;
    factorization.singular_values.resize(static_cast<std::size_t>(k));
    double sigma_max = 0.0;
    for (int i = 0; i < k; ++i) {
        const double sigma = std::sqrt(std::max(values[static_cast<std::size_t>(i)], 0.0));
        factorization.singular_values[static_cast<std::size_t>(i)] = sigma;
        sigma_max = std::max(sigma_max, sigma);
    }
    const double sigma_floor = std::max(sigma_max * 1e-13, 1e-290);

    Matrix& gram_side = gram_on_cols ? factorization.v : factorization.u;
    Matrix& other_side = gram_on_cols ? factorization.u : factorization.v;
    gram_side = eigvecs;
    const std::size_t other_dim = gram_on_cols ? matrix.rows : matrix.cols;
    other_side = Matrix(other_dim, static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const std::size_t col = static_cast<std::size_t>(i);
        const double sigma = factorization.singular_values[col];
        if (sigma > sigma_floor) {
            std::vector<double> gram_vec(m);
            for (std::size_t r = 0; r < m; ++r) gram_vec[r] = gram_side.at(r, col);
            const std::vector<double> mapped =
                gram_on_cols ? matvec(matrix, gram_vec) : matvec_transposed(matrix, gram_vec);
            for (std::size_t r = 0; r < other_dim; ++r) other_side.at(r, col) = mapped[r] / sigma;
        } else {
            factorization.singular_values[col] = 0.0;
            const std::vector<double> filler = orthonormal_completion(other_side, col);
            for (std::size_t r = 0; r < other_dim; ++r) other_side.at(r, col) = filler[r];
        }
    }
    return factorization;
}

std::vector<MaskedScore> predict_masked(const CombinedMatrix& matrix,
                                        const SvdFactorization& factorization) {
    std::vector<MaskedScore> scores;
    scores.reserve(matrix.mask.size());
    for (const MaskedCell& cell : matrix.mask) {
        double value = 0.0;
        for (int t = 0; t < factorization.rank; ++t) {
            const std::size_t col = static_cast<std::size_t>(t);
            value += factorization.u.at(cell.row, col) * factorization.singular_values[col] *
                     factorization.v.at(cell.col, col);
        }
        scores.push_back({cell, value});
    }
    return scores;
}

AblationReport run_ablation(const Dataset& dataset, std::uint64_t seed,
                            const AblationOptions& options) {
    AblationReport report;
    report.seed = seed;
    const SplitIndices split = split_dataset(dataset, 0.8, seed);

    std::size_t train_count = 0;
    std::array<std::size_t, kResourceClassCount> train_positives{};
    std::map<std::string, ClassSets> test_truth;
    for (const auto& service : dataset.services) {
        const ClassSets sets = service_class_sets(service);
        if (split.train_ids.count(service.service_id)) {
            ++train_count;
            for (const ResourceClass cls : sets.resource)
                ++train_positives[static_cast<std::size_t>(cls)];
        } else {
            test_truth.emplace(service.service_id, sets);
        }
    }
    if (test_truth.empty()) throw EmptyTestSet("run_ablation: split has no test services");

    for (const ResourceClass cls : all_resource_classes()) {
        AblationRow row;
        row.cls = cls;
        if (const auto& reference = reference_ablation_auc()[static_cast<std::size_t>(cls)]) {
            for (std::size_t s = 0; s < kScenarioCount; ++s) row.reference_auc[s] = (*reference)[s];
        }
        report.rows.push_back(row);
    }

    const std::array<Scenario, kScenarioCount> scenarios = {
        Scenario::UpstreamOnly, Scenario::ComponentsOnly, Scenario::Both};
    for (std::size_t s = 0; s < kScenarioCount; ++s) {
        if (options.only && *options.only != scenarios[s]) continue;
        const CombinedMatrix combined = build_combined_matrix(dataset, split, scenarios[s]);
        const std::size_t min_dim = std::min(combined.values.rows, combined.values.cols);
        const int rank = std::min<int>(options.rank, static_cast<int>(min_dim) - 1);
        if (rank < 1) {
            report.notes.push_back("scenario '" + to_string(scenarios[s]) +
                                   "' skipped: matrix too small to factorize");
            continue;
        }
        report.rank = options.rank;
        const SvdFactorization factorization = truncated_svd(combined.values, rank);
        const std::vector<MaskedScore> predictions = predict_masked(combined, factorization);

        std::array<ScoredSet, kResourceClassCount> per_class;
        for (const MaskedScore& prediction : predictions) {
            const std::size_t c = static_cast<std::size_t>(prediction.cell.cls);
            per_class[c].scores.push_back(prediction.score);
            per_class[c].labels.push_back(
                test_truth.at(prediction.cell.service_id).resource.count(prediction.cell.cls) ? 1 : 0);
        }
        for (const ResourceClass cls : all_resource_classes()) {
            const std::size_t c = static_cast<std::size_t>(cls);
            const double prevalence = train_count == 0
                                          ? 0.0
                                          : static_cast<double>(train_positives[c]) /
                                                static_cast<double>(train_count);
            if (prevalence <= options.prevalence_floor) {
                report.notes.push_back("class '" + to_string(cls) + "' below prevalence floor in '" +
                                       to_string(scenarios[s]) + "'; skipped");
                continue;
            }
            const auto& scored = per_class[c];
            const bool has_positive = std::count(scored.labels.begin(), scored.labels.end(), 1) > 0;
            const bool has_negative = std::count(scored.labels.begin(), scored.labels.end(), 0) > 0;
            if (!has_positive || !has_negative) {
                report.notes.push_back("class '" + to_string(cls) + "' single-class in test for '" +
                                       to_string(scenarios[s]) + "'; skipped");
                continue;
            }
            report.rows[c].auc[s] = auc(scored);
        }
    }
    return report;
}

const std::array<std::optional<std::array<double, 3>>, kResourceClassCount>&
reference_ablation_auc() {
    static const std::array<std::optional<std::array<double, 3>>, kResourceClassCount> table = [] {
        std::array<std::optional<std::array<double, 3>>, kResourceClassCount> t;
        auto set = [&t](ResourceClass cls, double up, double comp, double both) {
            t[static_cast<std::size_t>(cls)] = std::array<double, 3>{up, comp, both};
        };
        set(ResourceClass::ServiceLevel, 0.47, 0.82, 0.39);
        set(ResourceClass::Api, 0.58, 0.67, 0.62);
        set(ResourceClass::Cpu, 0.57, 0.68, 0.64);
        set(ResourceClass::Container, 0.77, 0.70, 0.71);
        set(ResourceClass::Dependency, 0.35, 0.79, 0.64);
        set(ResourceClass::ComputeCluster, 0.62, 0.76, 0.68);
        set(ResourceClass::Storage, 0.58, 0.69, 0.62);
        set(ResourceClass::RamMemory, 0.44, 0.64, 0.60);
        set(ResourceClass::Certificate, 0.40, 0.70, 0.24);
        set(ResourceClass::CacheMemory, 0.66, 0.83, 0.67);
        set(ResourceClass::NoneOfTheAbove, 0.47, 0.89, 0.55);
        return t;
    }();
    return table;
}

} // namespace monreco
