#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monreco/core_model.hpp"
#include "monreco/matrix.hpp"
#include "monreco/split.hpp"

namespace monreco {

enum class Scenario { UpstreamOnly, ComponentsOnly, Both };
inline constexpr std::size_t kScenarioCount = 3;

std::string to_string(Scenario scenario);
std::optional<Scenario> parse_scenario(std::string_view name);

struct MaskedCell {
    std::size_t row = 0;
    std::size_t col = 0;
    std::string service_id;
    ResourceClass cls = ResourceClass::ServiceLevel;
};

// Services x (feature tokens ++ resource classes), binary. Test rows keep
// their feature cells; their resource-class cells are masked: imputed as 0
// for factorization and tracked here for evaluation.
struct CombinedMatrix {
    std::vector<std::string> row_order;    // service ids, dataset order
    std::vector<std::string> column_order; // feature tokens, then "class:<name>"
    std::size_t feature_columns = 0;
    Matrix values;
    std::vector<MaskedCell> mask;
};

CombinedMatrix build_combined_matrix(const Dataset& dataset, const SplitIndices& split,
                                     Scenario scenario);

struct SvdOptions {
    int max_iterations = 1500;
    double tolerance = 1e-11;   // relative Ritz-value stabilization
    std::uint64_t seed = 0x5eedULL;  // subspace initialization only
};

struct SvdFactorization {
    int rank = 0;
    Matrix u;                            // rows x rank, orthonormal columns
    std::vector<double> singular_values; // nonincreasing, >= 0
    Matrix v;                            // cols x rank, orthonormal columns
};

// Best rank-k factorization by block orthogonal iteration on the Gram matrix
// of the smaller side, with Rayleigh-Ritz rotations each sweep.
SvdFactorization truncated_svd(const Matrix& matrix, int k, const SvdOptions& options = {});

struct MaskedScore {
    MaskedCell cell;
    double score = 0.0;  // rank-k reconstruction at the masked cell
};

std::vector<MaskedScore> predict_masked(const CombinedMatrix& matrix,
                                        const SvdFactorization& factorization);

struct AblationRow {
    ResourceClass cls = ResourceClass::ServiceLevel;
    // AUC per scenario, indexed UpstreamOnly / ComponentsOnly / Both; absent
    // when the class was skipped for that scenario.
    std::array<std::optional<double>, kScenarioCount> auc;
    // Reference values reported for the proprietary corpus; annotation only.
    std::array<std::optional<double>, kScenarioCount> reference_auc;
};

struct AblationReport {
    int rank = 0;
    std::uint64_t seed = 0;
    std::vector<AblationRow> rows;
    std::vector<std::string> notes;
};

struct AblationOptions {
    int rank = 10;  // capped at min(rows, cols) - 1
    double prevalence_floor = 0.05;
    std::optional<Scenario> only;  // restrict to one scenario; all three when absent
};

AblationReport run_ablation(const Dataset& dataset, std::uint64_t seed,
                            const AblationOptions& options = {});

// Published per-class AUC annotations (upstream-only / components-only /
// both); absent for classes without a reference row.
const std::array<std::optional<std::array<double, 3>>, kResourceClassCount>&
reference_ablation_auc();

} // namespace monreco
