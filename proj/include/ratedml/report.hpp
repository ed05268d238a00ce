#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ratedml/dml.hpp"
#include "ratedml/linalg.hpp"
#include "ratedml/preprocess.hpp"

namespace ratedml {

struct LearnerOutcome {
    LearnerKind kind = LearnerKind::Linear;
    DmlRun run;
};

inline constexpr std::string_view kResultsHeader = "model,coef,se,t,p,ci_low,ci_high,n,per_1pct";

std::string format_result_row(std::string_view model, const DmlResult& r);
std::string format_results_csv(const std::vector<LearnerOutcome>& outcomes);
/// `model,coef,per_1pct`
std::string format_per_1pct_csv(const std::vector<LearnerOutcome>& outcomes);
/// `model,r2_y,r2_d`
std::string format_r2_csv(const std::vector<LearnerOutcome>& outcomes);
/// `row,fold,u,v`
std::string format_residuals_csv(const NuisanceResiduals& res);
/// `fitted,residual`
std::string format_residual_points_csv(const ResidualDiagnostics& diag);

/// Square matrix with a leading `variable` column.
std::string format_matrix_csv(const std::vector<std::string>& names, const Matrix& m);
/// `component,eigenvalue,explained_ratio,<loading per variable>`
std::string format_pca_csv(const std::vector<std::string>& names, const CorrPcaReport& pca);

struct NamedMatrix {
    std::vector<std::string> names;
    Matrix values;
};
NamedMatrix parse_matrix_csv(const std::filesystem::path& path);

}  // namespace ratedml
