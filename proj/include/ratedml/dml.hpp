#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratedml/exec.hpp"
#include "ratedml/learners.hpp"
#include "ratedml/linalg.hpp"
#include "ratedml/panel_data.hpp"
#include "ratedml/preprocess.hpp"

namespace ratedml {

/// Partially linear model Y = theta D + g(X) + u, D = m(X) + v.
struct PlrProblem {
    Vector y;
    Vector d;
    Matrix x;
    std::vector<std::string> unit_ids;
    std::vector<std::string> x_names;

    std::size_t size() const { return static_cast<std::size_t>(y.size()); }
    /// Equal lengths and a non-constant treatment.
    void validate() const;
};

PlrProblem plr_from_panel(const PanelTable& panel);

enum class LearnerKind { Linear, Boosted };
std::string_view to_string(LearnerKind kind);
/// "Linear Regression" / "Gradient Boosting", as printed in results tables.
std::string_view model_label(LearnerKind kind);

struct LearnerSpec {
    LearnerKind kind = LearnerKind::Linear;
    HyperParams params_y;  ///< boosted y-task settings
    HyperParams params_d;  ///< boosted d-task settings
};

enum class FoldMode { Row, UnitBlocked };
enum class ScoreForm {
    Orthogonal,          ///< theta = sum v (y - g) / sum v d
    ResidualOnResidual,  ///< theta = sum v u / sum v^2
};
enum class DmlMode { CrossFit, NoSplitDebug };

struct DmlOptions {
    int folds = 2;
    std::uint64_t seed = 0;
    FoldMode fold_mode = FoldMode::Row;
    ScoreForm score = ScoreForm::Orthogonal;
    DmlMode mode = DmlMode::CrossFit;
    /// Per-unit mean features recomputed on each training complement.
    std::optional<MeansEncodingOptions> means_encoding;
};

struct NuisanceResiduals {
    Vector u;      ///< y - g_hat, out of fold
    Vector v;      ///< d - m_hat, out of fold
    Vector g_hat;
    Vector m_hat;
    std::vector<int> fold_of;
    double r2_y = 0.0;
    double r2_d = 0.0;
};

struct DmlResult {
    double theta = 0.0;
    double se = 0.0;
    double t = 0.0;
    double p = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
    double per_1pct = 0.0;
    bool inferential = true;  ///< false for NoSplitDebug
};

inline constexpr double kZ975 = 1.959964;

/// Standard normal CDF.
double normal_cdf(double z);

/// t, two-sided normal p, 95% CI and per-1% value from a coefficient and SE.
DmlResult make_inference(double theta, double se, std::size_t n);

/// theta / 100, evaluated on the shortest decimal form of theta so that
/// printed coefficients rescale to exactly the printed decimal.
double rescale_per_1pct(double theta);
double rescale_per_1pct(const DmlResult& result);

/// Row folds (or unit-blocked folds) as used by cross_fit_nuisance.
std::vector<int> assign_folds(const PlrProblem& problem, int K, std::uint64_t seed, FoldMode mode);

/// Cross-fitted nuisance predictions. Each fold's g and m learners are trained
/// on the complement only, including any means encoding.
/// Errors: BadK, plus learner errors tagged with fold and task.
NuisanceResiduals cross_fit_nuisance(const PlrProblem& problem, const LearnerSpec& learner, const DmlOptions& options,
                                     Exec exec = Exec::Parallel);

/// Solves the pooled score once. Errors: DegenerateTreatment.
DmlResult plr_estimate(const NuisanceResiduals& res, const Vector& d, const Vector& y, const Vector& g_hat,
                       ScoreForm score = ScoreForm::Orthogonal);

struct DmlRun {
    DmlResult result;
    NuisanceResiduals residuals;
};

DmlRun run_dml(const PlrProblem& problem, const LearnerSpec& learner, const DmlOptions& options, Exec exec = Exec::Parallel);

struct ResidualDiagnostics {
    std::vector<std::pair<double, double>> points;  ///< (fitted, residual)
    double max_abs = 0.0;
    double frac_within_1sd = 1.0;
};

/// Errors: LengthMismatch.
ResidualDiagnostics residual_diagnostics(std::span<const double> residuals, std::span<const double> fitted);
/// Uses the y-task residuals u against g_hat.
ResidualDiagnostics residual_diagnostics(const NuisanceResiduals& res);

}  // namespace ratedml
