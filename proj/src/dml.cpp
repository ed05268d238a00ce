#include "ratedml/dml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "ratedml/error.hpp"
#include "ratedml/rng.hpp"

namespace ratedml {

void PlrProblem::validate() const {
    const auto n = y.size();
    if (d.size() != n || x.rows() != n || unit_ids.size() != static_cast<std::size_t>(n)) {
        fail(ErrorCode::LengthMismatch, "PLR problem: y, d, X and unit ids must have equal row counts");
    }
    if (!x_names.empty() && x_names.size() != static_cast<std::size_t>(x.cols())) {
        fail(ErrorCode::LengthMismatch, "PLR problem: x_names does not match X columns");
    }
    if (n == 0) fail(ErrorCode::InsufficientData, "PLR problem is empty");
    if ((d.array() == d(0)).all()) fail(ErrorCode::DegenerateTreatment, "treatment is constant");
}

PlrProblem plr_from_panel(const PanelTable& panel) {
    PlrProblem p;
    p.y = panel.y_vector();
    p.d = panel.d_vector();
    p.x = panel.x_matrix();
    p.unit_ids = panel.unit_ids();
    p.x_names = panel.x_names;
    return p;
}

std::string_view to_string(LearnerKind kind) { return kind == LearnerKind::Linear ? "linear" : "boosted"; }
std::string_view model_label(LearnerKind kind) {
    return kind == LearnerKind::Linear ? "Linear Regression" : "Gradient Boosting";
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

DmlResult make_inference(double theta, double se, std::size_t n) {
    if (!(se > 0.0)) fail(ErrorCode::DegenerateTreatment, "standard error must be positive");
    DmlResult r;
    r.theta = theta;
    r.se = se;
    r.t = theta / se;
    r.p = std::erfc(std::abs(r.t) / std::sqrt(2.0));
    r.ci_low = theta - kZ975 * se;
    r.ci_high = theta + kZ975 * se;
    r.n = n;
    r.per_1pct = rescale_per_1pct(theta);
    return r;
}

double rescale_per_1pct(double theta) {
    if (theta == 0.0 || !std::isfinite(theta)) return theta / 100.0;
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, theta, std::chars_format::scientific);
    std::string text(buf, end);
    const auto e = text.find('e');
    int exponent = 0;
    std::from_chars(text.data() + e + 1 + (text[e + 1] == '+' ? 1 : 0), text.data() + text.size(), exponent);
    text = text.substr(0, e + 1) + std::to_string(exponent - 2);
    double out = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), out);
    return out;
}

double rescale_per_1pct(const DmlResult& result) { return rescale_per_1pct(result.theta); }

std::vector<int> assign_folds(const PlrProblem& problem, int K, std::uint64_t seed, FoldMode mode) {
    const auto n = problem.size();
    std::vector<int> fold_of(n, -1);
    if (mode == FoldMode::Row) {
        const auto folds = kfold_split(n, K, seed);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            for (auto i : folds[f]) fold_of[i] = static_cast<int>(f);
        }
        return fold_of;
    }
    const auto codes = encode_units(problem.unit_ids);
    const auto units = static_cast<std::size_t>(*std::max_element(codes.begin(), codes.end()) + 1);
    const auto folds = kfold_split(units, K, seed);
    std::vector<int> unit_fold(units);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        for (auto u : folds[f]) unit_fold[u] = static_cast<int>(f);
    }
    for (std::size_t i = 0; i < n; ++i) fold_of[i] = unit_fold[static_cast<std::size_t>(codes[i])];
    return fold_of;
}

namespace {

/// X with per-unit means (computed on `train`) appended.
Matrix augmented_features(const PlrProblem& problem, const std::vector<int>& codes, const std::vector<char>& train,
                          const std::optional<MeansEncodingOptions>& enc) {
    if (!enc) return problem.x;
    std::vector<std::string> names = problem.x_names;
    if (names.empty()) {
        for (Eigen::Index j = 0; j < problem.x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    }
    const auto chosen = encoded_columns(names, *enc);
    std::vector<std::span<const double>> cols;
    for (auto j : chosen) cols.emplace_back(problem.x.col(static_cast<Eigen::Index>(j)).data(), problem.size());
    if (enc->encode_y) cols.emplace_back(problem.y.data(), problem.size());
    if (cols.empty()) return problem.x;
    const auto means = unit_means(codes, cols, train);

    Matrix out(problem.x.rows(), problem.x.cols() + static_cast<Eigen::Index>(means.size()));
    out.leftCols(problem.x.cols()) = problem.x;
    for (std::size_t m = 0; m < means.size(); ++m) {
        out.col(problem.x.cols() + static_cast<Eigen::Index>(m)) =
            Eigen::Map<const Vector>(means[m].data(), static_cast<Eigen::Index>(means[m].size()));
    }
    return out;
}

Matrix rows_of(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Vector rows_of(const Vector& v, const std::vector<std::size_t>& rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Vector fit_predict(const LearnerSpec& learner, bool y_task, const Matrix& train_x, const Vector& train_t, const Matrix& test_x,
                   std::uint64_t seed) {
    if (learner.kind == LearnerKind::Linear) return predict(ols_fit(train_x, train_t), test_x);
    const auto& params = y_task ? learner.params_y : learner.params_d;
    return predict(gbt_fit(train_x, train_t, params, seed, Exec::Serial), test_x, Exec::Serial);
}

}  // namespace

NuisanceResiduals cross_fit_nuisance(const PlrProblem& problem, const LearnerSpec& learner, const DmlOptions& options,
                                     Exec exec) {
    problem.validate();
    const auto n = problem.size();
    const bool no_split = options.mode == DmlMode::NoSplitDebug;
    if (!no_split && options.folds < 2) fail(ErrorCode::BadK, "cross-fitting needs K >= 2");

    NuisanceResiduals res;
    res.fold_of = no_split ? std::vector<int>(n, 0) : assign_folds(problem, options.folds, options.seed, options.fold_mode);
    const int n_folds = no_split ? 1 : options.folds;
    const auto codes = options.means_encoding ? encode_units(problem.unit_ids) : std::vector<int>{};

    struct FoldData {
        std::vector<std::size_t> train, test;
        Matrix features;
    };
    std::vector<FoldData> folds(static_cast<std::size_t>(n_folds));
    for (int f = 0; f < n_folds; ++f) {
        auto& fd = folds[static_cast<std::size_t>(f)];
        std::vector<char> mask(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const bool in_test = res.fold_of[i] == f;
            if (no_split || !in_test) {
                fd.train.push_back(i);
                mask[i] = 1;
            }
            if (in_test) fd.test.push_back(i);
        }
        fd.features = augmented_features(problem, codes, mask, options.means_encoding);
    }

    res.g_hat = Vector::Zero(static_cast<Eigen::Index>(n));
    res.m_hat = Vector::Zero(static_cast<Eigen::Index>(n));
    const auto jobs = static_cast<std::ptrdiff_t>(2 * n_folds);
    std::vector<std::optional<Error>> errors(static_cast<std::size_t>(jobs));
    auto job = [&](std::ptrdiff_t j) {
        const int f = static_cast<int>(j / 2);
        const bool y_task = j % 2 == 0;
        const auto& fd = folds[static_cast<std::size_t>(f)];
        try {
            const Vector& target = y_task ? problem.y : problem.d;
            Vector pred = fit_predict(learner, y_task, rows_of(fd.features, fd.train), rows_of(target, fd.train),
                                      rows_of(fd.features, fd.test), derive_seed(options.seed, 1000 + static_cast<std::uint64_t>(j)));
            Vector& out = y_task ? res.g_hat : res.m_hat;
            for (std::size_t i = 0; i < fd.test.size(); ++i) out(static_cast<Eigen::Index>(fd.test[i])) = pred(static_cast<Eigen::Index>(i));
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(j)] =
                e.with_context("fold " + std::to_string(f) + ", " + (y_task ? "y-task" : "d-task"));
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t j = 0; j < jobs; ++j) job(j);
    } else {
        for (std::ptrdiff_t j = 0; j < jobs; ++j) job(j);
    }
    for (auto& e : errors) {
        if (e) throw *e;
    }

    res.u = problem.y - res.g_hat;
    res.v = problem.d - res.m_hat;
    res.r2_y = r2(as_span(problem.y), as_span(res.g_hat));
    res.r2_d = r2(as_span(problem.d), as_span(res.m_hat));
    return res;
}

DmlResult plr_estimate(const NuisanceResiduals& res, const Vector& d, const Vector& y, const Vector& g_hat, ScoreForm score) {
    const auto n = static_cast<std::size_t>(d.size());
    if (res.v.size() != d.size() || y.size() != d.size() || g_hat.size() != d.size()) {
        fail(ErrorCode::LengthMismatch, "plr_estimate: residual and data lengths differ");
    }
    if (n < 2) fail(ErrorCode::InsufficientData, "plr_estimate needs at least 2 rows");

    double sum_vv = 0.0, sum_dd = 0.0, num = 0.0, den = 0.0;
    const double d_mean = d.mean();
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double v = res.v(i);
        const double resid_y = y(i) - g_hat(i);
        sum_vv += v * v;
        sum_dd += (d(i) - d_mean) * (d(i) - d_mean);
        if (score == ScoreForm::Orthogonal) {
            num += v * resid_y;
            den += v * d(i);
        } else {
            num += v * resid_y;
            den += v * v;
        }
    }
    const double nd = static_cast<double>(n);
    if (!(sum_vv > 1e-12 * sum_dd) || std::abs(den) <= 1e-12 * std::sqrt(sum_vv * (sum_dd + d_mean * d_mean * nd))) {
        fail(ErrorCode::DegenerateTreatment, "treatment residuals carry no variation after partialling out");
    }
    const double theta = num / den;
    double sum_psi2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double v = res.v(i);
        const double psi = score == ScoreForm::Orthogonal ? (y(i) - g_hat(i) - theta * d(i)) * v
                                                          : (y(i) - g_hat(i) - theta * v) * v;
        sum_psi2 += psi * psi;
    }
    const double J = den / nd;
    const double se = std::sqrt((sum_psi2 / nd) / (nd * J * J));
    if (!(se > 0.0)) {
        // exact fit: zero score variance
        DmlResult r;
        r.theta = theta;
        r.n = n;
        r.per_1pct = rescale_per_1pct(theta);
        r.t = std::copysign(std::numeric_limits<double>::infinity(), theta);
        r.p = 0.0;
        r.ci_low = r.ci_high = theta;
        return r;
    }
    return make_inference(theta, se, n);
}

DmlRun run_dml(const PlrProblem& problem, const LearnerSpec& learner, const DmlOptions& options, Exec exec) {
    DmlRun run;
    run.residuals = cross_fit_nuisance(problem, learner, options, exec);
    run.result = plr_estimate(run.residuals, problem.d, problem.y, run.residuals.g_hat, options.score);
    run.result.inferential = options.mode == DmlMode::CrossFit;
    return run;
}

ResidualDiagnostics residual_diagnostics(std::span<const double> residuals, std::span<const double> fitted) {
    if (residuals.size() != fitted.size()) fail(ErrorCode::LengthMismatch, "residuals and fitted values differ in length");
    ResidualDiagnostics out;
    const auto n = residuals.size();
    out.points.reserve(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.points.emplace_back(fitted[i], residuals[i]);
        out.max_abs = std::max(out.max_abs, std::abs(residuals[i]));
        mean += residuals[i];
    }
    if (n == 0) return out;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double r : residuals) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    std::size_t within = 0;
    for (double r : residuals) within += std::abs(r - mean) <= sd ? 1 : 0;
    out.frac_within_1sd = static_cast<double>(within) / static_cast<double>(n);
    return out;
}

ResidualDiagnostics residual_diagnostics(const NuisanceResiduals& res) {
    return residual_diagnostics(as_span(res.u), as_span(res.g_hat));
}

}  // namespace ratedml
