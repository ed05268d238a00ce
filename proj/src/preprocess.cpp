#include "ratedml/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "ratedml/csv.hpp"
#include "ratedml/error.hpp"

namespace ratedml {

std::vector<double> first_difference(std::span<const double> series) {
    if (series.size() < 2) fail(ErrorCode::TooShort, "first difference needs at least 2 values");
    std::vector<double> out(series.size() - 1);
    for (std::size_t i = 0; i + 1 < series.size(); ++i) out[i] = series[i + 1] - series[i];
    return out;
}

std::string_view to_string(AdfLevel level) {
    switch (level) {
        case AdfLevel::Pct1: return "1%";
        case AdfLevel::Pct5: return "5%";
        case AdfLevel::Pct10: return "10%";
    }
    return "?";
}

std::string_view to_string(Verdict verdict) {
    return verdict == Verdict::Stationary ? "Stationary" : "NonStationary";
}

AdfLevel parse_adf_level(std::string_view text) {
    if (text == "1%" || text == "1" || text == "0.01") return AdfLevel::Pct1;
    if (text == "5%" || text == "5" || text == "0.05") return AdfLevel::Pct5;
    if (text == "10%" || text == "10" || text == "0.1" || text == "0.10") return AdfLevel::Pct10;
    fail(ErrorCode::BadConfig, "unknown ADF level '" + std::string(text) + "' (use 1%, 5% or 10%)");
}

std::array<double, 3> df_critical_value_table(std::size_t n) {
    auto rows = compiled_critical_values();
    if (n <= rows.front().n) return rows.front().values;
    if (n >= rows.back().n) return rows.back().values;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (n <= rows[i].n) {
            const double x0 = 1.0 / static_cast<double>(rows[i - 1].n);
            const double x1 = 1.0 / static_cast<double>(rows[i].n);
            const double w = (1.0 / static_cast<double>(n) - x0) / (x1 - x0);
            std::array<double, 3> out{};
            for (int j = 0; j < 3; ++j) out[j] = rows[i - 1].values[j] + w * (rows[i].values[j] - rows[i - 1].values[j]);
            return out;
        }
    }
    return rows.back().values;
}

int schwert_lag(std::size_t n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

AdfReport adf_test(std::span<const double> series, AdfLevel level, std::optional<int> max_lag) {
    const std::size_t n = series.size();
    if (n < 20) fail(ErrorCode::TooShort, "ADF test needs at least 20 observations, got " + std::to_string(n));
    const int k = max_lag ? *max_lag : schwert_lag(n);
    if (k < 0) fail(ErrorCode::InvalidArgument, "ADF lag order must be >= 0");

    const auto dy = first_difference(series);
    const auto lag = static_cast<std::size_t>(k);
    if (dy.size() <= lag) fail(ErrorCode::TooShort, "series too short for " + std::to_string(k) + " ADF lags");
    const std::size_t nobs = dy.size() - lag;
    const std::size_t params = 2 + lag;
    if (nobs <= params) fail(ErrorCode::TooShort, "series too short for " + std::to_string(k) + " ADF lags");

    Matrix design(static_cast<Eigen::Index>(nobs), static_cast<Eigen::Index>(params));
    Vector target(static_cast<Eigen::Index>(nobs));
    for (std::size_t r = 0; r < nobs; ++r) {
        const std::size_t s = r + lag;  // dy[s] = y[s+1] - y[s]
        const auto row = static_cast<Eigen::Index>(r);
        target(row) = dy[s];
        design(row, 0) = 1.0;
        design(row, 1) = series[s];
        for (std::size_t j = 1; j <= lag; ++j) design(row, static_cast<Eigen::Index>(1 + j)) = dy[s - j];
    }

    LeastSquaresFit fit;
    try {
        fit = least_squares(design, target, true);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::RankDeficient) fail(ErrorCode::SingularRegression, std::string("ADF regression: ") + e.what());
        throw;
    }
    const double sigma2 = fit.rss / static_cast<double>(nobs - params);
    const double se = std::sqrt(sigma2 * fit.xtx_inverse(1, 1));
    if (!(se > 0.0) || !std::isfinite(se)) fail(ErrorCode::SingularRegression, "ADF regression has zero residual variance");

    AdfReport report;
    report.statistic = fit.coef(1) / se;
    report.lag_order = k;
    report.nobs = nobs;
    report.critical_values = df_critical_value_table(n);
    report.level = level;
    report.verdict = report.statistic < report.critical(level) ? Verdict::Stationary : Verdict::NonStationary;
    return report;
}

ScreenResult screen_stationarity(const TimeSeriesMatrix& vars, AdfLevel level, std::optional<int> max_lag, Exec exec) {
    const auto k = static_cast<std::ptrdiff_t>(vars.cols());
    std::vector<AdfReport> reports(vars.cols());
    std::vector<std::optional<Error>> errors(vars.cols());

    auto one = [&](std::ptrdiff_t c) {
        const auto col = static_cast<std::size_t>(c);
        std::vector<double> clean;
        for (double v : vars.column(col)) {
            if (!std::isnan(v)) clean.push_back(v);
        }
        try {
            reports[col] = adf_test(clean, level, max_lag);
        } catch (const Error& e) {
            errors[col] = e.with_context("column '" + vars.columns()[col] + "'");
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t c = 0; c < k; ++c) one(c);
    } else {
        for (std::ptrdiff_t c = 0; c < k; ++c) one(c);
    }
    for (auto& e : errors) {
        if (e) throw *e;
    }

    ScreenResult out;
    std::vector<std::string> dropped_names;
    for (std::size_t c = 0; c < vars.cols(); ++c) {
        out.audit.emplace_back(vars.columns()[c], reports[c]);
        if (reports[c].verdict == Verdict::NonStationary) {
            out.dropped.emplace_back(vars.columns()[c], reports[c]);
            dropped_names.push_back(vars.columns()[c]);
        }
    }
    out.kept = vars.drop(dropped_names);
    return out;
}

std::string format_adf_audit(const ScreenResult& screen) {
    std::string out = "variable,adf_stat,crit_5pct,verdict\n";
    for (const auto& [name, r] : screen.audit) {
        out += name + "," + csv::format_double(r.statistic) + "," + csv::format_double(r.critical(AdfLevel::Pct5)) + "," +
               std::string(to_string(r.verdict)) + "\n";
    }
    return out;
}

// --- VAR lag order ---------------------------------------------------------

LagSelection select_lag_var_aic_detail(const TimeSeriesMatrix& vars, int p_max) {
    if (p_max < 1) fail(ErrorCode::InvalidArgument, "p_max must be >= 1");
    const std::size_t K = vars.cols();
    if (K == 0) fail(ErrorCode::InsufficientData, "VAR lag selection needs at least one variable");

    // Longest run of months with every variable observed.
    std::size_t best_start = 0, best_len = 0, run_start = 0;
    for (std::size_t t = 0; t <= vars.rows(); ++t) {
        bool complete = t < vars.rows();
        for (std::size_t c = 0; c < K && complete; ++c) complete = !std::isnan(vars.column(c)[t]);
        if (!complete) {
            if (t - run_start > best_len) best_start = run_start, best_len = t - run_start;
            run_start = t + 1;
        }
    }
    const std::size_t T = best_len;
    const auto P = static_cast<std::size_t>(p_max);
    if (T <= K * P + 1 || T - P <= K * P + 1) {
        fail(ErrorCode::InsufficientData, "VAR(" + std::to_string(p_max) + ") with " + std::to_string(K) +
                                              " variables needs more than " + std::to_string(K * P + 1) +
                                              " complete observations, have " + std::to_string(T));
    }
    const std::size_t t_eff = T - P;
    auto value = [&](std::size_t t, std::size_t c) { return vars.column(c)[best_start + t]; };

    Matrix targets(static_cast<Eigen::Index>(t_eff), static_cast<Eigen::Index>(K));
    for (std::size_t r = 0; r < t_eff; ++r) {
        for (std::size_t c = 0; c < K; ++c) targets(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value(r + P, c);
    }

    LagSelection out;
    out.effective_obs = t_eff;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t p = 1; p <= P; ++p) {
        Matrix design(static_cast<Eigen::Index>(t_eff), static_cast<Eigen::Index>(1 + K * p));
        for (std::size_t r = 0; r < t_eff; ++r) {
            const auto row = static_cast<Eigen::Index>(r);
            design(row, 0) = 1.0;
            for (std::size_t j = 1; j <= p; ++j) {
                for (std::size_t c = 0; c < K; ++c) {
                    design(row, static_cast<Eigen::Index>(1 + (j - 1) * K + c)) = value(r + P - j, c);
                }
            }
        }
        Matrix resid(static_cast<Eigen::Index>(t_eff), static_cast<Eigen::Index>(K));
        for (std::size_t c = 0; c < K; ++c) {
            try {
                resid.col(static_cast<Eigen::Index>(c)) = least_squares(design, targets.col(static_cast<Eigen::Index>(c))).residuals;
            } catch (const Error& e) {
                fail(ErrorCode::SingularCovariance, std::string("VAR(") + std::to_string(p) + ") regression: " + e.what());
            }
        }
        Matrix sigma = (resid.transpose() * resid) / static_cast<double>(t_eff);
        Eigen::LLT<Matrix> llt(sigma);
        if (llt.info() != Eigen::Success) fail(ErrorCode::SingularCovariance, "VAR residual covariance is not positive definite");
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < sigma.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
        if (!std::isfinite(log_det)) fail(ErrorCode::SingularCovariance, "VAR residual covariance is singular");

        const double kd = static_cast<double>(K);
        const double aic = log_det + 2.0 * (kd * kd * static_cast<double>(p) + kd) / static_cast<double>(t_eff);
        out.aic.push_back(aic);
        if (aic < best_aic) {
            best_aic = aic;
            out.best = static_cast<int>(p);
        }
    }
    return out;
}

int select_lag_var_aic(const TimeSeriesMatrix& vars, int p_max) { return select_lag_var_aic_detail(vars, p_max).best; }

// --- lags and fixed-effect encoding ---------------------------------------

LaggedMatrix build_lags(const TimeSeriesMatrix& m, int p) {
    if (p < 1) fail(ErrorCode::InvalidArgument, "lag order must be >= 1");
    const auto lag = static_cast<std::size_t>(p);
    const std::size_t n = m.rows();

    std::vector<std::string> names = m.columns();
    std::vector<std::vector<double>> vals;
    for (std::size_t c = 0; c < m.cols(); ++c) vals.emplace_back(m.column(c).begin(), m.column(c).end());

    std::vector<char> valid(n, 0);
    for (std::size_t t = lag; t < n; ++t) valid[t] = 1;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        auto col = m.column(c);
        for (std::size_t j = 1; j <= lag; ++j) {
            std::vector<double> shifted(n, kMissing);
            for (std::size_t t = j; t < n; ++t) shifted[t] = col[t - j];
            for (std::size_t t = 0; t < n; ++t) {
                if (std::isnan(shifted[t])) valid[t] = 0;
            }
            names.push_back(m.columns()[c] + "_lag" + std::to_string(j));
            vals.push_back(std::move(shifted));
        }
    }
    return {TimeSeriesMatrix(m.time_index(), std::move(names), std::move(vals)), std::move(valid)};
}

std::vector<int> encode_units(const std::vector<std::string>& unit_ids) {
    std::unordered_map<std::string, int> codes;
    std::vector<int> out;
    out.reserve(unit_ids.size());
    for (const auto& id : unit_ids) {
        auto [it, inserted] = codes.try_emplace(id, static_cast<int>(codes.size()));
        out.push_back(it->second);
    }
    return out;
}

std::vector<std::vector<double>> unit_means(std::span<const int> unit_codes,
                                            const std::vector<std::span<const double>>& columns,
                                            std::span<const char> train_mask) {
    const std::size_t n = unit_codes.size();
    if (train_mask.size() != n) fail(ErrorCode::LengthMismatch, "train mask length does not match rows");
    if (std::none_of(train_mask.begin(), train_mask.end(), [](char m) { return m != 0; })) {
        fail(ErrorCode::EmptyTrainMask, "means encoding needs at least one training row");
    }
    const int units = n == 0 ? 0 : *std::max_element(unit_codes.begin(), unit_codes.end()) + 1;

    std::vector<std::vector<double>> out;
    out.reserve(columns.size());
    for (const auto& col : columns) {
        if (col.size() != n) fail(ErrorCode::LengthMismatch, "encoded column length does not match rows");
        std::vector<double> sum(static_cast<std::size_t>(units), 0.0);
        std::vector<std::size_t> count(static_cast<std::size_t>(units), 0);
        double global_sum = 0.0;
        std::size_t global_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!train_mask[i]) continue;
            const auto u = static_cast<std::size_t>(unit_codes[i]);
            sum[u] += col[i];
            ++count[u];
            global_sum += col[i];
            ++global_count;
        }
        const double global_mean = global_sum / static_cast<double>(global_count);
        std::vector<double> encoded(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(unit_codes[i]);
            encoded[i] = count[u] ? sum[u] / static_cast<double>(count[u]) : global_mean;
        }
        out.push_back(std::move(encoded));
    }
    return out;
}

std::vector<std::size_t> encoded_columns(const std::vector<std::string>& x_names, const MeansEncodingOptions& options) {
    std::vector<std::size_t> idx;
    if (!options.encode_x) return idx;
    for (std::size_t j = 0; j < x_names.size(); ++j) {
        const auto& name = x_names[j];
        bool chosen = options.columns.empty()
                          ? name.find("_lag") == std::string::npos
                          : std::find(options.columns.begin(), options.columns.end(), name) != options.columns.end();
        if (chosen) idx.push_back(j);
    }
    return idx;
}

PanelTable means_encode(const PanelTable& panel, std::span<const char> train_mask, const MeansEncodingOptions& options) {
    const auto codes = encode_units(panel.unit_ids());
    const auto chosen = encoded_columns(panel.x_names, options);

    std::vector<std::vector<double>> raw;
    for (auto j : chosen) {
        std::vector<double> col(panel.size());
        for (std::size_t i = 0; i < panel.size(); ++i) col[i] = panel.rows[i].x[j];
        raw.push_back(std::move(col));
    }
    if (options.encode_y) {
        std::vector<double> col(panel.size());
        for (std::size_t i = 0; i < panel.size(); ++i) col[i] = panel.rows[i].y;
        raw.push_back(std::move(col));
    }
    std::vector<std::span<const double>> spans(raw.begin(), raw.end());
    if (spans.empty() && std::none_of(train_mask.begin(), train_mask.end(), [](char m) { return m != 0; })) {
        fail(ErrorCode::EmptyTrainMask, "means encoding needs at least one training row");
    }
    const auto means = spans.empty() ? std::vector<std::vector<double>>{} : unit_means(codes, spans, train_mask);

    PanelTable out = panel;
    for (auto j : chosen) out.x_names.push_back("mean_" + panel.x_names[j]);
    if (options.encode_y) out.x_names.push_back("mean_y");
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (const auto& m : means) out.rows[i].x.push_back(m[i]);
    }
    return out;
}

// --- correlation / PCA -----------------------------------------------------

Matrix correlation_matrix(const TimeSeriesMatrix& vars) {
    const std::size_t K = vars.cols();
    for (std::size_t c = 0; c < K; ++c) {
        auto col = vars.column(c);
        double first = kMissing;
        bool varies = false;
        for (double v : col) {
            if (std::isnan(v)) continue;
            if (std::isnan(first)) first = v;
            else if (v != first) varies = true;
        }
        if (!varies) fail(ErrorCode::ConstantColumn, "column '" + vars.columns()[c] + "' is constant");
    }

    Matrix corr = Matrix::Identity(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = a + 1; b < K; ++b) {
            auto xa = vars.column(a);
            auto xb = vars.column(b);
            double ma = 0.0, mb = 0.0;
            std::size_t n = 0;
            for (std::size_t t = 0; t < xa.size(); ++t) {
                if (std::isnan(xa[t]) || std::isnan(xb[t])) continue;
                ma += xa[t];
                mb += xb[t];
                ++n;
            }
            if (n < 2) {
                fail(ErrorCode::InsufficientData, "fewer than 2 paired observations for '" + vars.columns()[a] + "' and '" +
                                                      vars.columns()[b] + "'");
            }
            ma /= static_cast<double>(n);
            mb /= static_cast<double>(n);
            double sab = 0.0, saa = 0.0, sbb = 0.0;
            for (std::size_t t = 0; t < xa.size(); ++t) {
                if (std::isnan(xa[t]) || std::isnan(xb[t])) continue;
                sab += (xa[t] - ma) * (xb[t] - mb);
                saa += (xa[t] - ma) * (xa[t] - ma);
                sbb += (xb[t] - mb) * (xb[t] - mb);
            }
            if (saa == 0.0 || sbb == 0.0) {
                fail(ErrorCode::ConstantColumn, "'" + vars.columns()[a] + "' or '" + vars.columns()[b] +
                                                    "' is constant on their common observations");
            }
            const double r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
            corr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = r;
            corr(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = r;
        }
    }
    return corr;
}

CorrPcaReport pca_corr(const Matrix& corr) {
    const auto K = corr.rows();
    if (corr.cols() != K) fail(ErrorCode::NotSymmetric, "correlation matrix must be square");
    for (Eigen::Index i = 0; i < K; ++i) {
        for (Eigen::Index j = i + 1; j < K; ++j) {
            if (std::abs(corr(i, j) - corr(j, i)) > 1e-12) fail(ErrorCode::NotSymmetric, "correlation matrix is not symmetric");
        }
    }

    Matrix a = corr;
    Matrix v = Matrix::Identity(K, K);
    int sweeps = 0;
    const double scale = std::max(1.0, a.norm());
    for (; sweeps < 100; ++sweeps) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < K; ++i) {
            for (Eigen::Index j = i + 1; j < K; ++j) off += a(i, j) * a(i, j);
        }
        if (std::sqrt(off) <= 1e-15 * scale) break;
        for (Eigen::Index p = 0; p < K; ++p) {
            for (Eigen::Index q = p + 1; q < K; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < K; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < K; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < K; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

    CorrPcaReport report;
    report.corr = corr;
    report.sweeps = sweeps;
    report.eigenvalues.resize(K);
    report.components.resize(K, K);
    for (Eigen::Index j = 0; j < K; ++j) {
        const auto src = order[static_cast<std::size_t>(j)];
        report.eigenvalues(j) = a(src, src);
        Vector comp = v.col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < K; ++i) {
            if (std::abs(comp(i)) > std::abs(comp(arg))) arg = i;
        }
        if (comp(arg) < 0) comp = -comp;
        report.components.col(j) = comp;
    }
    const double trace = corr.trace();
    report.explained_ratio = report.eigenvalues / trace;
    return report;
}

}  // namespace ratedml
