#include "ratedml/synth.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Eigenvalues>

#include "ratedml/error.hpp"
#include "ratedml/rng.hpp"

namespace ratedml {

void SynthSpec::validate() const {
    if (n < 1) fail(ErrorCode::InvalidArgument, "synthetic spec needs n >= 1");
    if (!(noise_sd > 0.0)) fail(ErrorCode::InvalidArgument, "synthetic spec needs noise_sd > 0");
}

std::pair<Vector, Vector> plr_loadings(int k) {
    Vector a(k), b(k);
    for (int j = 0; j < k; ++j) {
        a(j) = 1.0 / (j + 1);
        b(j) = (j % 2 == 0 ? 1.0 : -1.0) / (j + 1);
    }
    return {a, b};
}

SyntheticPlr gen_plr(const SynthSpec& spec) {
    if (spec.kind != SynthKind::PlrLinear && spec.kind != SynthKind::PlrNonlinear) {
        fail(ErrorCode::BadKind, "gen_plr needs a PLR kind");
    }
    spec.validate();
    const int k = spec.k_controls;
    if (k < 1) fail(ErrorCode::InvalidArgument, "PLR design needs at least one control");
    if (spec.kind == SynthKind::PlrNonlinear && k < 3) fail(ErrorCode::InvalidArgument, "nonlinear PLR design needs k >= 3");
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto [a, b] = plr_loadings(k);

    Rng rng(spec.seed);
    SyntheticPlr out;
    out.theta_true = spec.theta_true;
    auto& p = out.problem;
    p.x.resize(n, k);
    p.d.resize(n);
    p.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) p.x(i, j) = rng.normal();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = spec.noise_sd * rng.normal();
        const double u = spec.noise_sd * rng.normal();
        const double xa = p.x.row(i).dot(a);
        const double xb = p.x.row(i).dot(b);
        if (spec.kind == SynthKind::PlrLinear) {
            p.d(i) = xa + v;
            p.y(i) = spec.theta_true * p.d(i) + xb + u;
        } else {
            p.d(i) = std::sin(xa) + 0.5 * (p.x(i, 0) * p.x(i, 0) - 1.0) + v;
            p.y(i) = spec.theta_true * p.d(i) + std::cos(xb) + p.x(i, 1) * p.x(i, 2) + u;
        }
    }
    p.unit_ids.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) p.unit_ids[static_cast<std::size_t>(i)] = "u" + std::to_string(i / 10);
    for (int j = 0; j < k; ++j) p.x_names.push_back("x" + std::to_string(j + 1));
    return out;
}

double plr_linear_population_r2_d(int k, double noise_sd) {
    const double s = plr_loadings(k).first.squaredNorm();
    return s / (s + noise_sd * noise_sd);
}

double plr_linear_population_r2_y(int k, double theta, double noise_sd) {
    const auto [a, b] = plr_loadings(k);
    const double signal = (theta * a + b).squaredNorm();
    const double noise = (theta * theta + 1.0) * noise_sd * noise_sd;
    return signal / (signal + noise);
}

double companion_spectral_radius(const std::vector<Matrix>& coefficients) {
    if (coefficients.empty()) return 0.0;
    const auto K = coefficients.front().rows();
    const auto p = static_cast<Eigen::Index>(coefficients.size());
    Matrix companion = Matrix::Zero(K * p, K * p);
    for (Eigen::Index j = 0; j < p; ++j) companion.block(0, j * K, K, K) = coefficients[static_cast<std::size_t>(j)];
    if (p > 1) companion.block(K, 0, K * (p - 1), K * (p - 1)).setIdentity();
    Eigen::EigenSolver<Matrix> es(companion, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

TimeSeriesMatrix gen_var(const SynthSpec& spec) {
    if (spec.kind != SynthKind::Var) fail(ErrorCode::BadKind, "gen_var needs kind Var");
    spec.validate();
    if (spec.var_coefficients.empty()) fail(ErrorCode::InvalidArgument, "VAR spec needs at least one coefficient matrix");
    const auto K = spec.var_coefficients.front().rows();
    for (const auto& a : spec.var_coefficients) {
        if (a.rows() != K || a.cols() != K) fail(ErrorCode::InvalidArgument, "VAR coefficient matrices must be K x K");
    }
    const double radius = companion_spectral_radius(spec.var_coefficients);
    if (!(radius < 1.0)) {
        fail(ErrorCode::ExplosiveCoefficients, "VAR companion spectral radius " + std::to_string(radius) + " >= 1");
    }

    constexpr int kBurnIn = 200;
    const int p = static_cast<int>(spec.var_coefficients.size());
    const int total = kBurnIn + spec.n;
    Matrix x = Matrix::Zero(K, total);
    Rng rng(spec.seed);
    for (int t = 0; t < total; ++t) {
        Vector e(K);
        for (Eigen::Index c = 0; c < K; ++c) e(c) = spec.noise_sd * rng.normal();
        Vector xt = e;
        for (int j = 1; j <= p && t - j >= 0; ++j) xt += spec.var_coefficients[static_cast<std::size_t>(j - 1)] * x.col(t - j);
        x.col(t) = xt;
    }
    std::vector<std::string> names;
    std::vector<std::vector<double>> vals;
    for (Eigen::Index c = 0; c < K; ++c) {
        names.push_back("v" + std::to_string(c + 1));
        std::vector<double> col(static_cast<std::size_t>(spec.n));
        for (int t = 0; t < spec.n; ++t) col[static_cast<std::size_t>(t)] = x(c, kBurnIn + t);
        vals.push_back(std::move(col));
    }
    return TimeSeriesMatrix::from_start(Month::of(2000, 1), std::move(names), std::move(vals));
}

std::vector<double> gen_unit_root(const SynthSpec& spec) {
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n);
    std::vector<double> y(n);
    Rng rng(spec.seed);
    switch (spec.kind) {
        case SynthKind::RandomWalk:
            y[0] = 0.0;
            for (std::size_t t = 1; t < n; ++t) y[t] = y[t - 1] + spec.noise_sd * rng.normal();
            break;
        case SynthKind::WhiteNoise:
            for (auto& v : y) v = spec.noise_sd * rng.normal();
            break;
        case SynthKind::Ar1:
            if (!(std::abs(spec.phi) < 1.0)) fail(ErrorCode::BadPhi, "AR(1) needs |phi| < 1");
            y[0] = spec.noise_sd * rng.normal() / std::sqrt(1.0 - spec.phi * spec.phi);
            for (std::size_t t = 1; t < n; ++t) y[t] = spec.phi * y[t - 1] + spec.noise_sd * rng.normal();
            break;
        default:
            fail(ErrorCode::BadKind, "gen_unit_root needs RandomWalk, WhiteNoise or Ar1");
    }
    return y;
}

namespace {

double df_tstat_one(std::size_t n, std::uint64_t seed, std::vector<double>& y) {
    Rng rng(seed);
    y.resize(n);
    y[0] = 0.0;
    for (std::size_t t = 1; t < n; ++t) y[t] = y[t - 1] + rng.normal();
    // regress dy_t on (1, y_{t-1}) for t = 1..n-1
    const std::size_t m = n - 1;
    double mx = 0.0, mz = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        mx += y[t - 1];
        mz += y[t] - y[t - 1];
    }
    mx /= static_cast<double>(m);
    mz /= static_cast<double>(m);
    double sxx = 0.0, sxz = 0.0, szz = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const double dx = y[t - 1] - mx;
        const double dz = (y[t] - y[t - 1]) - mz;
        sxx += dx * dx;
        sxz += dx * dz;
        szz += dz * dz;
    }
    const double gamma = sxz / sxx;
    const double rss = szz - gamma * sxz;
    const double s2 = rss / static_cast<double>(m - 2);
    return gamma / std::sqrt(s2 / sxx);
}

}  // namespace

std::vector<double> df_tstat_draws(std::size_t n, std::size_t reps, std::uint64_t seed, Exec exec) {
    if (n < 25) fail(ErrorCode::TooShort, "Dickey-Fuller simulation needs n >= 25");
    std::vector<double> stats(reps);
    const auto r = static_cast<std::ptrdiff_t>(reps);
    if (exec == Exec::Parallel) {
#pragma omp parallel
        {
            std::vector<double> buffer;
#pragma omp for schedule(static)
            for (std::ptrdiff_t i = 0; i < r; ++i) {
                stats[static_cast<std::size_t>(i)] = df_tstat_one(n, seed + static_cast<std::uint64_t>(i), buffer);
            }
        }
    } else {
        std::vector<double> buffer;
        for (std::ptrdiff_t i = 0; i < r; ++i) {
            stats[static_cast<std::size_t>(i)] = df_tstat_one(n, seed + static_cast<std::uint64_t>(i), buffer);
        }
    }
    return stats;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) fail(ErrorCode::InsufficientData, "quantile of empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

std::array<double, 3> df_critical_values(std::size_t n, std::size_t reps, std::uint64_t seed, Exec exec) {
    if (reps < 10000) fail(ErrorCode::TooFewReps, "critical values need at least 10,000 replications, got " + std::to_string(reps));
    auto stats = df_tstat_draws(n, reps, seed, exec);
    std::sort(stats.begin(), stats.end());
    return {quantile_sorted(stats, 0.01), quantile_sorted(stats, 0.05), quantile_sorted(stats, 0.10)};
}

PanelFixture gen_panel_fixture(const PanelFixtureSpec& spec) {
    if (spec.funds < 2 || spec.months < 40) fail(ErrorCode::InvalidArgument, "fixture needs >= 2 funds and >= 40 months");
    Rng rng(spec.seed);
    const auto T = static_cast<std::size_t>(spec.months);

    // Stationary AR(1) growth for cpi and gdp; levels are their cumulative sums.
    std::vector<double> dcpi(T), dgdp(T), v(T), dnrou(T);
    double a = 0.0, b = 0.0, w = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        a = 0.3 * a + rng.normal();
        b = 0.3 * b + rng.normal();
        w += rng.normal();  // random walk in growth: nrou is I(2)
        dcpi[t] = a;
        dgdp[t] = b;
        dnrou[t] = w;
        v[t] = rng.normal();
    }
    std::vector<double> dr(T);
    for (std::size_t t = 0; t < T; ++t) dr[t] = 0.15 * dcpi[t] - 0.1 * (t > 0 ? dgdp[t - 1] : 0.0) + v[t];

    auto cumulate = [&](const std::vector<double>& g, double start) {
        std::vector<double> level(T + 1);
        level[0] = start;
        for (std::size_t t = 0; t < T; ++t) level[t + 1] = level[t] + g[t];
        return level;
    };
    // Macro levels cover one extra leading month so differencing lands on the fund index.
    std::vector<std::vector<double>> macro_vals{cumulate(dr, 5.0), cumulate(dcpi, 100.0), cumulate(dgdp, 50.0),
                                                cumulate(dnrou, 5.0)};
    PanelFixture fx;
    fx.theta_true = spec.theta;
    fx.macro = TimeSeriesMatrix::from_start(spec.start - 1, {"fedfunds", "cpi", "gdp", "nrou"}, std::move(macro_vals));

    std::vector<std::string> tickers;
    std::vector<std::vector<double>> returns;
    for (int f = 0; f < spec.funds; ++f) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "F%03d", f + 1);
        tickers.emplace_back(buf);
        const double alpha = 0.5 * rng.normal();
        const auto inception = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(spec.months / 4)));
        std::vector<double> col(T, kMissing);
        for (std::size_t t = 0; t < T; ++t) {
            const double u = spec.noise_sd * rng.normal();
            if (t < inception) continue;
            col[t] = alpha + spec.theta * dr[t] + 0.5 * dcpi[t] + 0.3 * std::sin(dgdp[t]) + u;
        }
        returns.push_back(std::move(col));

        FundMeta meta;
        meta.ticker = tickers.back();
        meta.asset_class = f % 3 == 0 ? AssetClass::FixedIncome : AssetClass::Equity;
        meta.inception = spec.start + static_cast<int>(inception);
        meta.aum_musd = 5.0 + 495.0 * rng.uniform();
        meta.managed = f % 5 == 4 ? Management::Passive : Management::Active;
        fx.catalog.push_back(meta);
    }
    fx.funds = TimeSeriesMatrix::from_start(spec.start, std::move(tickers), std::move(returns));
    return fx;
}

}  // namespace ratedml
