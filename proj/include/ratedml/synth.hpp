#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ratedml/dml.hpp"
#include "ratedml/exec.hpp"
#include "ratedml/linalg.hpp"
#include "ratedml/panel_data.hpp"

namespace ratedml {

enum class SynthKind { PlrLinear, PlrNonlinear, Var, RandomWalk, WhiteNoise, Ar1 };

struct SynthSpec {
    SynthKind kind = SynthKind::PlrLinear;
    double theta_true = 0.0;
    int n = 0;
    int k_controls = 0;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;
    std::vector<Matrix> var_coefficients;  ///< A_1..A_p (Var)
    double phi = 0.0;                      ///< Ar1

    /// n >= 1, noise_sd > 0.
    void validate() const;
};

/// Loadings of the PLR designs: a_j = 1/j, b_j = (-1)^(j+1)/j.
std::pair<Vector, Vector> plr_loadings(int k);

struct SyntheticPlr {
    PlrProblem problem;
    double theta_true = 0.0;
};

/// X ~ iid N(0,1) (n x k), rows grouped ten per unit id.
///   PlrLinear:    d = X a + v,                       y = theta d + X b + u
///   PlrNonlinear: d = sin(X a) + 0.5 (X_1^2 - 1) + v, y = theta d + cos(X b) + X_2 X_3 + u
/// u, v ~ N(0, noise_sd^2). Errors: BadKind, InvalidArgument (k < 3 for PlrNonlinear).
SyntheticPlr gen_plr(const SynthSpec& spec);

/// Population R^2 of the d-task and y-task under PlrLinear.
double plr_linear_population_r2_d(int k, double noise_sd);
double plr_linear_population_r2_y(int k, double theta, double noise_sd);

/// x_t = sum_j A_j x_{t-j} + e_t after a 200-step burn-in; columns v1..vK
/// indexed from 2000-01. Errors: ExplosiveCoefficients, BadKind.
TimeSeriesMatrix gen_var(const SynthSpec& spec);

/// Spectral radius of the VAR companion matrix.
double companion_spectral_radius(const std::vector<Matrix>& coefficients);

/// RandomWalk: y_0 = 0, y_t = y_{t-1} + e_t. Ar1: y_t = phi y_{t-1} + e_t
/// with a stationary start. WhiteNoise: y_t = e_t. Errors: BadPhi, BadKind.
std::vector<double> gen_unit_root(const SynthSpec& spec);

/// Dickey-Fuller t-ratios (constant, no lags) of `reps` driftless random
/// walks of length n; replication i is seeded with seed + i.
std::vector<double> df_tstat_draws(std::size_t n, std::size_t reps, std::uint64_t seed, Exec exec = Exec::Parallel);

/// Empirical 1%, 5%, 10% quantiles of df_tstat_draws.
/// Errors: TooFewReps (< 10,000), TooShort (n < 25).
std::array<double, 3> df_critical_values(std::size_t n, std::size_t reps, std::uint64_t seed, Exec exec = Exec::Parallel);

/// Linear-interpolated empirical quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q);

// --- end-to-end fixture -----------------------------------------------------

struct PanelFixtureSpec {
    int funds = 20;
    int months = 240;
    double theta = 0.5;
    double noise_sd = 1.0;
    std::uint64_t seed = 1;
    Month start = Month::of(1990, 1);
};

/// Wide fund returns, macro levels and fund metadata with a known treatment
/// effect. Macro columns: fedfunds (treatment level), cpi, gdp, and nrou whose
/// first difference is still a random walk. Fund returns are
///   y_it = alpha_i + theta d_t + 0.5 dcpi_t + 0.3 sin(dgdp_t) + u_it,
///   d_t  = 0.15 dcpi_t - 0.1 dgdp_{t-1} + v_t,
/// with staggered fund inception (missing returns before it).
struct PanelFixture {
    TimeSeriesMatrix funds;
    TimeSeriesMatrix macro;
    std::vector<FundMeta> catalog;
    std::string treatment = "fedfunds";
    double theta_true = 0.0;
};

PanelFixture gen_panel_fixture(const PanelFixtureSpec& spec);

}  // namespace ratedml
