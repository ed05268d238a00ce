#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratedml/exec.hpp"
#include "ratedml/linalg.hpp"
#include "ratedml/panel_data.hpp"

namespace ratedml {

/// output[i] = input[i+1] - input[i]. Errors: TooShort (< 2 values).
std::vector<double> first_difference(std::span<const double> series);

// --- unit-root screening --------------------------------------------------

enum class AdfLevel { Pct1 = 0, Pct5 = 1, Pct10 = 2 };
enum class Verdict { Stationary, NonStationary };

std::string_view to_string(AdfLevel level);
std::string_view to_string(Verdict verdict);
AdfLevel parse_adf_level(std::string_view text);

struct AdfReport {
    double statistic = 0.0;                 ///< t-ratio on the lagged level
    int lag_order = 0;
    std::size_t nobs = 0;                   ///< regression sample size
    std::array<double, 3> critical_values{}; ///< 1%, 5%, 10%
    AdfLevel level = AdfLevel::Pct5;
    Verdict verdict = Verdict::NonStationary;

    double critical(AdfLevel l) const { return critical_values[static_cast<int>(l)]; }
};

/// Dickey-Fuller critical values (constant, no trend) for a series of length
/// n, interpolated linearly in 1/n from the compiled Monte Carlo table.
std::array<double, 3> df_critical_value_table(std::size_t n);

/// Rows of the compiled table as (n, 1%, 5%, 10%).
struct CriticalValueRow {
    std::size_t n;
    std::array<double, 3> values;
};
std::span<const CriticalValueRow> compiled_critical_values();

/// Schwert's rule floor(12 (n/100)^(1/4)).
int schwert_lag(std::size_t n);

/// Augmented Dickey-Fuller test with a constant and no trend:
///   dy_t = a + g y_{t-1} + sum_{j=1..k} c_j dy_{t-j} + e_t.
/// `max_lag` empty selects k by Schwert's rule. Errors: TooShort (< 20
/// values), SingularRegression (e.g. constant input).
AdfReport adf_test(std::span<const double> series, AdfLevel level = AdfLevel::Pct5,
                   std::optional<int> max_lag = std::nullopt);

struct ScreenResult {
    TimeSeriesMatrix kept;
    std::vector<std::pair<std::string, AdfReport>> dropped;
    std::vector<std::pair<std::string, AdfReport>> audit;  ///< every column, input order
};

/// Runs adf_test on every column (missing values removed) and drops the
/// non-stationary ones. Column errors are rethrown with the column name.
ScreenResult screen_stationarity(const TimeSeriesMatrix& vars, AdfLevel level = AdfLevel::Pct5,
                                 std::optional<int> max_lag = std::nullopt, Exec exec = Exec::Parallel);

/// CSV `variable,adf_stat,crit_5pct,verdict`.
std::string format_adf_audit(const ScreenResult& screen);

// --- VAR lag order ---------------------------------------------------------

struct LagSelection {
    int best = 1;
    std::vector<double> aic;  ///< aic[p-1] for p = 1..p_max
    std::size_t effective_obs = 0;
};

/// VAR(p) fitted equation by equation with OLS on the common sample
/// t = p_max..T-1; AIC(p) = ln det(S_p) + 2 (K^2 p + K) / T_eff, S_p the ML
/// residual covariance. The longest run of fully observed months is used.
/// Errors: InsufficientData, SingularCovariance.
LagSelection select_lag_var_aic_detail(const TimeSeriesMatrix& vars, int p_max);
int select_lag_var_aic(const TimeSeriesMatrix& vars, int p_max);

// --- lags and fixed-effect encoding ---------------------------------------

struct LaggedMatrix {
    TimeSeriesMatrix matrix;  ///< original columns followed by <col>_lag1..p per column
    std::vector<char> valid;  ///< row has a complete lag window
};

LaggedMatrix build_lags(const TimeSeriesMatrix& m, int p);

struct MeansEncodingOptions {
    bool encode_x = true;
    bool encode_y = true;
    /// Names of x columns to encode; empty means every column without a
    /// "_lag" suffix.
    std::vector<std::string> columns;
};

/// Per-unit means of `columns` over the rows selected by `train_mask`.
/// Units without training rows receive the global training mean. Returns one
/// column per input column, one entry per row. Errors: EmptyTrainMask.
std::vector<std::vector<double>> unit_means(std::span<const int> unit_codes,
                                            const std::vector<std::span<const double>>& columns,
                                            std::span<const char> train_mask);

/// Dense 0..U-1 codes for unit ids in order of first appearance.
std::vector<int> encode_units(const std::vector<std::string>& unit_ids);

/// Names of the x columns selected by `options`.
std::vector<std::size_t> encoded_columns(const std::vector<std::string>& x_names, const MeansEncodingOptions& options);

/// Appends mean_<v> columns (and mean_y) computed only on train_mask rows.
PanelTable means_encode(const PanelTable& panel, std::span<const char> train_mask,
                        const MeansEncodingOptions& options = {});

// --- correlation / PCA -----------------------------------------------------

/// Pearson correlation on pairwise-complete observations.
/// Errors: ConstantColumn, InsufficientData (< 2 paired observations).
Matrix correlation_matrix(const TimeSeriesMatrix& vars);

struct CorrPcaReport {
    Matrix corr;
    Vector eigenvalues;      ///< descending
    Matrix components;       ///< column j pairs with eigenvalues(j)
    Vector explained_ratio;  ///< eigenvalue / trace
    int sweeps = 0;
};

/// Cyclic Jacobi eigen-decomposition of a correlation matrix; each
/// component's largest-magnitude loading is made positive. Errors: NotSymmetric.
CorrPcaReport pca_corr(const Matrix& corr);

}  // namespace ratedml
