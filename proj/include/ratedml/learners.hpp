#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratedml/exec.hpp"
#include "ratedml/linalg.hpp"

namespace ratedml {

struct LinearModel {
    double intercept = 0.0;
    Vector coefficients;
};

/// Errors: TooFewRows (n <= k + 1), RankDeficient (exact collinearity).
LinearModel ols_fit(const Matrix& x, const Vector& y);

struct HyperParams {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 1;
    double subsample = 1.0;  ///< row fraction drawn (without replacement) per tree

    /// Throws InvalidArgument when a field is out of range.
    void validate() const;
    bool operator==(const HyperParams&) const = default;
};

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  ///< leaf output (mean residual)

    bool is_leaf() const { return feature < 0; }
};

/// Axis-aligned binary regression tree; rows with x[feature] <= threshold go left.
struct RegressionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    template <typename Row>
    double predict(const Row& x) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = x(n.feature) <= n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
    int depth() const;
};

struct GbtModel {
    double base_score = 0.0;
    std::vector<RegressionTree> trees;
    double learning_rate = 0.1;
    HyperParams params;
    int n_features = 0;
};

/// Squared-error stagewise boosting with exact greedy splits.
///
/// `Exec::Parallel` and `Exec::Serial` search splits level by level over
/// pre-sorted feature columns (one OpenMP task per feature when parallel);
/// `Exec::Reference` is the per-node builder that sorts each node's rows
/// independently. All visit rows in the same (value, row index) order and
/// produce identical models.
/// `training_predictions`, when non-null, receives the fit-time F_M(X).
/// Errors: TooFewRows (n < 2 * min_samples_leaf), InvalidArgument.
GbtModel gbt_fit(const Matrix& x, const Vector& y, const HyperParams& params, std::uint64_t seed,
                 Exec exec = Exec::Parallel, Vector* training_predictions = nullptr);

/// Training MSE after each stage m = 0..n_trees.
std::vector<double> gbt_training_curve(const GbtModel& model, const Matrix& x, const Vector& y);

/// Errors: DimensionMismatch.
Vector predict(const LinearModel& model, const Matrix& x);
Vector predict(const GbtModel& model, const Matrix& x, Exec exec = Exec::Parallel);

/// Seeded shuffle of 0..n-1 cut into K folds whose sizes differ by at most
/// one (the first n % K folds are larger). Each fold is sorted ascending.
/// Errors: BadK unless 2 <= K <= n.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int K, std::uint64_t seed);

/// Errors: LengthMismatch, InvalidArgument (empty input).
double mse(std::span<const double> y, std::span<const double> yhat);
/// 1 - SS_res / SS_tot. Errors: LengthMismatch, ConstantTarget.
double r2(std::span<const double> y, std::span<const double> yhat);

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

struct GridRow {
    HyperParams params;
    double cv_mse = 0.0;
    double cv_r2 = 0.0;
    bool failed = false;
    std::string error;
};

struct GridSearchResult {
    HyperParams best;
    std::size_t best_index = 0;
    std::vector<GridRow> table;
};

/// K-fold grid search for GbtModel. A candidate whose fit throws is marked
/// failed; if every candidate fails the first error is rethrown.
/// Best = lowest mean CV MSE, ties to fewer trees then shallower depth.
GridSearchResult grid_search_cv(const Matrix& x, const Vector& y, const std::vector<HyperParams>& grid, int K,
                                std::uint64_t seed, Exec exec = Exec::Parallel);

/// n_trees {50, 200} x max_depth {2, 4} x learning_rate {0.1, 0.3}, min leaf 20.
std::vector<HyperParams> default_grid();

/// JSON array of {n_trees, max_depth, learning_rate, min_samples_leaf[, subsample]}.
std::vector<HyperParams> parse_grid_json(const std::string& text);
std::string format_grid_csv(const GridSearchResult& result);

}  // namespace ratedml
