#include "ratedml/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "ratedml/csv.hpp"
#include "ratedml/error.hpp"
#include "ratedml/rng.hpp"

namespace ratedml {

LinearModel ols_fit(const Matrix& x, const Vector& y) {
    if (x.rows() != y.size()) fail(ErrorCode::LengthMismatch, "X rows and y length differ");
    if (x.rows() <= x.cols() + 1) {
        fail(ErrorCode::TooFewRows, "OLS needs more than k + 1 rows (n=" + std::to_string(x.rows()) + ", k=" +
                                        std::to_string(x.cols()) + ")");
    }
    auto fit = least_squares(with_intercept(x), y);
    LinearModel model;
    model.intercept = fit.coef(0);
    model.coefficients = fit.coef.tail(x.cols());
    return model;
}

Vector predict(const LinearModel& model, const Matrix& x) {
    if (x.cols() != model.coefficients.size()) {
        fail(ErrorCode::DimensionMismatch, "model expects " + std::to_string(model.coefficients.size()) + " features, got " +
                                               std::to_string(x.cols()));
    }
    Vector out = x * model.coefficients;
    out.array() += model.intercept;
    return out;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, int K, std::uint64_t seed) {
    if (K < 2 || static_cast<std::size_t>(K) > n) {
        fail(ErrorCode::BadK, "fold count must satisfy 2 <= K <= n (K=" + std::to_string(K) + ", n=" + std::to_string(n) + ")");
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(perm));

    const auto k = static_cast<std::size_t>(K);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = n / k + (f < n % k ? 1 : 0);
        folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

double mse(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) fail(ErrorCode::LengthMismatch, "mse: length mismatch");
    if (y.empty()) fail(ErrorCode::InvalidArgument, "mse of empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

double r2(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) fail(ErrorCode::LengthMismatch, "r2: length mismatch");
    if (y.size() < 2) fail(ErrorCode::InvalidArgument, "r2 needs at least 2 observations");
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_tot += (y[i] - mean) * (y[i] - mean);
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    }
    if (ss_tot == 0.0) fail(ErrorCode::ConstantTarget, "r2 undefined for a constant target");
    return 1.0 - ss_res / ss_tot;
}

namespace {

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Vector take(const Vector& v, const std::vector<std::size_t>& rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
    return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& fold) {
    std::vector<std::size_t> out;
    out.reserve(n - fold.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (j < fold.size() && fold[j] == i) {
            ++j;
            continue;
        }
        out.push_back(i);
    }
    return out;
}

struct FoldScore {
    double mse = 0.0;
    double r2 = std::numeric_limits<double>::quiet_NaN();
    std::optional<Error> error;
};

}  // namespace

GridSearchResult grid_search_cv(const Matrix& x, const Vector& y, const std::vector<HyperParams>& grid, int K,
                                std::uint64_t seed, Exec exec) {
    if (grid.empty()) fail(ErrorCode::InvalidArgument, "hyperparameter grid is empty");
    if (x.rows() != y.size()) fail(ErrorCode::LengthMismatch, "X rows and y length differ");
    const auto n = static_cast<std::size_t>(x.rows());
    const auto folds = kfold_split(n, K, seed);
    const auto k = folds.size();

    std::vector<Matrix> train_x(k), test_x(k);
    std::vector<Vector> train_y(k), test_y(k);
    for (std::size_t f = 0; f < k; ++f) {
        const auto train = complement(n, folds[f]);
        train_x[f] = take_rows(x, train);
        train_y[f] = take(y, train);
        test_x[f] = take_rows(x, folds[f]);
        test_y[f] = take(y, folds[f]);
    }

    const auto jobs = static_cast<std::ptrdiff_t>(grid.size() * k);
    std::vector<FoldScore> scores(static_cast<std::size_t>(jobs));
    auto run = [&](std::ptrdiff_t job) {
        const auto c = static_cast<std::size_t>(job) / k;
        const auto f = static_cast<std::size_t>(job) % k;
        auto& out = scores[static_cast<std::size_t>(job)];
        try {
            auto model = gbt_fit(train_x[f], train_y[f], grid[c], derive_seed(seed, static_cast<std::uint64_t>(f)), Exec::Serial);
            Vector pred = predict(model, test_x[f], Exec::Serial);
            out.mse = mse(as_span(test_y[f]), as_span(pred));
            try {
                out.r2 = r2(as_span(test_y[f]), as_span(pred));
            } catch (const Error&) {
                // constant held-out fold: r2 stays NaN, MSE still ranks the candidate
            }
        } catch (const Error& e) {
            out.error = e;
        }
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t j = 0; j < jobs; ++j) run(j);
    } else {
        for (std::ptrdiff_t j = 0; j < jobs; ++j) run(j);
    }

    GridSearchResult result;
    std::optional<std::size_t> best;
    std::optional<Error> first_error;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        GridRow row;
        row.params = grid[c];
        for (std::size_t f = 0; f < k; ++f) {
            const auto& s = scores[c * k + f];
            if (s.error) {
                row.failed = true;
                row.error = s.error->what();
                if (!first_error) first_error = s.error;
                break;
            }
            row.cv_mse += s.mse;
            row.cv_r2 += s.r2;
        }
        if (!row.failed) {
            row.cv_mse /= static_cast<double>(k);
            row.cv_r2 /= static_cast<double>(k);
            if (!best) {
                best = c;
            } else {
                const auto& b = result.table[*best];
                const bool better = row.cv_mse < b.cv_mse ||
                                    (row.cv_mse == b.cv_mse && (row.params.n_trees < b.params.n_trees ||
                                                                (row.params.n_trees == b.params.n_trees &&
                                                                 row.params.max_depth < b.params.max_depth)));
                if (better) best = c;
            }
        } else {
            row.cv_mse = std::numeric_limits<double>::quiet_NaN();
            row.cv_r2 = std::numeric_limits<double>::quiet_NaN();
        }
        result.table.push_back(std::move(row));
    }
    if (!best) throw first_error->with_context("every grid candidate failed");
    result.best_index = *best;
    result.best = grid[*best];
    return result;
}

std::vector<HyperParams> default_grid() {
    std::vector<HyperParams> grid;
    for (int trees : {50, 200}) {
        for (int depth : {2, 4}) {
            for (double lr : {0.1, 0.3}) grid.push_back(HyperParams{trees, depth, lr, 20, 1.0});
        }
    }
    return grid;
}

std::vector<HyperParams> parse_grid_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::BadConfig, std::string("grid JSON: ") + e.what());
    }
    if (!doc.is_array() || doc.empty()) fail(ErrorCode::BadConfig, "grid JSON must be a non-empty array");
    std::vector<HyperParams> grid;
    for (const auto& item : doc) {
        try {
            HyperParams p;
            p.n_trees = item.at("n_trees").get<int>();
            p.max_depth = item.at("max_depth").get<int>();
            p.learning_rate = item.at("learning_rate").get<double>();
            p.min_samples_leaf = item.at("min_samples_leaf").get<int>();
            p.subsample = item.value("subsample", 1.0);
            p.validate();
            grid.push_back(p);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::BadConfig, std::string("grid entry: ") + e.what());
        } catch (const Error& e) {
            fail(ErrorCode::BadConfig, std::string("grid entry: ") + e.what());
        }
    }
    return grid;
}

std::string format_grid_csv(const GridSearchResult& result) {
    std::string out = "n_trees,max_depth,learning_rate,min_samples_leaf,cv_mse,cv_r2\n";
    for (const auto& row : result.table) {
        out += std::to_string(row.params.n_trees) + "," + std::to_string(row.params.max_depth) + "," +
               csv::format_double(row.params.learning_rate) + "," + std::to_string(row.params.min_samples_leaf) + "," +
               csv::format_double(row.cv_mse) + "," + csv::format_double(row.cv_r2) + "\n";
    }
    return out;
}

}  // namespace ratedml
