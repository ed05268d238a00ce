#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "ratedml/learners.hpp"
#include "ratedml/rng.hpp"

using namespace ratedml;
using testing::error_code_of;

namespace {

Matrix column(std::initializer_list<double> values) {
    Matrix x(static_cast<Eigen::Index>(values.size()), 1);
    Eigen::Index i = 0;
    for (double v : values) x(i++, 0) = v;
    return x;
}

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

struct Instance {
    Matrix x;
    Vector y;
};

Instance random_regression(std::uint64_t seed, int n, int k) {
    Rng rng(seed);
    Instance r{Matrix(n, k), Vector(n)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) r.x(i, j) = rng.normal();
        r.y(i) = std::sin(2.0 * r.x(i, 0)) + 0.5 * r.x(i, 1 % k) * r.x(i, 0) + 0.3 * rng.normal();
    }
    return r;
}

bool same_model(const GbtModel& a, const GbtModel& b) {
    if (a.base_score != b.base_score || a.trees.size() != b.trees.size()) return false;
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        const auto& na = a.trees[t].nodes;
        const auto& nb = b.trees[t].nodes;
        if (na.size() != nb.size()) return false;
        for (std::size_t i = 0; i < na.size(); ++i) {
            if (na[i].feature != nb[i].feature || na[i].threshold != nb[i].threshold || na[i].left != nb[i].left ||
                na[i].right != nb[i].right || na[i].value != nb[i].value)
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_SUITE("learners") {

TEST_CASE("OLS examples") {
    const auto line = ols_fit(column({0, 1, 2}), vec({0, 1, 2}));
    CHECK(line.intercept == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(line.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));

    Matrix two(4, 2);
    two << 1, 0, 2, 1, 3, 0, 4, 1;
    const auto flat = ols_fit(two, vec({5, 5, 5, 5}));
    CHECK(std::abs(flat.coefficients(0)) < 1e-12);
    CHECK(std::abs(flat.coefficients(1)) < 1e-12);
    CHECK(flat.intercept == doctest::Approx(5.0).epsilon(1e-12));

    const auto hand = ols_fit(column({1, 2, 3}), vec({2, 2, 4}));
    CHECK(hand.coefficients(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hand.intercept == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    LinearModel id;
    id.coefficients = vec({1});
    CHECK(predict(id, column({3}))(0) == 3.0);
    CHECK(error_code_of([&] { predict(id, Matrix::Zero(2, 2)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("OLS errors") {
    CHECK(error_code_of([] { ols_fit(column({1, 2}), vec({1, 2})); }) == ErrorCode::TooFewRows);
    Matrix dup(5, 2);
    dup << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
    CHECK(error_code_of([&] { ols_fit(dup, vec({1, 0, 1, 0, 1})); }) == ErrorCode::RankDeficient);
}

TEST_CASE("OLS residuals are orthogonal and match the normal equations") {
    const auto inst = random_regression(11, 50, 3);
    const auto model = ols_fit(inst.x, inst.y);
    const Vector resid = inst.y - predict(model, inst.x);
    const Matrix design = with_intercept(inst.x);
    const Vector score = design.transpose() * resid;
    const double scale = inst.y.norm() * design.norm();
    CHECK(score.cwiseAbs().maxCoeff() <= 1e-8 * scale);

    // Brute-force normal equations via an explicit inverse.
    const Matrix xtx = design.transpose() * design;
    const Vector beta = xtx.inverse() * (design.transpose() * inst.y);
    CHECK(std::abs(beta(0) - model.intercept) < 1e-8);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(beta(j + 1) - model.coefficients(j)) < 1e-8);
}

TEST_CASE("single stump splits at the midpoint") {
    HyperParams p{1, 1, 1.0, 1, 1.0};
    const auto model = gbt_fit(column({0, 1}), vec({0, 10}), p, 0);
    REQUIRE(model.trees.size() == 1);
    CHECK(model.base_score == 5.0);
    CHECK(model.trees[0].nodes[0].threshold == 0.5);
    const Vector pred = predict(model, column({0, 1}));
    CHECK(pred(0) == 0.0);
    CHECK(pred(1) == 10.0);
}

TEST_CASE("boosting without trees or depth predicts the mean") {
    const auto inst = random_regression(3, 80, 2);
    const double mean = inst.y.mean();
    HyperParams none{0, 3, 0.1, 1, 1.0};
    const auto m0 = gbt_fit(inst.x, inst.y, none, 1);
    CHECK(m0.base_score == mean);
    for (double v : predict(m0, inst.x)) CHECK(v == mean);

    HyperParams stumps{25, 0, 0.5, 1, 1.0};
    const auto md = gbt_fit(inst.x, inst.y, stumps, 1);
    for (double v : predict(md, inst.x)) CHECK(std::abs(v - mean) <= 1e-12 * (1.0 + std::abs(mean)));
}

TEST_CASE("tree structure respects the hyperparameters") {
    const auto inst = random_regression(5, 300, 4);
    HyperParams p{30, 3, 0.2, 10, 1.0};
    const auto model = gbt_fit(inst.x, inst.y, p, 2);
    for (const auto& tree : model.trees) {
        CHECK(tree.depth() <= 3);
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) {
                CHECK(std::isfinite(node.value));
            } else {
                CHECK(node.feature < 4);
            }
        }
    }
}

TEST_CASE("training loss never increases") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto inst = random_regression(100 + s, 200, 3);
        HyperParams p{40, 3, 0.3, 5, 1.0};
        const auto model = gbt_fit(inst.x, inst.y, p, s);
        const auto curve = gbt_training_curve(model, inst.x, inst.y);
        REQUIRE(curve.size() == 41);
        for (std::size_t m = 1; m < curve.size(); ++m) CHECK(curve[m] <= curve[m - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("execution paths build identical models") {
    const auto inst = random_regression(21, 400, 5);
    for (double sub : {1.0, 0.7}) {
        HyperParams p{20, 4, 0.1, 3, sub};
        Vector tp_ref, tp_ser, tp_par;
        const auto ref = gbt_fit(inst.x, inst.y, p, 9, Exec::Reference, &tp_ref);
        const auto ser = gbt_fit(inst.x, inst.y, p, 9, Exec::Serial, &tp_ser);
        const auto par = gbt_fit(inst.x, inst.y, p, 9, Exec::Parallel, &tp_par);
        CHECK(same_model(ref, ser));
        CHECK(same_model(ser, par));
        CHECK(tp_ref == tp_ser);
        CHECK(tp_ser == tp_par);
        CHECK(predict(ser, inst.x, Exec::Serial) == predict(par, inst.x, Exec::Parallel));
        CHECK(predict(par, inst.x) == tp_par);
    }
}

TEST_CASE("boosting errors") {
    HyperParams p{5, 2, 0.1, 3, 1.0};
    CHECK(error_code_of([&] { gbt_fit(column({1, 2, 3}), vec({1, 2, 3}), p, 0); }) == ErrorCode::TooFewRows);
    HyperParams bad = p;
    bad.learning_rate = 0.0;
    CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
    bad = p;
    bad.min_samples_leaf = 0;
    CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
    const auto inst = random_regression(1, 20, 2);
    const auto model = gbt_fit(inst.x, inst.y, p, 0);
    CHECK(error_code_of([&] { predict(model, Matrix::Zero(3, 3)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("k-fold partitions") {
    const auto f4 = kfold_split(4, 2, 7);
    REQUIRE(f4.size() == 2);
    CHECK(f4[0].size() == 2);
    CHECK(f4[1].size() == 2);
    std::set<std::size_t> all(f4[0].begin(), f4[0].end());
    all.insert(f4[1].begin(), f4[1].end());
    CHECK(all == std::set<std::size_t>{0, 1, 2, 3});

    const auto f5 = kfold_split(5, 2, 7);
    CHECK(f5[0].size() == 3);
    CHECK(f5[1].size() == 2);
    CHECK(kfold_split(37, 4, 99) == kfold_split(37, 4, 99));
    for (const auto& fold : kfold_split(37, 4, 99)) CHECK(std::is_sorted(fold.begin(), fold.end()));

    CHECK(error_code_of([] { kfold_split(5, 1, 0); }) == ErrorCode::BadK);
    CHECK(error_code_of([] { kfold_split(3, 4, 0); }) == ErrorCode::BadK);
}

TEST_CASE("metrics") {
    const std::vector<double> y{1, 2, 3}, flat{2, 2, 2};
    CHECK(mse(y, y) == 0.0);
    CHECK(mse(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 1.0);
    CHECK(mse(y, flat) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r2(y, y) == 1.0);
    CHECK(r2(y, flat) == 0.0);

    Rng rng(4);
    std::vector<double> a(30), b(30), a2(30), b2(30);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
        a2[i] = a[i] + 1000.0;
        b2[i] = b[i] + 1000.0;
    }
    CHECK(mse(a2, b2) == doctest::Approx(mse(a, b)).epsilon(1e-9));
    const double m = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    CHECK(std::abs(r2(a, std::vector<double>(a.size(), m))) < 1e-12);

    CHECK(error_code_of([] { r2(std::vector<double>{1, 1}, std::vector<double>{1, 2}); }) == ErrorCode::ConstantTarget);
    CHECK(error_code_of([] { mse(std::vector<double>{1, 1}, std::vector<double>{1}); }) == ErrorCode::LengthMismatch);
    CHECK(error_code_of([] { mse(std::vector<double>{}, std::vector<double>{}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("grid search") {
    const auto inst = random_regression(8, 200, 2);
    const std::vector<HyperParams> one{{20, 2, 0.1, 5, 1.0}};
    const auto single = grid_search_cv(inst.x, inst.y, one, 2, 3);
    CHECK(single.best == one[0]);
    CHECK(single.table.size() == 1);

    Rng rng(12);
    Matrix x(300, 1);
    Vector y(300);
    for (int i = 0; i < 300; ++i) {
        x(i, 0) = 4.0 * rng.uniform() - 2.0;
        y(i) = x(i, 0) * x(i, 0);
    }
    const std::vector<HyperParams> depths{{50, 0, 0.3, 5, 1.0}, {50, 2, 0.3, 5, 1.0}};
    const auto curv = grid_search_cv(x, y, depths, 2, 5);
    CHECK(curv.best.max_depth == 2);
    CHECK(curv.table[1].cv_mse < curv.table[0].cv_mse);

    // Depth 0 and depth 1 with zero trees give the same predictions; the shallower wins.
    const std::vector<HyperParams> tie{{0, 1, 0.1, 1, 1.0}, {0, 0, 0.1, 1, 1.0}};
    const auto t = grid_search_cv(inst.x, inst.y, tie, 2, 1);
    CHECK(t.table[0].cv_mse == t.table[1].cv_mse);
    CHECK(t.best_index == 1);

    const auto g = default_grid();
    CHECK(g.size() == 8);
    const auto r1 = grid_search_cv(inst.x, inst.y, g, 2, 77, Exec::Parallel);
    const auto r2s = grid_search_cv(inst.x, inst.y, g, 2, 77, Exec::Serial);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(r1.table[i].cv_mse == r2s.table[i].cv_mse);
        CHECK(r1.table[i].cv_r2 == r2s.table[i].cv_r2);
    }
    CHECK(format_grid_csv(r1).rfind("n_trees,max_depth,learning_rate,min_samples_leaf,cv_mse,cv_r2\n", 0) == 0);
}

TEST_CASE("grid JSON") {
    const auto g = parse_grid_json(
        R"([{"n_trees": 10, "max_depth": 2, "learning_rate": 0.5, "min_samples_leaf": 3},
            {"n_trees": 0, "max_depth": 0, "learning_rate": 1.0, "min_samples_leaf": 1, "subsample": 0.5}])");
    REQUIRE(g.size() == 2);
    CHECK(g[0] == HyperParams{10, 2, 0.5, 3, 1.0});
    CHECK(g[1].subsample == 0.5);
    CHECK(error_code_of([] { parse_grid_json("{}"); }) == ErrorCode::BadConfig);
    CHECK(error_code_of([] { parse_grid_json("[{\"n_trees\": 1}]"); }) == ErrorCode::BadConfig);
    CHECK(error_code_of([] { parse_grid_json("[{\"n_trees\": -1, \"max_depth\": 1, \"learning_rate\": 0.1, \"min_samples_leaf\": 1}]"); }) ==
          ErrorCode::BadConfig);
    CHECK(error_code_of([] { parse_grid_json("not json"); }) == ErrorCode::BadConfig);
}

}  // TEST_SUITE
