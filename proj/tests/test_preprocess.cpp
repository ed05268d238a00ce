#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "ratedml/preprocess.hpp"
#include "ratedml/rng.hpp"
#include "ratedml/synth.hpp"

using namespace ratedml;
using testing::error_code_of;

namespace {

// Deterministic closed-form series; the expected statistics below come from
// statsmodels (adfuller with regression="c", VAR.select_order with trend="c").
std::vector<double> chirp_series() {
    std::vector<double> x(120);
    double cum = 0.0;
    for (int i = 0; i < 120; ++i) {
        const double t = i;
        cum += std::cos(0.91 * t * t);
        x[static_cast<std::size_t>(i)] = std::sin(0.37 * t * t) + 0.05 * t + 0.2 * cum;
    }
    return x;
}

TimeSeriesMatrix chirp_pair() {
    std::vector<double> a(150), b(150);
    for (int i = 0; i < 150; ++i) {
        const double t = i;
        a[static_cast<std::size_t>(i)] = std::sin(0.37 * t * t) + 0.5 * std::sin(0.11 * t * t + 1.0);
        b[static_cast<std::size_t>(i)] = std::cos(0.23 * t * t) + 0.3 * a[static_cast<std::size_t>(i)];
    }
    return TimeSeriesMatrix::from_start(Month::of(2000, 1), {"a", "b"}, {a, b});
}

std::vector<double> seeded(SynthKind kind, std::uint64_t seed, int n, double phi = 0.0) {
    SynthSpec s;
    s.kind = kind;
    s.n = n;
    s.seed = seed;
    s.phi = phi;
    return gen_unit_root(s);
}

PanelTable two_unit_panel() {
    PanelTable p;
    p.x_names = {"c", "y_lag1"};
    const double ys[] = {1.0, 3.0, 10.0, 4.0, 6.0, 100.0};
    const char* units[] = {"A", "A", "A", "B", "B", "B"};
    for (int i = 0; i < 6; ++i) {
        PanelRow r;
        r.unit_id = units[i];
        r.time = Month::of(2000, 1) + i % 3;
        r.y = ys[i];
        r.d = 0.1 * i;
        r.x = {static_cast<double>(i), 0.0};
        p.rows.push_back(r);
    }
    return p;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("first differences") {
    CHECK(first_difference(std::vector<double>{1, 2, 3, 4}) == std::vector<double>{1, 1, 1});
    for (double v : first_difference(std::vector<double>(6, 3.5))) CHECK(v == 0.0);
    CHECK(error_code_of([] { first_difference(std::vector<double>{1}); }) == ErrorCode::TooShort);

    Rng rng(2);
    std::vector<double> s(40), cum(40);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = std::round(rng.normal() * 1000.0) / 8.0;  // dyadic, so sums are exact
        acc += s[i];
        cum[i] = acc;
    }
    const auto back = first_difference(cum);
    CHECK(std::equal(back.begin(), back.end(), s.begin() + 1));
}

TEST_CASE("ADF statistic matches statsmodels") {
    const auto x = chirp_series();
    const auto r3 = adf_test(x, AdfLevel::Pct5, 3);
    CHECK(r3.lag_order == 3);
    CHECK(r3.nobs == 116);
    CHECK(r3.statistic == doctest::Approx(-1.0713359868263885).epsilon(1e-9));
    const auto r0 = adf_test(x, AdfLevel::Pct5, 0);
    CHECK(r0.statistic == doctest::Approx(-3.4928593534586065).epsilon(1e-9));
}

TEST_CASE("ADF verdict and critical values") {
    const auto x = chirp_series();
    for (auto level : {AdfLevel::Pct1, AdfLevel::Pct5, AdfLevel::Pct10}) {
        const auto r = adf_test(x, level, 0);
        CHECK(r.critical_values[0] < r.critical_values[1]);
        CHECK(r.critical_values[1] < r.critical_values[2]);
        CHECK((r.verdict == Verdict::Stationary) == (r.statistic < r.critical(level)));
    }
    CHECK(schwert_lag(500) == 17);
    CHECK(schwert_lag(100) == 12);
    CHECK(adf_test(x).lag_order == schwert_lag(120));
}

TEST_CASE("ADF rejection rates at n = 500") {
    int rw_rejects = 0, ar_rejects = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        rw_rejects += adf_test(seeded(SynthKind::RandomWalk, 1000 + s, 500)).verdict == Verdict::Stationary;
        ar_rejects += adf_test(seeded(SynthKind::Ar1, 5000 + s, 500, 0.5)).verdict == Verdict::Stationary;
    }
    CHECK(rw_rejects <= 20);
    CHECK(ar_rejects >= 190);
}

TEST_CASE("ADF errors") {
    CHECK(error_code_of([] { adf_test(std::vector<double>(50, 2.0)); }) == ErrorCode::SingularRegression);
    CHECK(error_code_of([] { adf_test(std::vector<double>(19, 0.0)); }) == ErrorCode::TooShort);
}

TEST_CASE("ADF statistic is invariant to positive affine maps") {
    const auto y = seeded(SynthKind::Ar1, 9, 200, 0.6);
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) z[i] = 3.7 * y[i] - 12.0;
    CHECK(adf_test(z).statistic == doctest::Approx(adf_test(y).statistic).epsilon(1e-9));
}

TEST_CASE("critical-value table interpolates linearly in 1/n") {
    const auto rows = compiled_critical_values();
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) CHECK(df_critical_value_table(r.n) == r.values);
    const std::size_t n = 180;
    const auto lo = rows[1], hi = rows[2];  // 100 and 250
    const double w = (1.0 / 100 - 1.0 / 180) / (1.0 / 100 - 1.0 / 250);
    const auto got = df_critical_value_table(n);
    for (std::size_t i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(lo.values[i] + w * (hi.values[i] - lo.values[i])).epsilon(1e-12));
    CHECK(df_critical_value_table(20) == rows.front().values);
    CHECK(df_critical_value_table(1000000) == rows.back().values);
}

TEST_CASE("stationarity screen drops the random walk") {
    const auto wn = seeded(SynthKind::WhiteNoise, 1, 300);
    const auto rw = seeded(SynthKind::RandomWalk, 2, 300);
    const auto m = TimeSeriesMatrix::from_start(Month::of(1990, 1), {"wn", "rw"}, {wn, rw});
    const auto par = screen_stationarity(m, AdfLevel::Pct5, std::nullopt, Exec::Parallel);
    const auto ser = screen_stationarity(m, AdfLevel::Pct5, std::nullopt, Exec::Serial);
    CHECK(par.kept.columns() == std::vector<std::string>{"wn"});
    REQUIRE(par.dropped.size() == 1);
    CHECK(par.dropped[0].first == "rw");
    CHECK(ser.audit[1].second.statistic == par.audit[1].second.statistic);
    CHECK(format_adf_audit(par).rfind("variable,adf_stat,crit_5pct,verdict\n", 0) == 0);

    const auto stationary = TimeSeriesMatrix::from_start(Month::of(1990, 1), {"a", "b"},
                                                         {wn, seeded(SynthKind::Ar1, 4, 300, 0.3)});
    CHECK(screen_stationarity(stationary).dropped.empty());

    const auto single = TimeSeriesMatrix::from_start(Month::of(1990, 1), {"rw"}, {rw});
    const auto s = screen_stationarity(single);
    CHECK(s.kept.cols() == 0);
    CHECK(s.audit.size() == 1);
}

TEST_CASE("screen errors name the column") {
    const auto m = TimeSeriesMatrix::from_start(Month::of(1990, 1), {"ok", "flat"},
                                                {seeded(SynthKind::WhiteNoise, 1, 60), std::vector<double>(60, 1.0)});
    try {
        screen_stationarity(m);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularRegression);
        CHECK(std::string(e.what()).find("flat") != std::string::npos);
    }
}

TEST_CASE("VAR AIC matches statsmodels") {
    const auto detail = select_lag_var_aic_detail(chirp_pair(), 6);
    const double expected[] = {-1.1974737580403148, -1.172279902113439, -1.1194395039283822,
                               -1.0781951631628008, -1.025133053312305, -0.9893491292822763};
    REQUIRE(detail.aic.size() == 6);
    for (std::size_t p = 0; p < 6; ++p) CHECK(detail.aic[p] == doctest::Approx(expected[p]).epsilon(1e-9));
    CHECK(detail.best == 1);
    CHECK(detail.effective_obs == 144);
}

TEST_CASE("VAR lag selection boundaries") {
    const auto m = chirp_pair();
    CHECK(select_lag_var_aic(m, 1) == 1);
    const auto tiny = m.slice(Month::of(2000, 1), Month::of(2000, 10));
    CHECK(error_code_of([&] { select_lag_var_aic(tiny, 8); }) == ErrorCode::InsufficientData);

    int small = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        SynthSpec spec;
        spec.kind = SynthKind::Var;
        spec.n = 300;
        spec.seed = 500 + s;
        spec.var_coefficients = {Matrix::Zero(2, 2)};
        const int p = select_lag_var_aic(gen_var(spec), 8);
        CHECK(p >= 1);
        CHECK(p <= 8);
        small += p <= 2;
    }
    CHECK(small >= 32);
}

TEST_CASE("lag construction") {
    const auto m = TimeSeriesMatrix::from_start(Month::of(2000, 1), {"s"}, {{5, 6, 7}});
    const auto l1 = build_lags(m, 1);
    CHECK(l1.matrix.columns() == std::vector<std::string>{"s", "s_lag1"});
    const auto lag = l1.matrix.column("s_lag1");
    CHECK(std::isnan(lag[0]));
    CHECK(lag[1] == 5.0);
    CHECK(lag[2] == 6.0);
    CHECK(l1.valid == std::vector<char>{0, 1, 1});
    CHECK(build_lags(m, 2).valid == std::vector<char>{0, 0, 1});

    // lag of differences equals difference of lags on a ramp
    std::vector<double> ramp(12);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 2.0 + 0.25 * static_cast<double>(i * i);
    const auto r = TimeSeriesMatrix::from_start(Month::of(2000, 1), {"r"}, {ramp});
    const auto lag_of_diff = build_lags(difference_columns(r), 2).matrix;
    const auto diff_of_lag = difference_columns(build_lags(r, 2).matrix);
    const auto a = lag_of_diff.column("r_lag2");
    const auto b = diff_of_lag.column("r_lag2");
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 2; t < a.size(); ++t) CHECK(a[t] == b[t]);
}

TEST_CASE("means encoding uses training rows only") {
    const auto panel = two_unit_panel();
    const std::vector<char> mask{1, 1, 0, 0, 0, 0};  // A's first two rows only; B unseen
    MeansEncodingOptions opt;
    const auto enc = means_encode(panel, mask, opt);
    REQUIRE(enc.x_names.back() == "mean_y");
    CHECK(enc.x_names[2] == "mean_c");
    for (int i = 0; i < 3; ++i) CHECK(enc.rows[static_cast<std::size_t>(i)].x.back() == 2.0);
    for (int i = 3; i < 6; ++i) CHECK(enc.rows[static_cast<std::size_t>(i)].x.back() == 2.0);  // global train mean

    const std::vector<char> mask2{1, 1, 0, 1, 1, 0};
    const auto enc2 = means_encode(panel, mask2, opt);
    CHECK(enc2.rows[4].x.back() == 5.0);
    CHECK(enc2.rows[0].x[2] == 0.5);

    auto perturbed = panel;
    perturbed.rows[2].y = -1e6;
    perturbed.rows[5].x[0] = 42.0;
    const auto enc3 = means_encode(perturbed, mask2, opt);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(enc3.rows[i].x[2] == enc2.rows[i].x[2]);
        CHECK(enc3.rows[i].x.back() == enc2.rows[i].x.back());
    }

    const std::vector<char> all(6, 1);
    CHECK(means_encode(panel, all, opt).rows[0].x.back() != enc2.rows[0].x.back());
    CHECK(error_code_of([&] { means_encode(panel, std::vector<char>(6, 0), opt); }) == ErrorCode::EmptyTrainMask);
}

TEST_CASE("correlation matrix") {
    const std::vector<double> x{1, 2, 3}, z{1, 2, 4};
    std::vector<double> neg{-1, -2, -3};
    const auto m = TimeSeriesMatrix::from_start(Month::of(2000, 1), {"x", "z", "neg"}, {x, z, neg});
    const Matrix c = correlation_matrix(m);
    CHECK(c(0, 0) == 1.0);
    CHECK(c(0, 2) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(c(0, 1) == doctest::Approx(3.0 / std::sqrt(2.0 * 42.0 / 9.0)).epsilon(1e-12));
    CHECK(c(1, 0) == c(0, 1));

    const auto flat = TimeSeriesMatrix::from_start(Month::of(2000, 1), {"x", "k"}, {x, {5, 5, 5}});
    CHECK(error_code_of([&] { correlation_matrix(flat); }) == ErrorCode::ConstantColumn);
}

TEST_CASE("PCA of correlation matrices") {
    const auto id = pca_corr(Matrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i) CHECK(id.eigenvalues(i) == doctest::Approx(1.0));

    Matrix two(2, 2);
    two << 1.0, 0.6, 0.6, 1.0;
    const auto p2 = pca_corr(two);
    CHECK(p2.eigenvalues(0) == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(p2.eigenvalues(1) == doctest::Approx(0.4).epsilon(1e-12));

    Rng rng(8);
    std::vector<std::vector<double>> cols(5, std::vector<double>(60));
    for (std::size_t t = 0; t < 60; ++t) {
        const double common = rng.normal();
        for (std::size_t c = 0; c < 5; ++c) cols[c][t] = common * 0.3 * static_cast<double>(c) + rng.normal();
    }
    const auto m = TimeSeriesMatrix::from_start(Month::of(2000, 1), {"a", "b", "c", "d", "e"}, cols);
    const Matrix corr = correlation_matrix(m);
    const auto pca = pca_corr(corr);
    const Matrix rebuilt = pca.components * pca.eigenvalues.asDiagonal() * pca.components.transpose();
    CHECK((rebuilt - corr).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((pca.components.transpose() * pca.components - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(pca.eigenvalues.sum() == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(pca.explained_ratio.sum() == doctest::Approx(1.0).epsilon(1e-9));
    for (Eigen::Index j = 0; j < 5; ++j) {
        if (j > 0) CHECK(pca.eigenvalues(j) <= pca.eigenvalues(j - 1));
        Eigen::Index arg = 0;
        pca.components.col(j).cwiseAbs().maxCoeff(&arg);
        CHECK(pca.components(arg, j) > 0.0);
    }

    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK(error_code_of([&] { pca_corr(asym); }) == ErrorCode::NotSymmetric);
}

}  // TEST_SUITE
