#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "ratedml/csv.hpp"
#include "ratedml/panel_data.hpp"
#include "ratedml/rng.hpp"

using namespace ratedml;
using testing::error_code_of;
using testing::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

TimeSeriesMatrix ramp(int rows, std::vector<std::string> names) {
    std::vector<std::vector<double>> vals;
    for (std::size_t c = 0; c < names.size(); ++c) {
        std::vector<double> col;
        for (int t = 0; t < rows; ++t) col.push_back(100.0 * static_cast<double>(c + 1) + t);
        vals.push_back(col);
    }
    return TimeSeriesMatrix::from_start(Month::of(2000, 1), std::move(names), std::move(vals));
}

Series flat_series(const TimeSeriesMatrix& like, double start) {
    Series s{"rate", like.time_index(), {}};
    for (std::size_t t = 0; t < like.rows(); ++t) s.values.push_back(start + 0.5 * static_cast<double>(t));
    return s;
}

}  // namespace

TEST_SUITE("panel_data") {

TEST_CASE("month keys") {
    CHECK(Month::parse("1986-02").str() == "1986-02");
    CHECK(Month::parse("1986-12") + 1 == Month::of(1987, 1));
    CHECK(Month::of(1990, 4) - Month::of(1990, 1) == 3);
    CHECK(error_code_of([] { Month::parse("1986-13"); }) == ErrorCode::UnparseableTime);
    CHECK(error_code_of([] { Month::parse("86-01"); }) == ErrorCode::UnparseableTime);
}

TEST_CASE("load a small TSCS file with a blank cell") {
    TempDir dir;
    write(dir / "f.csv", "date,F1,F2\n2000-01,0.1,0.2\n2000-02,,0.3\n2000-03,0.4,0.5\n");
    const auto m = load_tscs_csv(dir / "f.csv");
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 2);
    CHECK(m.missing_count() == 1);
    CHECK_FALSE(m.at(1, 0).has_value());
    CHECK(*m.at(2, 1) == doctest::Approx(0.5));
    CHECK(m.columns() == std::vector<std::string>{"F1", "F2"});
}

TEST_CASE("load errors") {
    TempDir dir;
    write(dir / "order.csv", "date,F1\n1986-02,1\n1986-01,2\n");
    CHECK(error_code_of([&] { load_tscs_csv(dir / "order.csv"); }) == ErrorCode::NonMonotoneTime);
    write(dir / "gap.csv", "date,F1\n1986-01,1\n1986-03,2\n");
    CHECK(error_code_of([&] { load_tscs_csv(dir / "gap.csv"); }) == ErrorCode::NonMonotoneTime);
    write(dir / "ragged.csv", "date,F1,F2\n1986-01,1\n");
    CHECK(error_code_of([&] { load_tscs_csv(dir / "ragged.csv"); }) == ErrorCode::MalformedRow);
    write(dir / "dup.csv", "date,F1,F1\n1986-01,1,2\n");
    CHECK(error_code_of([&] { load_tscs_csv(dir / "dup.csv"); }) == ErrorCode::DuplicateColumn);
    write(dir / "time.csv", "date,F1\n1986/01,1\n");
    CHECK(error_code_of([&] { load_tscs_csv(dir / "time.csv"); }) == ErrorCode::UnparseableTime);
}

TEST_CASE("passive-universe shape: 433 lines by 1949 columns") {
    TempDir dir;
    std::string text = "date";
    for (int f = 0; f < 1948; ++f) text += ",P" + std::to_string(f);
    text += "\n";
    Month m = Month::of(1986, 1);
    for (int r = 0; r < 432; ++r, m = m + 1) {
        text += m.str();
        for (int f = 0; f < 1948; ++f) text += (f + r) % 7 == 0 ? "," : ",0.01";
        text += "\n";
    }
    write(dir / "passive.csv", text);
    const auto tscs = load_tscs_csv(dir / "passive.csv");
    CHECK(tscs.rows() == 432);
    CHECK(tscs.cols() == 1948);
}

TEST_CASE("CSV round trip preserves values and missing cells") {
    TempDir dir;
    Rng rng(11);
    std::vector<std::vector<double>> vals(3, std::vector<double>(15));
    for (auto& c : vals) {
        for (auto& v : c) v = rng.uniform() < 0.2 ? kMissing : rng.normal() * 1e-3;
    }
    const auto m = TimeSeriesMatrix::from_start(Month::of(1999, 11), {"a", "b", "c"}, vals);
    write_tscs_csv(m, dir / "rt.csv");
    const auto back = load_tscs_csv(dir / "rt.csv");
    REQUIRE(back.rows() == m.rows());
    CHECK(back.time_index() == m.time_index());
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t t = 0; t < 15; ++t) {
            const double a = m.column(c)[t], b = back.column(c)[t];
            CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
        }
    }
}

TEST_CASE("fund filter") {
    std::vector<FundMeta> catalog;
    for (double aum : {10.0, 20.0, 50.0}) {
        FundMeta f;
        f.ticker = "T" + std::to_string(static_cast<int>(aum));
        f.aum_musd = aum;
        f.inception = Month::of(2000, 1);
        catalog.push_back(f);
    }
    FundCriteria c;
    c.min_aum = 20.0;
    const auto kept = filter_funds(catalog, c);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].ticker == "T20");
    CHECK(kept[1].ticker == "T50");

    FundCriteria none;
    none.min_aum = 1e9;
    CHECK(filter_funds(catalog, none).empty());
    CHECK(filter_funds(filter_funds(catalog, c), c).size() == kept.size());
}

TEST_CASE("staged filters shrink a synthetic catalog monotonically") {
    Rng rng(3);
    std::vector<FundMeta> catalog;
    for (int i = 0; i < 400; ++i) {
        FundMeta f;
        f.ticker = "F" + std::to_string(i);
        f.asset_class = rng.uniform() < 0.4 ? AssetClass::FixedIncome : AssetClass::Equity;
        f.managed = rng.uniform() < 0.7 ? Management::Active : Management::Passive;
        f.aum_musd = 100.0 * rng.uniform();
        f.inception = Month::of(1980, 1) + static_cast<int>(rng.below(480));
        catalog.push_back(f);
    }
    std::vector<std::size_t> counts{catalog.size()};
    FundCriteria c;
    c.managed = Management::Passive;
    counts.push_back(filter_funds(catalog, c).size());
    c.asset_classes = {AssetClass::Equity};
    counts.push_back(filter_funds(catalog, c).size());
    c.min_aum = 20.0;
    counts.push_back(filter_funds(catalog, c).size());
    c.min_inception = Month::of(1990, 1);
    counts.push_back(filter_funds(catalog, c).size());
    for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i] <= counts[i - 1]);
    CHECK(counts.back() < counts.front());
}

TEST_CASE("fund metadata CSV") {
    TempDir dir;
    write(dir / "m.csv", "ticker,asset_class,inception,aum_musd,managed\nAAA,Equity,1999-04,25.5,Passive\nBBB,FixedIncome,2001-01,3,Active\n");
    const auto meta = load_fund_meta_csv(dir / "m.csv");
    REQUIRE(meta.size() == 2);
    CHECK(meta[0].managed == Management::Passive);
    CHECK(meta[1].asset_class == AssetClass::FixedIncome);
    CHECK(meta[0].inception == Month::of(1999, 4));
    write_fund_meta_csv(meta, dir / "m2.csv");
    const auto again = load_fund_meta_csv(dir / "m2.csv");
    CHECK(again[0].aum_musd == 25.5);

    write(dir / "bad.csv", "ticker,class\nAAA,Equity\n");
    CHECK(error_code_of([&] { load_fund_meta_csv(dir / "bad.csv"); }) == ErrorCode::MalformedRow);
}

TEST_CASE("quarterly to monthly") {
    const std::vector<TimedValue> q{{Month::of(1990, 1), 4.0}, {Month::of(1990, 4), 7.0}};
    const auto rep = quarterly_to_monthly(q, ResampleMode::Repeat);
    REQUIRE(rep.size() == 6);
    CHECK(rep[0].value == 4.0);
    CHECK(rep[2].value == 4.0);
    CHECK(rep[3].value == 7.0);
    CHECK(rep.back().time == Month::of(1990, 6));

    const auto lin = quarterly_to_monthly(q, ResampleMode::Interpolate);
    REQUIRE(lin.size() == 4);
    CHECK(lin[1].value == doctest::Approx(5.0));
    CHECK(lin[2].value == doctest::Approx(6.0));
    CHECK(lin[3].value == 7.0);
    CHECK(lin.back().time == Month::of(1990, 4));

    const std::vector<TimedValue> flat{{Month::of(2000, 1), 2.5}, {Month::of(2000, 4), 2.5}, {Month::of(2000, 7), 2.5}};
    for (auto mode : {ResampleMode::Repeat, ResampleMode::Interpolate}) {
        for (const auto& tv : quarterly_to_monthly(flat, mode)) CHECK(tv.value == 2.5);
    }

    const std::vector<TimedValue> bad{{Month::of(1990, 1), 1.0}, {Month::of(1990, 3), 2.0}};
    CHECK(error_code_of([&] { quarterly_to_monthly(bad, ResampleMode::Repeat); }) == ErrorCode::IrregularSpacing);
    const std::vector<TimedValue> one{{Month::of(1990, 1), 1.0}};
    CHECK(error_code_of([&] { quarterly_to_monthly(one, ResampleMode::Interpolate); }) == ErrorCode::TooFewPoints);
}

TEST_CASE("repeat mode downsampled at quarter starts reproduces the input") {
    Rng rng(5);
    std::vector<TimedValue> q;
    for (int i = 0; i < 12; ++i) q.push_back({Month::of(1995, 1) + 3 * i, rng.normal()});
    const auto m = quarterly_to_monthly(q, ResampleMode::Repeat);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(m[3 * i] == q[i]);
}

TEST_CASE("panel construction row counts") {
    const auto funds = ramp(10, {"A", "B"});
    const auto controls = ramp(10, {"c1"});
    const auto d = flat_series(funds, 1.0);
    CHECK(to_panel(funds, d, controls, 0).rows.size() == 20);
    const auto p7 = to_panel(funds, d, controls, 7);
    CHECK(p7.rows.size() == 6);
    CHECK(p7.x_names.size() == 1 + 7 * 3);
    CHECK(p7.x_names[1] == "y_lag1");
    CHECK(p7.x_names[8] == "rate_lag1");
    CHECK(p7.x_names[15] == "c1_lag1");
    CHECK(p7.rows.front().unit_id == "A");
    CHECK(p7.rows.front().time == Month::of(2000, 8));
    CHECK(p7.rows.front().x[1] == funds.column(0)[6]);
    p7.validate();
}

TEST_CASE("a missing return removes that fund's windows only") {
    auto vals = std::vector<std::vector<double>>{std::vector<double>(10, 0.1), std::vector<double>(10, 0.2)};
    vals[0][4] = kMissing;  // month 5
    const auto funds = TimeSeriesMatrix::from_start(Month::of(2000, 1), {"A", "B"}, vals);
    const auto controls = ramp(10, {"c1"});
    const auto panel = to_panel(funds, flat_series(funds, 0.0), controls, 1);
    std::vector<Month> a_months;
    for (const auto& r : panel.rows) {
        if (r.unit_id == "A") a_months.push_back(r.time);
    }
    CHECK(a_months.size() == 7);
    for (const auto& m : a_months) {
        CHECK(m != Month::of(2000, 5));
        CHECK(m != Month::of(2000, 6));
    }
    CHECK(panel.rows.size() == 7 + 9);
}

TEST_CASE("panel row count matches brute-force window enumeration") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const int T = 2 + static_cast<int>(rng.below(4));
        const int F = 1 + static_cast<int>(rng.below(5));
        const int p = static_cast<int>(rng.below(static_cast<std::uint64_t>(T)));
        std::vector<std::vector<double>> vals(static_cast<std::size_t>(F), std::vector<double>(static_cast<std::size_t>(T)));
        std::vector<std::string> names;
        for (int f = 0; f < F; ++f) {
            names.push_back("F" + std::to_string(f));
            for (auto& v : vals[static_cast<std::size_t>(f)]) v = rng.uniform() < 0.25 ? kMissing : rng.normal();
        }
        const auto funds = TimeSeriesMatrix::from_start(Month::of(2000, 1), names, vals);
        const auto controls = ramp(T, {"c"});
        std::size_t expected = 0;
        for (int f = 0; f < F; ++f) {
            for (int t = p; t < T; ++t) {
                bool ok = true;
                for (int j = 0; j <= p; ++j) ok = ok && !std::isnan(vals[static_cast<std::size_t>(f)][static_cast<std::size_t>(t - j)]);
                expected += ok;
            }
        }
        const auto serial = to_panel(funds, flat_series(funds, 0.0), controls, p, Exec::Serial);
        const auto parallel = to_panel(funds, flat_series(funds, 0.0), controls, p, Exec::Parallel);
        CHECK(serial.rows.size() == expected);
        REQUIRE(parallel.rows.size() == serial.rows.size());
        for (std::size_t i = 0; i < serial.rows.size(); ++i) {
            CHECK(parallel.rows[i].unit_id == serial.rows[i].unit_id);
            CHECK(parallel.rows[i].time == serial.rows[i].time);
        }
    }
}

TEST_CASE("panel rejects a mismatched index") {
    const auto funds = ramp(10, {"A"});
    const auto controls = ramp(9, {"c1"});
    CHECK(error_code_of([&] { to_panel(funds, flat_series(funds, 0.0), controls, 1); }) == ErrorCode::IndexMismatch);
}

TEST_CASE("differencing and alignment") {
    const auto m = ramp(5, {"x"});
    const auto d = difference_columns(m);
    CHECK(d.rows() == 4);
    CHECK(d.time_index().front() == Month::of(2000, 2));
    for (double v : d.column(0)) CHECK(v == 1.0);
    const auto other = TimeSeriesMatrix::from_start(Month::of(2000, 3), {"y"}, {{1, 2, 3, 4, 5, 6}});
    auto [a, b] = align_common(m, other);
    CHECK(a.rows() == 3);
    CHECK(b.time_index() == a.time_index());
}

}  // TEST_SUITE
