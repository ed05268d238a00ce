#include "ratedml/panel_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "ratedml/csv.hpp"
#include "ratedml/error.hpp"

namespace ratedml {

namespace {

void check_index(const std::vector<Month>& index) {
    for (std::size_t i = 1; i < index.size(); ++i) {
        if (index[i] <= index[i - 1]) {
            fail(ErrorCode::NonMonotoneTime, "time index not increasing at " + index[i].str() + " (after " + index[i - 1].str() + ")");
        }
        if (index[i] - index[i - 1] != 1) {
            fail(ErrorCode::NonMonotoneTime, "gap in monthly index between " + index[i - 1].str() + " and " + index[i].str());
        }
    }
}

void check_unique(const std::vector<std::string>& names) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) fail(ErrorCode::DuplicateColumn, "duplicate column '" + n + "'");
    }
}

std::string lower(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c != ' ' && c != '_') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

}  // namespace

TimeSeriesMatrix::TimeSeriesMatrix(std::vector<Month> time_index, std::vector<std::string> columns,
                                   std::vector<std::vector<double>> values)
    : time_index_(std::move(time_index)), columns_(std::move(columns)), values_(std::move(values)) {
    check_index(time_index_);
    check_unique(columns_);
    if (values_.size() != columns_.size()) fail(ErrorCode::DimensionMismatch, "column count does not match value matrix");
    for (std::size_t c = 0; c < values_.size(); ++c) {
        if (values_[c].size() != time_index_.size()) {
            fail(ErrorCode::DimensionMismatch, "column '" + columns_[c] + "' length does not match time index");
        }
    }
}

TimeSeriesMatrix TimeSeriesMatrix::from_start(Month start, std::vector<std::string> columns,
                                              std::vector<std::vector<double>> values) {
    const std::size_t n = values.empty() ? 0 : values.front().size();
    std::vector<Month> index(n);
    for (std::size_t i = 0; i < n; ++i) index[i] = start + static_cast<int>(i);
    return TimeSeriesMatrix(std::move(index), std::move(columns), std::move(values));
}

std::optional<std::size_t> TimeSeriesMatrix::column_index(const std::string& name) const {
    auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns_.begin());
}

std::span<const double> TimeSeriesMatrix::column(const std::string& name) const {
    auto idx = column_index(name);
    if (!idx) fail(ErrorCode::MissingInput, "no column named '" + name + "'");
    return values_[*idx];
}

std::optional<double> TimeSeriesMatrix::at(std::size_t row, std::size_t col) const {
    double v = values_.at(col).at(row);
    if (std::isnan(v)) return std::nullopt;
    return v;
}

std::size_t TimeSeriesMatrix::missing_count() const {
    std::size_t n = 0;
    for (const auto& col : values_) n += static_cast<std::size_t>(std::count_if(col.begin(), col.end(), [](double v) { return std::isnan(v); }));
    return n;
}

TimeSeriesMatrix TimeSeriesMatrix::select(const std::vector<std::string>& names) const {
    std::vector<std::vector<double>> vals;
    for (const auto& n : names) {
        auto c = column(n);
        vals.emplace_back(c.begin(), c.end());
    }
    return TimeSeriesMatrix(time_index_, names, std::move(vals));
}

TimeSeriesMatrix TimeSeriesMatrix::drop(const std::vector<std::string>& names) const {
    std::vector<std::string> keep;
    for (const auto& c : columns_) {
        if (std::find(names.begin(), names.end(), c) == names.end()) keep.push_back(c);
    }
    return select(keep);
}

TimeSeriesMatrix TimeSeriesMatrix::slice(Month first, Month last) const {
    std::vector<Month> idx;
    std::size_t begin = 0;
    bool started = false;
    for (std::size_t i = 0; i < time_index_.size(); ++i) {
        if (time_index_[i] >= first && time_index_[i] <= last) {
            if (!started) begin = i, started = true;
            idx.push_back(time_index_[i]);
        }
    }
    std::vector<std::vector<double>> vals;
    for (const auto& col : values_) {
        vals.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(begin),
                          col.begin() + static_cast<std::ptrdiff_t>(begin + idx.size()));
    }
    return TimeSeriesMatrix(std::move(idx), columns_, std::move(vals));
}

Series to_series(const TimeSeriesMatrix& m, const std::string& name) {
    auto col = m.column(name);
    return Series{name, m.time_index(), std::vector<double>(col.begin(), col.end())};
}

TimeSeriesMatrix load_tscs_csv(const std::filesystem::path& path, const TscsSchema& schema) {
    auto table = csv::read(path);
    auto time_it = std::find(table.header.begin(), table.header.end(), schema.time_column);
    if (time_it == table.header.end()) {
        fail(ErrorCode::MalformedRow, path.string() + ": header has no time column '" + schema.time_column + "'");
    }
    const auto time_col = static_cast<std::size_t>(time_it - table.header.begin());

    std::vector<std::string> columns;
    std::vector<std::size_t> source;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == time_col) continue;
        columns.push_back(table.header[c]);
        source.push_back(c);
    }
    check_unique(columns);

    std::vector<Month> index;
    index.reserve(table.rows.size());
    std::vector<std::vector<double>> values(columns.size(), std::vector<double>(table.rows.size(), kMissing));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = path.string() + ":" + std::to_string(table.line_numbers[r]);
        try {
            index.push_back(Month::parse(row[time_col]));
        } catch (const Error& e) {
            throw e.with_context(where);
        }
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto& field = row[source[c]];
            if (field.empty()) continue;
            auto v = csv::parse_double(field);
            if (!v) fail(ErrorCode::MalformedRow, where + ": non-numeric cell '" + field + "' in column '" + columns[c] + "'");
            values[c][r] = *v;
        }
    }
    try {
        return TimeSeriesMatrix(std::move(index), std::move(columns), std::move(values));
    } catch (const Error& e) {
        throw e.with_context(path.string());
    }
}

std::string format_tscs_csv(const TimeSeriesMatrix& m, const TscsSchema& schema) {
    std::string out = schema.time_column;
    for (const auto& c : m.columns()) out += "," + c;
    out += '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out += m.time_index()[r].str();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out += ',';
            double v = m.column(c)[r];
            if (!std::isnan(v)) out += csv::format_double(v);
        }
        out += '\n';
    }
    return out;
}

void write_tscs_csv(const TimeSeriesMatrix& m, const std::filesystem::path& path, const TscsSchema& schema) {
    csv::write_file(path, format_tscs_csv(m, schema));
}

TimeSeriesMatrix difference_columns(const TimeSeriesMatrix& m) {
    if (m.rows() < 2) fail(ErrorCode::TooShort, "differencing needs at least 2 months");
    std::vector<std::vector<double>> vals;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        auto col = m.column(c);
        std::vector<double> diff(col.size() - 1);
        for (std::size_t i = 0; i + 1 < col.size(); ++i) diff[i] = col[i + 1] - col[i];  // NaN propagates
        vals.push_back(std::move(diff));
    }
    std::vector<Month> idx(m.time_index().begin() + 1, m.time_index().end());
    return TimeSeriesMatrix(std::move(idx), m.columns(), std::move(vals));
}

std::pair<TimeSeriesMatrix, TimeSeriesMatrix> align_common(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b) {
    if (a.rows() == 0 || b.rows() == 0) fail(ErrorCode::IndexMismatch, "cannot align an empty matrix");
    Month first = std::max(a.time_index().front(), b.time_index().front());
    Month last = std::min(a.time_index().back(), b.time_index().back());
    if (last < first) fail(ErrorCode::IndexMismatch, "matrices have no overlapping months");
    return {a.slice(first, last), b.slice(first, last)};
}

// --- fund metadata --------------------------------------------------------

AssetClass parse_asset_class(std::string_view text) {
    auto t = lower(text);
    if (t == "fixedincome") return AssetClass::FixedIncome;
    if (t == "equity") return AssetClass::Equity;
    fail(ErrorCode::MalformedRow, "unknown asset class '" + std::string(text) + "'");
}

Management parse_management(std::string_view text) {
    auto t = lower(text);
    if (t == "active") return Management::Active;
    if (t == "passive") return Management::Passive;
    fail(ErrorCode::MalformedRow, "unknown management style '" + std::string(text) + "'");
}

std::string_view to_string(AssetClass a) { return a == AssetClass::FixedIncome ? "FixedIncome" : "Equity"; }
std::string_view to_string(Management m) { return m == Management::Active ? "Active" : "Passive"; }

std::vector<FundMeta> load_fund_meta_csv(const std::filesystem::path& path) {
    auto table = csv::read(path);
    const std::vector<std::string> expected{"ticker", "asset_class", "inception", "aum_musd", "managed"};
    if (table.header != expected) {
        fail(ErrorCode::MalformedRow, path.string() + ": metadata header must be ticker,asset_class,inception,aum_musd,managed");
    }
    std::vector<FundMeta> out;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = path.string() + ":" + std::to_string(table.line_numbers[r]);
        try {
            FundMeta meta;
            meta.ticker = row[0];
            if (meta.ticker.empty()) fail(ErrorCode::MalformedRow, "empty ticker");
            if (!seen.insert(meta.ticker).second) fail(ErrorCode::DuplicateColumn, "duplicate ticker '" + meta.ticker + "'");
            meta.asset_class = parse_asset_class(row[1]);
            meta.inception = Month::parse(row[2]);
            auto aum = csv::parse_double(row[3]);
            if (!aum || *aum < 0.0 || std::isnan(*aum)) fail(ErrorCode::MalformedRow, "invalid aum_musd '" + row[3] + "'");
            meta.aum_musd = *aum;
            meta.managed = parse_management(row[4]);
            out.push_back(std::move(meta));
        } catch (const Error& e) {
            throw e.with_context(where);
        }
    }
    return out;
}

void write_fund_meta_csv(const std::vector<FundMeta>& catalog, const std::filesystem::path& path) {
    std::string out = "ticker,asset_class,inception,aum_musd,managed\n";
    for (const auto& f : catalog) {
        out += f.ticker + "," + std::string(to_string(f.asset_class)) + "," + f.inception.str() + "," +
               csv::format_double(f.aum_musd) + "," + std::string(to_string(f.managed)) + "\n";
    }
    csv::write_file(path, out);
}

std::vector<FundMeta> filter_funds(const std::vector<FundMeta>& catalog, const FundCriteria& criteria) {
    std::vector<FundMeta> out;
    for (const auto& f : catalog) {
        if (f.aum_musd < criteria.min_aum) continue;
        if (!criteria.asset_classes.empty() && !criteria.asset_classes.contains(f.asset_class)) continue;
        if (criteria.managed && f.managed != *criteria.managed) continue;
        if (criteria.min_inception && f.inception < *criteria.min_inception) continue;
        out.push_back(f);
    }
    return out;
}

// --- frequency conversion ------------------------------------------------

std::vector<TimedValue> quarterly_to_monthly(std::span<const TimedValue> quarterly, ResampleMode mode) {
    if (quarterly.empty()) fail(ErrorCode::TooFewPoints, "empty quarterly series");
    if (mode == ResampleMode::Interpolate && quarterly.size() < 2) {
        fail(ErrorCode::TooFewPoints, "interpolation needs at least 2 quarterly points");
    }
    for (std::size_t i = 1; i < quarterly.size(); ++i) {
        if (quarterly[i].time - quarterly[i - 1].time != 3) {
            fail(ErrorCode::IrregularSpacing, "quarterly spacing broken between " + quarterly[i - 1].time.str() + " and " +
                                                  quarterly[i].time.str());
        }
    }
    std::vector<TimedValue> out;
    if (mode == ResampleMode::Repeat) {
        for (const auto& q : quarterly) {
            for (int j = 0; j < 3; ++j) out.push_back({q.time + j, q.value});
        }
        return out;
    }
    for (std::size_t i = 0; i + 1 < quarterly.size(); ++i) {
        const double a = quarterly[i].value;
        const double b = quarterly[i + 1].value;
        out.push_back({quarterly[i].time, a});
        out.push_back({quarterly[i].time + 1, a + (b - a) / 3.0});
        out.push_back({quarterly[i].time + 2, a + 2.0 * (b - a) / 3.0});
    }
    out.push_back(quarterly.back());
    return out;
}

// --- long panel ----------------------------------------------------------

void PanelTable::validate() const {
    std::set<std::pair<std::string, int>> keys;
    for (const auto& r : rows) {
        if (!keys.insert({r.unit_id, r.time.index()}).second) {
            fail(ErrorCode::InvalidArgument, "duplicate panel key (" + r.unit_id + ", " + r.time.str() + ")");
        }
        if (r.x.size() != x_names.size()) fail(ErrorCode::InvalidArgument, "ragged control vector for " + r.unit_id);
        if (std::isnan(r.y) || std::isnan(r.d) || std::any_of(r.x.begin(), r.x.end(), [](double v) { return std::isnan(v); })) {
            fail(ErrorCode::InvalidArgument, "missing value in panel row (" + r.unit_id + ", " + r.time.str() + ")");
        }
    }
}

Matrix PanelTable::x_matrix() const {
    Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(x_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < x_names.size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].x[j];
    }
    return x;
}

Vector PanelTable::y_vector() const {
    Vector v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<Eigen::Index>(i)) = rows[i].y;
    return v;
}

Vector PanelTable::d_vector() const {
    Vector v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<Eigen::Index>(i)) = rows[i].d;
    return v;
}

std::vector<std::string> PanelTable::unit_ids() const {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (const auto& r : rows) ids.push_back(r.unit_id);
    return ids;
}

namespace {

std::vector<PanelRow> fund_rows(const std::string& unit, std::span<const double> y, std::span<const double> d,
                                const TimeSeriesMatrix& controls, const std::vector<char>& macro_window_ok,
                                const std::vector<Month>& index, int p) {
    std::vector<PanelRow> rows;
    const std::size_t n = y.size();
    const std::size_t k = controls.cols();
    const auto lag = static_cast<std::size_t>(p);
    for (std::size_t t = lag; t < n; ++t) {
        if (!macro_window_ok[t]) continue;
        bool ok = true;
        for (std::size_t j = 0; j <= lag && ok; ++j) ok = !std::isnan(y[t - j]);
        if (!ok) continue;

        PanelRow row;
        row.unit_id = unit;
        row.time = index[t];
        row.y = y[t];
        row.d = d[t];
        row.x.reserve(k + lag * (2 + k));
        for (std::size_t c = 0; c < k; ++c) row.x.push_back(controls.column(c)[t]);
        for (std::size_t j = 1; j <= lag; ++j) row.x.push_back(y[t - j]);
        for (std::size_t j = 1; j <= lag; ++j) row.x.push_back(d[t - j]);
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 1; j <= lag; ++j) row.x.push_back(controls.column(c)[t - j]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

PanelTable to_panel(const TimeSeriesMatrix& funds, const Series& treatment, const TimeSeriesMatrix& controls,
                    int lag_order, Exec exec) {
    if (lag_order < 0) fail(ErrorCode::InvalidArgument, "lag order must be >= 0");
    if (treatment.time_index != funds.time_index() || controls.time_index() != funds.time_index() ||
        treatment.values.size() != funds.rows()) {
        fail(ErrorCode::IndexMismatch, "funds, treatment and controls must share one monthly index");
    }
    const std::size_t n = funds.rows();
    const auto lag = static_cast<std::size_t>(lag_order);

    // Months where the treatment and every control are observed over the whole window.
    std::vector<char> macro_ok(n, 1);
    for (std::size_t t = 0; t < n; ++t) {
        if (std::isnan(treatment.values[t])) macro_ok[t] = 0;
        for (std::size_t c = 0; c < controls.cols() && macro_ok[t]; ++c) {
            if (std::isnan(controls.column(c)[t])) macro_ok[t] = 0;
        }
    }
    std::vector<char> window_ok(n, 0);
    for (std::size_t t = lag; t < n; ++t) {
        bool ok = true;
        for (std::size_t j = 0; j <= lag && ok; ++j) ok = macro_ok[t - j];
        window_ok[t] = ok;
    }

    PanelTable panel;
    panel.x_names = controls.columns();
    for (std::size_t j = 1; j <= lag; ++j) panel.x_names.push_back("y_lag" + std::to_string(j));
    for (std::size_t j = 1; j <= lag; ++j) panel.x_names.push_back(treatment.name + "_lag" + std::to_string(j));
    for (const auto& c : controls.columns()) {
        for (std::size_t j = 1; j <= lag; ++j) panel.x_names.push_back(c + "_lag" + std::to_string(j));
    }

    std::vector<std::size_t> order(funds.cols());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return funds.columns()[a] < funds.columns()[b]; });

    std::vector<std::vector<PanelRow>> per_fund(order.size());
    const auto nf = static_cast<std::ptrdiff_t>(order.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < nf; ++i) {
            const auto f = order[static_cast<std::size_t>(i)];
            per_fund[static_cast<std::size_t>(i)] =
                fund_rows(funds.columns()[f], funds.column(f), treatment.values, controls, window_ok, funds.time_index(), lag_order);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < nf; ++i) {
            const auto f = order[static_cast<std::size_t>(i)];
            per_fund[static_cast<std::size_t>(i)] =
                fund_rows(funds.columns()[f], funds.column(f), treatment.values, controls, window_ok, funds.time_index(), lag_order);
        }
    }

    std::size_t total = 0;
    for (const auto& v : per_fund) total += v.size();
    panel.rows.reserve(total);
    for (auto& v : per_fund) std::move(v.begin(), v.end(), std::back_inserter(panel.rows));
    return panel;
}

}  // namespace ratedml
