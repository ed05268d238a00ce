#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ratedml/exec.hpp"
#include "ratedml/linalg.hpp"
#include "ratedml/month.hpp"

namespace ratedml {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Wide time-series cross-section: a contiguous monthly index by named series.
/// Missing cells are stored as NaN.
class TimeSeriesMatrix {
public:
    TimeSeriesMatrix() = default;

    /// Validates the invariants: strictly increasing gap-free monthly index,
    /// unique column names, and values[c].size() == time_index.size().
    TimeSeriesMatrix(std::vector<Month> time_index, std::vector<std::string> columns,
                     std::vector<std::vector<double>> values);

    /// Convenience for a gap-free index starting at `start`.
    static TimeSeriesMatrix from_start(Month start, std::vector<std::string> columns,
                                       std::vector<std::vector<double>> values);

    std::size_t rows() const { return time_index_.size(); }
    std::size_t cols() const { return columns_.size(); }
    const std::vector<Month>& time_index() const { return time_index_; }
    const std::vector<std::string>& columns() const { return columns_; }

    std::span<const double> column(std::size_t c) const { return values_[c]; }
    std::span<const double> column(const std::string& name) const;
    std::optional<std::size_t> column_index(const std::string& name) const;
    std::optional<double> at(std::size_t row, std::size_t col) const;
    std::size_t missing_count() const;

    TimeSeriesMatrix select(const std::vector<std::string>& names) const;
    TimeSeriesMatrix drop(const std::vector<std::string>& names) const;
    /// Rows whose month lies in [first, last].
    TimeSeriesMatrix slice(Month first, Month last) const;

private:
    std::vector<Month> time_index_;
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> values_;
};

/// One named monthly series (e.g. the treatment).
struct Series {
    std::string name;
    std::vector<Month> time_index;
    std::vector<double> values;
};

Series to_series(const TimeSeriesMatrix& m, const std::string& name);

struct TscsSchema {
    std::string time_column = "date";
};

/// Errors: Io, MalformedRow, UnparseableTime, DuplicateColumn, NonMonotoneTime.
TimeSeriesMatrix load_tscs_csv(const std::filesystem::path& path, const TscsSchema& schema = {});
std::string format_tscs_csv(const TimeSeriesMatrix& m, const TscsSchema& schema = {});
void write_tscs_csv(const TimeSeriesMatrix& m, const std::filesystem::path& path, const TscsSchema& schema = {});

/// Column-wise first difference; the first month is dropped and any missing
/// operand yields a missing difference.
TimeSeriesMatrix difference_columns(const TimeSeriesMatrix& m);

/// Restricts both matrices to their overlapping months.
std::pair<TimeSeriesMatrix, TimeSeriesMatrix> align_common(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b);

// --- fund metadata --------------------------------------------------------

enum class AssetClass { FixedIncome, Equity };
enum class Management { Active, Passive };

struct FundMeta {
    std::string ticker;
    AssetClass asset_class = AssetClass::Equity;
    Month inception;
    double aum_musd = 0.0;
    Management managed = Management::Active;
};

AssetClass parse_asset_class(std::string_view text);
Management parse_management(std::string_view text);
std::string_view to_string(AssetClass a);
std::string_view to_string(Management m);

/// Reads `ticker,asset_class,inception,aum_musd,managed`. Rejects duplicate
/// tickers, empty tickers and negative AUM.
std::vector<FundMeta> load_fund_meta_csv(const std::filesystem::path& path);
void write_fund_meta_csv(const std::vector<FundMeta>& catalog, const std::filesystem::path& path);

struct FundCriteria {
    double min_aum = 0.0;                    ///< inclusive lower bound, million USD
    std::set<AssetClass> asset_classes;      ///< empty means any
    std::optional<Management> managed;
    std::optional<Month> min_inception;      ///< inclusive
};

/// Subset satisfying every criterion, catalog order preserved.
std::vector<FundMeta> filter_funds(const std::vector<FundMeta>& catalog, const FundCriteria& criteria);

// --- frequency conversion ------------------------------------------------

struct TimedValue {
    Month time;
    double value = 0.0;
    bool operator==(const TimedValue&) const = default;
};

enum class ResampleMode { Repeat, Interpolate };

/// Errors: IrregularSpacing (spacing != 3 months), TooFewPoints.
std::vector<TimedValue> quarterly_to_monthly(std::span<const TimedValue> quarterly, ResampleMode mode);

// --- long panel ----------------------------------------------------------

struct PanelRow {
    std::string unit_id;
    Month time;
    double y = 0.0;
    double d = 0.0;
    std::vector<double> x;
};

struct PanelTable {
    std::vector<std::string> x_names;
    std::vector<PanelRow> rows;

    std::size_t size() const { return rows.size(); }
    /// Throws InvalidArgument on duplicate (unit, time), ragged x or NaN.
    void validate() const;

    Matrix x_matrix() const;
    Vector y_vector() const;
    Vector d_vector() const;
    std::vector<std::string> unit_ids() const;
};

/// Long panel with one row per (fund, month) whose full lag window is
/// observed. x = contemporaneous controls, then y_lag1..p, <d>_lag1..p, and
/// <control>_lag1..p for each control. Rows are sorted by unit id, then month.
/// Errors: IndexMismatch when the three inputs do not share a monthly index.
PanelTable to_panel(const TimeSeriesMatrix& funds, const Series& treatment, const TimeSeriesMatrix& controls,
                    int lag_order, Exec exec = Exec::Parallel);

}  // namespace ratedml
