#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace ratedml {

/// Calendar month, stored as a running month count (year * 12 + month - 1).
class Month {
public:
    constexpr Month() = default;

    static constexpr Month of(int year, int month) { return Month(year * 12 + (month - 1)); }
    static constexpr Month from_index(int index) { return Month(index); }

    /// Parses "YYYY-MM"; throws Error{UnparseableTime}.
    static Month parse(std::string_view text);

    constexpr int index() const { return index_; }
    constexpr int year() const { return floor_div(index_, 12); }
    constexpr int month() const { return index_ - year() * 12 + 1; }

    std::string str() const;

    constexpr Month operator+(int months) const { return Month(index_ + months); }
    constexpr Month operator-(int months) const { return Month(index_ - months); }
    constexpr int operator-(Month other) const { return index_ - other.index_; }

    constexpr auto operator<=>(const Month&) const = default;

private:
    constexpr explicit Month(int index) : index_(index) {}
    static constexpr int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

    int index_ = 0;
};

}  // namespace ratedml
