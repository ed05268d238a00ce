#include "ratedml/month.hpp"

#include <charconv>
#include <cstdio>

#include "ratedml/error.hpp"

namespace ratedml {

Month Month::parse(std::string_view text) {
    auto bad = [&] { fail(ErrorCode::UnparseableTime, "cannot parse month '" + std::string(text) + "'"); };
    if (text.size() != 7 || text[4] != '-') bad();
    int year = 0;
    int month = 0;
    auto [p1, e1] = std::from_chars(text.data(), text.data() + 4, year);
    auto [p2, e2] = std::from_chars(text.data() + 5, text.data() + 7, month);
    if (e1 != std::errc() || p1 != text.data() + 4 || e2 != std::errc() || p2 != text.data() + 7) bad();
    if (month < 1 || month > 12) bad();
    return Month::of(year, month);
}

std::string Month::str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
    return buf;
}

}  // namespace ratedml
