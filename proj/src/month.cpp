#include "recess/month.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace recess {

MonthIndex MonthIndex::from_year_month(int year, int month) {
    if (month < 1 || month > 12) {
        throw std::invalid_argument("month out of range: " + std::to_string(month));
    }
    return from_serial(year * 12 + (month - 1));
}

MonthIndex MonthIndex::parse(std::string_view text) {
    // Strict YYYY-MM.
    if (text.size() != 7 || text[4] != '-') {
        throw std::invalid_argument("expected YYYY-MM, got '" + std::string(text) + "'");
    }
    int year = 0;
    int month = 0;
    auto [py, ey] = std::from_chars(text.data(), text.data() + 4, year);
    auto [pm, em] = std::from_chars(text.data() + 5, text.data() + 7, month);
    if (ey != std::errc{} || py != text.data() + 4 || em != std::errc{} ||
        pm != text.data() + 7) {
        throw std::invalid_argument("expected YYYY-MM, got '" + std::string(text) + "'");
    }
    return from_year_month(year, month);
}

std::string MonthIndex::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
    return buf;
}

}  // namespace recess
