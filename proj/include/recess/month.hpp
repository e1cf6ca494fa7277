#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace recess {

/**
 * @brief Calendar month encoded as a serial count, year * 12 + (month - 1).
 *
 * Differences between two MonthIndex values are calendar-month counts, which
 * is the only time arithmetic the pipeline needs.
 */
class MonthIndex {
public:
    constexpr MonthIndex() = default;

    [[nodiscard]] static constexpr MonthIndex from_serial(std::int32_t serial) noexcept {
        MonthIndex m;
        m.serial_ = serial;
        return m;
    }

    /// Throws std::invalid_argument when month is outside 1..12.
    [[nodiscard]] static MonthIndex from_year_month(int year, int month);

    /// Parses `YYYY-MM`; throws std::invalid_argument on anything else.
    [[nodiscard]] static MonthIndex parse(std::string_view text);

    [[nodiscard]] constexpr std::int32_t serial() const noexcept { return serial_; }
    [[nodiscard]] constexpr int year() const noexcept { return floor_div(serial_, 12); }
    [[nodiscard]] constexpr int month() const noexcept { return serial_ - 12 * year() + 1; }

    [[nodiscard]] std::string to_string() const;

    constexpr auto operator<=>(const MonthIndex&) const = default;

    constexpr MonthIndex operator+(std::int32_t months) const noexcept {
        return from_serial(serial_ + months);
    }
    constexpr MonthIndex operator-(std::int32_t months) const noexcept {
        return from_serial(serial_ - months);
    }
    constexpr std::int32_t operator-(MonthIndex other) const noexcept {
        return serial_ - other.serial_;
    }
    constexpr MonthIndex& operator++() noexcept {
        ++serial_;
        return *this;
    }

private:
    static constexpr int floor_div(int a, int b) noexcept {
        return a >= 0 ? a / b : -((-a + b - 1) / b);
    }

    std::int32_t serial_ = 0;
};

/// Closed month interval [first, last].
struct MonthWindow {
    MonthIndex first;
    MonthIndex last;

    [[nodiscard]] constexpr bool contains(MonthIndex m) const noexcept {
        return first <= m && m <= last;
    }
    [[nodiscard]] constexpr std::int32_t length() const noexcept { return last - first + 1; }
    [[nodiscard]] constexpr bool empty() const noexcept { return last < first; }

    constexpr bool operator==(const MonthWindow&) const = default;
};

}  // namespace recess
