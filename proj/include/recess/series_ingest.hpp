#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "recess/series.hpp"

namespace recess::ingest {

/**
 * @brief Reads a monthly CSV with header `date,<columns...>`.
 *
 * Dates are `YYYY-MM` in ascending order with no missing months. The named
 * column is returned; `value` is the canonical single-series column.
 *
 * @throws GapError on a missing month, FormatError on a malformed row or
 *         unknown column, EmptyError when the file holds no data rows.
 */
[[nodiscard]] MonthlySeries load_monthly_series(const std::filesystem::path& path,
                                                std::string_view column = "value");
[[nodiscard]] MonthlySeries parse_monthly_series(std::istream& in,
                                                 std::string_view column = "value");

/// Canonical writer: header `date,value`, shortest round-trip decimal values.
void write_monthly_series(std::ostream& out, const MonthlySeries& series);
void save_monthly_series(const std::filesystem::path& path, const MonthlySeries& series);

/// Shortest decimal text that parses back to exactly the same double.
[[nodiscard]] std::string format_value(double v);

/// 100 * count / labor_force over the overlapping months.
[[nodiscard]] MonthlySeries compute_rate(const MonthlySeries& count,
                                         const MonthlySeries& labor_force);

/// Re-dates every value one month later (JOLTS month-end stock to CPS reference week).
[[nodiscard]] MonthlySeries shift_forward_one_month(const MonthlySeries& series);

/**
 * @brief Joins two proxies of the same quantity at a whole-month anchor.
 *
 * Months before the anchor take early * (late[anchor] / early[anchor]);
 * the anchor month and everything after come from late unchanged.
 */
[[nodiscard]] MonthlySeries splice_scaled(const MonthlySeries& early, const MonthlySeries& late,
                                          MonthIndex anchor);

/// Restricts both series to their common months; throws AlignmentError if disjoint.
[[nodiscard]] std::pair<MonthlySeries, MonthlySeries> align(const MonthlySeries& a,
                                                            const MonthlySeries& b);

/// Calendar CSV with header `start,end`; `end` may be blank.
[[nodiscard]] RecessionCalendar load_calendar(const std::filesystem::path& path);
[[nodiscard]] RecessionCalendar parse_calendar(std::istream& in);
void write_calendar(std::ostream& out, const RecessionCalendar& calendar);
void save_calendar(const std::filesystem::path& path, const RecessionCalendar& calendar);

/// Validated unemployment/vacancy pair on a common month range, plus the event calendar.
struct Dataset {
    MonthlySeries unemployment;
    MonthlySeries vacancy;
    RecessionCalendar calendar;

    [[nodiscard]] MonthWindow range() const noexcept { return unemployment.range(); }
};

/// Aligns u and v and checks positivity (rates must be > 0 for log-type transforms).
[[nodiscard]] Dataset make_dataset(const MonthlySeries& unemployment, const MonthlySeries& vacancy,
                                   RecessionCalendar calendar);

/// Writes manifest.json plus canonical CSVs into dir (created if needed).
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
/// Reads a bundle written by save_dataset; `path` may be the directory or its manifest.json.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& path);

}  // namespace recess::ingest
