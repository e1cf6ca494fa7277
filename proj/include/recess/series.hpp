#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "recess/month.hpp"

namespace recess {

/**
 * @brief Gap-free monthly series: value i is dated start + i.
 *
 * Construction validates the invariants (at least one value, all finite), so
 * every MonthlySeries in the program is well-formed.
 */
class MonthlySeries {
public:
    /// Throws EmptyError when values is empty and DomainError on non-finite values.
    MonthlySeries(MonthIndex start, std::vector<double> values);

    [[nodiscard]] MonthIndex start() const noexcept { return start_; }
    [[nodiscard]] MonthIndex end() const noexcept {
        return start_ + static_cast<std::int32_t>(values_.size()) - 1;
    }
    [[nodiscard]] MonthWindow range() const noexcept { return {start(), end()}; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    [[nodiscard]] bool covers(MonthIndex m) const noexcept { return range().contains(m); }
    [[nodiscard]] bool covers(MonthWindow w) const noexcept {
        return covers(w.first) && covers(w.last);
    }

    /// Value dated m; throws AlignmentError outside the range.
    [[nodiscard]] double at(MonthIndex m) const;
    /// Position of m in values(); m must be covered.
    [[nodiscard]] std::size_t offset_of(MonthIndex m) const noexcept {
        return static_cast<std::size_t>(m - start_);
    }

    /// Sub-series restricted to w; throws AlignmentError when w is not covered.
    [[nodiscard]] MonthlySeries slice(MonthWindow w) const;

    bool operator==(const MonthlySeries&) const = default;

private:
    MonthIndex start_;
    std::vector<double> values_;
};

/// Ordered event calendar. For recessions, starts are the first month after each peak.
class RecessionCalendar {
public:
    RecessionCalendar() = default;
    /// Throws OrderError unless starts strictly increase and every end >= its start.
    explicit RecessionCalendar(std::vector<MonthIndex> starts,
                               std::vector<std::optional<MonthIndex>> ends = {});

    [[nodiscard]] const std::vector<MonthIndex>& starts() const noexcept { return starts_; }
    [[nodiscard]] const std::vector<std::optional<MonthIndex>>& ends() const noexcept {
        return ends_;
    }
    [[nodiscard]] std::size_t size() const noexcept { return starts_.size(); }

    [[nodiscard]] std::vector<MonthIndex> starts_in(MonthWindow w) const;
    [[nodiscard]] std::size_t count_in(MonthWindow w) const { return starts_in(w).size(); }

    bool operator==(const RecessionCalendar&) const = default;

private:
    std::vector<MonthIndex> starts_;
    std::vector<std::optional<MonthIndex>> ends_;
};

}  // namespace recess
