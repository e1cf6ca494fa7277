#include "recess/series.hpp"

#include <algorithm>
#include <cmath>

#include "recess/errors.hpp"

namespace recess {

MonthlySeries::MonthlySeries(MonthIndex start, std::vector<double> values)
    : start_(start), values_(std::move(values)) {
    if (values_.empty()) {
        throw EmptyError("monthly series must hold at least one value");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DomainError("non-finite value at " +
                              (start_ + static_cast<std::int32_t>(i)).to_string());
        }
    }
}

double MonthlySeries::at(MonthIndex m) const {
    if (!covers(m)) {
        throw AlignmentError(m.to_string() + " outside series range " + start().to_string() +
                             ".." + end().to_string());
    }
    return values_[offset_of(m)];
}

MonthlySeries MonthlySeries::slice(MonthWindow w) const {
    if (w.empty() || !covers(w)) {
        throw AlignmentError("window " + w.first.to_string() + ".." + w.last.to_string() +
                             " not covered by series " + start().to_string() + ".." +
                             end().to_string());
    }
    auto first = values_.begin() + static_cast<std::ptrdiff_t>(offset_of(w.first));
    return MonthlySeries(w.first, std::vector<double>(first, first + w.length()));
}

RecessionCalendar::RecessionCalendar(std::vector<MonthIndex> starts,
                                     std::vector<std::optional<MonthIndex>> ends)
    : starts_(std::move(starts)), ends_(std::move(ends)) {
    if (ends_.empty()) {
        ends_.resize(starts_.size());
    }
    if (ends_.size() != starts_.size()) {
        throw OrderError("calendar has " + std::to_string(starts_.size()) + " starts but " +
                         std::to_string(ends_.size()) + " ends");
    }
    for (std::size_t j = 0; j < starts_.size(); ++j) {
        if (j > 0 && !(starts_[j - 1] < starts_[j])) {
            throw OrderError("calendar starts not strictly increasing at " +
                             starts_[j].to_string());
        }
        if (ends_[j] && *ends_[j] < starts_[j]) {
            throw OrderError("calendar end " + ends_[j]->to_string() + " precedes start " +
                             starts_[j].to_string());
        }
    }
}

std::vector<MonthIndex> RecessionCalendar::starts_in(MonthWindow w) const {
    std::vector<MonthIndex> out;
    std::copy_if(starts_.begin(), starts_.end(), std::back_inserter(out),
                 [&](MonthIndex m) { return w.contains(m); });
    return out;
}

}  // namespace recess
