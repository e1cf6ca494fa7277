#include "recess/classifier_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "recess/errors.hpp"
#include "recess/parallel.hpp"

namespace recess::engine {

using indicators::Combination;
using indicators::Extremum;
using indicators::IndicatorGrid;
using indicators::IndicatorSpec;

Threshold Threshold::from_double(double x) {
    double scaled = x * 10000.0;
    double rounded = std::round(scaled);
    if (!std::isfinite(x) || std::abs(scaled - rounded) > 1e-6 || rounded <= 0.0) {
        throw GridError("threshold " + std::to_string(x) + " is not a positive multiple of 0.0001");
    }
    return Threshold{static_cast<std::int32_t>(rounded)};
}

std::string Threshold::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%d.%04d", ten_thousandths / 10000, ten_thousandths % 10000);
    return buf;
}

void ZetaGrid::validate() const {
    if (min.ten_thousandths <= 0 || max < min || step < 1) {
        throw GridError("threshold grid needs 0 < min <= max and step >= 0.0001");
    }
}

std::size_t ZetaGrid::size() const {
    validate();
    return static_cast<std::size_t>((max.ten_thousandths - min.ten_thousandths) / step + 1);
}

std::vector<Threshold> ZetaGrid::values() const {
    std::vector<Threshold> out;
    out.reserve(size());
    for (auto k = min.ten_thousandths; k <= max.ten_thousandths; k += step) {
        out.push_back(Threshold{k});
    }
    return out;
}

ZetaGrid ZetaGrid::from_values(double min, double max, double step) {
    ZetaGrid g{Threshold::from_double(min), Threshold::from_double(max),
               Threshold::from_double(step).ten_thousandths};
    g.validate();
    return g;
}

namespace {

void check_threshold(Threshold zeta, const EngineOptions& options) {
    if (zeta.ten_thousandths <= 0) {
        throw GridError("threshold must be positive");
    }
    if (!(zeta.value() > options.zero_epsilon)) {
        throw ConfigError("zero epsilon " + std::to_string(options.zero_epsilon) +
                          " must be below threshold " + zeta.to_string());
    }
}

// One month of the machine; returns true on an expansion -> recession switch.
inline bool step(MachineState& s, double x, double zeta, double epsilon) {
    if (s.in_recession) {
        if (x <= epsilon) {
            s.in_recession = false;
        }
        return false;
    }
    if (x >= zeta) {
        s.in_recession = true;
        return true;
    }
    return false;
}

}  // namespace

DetectionOutcome run_state_machine(const MonthlySeries& indicator, Threshold zeta,
                                   MonthWindow window, const EngineOptions& options,
                                   bool record_path) {
    check_threshold(zeta, options);
    if (window.empty() || !indicator.covers(window)) {
        throw AlignmentError("evaluation window " + window.first.to_string() + ".." +
                             window.last.to_string() + " not covered by indicator");
    }
    DetectionOutcome out{zeta, window, {}, {}, {}, options};
    const auto from = options.start_policy == StartPolicy::warm ? indicator.start() : window.first;
    const auto values = indicator.values();
    const double z = zeta.value();
    if (record_path) {
        out.state_path.reserve(static_cast<std::size_t>(window.length()));
    }
    for (auto m = from; m <= window.last; ++m) {
        const bool detected = step(out.state, values[indicator.offset_of(m)], z, options.zero_epsilon);
        if (detected) {
            out.state.last_detection = m;
            if (m >= window.first) {
                out.detections.push_back(m);
            }
        }
        if (record_path && m >= window.first) {
            out.state_path.push_back(out.state.in_recession ? 1 : 0);
        }
    }
    return out;
}

DetectionOutcome resume_state(const DetectionOutcome& outcome, const MonthlySeries& extension) {
    if (extension.start() != outcome.window.last + 1) {
        throw AlignmentError("resume expects data from " + (outcome.window.last + 1).to_string() +
                             ", got " + extension.start().to_string());
    }
    DetectionOutcome out = outcome;
    out.window.last = extension.end();
    const bool record_path = !outcome.state_path.empty();
    const double z = outcome.zeta.value();
    auto m = extension.start();
    for (double x : extension.values()) {
        if (step(out.state, x, z, outcome.options.zero_epsilon)) {
            out.state.last_detection = m;
            out.detections.push_back(m);
        }
        if (record_path) {
            out.state_path.push_back(out.state.in_recession ? 1 : 0);
        }
        ++m;
    }
    return out;
}

std::vector<Excursion> excursion_decompose(const MonthlySeries& indicator, double zero_epsilon) {
    std::vector<Excursion> out;
    auto m = indicator.start();
    for (double x : indicator.values()) {
        if (x > zero_epsilon) {
            if (out.empty() || out.back().last + 1 != m) {
                out.push_back(Excursion{m, m, {x}});
            } else {
                auto& e = out.back();
                e.last = m;
                e.prefix_running_max.push_back(std::max(e.prefix_running_max.back(), x));
            }
        }
        ++m;
    }
    return out;
}

// --- ThresholdSweep --------------------------------------------------------------

ThresholdSweep::ThresholdSweep(const MonthlySeries& indicator, MonthWindow window,
                               const EngineOptions& options) {
    reset(indicator.values(), indicator.start(), window, options);
}

void ThresholdSweep::reset(std::span<const double> values, MonthIndex start, MonthWindow window,
                           const EngineOptions& options) {
    const auto end = start + static_cast<std::int32_t>(values.size()) - 1;
    if (window.empty() || window.first < start || window.last > end) {
        throw AlignmentError("evaluation window " + window.first.to_string() + ".." +
                             window.last.to_string() + " not covered by indicator");
    }
    epsilon_ = options.zero_epsilon;
    origin_ = options.start_policy == StartPolicy::warm ? start : window.first;
    const auto offset = static_cast<std::size_t>(origin_ - start);
    const auto length = static_cast<std::int32_t>(window.last - origin_ + 1);
    const auto window_pos = static_cast<std::int32_t>(window.first - origin_);

    prefix_.resize(static_cast<std::size_t>(length));
    spans_.clear();
    max_sorted_.clear();
    pre_sorted_.clear();

    std::int32_t begin = -1;
    double run = 0.0;
    auto close = [&](std::int32_t stop) {
        if (stop > window_pos) {
            const double pre = begin < window_pos ? prefix_[static_cast<std::size_t>(window_pos - 1)] : 0.0;
            spans_.push_back(Span{begin, stop, run, pre});
        }
        begin = -1;
    };
    for (std::int32_t p = 0; p < length; ++p) {
        const double x = values[offset + static_cast<std::size_t>(p)];
        if (x > epsilon_) {
            if (begin < 0) {
                begin = p;
                run = x;
            } else if (x > run) {
                run = x;
            }
            prefix_[static_cast<std::size_t>(p)] = run;
        } else {
            if (begin >= 0) {
                close(p);
            }
            prefix_[static_cast<std::size_t>(p)] = 0.0;
        }
    }
    if (begin >= 0) {
        close(length);
    }
    for (const auto& s : spans_) {
        max_sorted_.push_back(s.max);
        if (s.pre_window_max > 0.0) {
            pre_sorted_.push_back(s.pre_window_max);
        }
    }
    std::sort(max_sorted_.begin(), max_sorted_.end());
    std::sort(pre_sorted_.begin(), pre_sorted_.end());
}

namespace {

std::size_t count_at_least(const std::vector<double>& sorted, double z) {
    return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), z));
}

}  // namespace

std::size_t ThresholdSweep::count(Threshold zeta) const {
    const double z = zeta.value();
    return count_at_least(max_sorted_, z) - count_at_least(pre_sorted_, z);
}

void ThresholdSweep::detections(Threshold zeta, std::vector<MonthIndex>& out) const {
    out.clear();
    const double z = zeta.value();
    for (const auto& s : spans_) {
        if (s.max >= z && s.pre_window_max < z) {
            auto first = prefix_.begin() + s.begin;
            auto hit = std::lower_bound(first, prefix_.begin() + s.end, z);
            out.push_back(origin_ + static_cast<std::int32_t>(hit - prefix_.begin()));
        }
    }
}

std::vector<MonthIndex> ThresholdSweep::detections(Threshold zeta) const {
    std::vector<MonthIndex> out;
    detections(zeta, out);
    return out;
}

void ThresholdSweep::perfect(const ZetaGrid& grid, std::size_t events,
                             std::vector<Threshold>& out) const {
    grid.validate();
    out.clear();
    if (!(grid.min.value() > epsilon_)) {
        throw ConfigError("zero epsilon must be below every threshold");
    }
    if (spans_.size() < events) {
        return;
    }
    std::size_t ia = 0;
    std::size_t ip = 0;
    const std::size_t na = max_sorted_.size();
    const std::size_t np = pre_sorted_.size();
    for (auto k = grid.min.ten_thousandths; k <= grid.max.ten_thousandths; k += grid.step) {
        const double z = Threshold{k}.value();
        while (ia < na && max_sorted_[ia] < z) ++ia;
        while (ip < np && pre_sorted_[ip] < z) ++ip;
        const std::size_t c = (na - ia) - (np - ip);
        if (c == events) {
            out.push_back(Threshold{k});
        } else if (np == 0 && c < events) {
            break;  // counts only fall from here on
        }
    }
}

std::vector<Threshold> ThresholdSweep::perfect(const ZetaGrid& grid, std::size_t events) const {
    std::vector<Threshold> out;
    perfect(grid, events, out);
    return out;
}

std::vector<ThresholdSummary> sweep_thresholds(const MonthlySeries& indicator, const ZetaGrid& grid,
                                               MonthWindow window, const EngineOptions& options,
                                               std::optional<std::size_t> keep_dates_for_count) {
    ThresholdSweep sweep(indicator, window, options);
    std::vector<ThresholdSummary> out;
    out.reserve(grid.size());
    for (auto zeta : grid.values()) {
        check_threshold(zeta, options);
        ThresholdSummary s{zeta, sweep.count(zeta), {}};
        if (!keep_dates_for_count || *keep_dates_for_count == s.count) {
            sweep.detections(zeta, s.detections);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ThresholdSummary> select_perfect(std::span<const ThresholdSummary> summaries,
                                             const RecessionCalendar& calendar, MonthWindow window) {
    const auto events = calendar.count_in(window);
    std::vector<ThresholdSummary> out;
    std::copy_if(summaries.begin(), summaries.end(), std::back_inserter(out),
                 [&](const ThresholdSummary& s) { return s.count == events; });
    return out;
}

// --- grid sweep -------------------------------------------------------------------

namespace {

struct PerfectRow {
    std::uint32_t index;
    Threshold zeta;
    std::uint32_t offset;  // into TaskResult::detections
};

struct TaskResult {
    std::vector<PerfectRow> rows;
    std::vector<std::uint32_t> offsets;
    std::vector<MonthIndex> detections;
    std::uint64_t indicators = 0;
};

}  // namespace

MonthlySeries materialize_indicator(const IndicatorSpec& spec, const MonthlySeries& first,
                                    const MonthlySeries* second) {
    if (indicators::is_single_series(spec.combo)) {
        return indicators::materialize_single(spec, first).series;
    }
    if (second == nullptr) {
        throw UsageError("two-series indicator needs both unemployment and vacancy");
    }
    return indicators::materialize(spec, first, *second).series;
}

SweepTotals sweep_grid(const IndicatorGrid& grid, const MonthlySeries& first,
                       const MonthlySeries* second, const SweepSettings& settings,
                       const PerfectSink& sink) {
    settings.zetas.validate();
    const bool single = grid.single_series();
    if (!single) {
        if (second == nullptr) {
            throw UsageError("two-series grid needs both unemployment and vacancy");
        }
        if (first.range() != second->range()) {
            throw AlignmentError("unemployment and vacancy must cover the same months");
        }
    }
    if (settings.window.empty() || !first.covers(settings.window)) {
        throw AlignmentError("evaluation window not covered by the data");
    }
    for (auto zeta : {settings.zetas.min}) {
        check_threshold(zeta, settings.options);
    }

    const auto n = first.size();
    const auto start = first.start();
    const auto nb = grid.betas().size();
    const auto ns = grid.smoothings().size();
    const auto per_task = grid.per_task();
    const auto zeta_count = settings.zetas.size();

    auto compute = [&](std::size_t task) {
        const auto combo = grid.combos()[task / (ns * nb)];
        const auto& smoothing = grid.smoothings()[(task / nb) % ns];
        const int beta = grid.betas()[task % nb];

        std::vector<double> s1(n), s2(n), ext1(n), ext2(n), leg1(n), leg2(n), ind(n);
        indicators::kernel::smooth(first.values(), smoothing, s1);
        if (single) {
            indicators::kernel::trailing_extremum(
                s1, beta, combo == Combination::rise ? Extremum::min : Extremum::max, ext1);
        } else {
            indicators::kernel::smooth(second->values(), smoothing, s2);
            indicators::kernel::trailing_extremum(s1, beta, Extremum::min, ext1);
            indicators::kernel::trailing_extremum(s2, beta, Extremum::max, ext2);
        }

        TaskResult result;
        ThresholdSweep sweep;
        std::vector<Threshold> perfect;
        std::vector<MonthIndex> dets;
        std::size_t index = task * per_task;
        for (auto gamma : grid.gammas()) {
            if (single) {
                if (combo == Combination::rise) {
                    indicators::kernel::boxcox_gap(s1, ext1, gamma, leg1, start);
                } else {
                    indicators::kernel::boxcox_gap(ext1, s1, gamma, leg1, start);
                }
            } else {
                indicators::kernel::boxcox_gap(s1, ext1, gamma, leg1, start);
                indicators::kernel::boxcox_gap(ext2, s2, gamma, leg2, start);
            }
            for (auto delta : grid.deltas()) {
                std::span<const double> values = leg1;
                if (!single) {
                    indicators::kernel::combine(leg1, leg2, combo, delta, ind);
                    values = ind;
                }
                sweep.reset(values, start, settings.window, settings.options);
                sweep.perfect(settings.zetas, settings.events, perfect);
                for (auto zeta : perfect) {
                    sweep.detections(zeta, dets);
                    // Neighbouring thresholds mostly share their dates; store each block once.
                    const auto events = static_cast<std::ptrdiff_t>(dets.size());
                    if (result.rows.empty() || result.rows.back().index != index ||
                        !std::equal(dets.begin(), dets.end(), result.detections.end() - events)) {
                        result.offsets.push_back(static_cast<std::uint32_t>(result.detections.size()));
                        result.detections.insert(result.detections.end(), dets.begin(), dets.end());
                    }
                    result.rows.push_back(PerfectRow{static_cast<std::uint32_t>(index), zeta,
                                                     result.offsets.back()});
                }
                ++result.indicators;
                ++index;
            }
        }
        return result;
    };

    SweepTotals totals;
    auto consume = [&](std::size_t, TaskResult r) {
        totals.indicators += r.indicators;
        totals.classifiers += r.indicators * zeta_count;
        totals.perfect += r.rows.size();
        const std::span<const MonthIndex> all(r.detections);
        for (const auto& row : r.rows) {
            sink(row.index, row.zeta, all.subspan(row.offset, settings.events));
        }
    };
    ordered_parallel_for<TaskResult>(grid.task_count(), settings.threads, compute, consume);
    return totals;
}

}  // namespace recess::engine
