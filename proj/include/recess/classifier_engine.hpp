#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recess/indicator_lab.hpp"
#include "recess/series.hpp"

namespace recess::engine {

/// Detection threshold on the 0.0001 grid, stored as integer ten-thousandths.
struct Threshold {
    std::int32_t ten_thousandths = 0;

    [[nodiscard]] constexpr double value() const noexcept { return ten_thousandths / 10000.0; }
    /// Throws GridError unless x > 0 is a multiple of 0.0001 (to 1e-9).
    [[nodiscard]] static Threshold from_double(double x);
    /// Four decimals, e.g. `0.0023`.
    [[nodiscard]] std::string to_string() const;

    constexpr auto operator<=>(const Threshold&) const = default;
};

/// Arithmetic threshold grid {min, min + step, ..., <= max}; defaults to 0.0001..0.25.
struct ZetaGrid {
    Threshold min{1};
    Threshold max{2500};
    std::int32_t step = 1;

    /// Throws GridError when min > max, step < 1 or min <= 0.
    void validate() const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::vector<Threshold> values() const;
    [[nodiscard]] static ZetaGrid from_values(double min, double max, double step);
};

/**
 * Where the machine starts relative to the evaluation window. `fresh`
 * starts in expansion at the first window month; `warm` runs from the first
 * indicator month and only counts detections inside the window, so a
 * crossing just before the window suppresses one inside it.
 */
enum class StartPolicy : std::uint8_t { fresh, warm };

struct EngineOptions {
    /// Values <= epsilon count as "indicator back at 0". Must stay below every threshold.
    double zero_epsilon = 0.0;
    StartPolicy start_policy = StartPolicy::fresh;
};

struct MachineState {
    bool in_recession = false;
    std::optional<MonthIndex> last_detection;

    bool operator==(const MachineState&) const = default;
};

struct DetectionOutcome {
    Threshold zeta;
    MonthWindow window;
    std::vector<MonthIndex> detections;
    /// Recession flag per window month (only when requested).
    std::vector<std::uint8_t> state_path;
    MachineState state;
    EngineOptions options;
};

/**
 * @brief Reference expansion/recession machine.
 *
 * Expansion -> recession when i(t) >= zeta (a detection); recession ->
 * expansion when i(t) returns to 0; otherwise the state persists.
 * Throws AlignmentError when the window is not covered by the indicator.
 */
[[nodiscard]] DetectionOutcome run_state_machine(const MonthlySeries& indicator, Threshold zeta,
                                                 MonthWindow window,
                                                 const EngineOptions& options = {},
                                                 bool record_path = false);

/// Continues a finished run over `extension`, which must start the month after
/// outcome.window.last. Equivalent to one pass over the concatenated range.
[[nodiscard]] DetectionOutcome resume_state(const DetectionOutcome& outcome,
                                            const MonthlySeries& extension);

/// Maximal run of months with indicator > epsilon.
struct Excursion {
    MonthIndex first;
    MonthIndex last;
    std::vector<double> prefix_running_max;

    bool operator==(const Excursion&) const = default;
};

[[nodiscard]] std::vector<Excursion> excursion_decompose(const MonthlySeries& indicator,
                                                         double zero_epsilon = 0.0);

/**
 * @brief All-threshold evaluation of one indicator over a window.
 *
 * The indicator is cut into excursions once; each excursion carries its
 * running maximum, so the detection month for any threshold is a binary
 * search and counts for an ascending grid are a merge walk. Results equal
 * run_state_machine for every threshold. The object can be reset() for a
 * new indicator and keeps its buffers.
 */
class ThresholdSweep {
public:
    ThresholdSweep() = default;
    ThresholdSweep(const MonthlySeries& indicator, MonthWindow window,
                   const EngineOptions& options = {});

    void reset(std::span<const double> values, MonthIndex start, MonthWindow window,
               const EngineOptions& options = {});

    [[nodiscard]] std::size_t count(Threshold zeta) const;
    [[nodiscard]] std::vector<MonthIndex> detections(Threshold zeta) const;
    void detections(Threshold zeta, std::vector<MonthIndex>& out) const;

    /// Thresholds of `grid` whose in-window detection count equals `events`.
    void perfect(const ZetaGrid& grid, std::size_t events, std::vector<Threshold>& out) const;
    [[nodiscard]] std::vector<Threshold> perfect(const ZetaGrid& grid, std::size_t events) const;

    /// Excursions that can yield an in-window detection.
    [[nodiscard]] std::size_t excursion_count() const noexcept { return spans_.size(); }

private:
    struct Span {
        std::int32_t begin;  // positions into prefix_
        std::int32_t end;    // one past last
        double max;
        double pre_window_max;  // running max before the window (warm straddler), else 0
    };

    MonthIndex origin_;
    double epsilon_ = 0.0;
    std::vector<double> prefix_;
    std::vector<Span> spans_;
    std::vector<double> max_sorted_;
    std::vector<double> pre_sorted_;
};

struct ThresholdSummary {
    Threshold zeta;
    std::size_t count = 0;
    std::vector<MonthIndex> detections;

    bool operator==(const ThresholdSummary&) const = default;
};

/**
 * Per-threshold counts and detection dates. When keep_dates_for_count is set,
 * dates are only kept for thresholds whose count equals it (the perfect ones).
 */
[[nodiscard]] std::vector<ThresholdSummary> sweep_thresholds(
    const MonthlySeries& indicator, const ZetaGrid& grid, MonthWindow window,
    const EngineOptions& options = {}, std::optional<std::size_t> keep_dates_for_count = {});

/// Summaries whose count equals the number of calendar events inside the window.
[[nodiscard]] std::vector<ThresholdSummary> select_perfect(
    std::span<const ThresholdSummary> summaries, const RecessionCalendar& calendar,
    MonthWindow window);

// --- grid-wide sweep -------------------------------------------------------------

/// Indicator + threshold, the identity of one classifier.
struct ClassifierSpec {
    indicators::IndicatorSpec indicator;
    Threshold zeta;

    constexpr auto operator<=>(const ClassifierSpec&) const = default;
};

struct SweepSettings {
    ZetaGrid zetas;
    MonthWindow window;
    std::size_t events = 0;  ///< perfection target J
    EngineOptions options;
    unsigned threads = 0;  ///< 0 = hardware concurrency; affects speed only
};

struct SweepTotals {
    std::uint64_t indicators = 0;
    std::uint64_t classifiers = 0;
    std::uint64_t perfect = 0;
};

/// Called once per perfect classifier, in canonical (indicator index, zeta) order.
using PerfectSink = std::function<void(std::size_t indicator_index, Threshold zeta,
                                       std::span<const MonthIndex> detections)>;

/**
 * @brief Sweeps every (indicator, threshold) cell of the grid.
 *
 * For a two-series grid pass both series; for a single-series (rise/fall) grid
 * pass it as `first` and leave `second` null. Work is split into tasks of
 * (combo, smoothing, beta) and run in parallel; the sink always sees the same
 * sequence whatever the thread count.
 */
SweepTotals sweep_grid(const indicators::IndicatorGrid& grid, const MonthlySeries& first,
                       const MonthlySeries* second, const SweepSettings& settings,
                       const PerfectSink& sink);

/// Materializes one grid spec from the same inputs sweep_grid takes.
[[nodiscard]] MonthlySeries materialize_indicator(const indicators::IndicatorSpec& spec,
                                                  const MonthlySeries& first,
                                                  const MonthlySeries* second);

}  // namespace recess::engine
