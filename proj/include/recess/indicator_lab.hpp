#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "recess/series.hpp"

namespace recess::indicators {

/// Exact multiple of 0.1, stored as an integer numerator so grid identity is exact.
struct Tenths {
    std::int32_t n = 0;

    [[nodiscard]] constexpr double value() const noexcept { return n / 10.0; }
    /// Throws GridError unless x is a multiple of 0.1 (to 1e-9).
    [[nodiscard]] static Tenths from_double(double x);
    /// Formats as `0.7`, `1.0`, ...
    [[nodiscard]] std::string to_string() const;

    constexpr auto operator<=>(const Tenths&) const = default;
};

enum class SmoothingMethod : std::uint8_t { simple, exponential };

/**
 * Smoothing stage. For `simple`, param is the window length minus one (0..11);
 * for `exponential`, param is the EMA weight in tenths (1..10).
 */
struct SmoothingSpec {
    SmoothingMethod method = SmoothingMethod::simple;
    std::int32_t param = 0;

    [[nodiscard]] static SmoothingSpec simple(int alpha) { return {SmoothingMethod::simple, alpha}; }
    [[nodiscard]] static SmoothingSpec exponential(Tenths alpha) {
        return {SmoothingMethod::exponential, alpha.n};
    }
    /// Throws GridError when param is off the grid for its method.
    void validate() const;
    /// `2` for simple, `0.5` for exponential.
    [[nodiscard]] std::string alpha_string() const;

    constexpr auto operator<=>(const SmoothingSpec&) const = default;
};

/**
 * How the two legs are joined. `linear` and `minmax` combine the unemployment
 * and vacancy legs; `rise` and `fall` are single-series indicators built with
 * the unemployment-style (increase from trailing minimum) or vacancy-style
 * (decrease from trailing maximum) transform, with no combination stage.
 */
enum class Combination : std::uint8_t { linear, minmax, rise, fall };

[[nodiscard]] std::string_view to_string(Combination c) noexcept;
[[nodiscard]] Combination parse_combination(std::string_view text);
[[nodiscard]] constexpr bool is_single_series(Combination c) noexcept {
    return c == Combination::rise || c == Combination::fall;
}

enum class Extremum : std::uint8_t { min, max };

/// One point of the indicator grid; field order is the canonical sort order.
struct IndicatorSpec {
    Combination combo = Combination::minmax;
    SmoothingSpec smoothing;
    std::int32_t beta = 12;
    Tenths gamma{10};
    Tenths delta{10};

    /// Throws GridError on any off-grid field.
    void validate() const;

    constexpr auto operator<=>(const IndicatorSpec&) const = default;
};

/// `combo=minmax,smooth=ema:0.5,beta=5,gamma=1.0,delta=1.0` (smooth=sma:<int> for simple).
[[nodiscard]] std::string format_spec(const IndicatorSpec& spec);
/// Inverse of format_spec; keys may come in any order, delta defaults to 1.0 for rise/fall.
[[nodiscard]] IndicatorSpec parse_spec(std::string_view text);

struct IndicatorSeries {
    IndicatorSpec spec;
    MonthlySeries series;
};

// --- Stage operations on monthly series -----------------------------------

/// Trailing mean over [t - alpha, t], truncated at the series start.
[[nodiscard]] MonthlySeries smooth_simple(const MonthlySeries& series, int alpha);
/// EMA seeded with the first observation; alpha must be one of 0.1, ..., 1.0.
[[nodiscard]] MonthlySeries smooth_exponential(const MonthlySeries& series, double alpha);
[[nodiscard]] MonthlySeries smooth(const MonthlySeries& series, const SmoothingSpec& spec);
/// Extremum over [t - beta, t] (current month included), truncated at the start.
[[nodiscard]] MonthlySeries trailing_extremum(const MonthlySeries& series, int beta, Extremum mode);
/// (high^g - low^g) / g, or ln(high / low) when g = 0. Requires high >= low >= 0,
/// and low > 0 when g < 1; violations throw DomainError naming the month.
[[nodiscard]] MonthlySeries boxcox_gap(const MonthlySeries& high, const MonthlySeries& low,
                                       double gamma);
/// linear: d*u + (1-d)*v; minmax: d*min(u,v) + (1-d)*max(u,v).
[[nodiscard]] MonthlySeries combine(const MonthlySeries& u_ind, const MonthlySeries& v_ind,
                                    Combination combo, double delta);

/// Full pipeline for a two-series spec (linear/minmax).
[[nodiscard]] IndicatorSeries materialize(const IndicatorSpec& spec, const MonthlySeries& u,
                                          const MonthlySeries& v);
/// Full pipeline for a single-series spec (rise/fall).
[[nodiscard]] IndicatorSeries materialize_single(const IndicatorSpec& spec,
                                                 const MonthlySeries& series);

// --- Grid --------------------------------------------------------------------

/// Explicit value lists per grid dimension. Defaults reproduce the full grid.
struct GridConfig {
    std::vector<Combination> combos{Combination::linear, Combination::minmax};
    std::vector<int> simple_alphas{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    std::vector<Tenths> ema_alphas{{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}, {10}};
    std::vector<int> betas{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18};
    std::vector<Tenths> gammas{{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}, {10}};
    std::vector<Tenths> deltas{{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}, {10}};

    /// Per-leg grid for one series: a single rise/fall combination with delta = 1.
    [[nodiscard]] static GridConfig single_series(Combination direction);
    /// Reads keys combos, simple_alpha, ema_alpha, beta, gamma, delta; omitted keys keep defaults.
    [[nodiscard]] static GridConfig from_json(const nlohmann::json& j);
    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

/**
 * @brief Validated, sorted, deduplicated grid with a dense canonical index.
 *
 * Index order is (combo, smoothing method, alpha, beta, gamma, delta)
 * ascending, so the first three coordinates form a "task" and gamma/delta
 * vary fastest within it.
 */
class IndicatorGrid {
public:
    /// Throws ConfigError when a dimension is empty and GridError on off-grid values.
    explicit IndicatorGrid(const GridConfig& config = {});

    [[nodiscard]] std::size_t size() const noexcept { return task_count() * per_task(); }
    /// Number of single-leg transforms: smoothings x betas x gammas.
    [[nodiscard]] std::size_t per_leg_count() const noexcept {
        return smoothings_.size() * betas_.size() * gammas_.size();
    }
    [[nodiscard]] std::size_t task_count() const noexcept {
        return combos_.size() * smoothings_.size() * betas_.size();
    }
    [[nodiscard]] std::size_t per_task() const noexcept { return gammas_.size() * deltas_.size(); }

    [[nodiscard]] IndicatorSpec spec_at(std::size_t index) const;
    /// Throws GridError when spec is not in this grid.
    [[nodiscard]] std::size_t index_of(const IndicatorSpec& spec) const;

    [[nodiscard]] const std::vector<Combination>& combos() const noexcept { return combos_; }
    [[nodiscard]] const std::vector<SmoothingSpec>& smoothings() const noexcept { return smoothings_; }
    [[nodiscard]] const std::vector<int>& betas() const noexcept { return betas_; }
    [[nodiscard]] const std::vector<Tenths>& gammas() const noexcept { return gammas_; }
    [[nodiscard]] const std::vector<Tenths>& deltas() const noexcept { return deltas_; }

    [[nodiscard]] bool single_series() const noexcept;

private:
    std::vector<Combination> combos_;
    std::vector<SmoothingSpec> smoothings_;
    std::vector<int> betas_;
    std::vector<Tenths> gammas_;
    std::vector<Tenths> deltas_;
};

/// Every spec of the grid in canonical order.
[[nodiscard]] std::vector<IndicatorSpec> enumerate_grid(const GridConfig& config = {});

// --- Span kernels (hot path of the grid sweep) ---------------------------------

namespace kernel {
void smooth_simple(std::span<const double> in, int alpha, std::span<double> out);
void smooth_exponential(std::span<const double> in, double alpha, std::span<double> out);
void smooth(std::span<const double> in, const SmoothingSpec& spec, std::span<double> out);
void trailing_extremum(std::span<const double> in, int beta, Extremum mode,
                       std::span<double> out);
/// start dates position 0 for error messages.
void boxcox_gap(std::span<const double> high, std::span<const double> low, Tenths gamma,
                std::span<double> out, MonthIndex start);
void combine(std::span<const double> u, std::span<const double> v, Combination combo,
             Tenths delta, std::span<double> out);
}  // namespace kernel

}  // namespace recess::indicators
