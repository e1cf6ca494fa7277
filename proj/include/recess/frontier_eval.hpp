#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "recess/classifier_engine.hpp"
#include "recess/series.hpp"

namespace recess::frontier {

/// Signed month gaps d(j) - s(j), paired by rank; throws NotPerfectError on a count mismatch.
[[nodiscard]] std::vector<std::int32_t> detection_errors(std::span<const MonthIndex> detections,
                                                         std::span<const MonthIndex> starts);
[[nodiscard]] std::vector<std::int32_t> detection_errors(const engine::DetectionOutcome& outcome,
                                                         const RecessionCalendar& calendar);

struct ErrorStats {
    double mu = 0.0;
    double sigma = 0.0;

    bool operator==(const ErrorStats&) const = default;
};

/// Population mean and standard deviation (divisor J). Throws EmptyError on no errors.
[[nodiscard]] ErrorStats stats(std::span<const std::int32_t> errors);
/// Same, from exact integer moments: J errors with sum and sum of squares.
[[nodiscard]] ErrorStats stats_from_moments(std::int64_t count, std::int64_t sum,
                                            std::int64_t sum_squares);

struct ClassifierStats {
    engine::ClassifierSpec spec;
    std::vector<std::int32_t> errors;
    double mu = 0.0;
    double sigma = 0.0;
};

/// Members sorted by ascending mu (sigma therefore descending).
struct Frontier {
    std::vector<ClassifierStats> points;
};

/// Point in the anticipation-precision plane.
struct StatPoint {
    double mu;
    double sigma;
};

/**
 * @brief Indices of the non-dominated points (minimizing both coordinates).
 *
 * A point is dominated when another has mu <= and sigma <= with one strict.
 * Points tied on (mu, sigma) are all kept. Result is ascending mu; ties keep
 * their input order, so canonically ordered input stays canonical.
 */
[[nodiscard]] std::vector<std::size_t> pareto_indices(std::span<const StatPoint> points);

[[nodiscard]] Frontier pareto_frontier(std::span<const ClassifierStats> stats);

/// Frontier members with sigma strictly below sigma_max.
[[nodiscard]] std::vector<ClassifierStats> select_high_precision(
    const Frontier& frontier, double sigma_max = 3.0);

/// Member minimizing mu + lambda * sigma; ties go to the canonically first spec.
/// Throws EmptyFrontierError on an empty frontier.
[[nodiscard]] const ClassifierStats& select_by_preference(const Frontier& frontier, double lambda);

/// Smallest Euclidean distance in the (mu, sigma) plane to any member.
[[nodiscard]] double distance_to_frontier(StatPoint point, const Frontier& frontier);

}  // namespace recess::frontier
