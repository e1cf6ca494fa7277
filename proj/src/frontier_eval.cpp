#include "recess/frontier_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recess/errors.hpp"

namespace recess::frontier {

std::vector<std::int32_t> detection_errors(std::span<const MonthIndex> detections,
                                           std::span<const MonthIndex> starts) {
    if (detections.size() != starts.size()) {
        throw NotPerfectError(std::to_string(detections.size()) + " detections for " +
                              std::to_string(starts.size()) + " events");
    }
    std::vector<std::int32_t> errors(detections.size());
    for (std::size_t j = 0; j < errors.size(); ++j) {
        errors[j] = detections[j] - starts[j];
    }
    return errors;
}

std::vector<std::int32_t> detection_errors(const engine::DetectionOutcome& outcome,
                                           const RecessionCalendar& calendar) {
    const auto starts = calendar.starts_in(outcome.window);
    return detection_errors(outcome.detections, starts);
}

ErrorStats stats_from_moments(std::int64_t count, std::int64_t sum, std::int64_t sum_squares) {
    if (count <= 0) {
        throw EmptyError("no detection errors");
    }
    // J^2 * variance = J * sum(e^2) - (sum e)^2, exact in integers.
    const std::int64_t scaled_var = count * sum_squares - sum * sum;
    const double j = static_cast<double>(count);
    return ErrorStats{static_cast<double>(sum) / j,
                      std::sqrt(static_cast<double>(scaled_var)) / j};
}

ErrorStats stats(std::span<const std::int32_t> errors) {
    std::int64_t sum = 0;
    std::int64_t sq = 0;
    for (auto e : errors) {
        sum += e;
        sq += static_cast<std::int64_t>(e) * e;
    }
    return stats_from_moments(static_cast<std::int64_t>(errors.size()), sum, sq);
}

std::vector<std::size_t> pareto_indices(std::span<const StatPoint> points) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].mu != points[b].mu) return points[a].mu < points[b].mu;
        return points[a].sigma < points[b].sigma;
    });

    std::vector<std::size_t> out;
    double best_sigma = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < order.size()) {
        // Group of equal mu; its first entries carry the group's minimal sigma.
        const double mu = points[order[i]].mu;
        const double sigma = points[order[i]].sigma;
        std::size_t j = i;
        while (j < order.size() && points[order[j]].mu == mu) ++j;
        if (sigma < best_sigma) {
            for (std::size_t k = i; k < j && points[order[k]].sigma == sigma; ++k) {
                out.push_back(order[k]);
            }
            best_sigma = sigma;
        }
        i = j;
    }
    return out;
}

Frontier pareto_frontier(std::span<const ClassifierStats> stats) {
    std::vector<StatPoint> pts(stats.size());
    std::transform(stats.begin(), stats.end(), pts.begin(),
                   [](const ClassifierStats& s) { return StatPoint{s.mu, s.sigma}; });
    Frontier f;
    for (auto i : pareto_indices(pts)) {
        f.points.push_back(stats[i]);
    }
    return f;
}

std::vector<ClassifierStats> select_high_precision(const Frontier& frontier, double sigma_max) {
    std::vector<ClassifierStats> out;
    std::copy_if(frontier.points.begin(), frontier.points.end(), std::back_inserter(out),
                 [&](const ClassifierStats& s) { return s.sigma < sigma_max; });
    return out;
}

const ClassifierStats& select_by_preference(const Frontier& frontier, double lambda) {
    if (frontier.points.empty()) {
        throw EmptyFrontierError("cannot pick from an empty frontier");
    }
    const ClassifierStats* best = nullptr;
    double best_value = 0.0;
    for (const auto& s : frontier.points) {
        const double v = s.mu + lambda * s.sigma;
        if (best == nullptr || v < best_value || (v == best_value && s.spec < best->spec)) {
            best = &s;
            best_value = v;
        }
    }
    return *best;
}

double distance_to_frontier(StatPoint point, const Frontier& frontier) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : frontier.points) {
        best = std::min(best, std::hypot(point.mu - s.mu, point.sigma - s.sigma));
    }
    return best;
}

}  // namespace recess::frontier
