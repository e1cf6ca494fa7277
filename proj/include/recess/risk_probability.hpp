#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "recess/classifier_engine.hpp"
#include "recess/series.hpp"

namespace recess::risk {

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double x) noexcept;

/**
 * @brief Probability that the current recession started by month t.
 *
 * Zero in expansion. Otherwise Phi((t + mu - d) / sigma) with d the most
 * recent detection. Throws DegenerateError when in recession with sigma <= 0
 * or with no detection on record.
 */
[[nodiscard]] double classifier_probability(bool in_recession,
                                            std::optional<MonthIndex> last_detection, double mu,
                                            double sigma, MonthIndex t);

/// Equal-weight mean; throws EmptyError on no inputs.
[[nodiscard]] double ensemble_probability(std::span<const double> probabilities);

/// One classifier frozen with its training-window error statistics.
struct TrainedClassifier {
    engine::ClassifierSpec spec;
    double mu = 0.0;
    double sigma = 0.0;
    std::vector<MonthIndex> detections;  ///< training-window detections

    bool operator==(const TrainedClassifier&) const = default;
};

/// The trained artifact: members in canonical spec order plus the window they were fit on.
struct Ensemble {
    MonthWindow train_window;
    double sigma_max = 3.0;
    engine::EngineOptions options;
    std::vector<TrainedClassifier> members;
};

[[nodiscard]] nlohmann::ordered_json to_json(const Ensemble& ensemble);
/// Throws ConfigError on a malformed document.
[[nodiscard]] Ensemble ensemble_from_json(const nlohmann::json& j);
void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble);
[[nodiscard]] Ensemble load_ensemble(const std::filesystem::path& path);

struct ProbabilityTimeline {
    MonthIndex start;
    std::vector<std::vector<double>> per_classifier;  ///< K rows, one value per month
    std::vector<double> ensemble;

    [[nodiscard]] std::size_t months() const noexcept { return ensemble.size(); }
};

/**
 * @brief Per-classifier and ensemble probabilities for every month of `range`.
 *
 * Each machine starts in expansion at the training-window start, runs through
 * the training window and is resumed over later months, so states that are
 * open at the training end carry into the out-of-sample period. `second` is
 * null for single-series ensembles. Throws AlignmentError when range starts
 * before the training window or exceeds the data.
 */
[[nodiscard]] ProbabilityTimeline probability_timeline(const Ensemble& ensemble,
                                                       const MonthlySeries& first,
                                                       const MonthlySeries* second,
                                                       MonthWindow range);

/// Writes `date,p_ensemble,p_1..p_K`.
void write_timeline(std::ostream& out, const ProbabilityTimeline& timeline);
void save_timeline(const std::filesystem::path& path, const ProbabilityTimeline& timeline);

}  // namespace recess::risk
