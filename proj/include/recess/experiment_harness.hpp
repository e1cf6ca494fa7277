#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "recess/classifier_engine.hpp"
#include "recess/frontier_eval.hpp"
#include "recess/indicator_lab.hpp"
#include "recess/risk_probability.hpp"
#include "recess/series.hpp"

namespace recess::harness {

enum class Mode : std::uint8_t { train, backtest, placebo, single_series };

[[nodiscard]] std::string_view to_string(Mode mode) noexcept;
/// Throws ConfigError on an unknown name.
[[nodiscard]] Mode parse_mode(std::string_view text);

/// How classifiers tied on (mu, sigma) are kept on the frontier.
enum class FrontierTies : std::uint8_t { all, first };

struct RunConfig {
    Mode mode = Mode::train;

    // Inputs. A dataset bundle, or separate CSVs.
    std::filesystem::path dataset;
    std::filesystem::path unemployment;
    std::filesystem::path vacancy;
    std::filesystem::path calendar;
    std::filesystem::path series;  ///< single-series input
    std::string series_column = "value";
    std::filesystem::path announcements;  ///< optional start,announcement table

    MonthWindow train_window{MonthIndex::from_year_month(1929, 4),
                             MonthIndex::from_year_month(2021, 12)};
    /// Backtest test window runs train_end + 1 .. test_end; defaults to the data end.
    std::optional<MonthIndex> test_end;
    /// Sub-window for delay statistics; skipped unless inside the train window.
    MonthWindow sub_window{MonthIndex::from_year_month(1979, 1),
                           MonthIndex::from_year_month(2021, 12)};

    indicators::GridConfig grid;
    engine::ZetaGrid zetas;
    engine::EngineOptions options;
    double sigma_max = 3.0;
    FrontierTies ties = FrontierTies::all;

    /// Backtest: a test detection matches an event if start - lead <= d <= end.
    std::int32_t match_lead = 12;
    /// Used for events without an end month.
    std::int32_t default_duration = 12;

    std::filesystem::path placebo_calendar;
    bool placebo_random = false;
    std::size_t placebo_events = 15;
    std::uint64_t seed = 0;

    indicators::Combination direction = indicators::Combination::fall;
    unsigned threads = 0;

    /// Throws ConfigError on ill-ordered windows, bad ties/direction, or missing mode fields.
    void validate() const;

    /// Relative paths resolve against base_dir. Omitted keys keep defaults.
    [[nodiscard]] static RunConfig from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
    [[nodiscard]] static RunConfig load(const std::filesystem::path& path);
    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

/// Series and calendar a run operates on. `second` is empty for single-series runs.
struct Inputs {
    MonthlySeries first;
    std::optional<MonthlySeries> second;
    RecessionCalendar calendar;

    [[nodiscard]] const MonthlySeries* second_ptr() const noexcept {
        return second ? &*second : nullptr;
    }
};

/// Loads the series and calendar named by the config (calendar may be absent for placebo-random).
[[nodiscard]] Inputs load_inputs(const RunConfig& config);

struct Announcement {
    MonthIndex start;
    MonthIndex announced;
};
[[nodiscard]] std::vector<Announcement> load_announcements(const std::filesystem::path& path);
[[nodiscard]] std::vector<Announcement> parse_announcements(std::istream& in);

/// Seeded calendar of distinct, sorted months drawn uniformly from window.
[[nodiscard]] RecessionCalendar random_calendar(MonthWindow window, std::size_t events,
                                                std::uint64_t seed);

struct FrontierPoint {
    engine::ClassifierSpec spec;
    double mu = 0.0;
    double sigma = 0.0;
};

struct TestResult {
    std::vector<MonthIndex> detections;
    std::vector<std::int32_t> errors;  ///< matched detections only
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    bool in_recession_at_start = false;
};

struct MemberRow {
    engine::ClassifierSpec spec;
    double mu = 0.0;
    double sigma = 0.0;
    std::vector<MonthIndex> detections;
    std::vector<std::int32_t> errors;
    std::optional<TestResult> test;
};

/// Test-window error summary, averaged across classifiers.
struct TestAggregate {
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t classifiers = 0;
};

struct SubWindowReport {
    MonthWindow window;
    std::size_t events = 0;
    double mean_delay = 0.0;  ///< across ensemble members
    std::optional<double> announcement_mean;
    std::optional<double> announcement_std;
};

struct RunReport {
    Mode mode = Mode::train;
    std::string status = "ok";  ///< ok | empty-frontier | empty-ensemble
    MonthWindow train_window;
    std::vector<MonthIndex> event_starts;
    engine::SweepTotals totals;

    std::vector<FrontierPoint> frontier;
    std::vector<MemberRow> ensemble;
    std::size_t excluded_degenerate = 0;
    std::optional<frontier::ErrorStats> train_average;  ///< mean of member mu / sigma
    std::optional<SubWindowReport> sub_window;

    // backtest
    std::optional<MonthWindow> test_window;
    std::vector<MonthIndex> test_event_starts;
    std::string test_status;  ///< empty | no-events | ok | false-positive
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::optional<TestAggregate> test_average;

    // placebo
    std::optional<double> min_frontier_sigma;

    // single series
    std::optional<indicators::Combination> direction;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    /// Inverse of to_json; throws ConfigError on a malformed document.
    [[nodiscard]] static RunReport from_json(const nlohmann::json& j);
};

void save_report(const std::filesystem::path& path, const RunReport& report);
[[nodiscard]] RunReport load_report(const std::filesystem::path& path);

/// A finished run: the report plus what it was built from.
struct RunResult {
    RunReport report;
    risk::Ensemble ensemble;
    /// Backtest: probabilities over train start .. test end. Placebo: from all
    /// non-degenerate frontier classifiers over the train window.
    std::optional<risk::ProbabilityTimeline> timeline;
};

/**
 * @brief Grid -> sweep -> perfect -> frontier -> ensemble on the train window.
 *
 * With no perfect classifiers the report has status "empty-frontier" and an
 * empty ensemble rather than throwing. Throws EmptyError when the calendar has
 * no event in the window.
 */
[[nodiscard]] RunResult run_training(const RunConfig& config, const Inputs& inputs);
[[nodiscard]] RunResult run_training(const RunConfig& config);

/**
 * @brief Trains on data truncated at train_window.last and tests afterwards.
 *
 * Machines continue from their end-of-training state. A false positive by any
 * member skips the test statistics for the ensemble.
 */
[[nodiscard]] RunResult run_backtest(const RunConfig& config, const Inputs& inputs);
[[nodiscard]] RunResult run_backtest(const RunConfig& config);

/// Training against the config's placebo calendar (file or seeded random).
[[nodiscard]] RunResult run_placebo(const RunConfig& config, const Inputs& inputs);
[[nodiscard]] RunResult run_placebo(const RunConfig& config);

/// Per-leg pipeline on inputs.first only, using config.direction (rise or fall).
[[nodiscard]] RunResult run_single_series(const RunConfig& config, const Inputs& inputs);
[[nodiscard]] RunResult run_single_series(const RunConfig& config);

/**
 * Frontier, ensemble and report from perfect classifiers gathered elsewhere
 * (for instance read back from a sweep table). Errors must pair with `starts`,
 * the event starts inside config.train_window.
 */
[[nodiscard]] RunResult summarize_perfect(const RunConfig& config,
                                          std::span<const frontier::ClassifierStats> perfect,
                                          std::span<const MonthIndex> starts,
                                          engine::SweepTotals totals = {});

/// Dispatches on config.mode.
[[nodiscard]] RunResult run(const RunConfig& config, const Inputs& inputs);

// --- plot data ----------------------------------------------------------------

enum class PlotKind : std::uint8_t { frontier_scatter, timeline, indicator_trace, overlay };

/// Throws UsageError on an unknown kind.
[[nodiscard]] PlotKind parse_plot_kind(std::string_view text);

struct PlotInputs {
    const RunReport* report = nullptr;
    const RunReport* compare = nullptr;  ///< overlay: second frontier
    const risk::ProbabilityTimeline* timeline = nullptr;
    const MonthlySeries* indicator = nullptr;
    std::optional<engine::Threshold> zeta;
    engine::EngineOptions options;
};

/**
 * @brief Writes one plot table as CSV.
 *
 * frontier-scatter: mu, sigma, then spec columns per frontier member.
 * timeline: `date,value` of the ensemble probability.
 * indicator-trace: `date,value,zeta,in_recession`.
 * overlay: `source,mu,sigma` for report (and compare) frontiers.
 * Throws UsageError on an unknown kind and DataError when an input is missing.
 */
void export_plot_data(const PlotInputs& inputs, std::string_view kind, std::ostream& out);

/// CSV row header for a classifier spec: combo,smooth_method,alpha,beta,gamma,delta,zeta.
[[nodiscard]] std::string spec_columns_header();
[[nodiscard]] std::string spec_columns(const engine::ClassifierSpec& spec);
/// Inverse of spec_columns for the first seven fields; throws FormatError.
[[nodiscard]] engine::ClassifierSpec parse_spec_columns(std::span<const std::string> fields);

}  // namespace recess::harness
