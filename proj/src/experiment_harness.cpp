#include "recess/experiment_harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "recess/errors.hpp"
#include "recess/series_ingest.hpp"

namespace recess::harness {

using engine::ClassifierSpec;
using engine::Threshold;
using indicators::Combination;
using indicators::IndicatorGrid;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Mode mode) noexcept {
    switch (mode) {
        case Mode::train: return "train";
        case Mode::backtest: return "backtest";
        case Mode::placebo: return "placebo";
        case Mode::single_series: return "single-series";
    }
    return "train";
}

Mode parse_mode(std::string_view text) {
    for (auto m : {Mode::train, Mode::backtest, Mode::placebo, Mode::single_series}) {
        if (text == to_string(m)) return m;
    }
    throw ConfigError("unknown mode '" + std::string(text) + "'");
}

// --- config ---------------------------------------------------------------------

void RunConfig::validate() const {
    if (train_window.empty()) {
        throw ConfigError("train window is empty or reversed");
    }
    if (test_end && *test_end < train_window.last) {
        throw ConfigError("test_end precedes train_end");
    }
    if (sigma_max <= 0.0) {
        throw ConfigError("sigma_max must be positive");
    }
    if (match_lead < 0 || default_duration < 1) {
        throw ConfigError("match_lead must be >= 0 and default_duration >= 1");
    }
    zetas.validate();
    if (mode == Mode::placebo && !placebo_random && placebo_calendar.empty()) {
        throw ConfigError("placebo mode needs placebo_calendar or placebo_random");
    }
    if (mode == Mode::placebo && placebo_random && placebo_events == 0) {
        throw ConfigError("placebo_events must be positive");
    }
    if (mode == Mode::single_series && !indicators::is_single_series(direction)) {
        throw ConfigError("single-series direction must be rise or fall");
    }
}

namespace {

MonthIndex month_field(const json& j, const char* key, MonthIndex fallback) {
    if (!j.contains(key)) return fallback;
    return MonthIndex::parse(j.at(key).get<std::string>());
}

std::filesystem::path path_field(const json& j, const char* key,
                                 const std::filesystem::path& base) {
    if (!j.contains(key)) return {};
    std::filesystem::path p = j.at(key).get<std::string>();
    return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base) {
    RunConfig c;
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
        c.dataset = path_field(j, "dataset", base);
        c.unemployment = path_field(j, "unemployment", base);
        c.vacancy = path_field(j, "vacancy", base);
        c.calendar = path_field(j, "calendar", base);
        c.series = path_field(j, "series", base);
        c.series_column = j.value("series_column", c.series_column);
        c.announcements = path_field(j, "announcements", base);
        c.train_window = {month_field(j, "train_start", c.train_window.first),
                          month_field(j, "train_end", c.train_window.last)};
        if (j.contains("test_end")) c.test_end = MonthIndex::parse(j.at("test_end").get<std::string>());
        c.sub_window = {month_field(j, "sub_window_start", c.sub_window.first),
                        month_field(j, "sub_window_end", c.sub_window.last)};
        if (j.contains("grid")) c.grid = indicators::GridConfig::from_json(j.at("grid"));
        if (j.contains("zeta")) {
            const auto& z = j.at("zeta");
            c.zetas = engine::ZetaGrid::from_values(z.value("min", 0.0001), z.value("max", 0.25),
                                                    z.value("step", 0.0001));
        }
        c.options.zero_epsilon = j.value("zero_epsilon", 0.0);
        const auto policy = j.value("start_policy", std::string("fresh"));
        if (policy != "fresh" && policy != "warm") throw ConfigError("start_policy must be fresh or warm");
        c.options.start_policy = policy == "warm" ? engine::StartPolicy::warm : engine::StartPolicy::fresh;
        c.sigma_max = j.value("sigma_max", c.sigma_max);
        const auto ties = j.value("frontier_ties", std::string("all"));
        if (ties != "all" && ties != "first") throw ConfigError("frontier_ties must be all or first");
        c.ties = ties == "first" ? FrontierTies::first : FrontierTies::all;
        c.match_lead = j.value("match_lead", c.match_lead);
        c.default_duration = j.value("default_duration", c.default_duration);
        c.placebo_calendar = path_field(j, "placebo_calendar", base);
        c.placebo_random = j.value("placebo_random", false);
        c.placebo_events = j.value("placebo_events", c.placebo_events);
        c.seed = j.value("seed", c.seed);
        if (j.contains("direction")) c.direction = indicators::parse_combination(j.at("direction").get<std::string>());
        c.threads = j.value("threads", 0u);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("bad config: ") + ex.what());
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("bad config: ") + ex.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw ConfigError("config " + path.string() + ": " + ex.what());
    }
    return from_json(j, path.parent_path());
}

ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["mode"] = std::string(harness::to_string(mode));
    auto put_path = [&](const char* key, const std::filesystem::path& p) {
        if (!p.empty()) j[key] = p.string();
    };
    put_path("dataset", dataset);
    put_path("unemployment", unemployment);
    put_path("vacancy", vacancy);
    put_path("calendar", calendar);
    put_path("series", series);
    j["series_column"] = series_column;
    put_path("announcements", announcements);
    j["train_start"] = train_window.first.to_string();
    j["train_end"] = train_window.last.to_string();
    if (test_end) j["test_end"] = test_end->to_string();
    j["sub_window_start"] = sub_window.first.to_string();
    j["sub_window_end"] = sub_window.last.to_string();
    j["grid"] = grid.to_json();
    j["zeta"] = {{"min", zetas.min.value()}, {"max", zetas.max.value()}, {"step", zetas.step / 10000.0}};
    j["zero_epsilon"] = options.zero_epsilon;
    j["start_policy"] = options.start_policy == engine::StartPolicy::warm ? "warm" : "fresh";
    j["sigma_max"] = sigma_max;
    j["frontier_ties"] = ties == FrontierTies::first ? "first" : "all";
    j["match_lead"] = match_lead;
    j["default_duration"] = default_duration;
    put_path("placebo_calendar", placebo_calendar);
    j["placebo_random"] = placebo_random;
    j["placebo_events"] = placebo_events;
    j["seed"] = seed;
    j["direction"] = std::string(indicators::to_string(direction));
    return j;
}

// --- inputs ---------------------------------------------------------------------

Inputs load_inputs(const RunConfig& config) {
    std::optional<ingest::Dataset> bundle;
    if (!config.dataset.empty()) bundle = ingest::load_dataset(config.dataset);

    RecessionCalendar calendar;
    if (!config.calendar.empty()) {
        calendar = ingest::load_calendar(config.calendar);
    } else if (bundle) {
        calendar = bundle->calendar;
    } else if (!(config.mode == Mode::placebo && config.placebo_random)) {
        throw ConfigError("no calendar: set calendar or dataset");
    }

    if (config.mode == Mode::single_series) {
        if (config.series.empty()) {
            throw ConfigError("single-series mode needs a series file");
        }
        return Inputs{ingest::load_monthly_series(config.series, config.series_column), std::nullopt,
                      std::move(calendar)};
    }
    if (bundle) {
        return Inputs{bundle->unemployment, bundle->vacancy, std::move(calendar)};
    }
    if (config.unemployment.empty() || config.vacancy.empty()) {
        throw ConfigError("set dataset, or both unemployment and vacancy");
    }
    auto ds = ingest::make_dataset(ingest::load_monthly_series(config.unemployment),
                                   ingest::load_monthly_series(config.vacancy), calendar);
    return Inputs{std::move(ds.unemployment), std::move(ds.vacancy), std::move(calendar)};
}

std::vector<Announcement> parse_announcements(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw EmptyError("announcement table is empty");
    }
    ++line_no;
    if (line.rfind("start,announcement", 0) != 0) {
        throw FormatError(line_no, "expected header start,announcement");
    }
    std::vector<Announcement> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string a;
        std::string b;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) {
            throw FormatError(line_no, "expected start,announcement");
        }
        try {
            out.push_back({MonthIndex::parse(a), MonthIndex::parse(b)});
        } catch (const std::invalid_argument& ex) {
            throw FormatError(line_no, ex.what());
        }
        if (out.back().announced < out.back().start) {
            throw OrderError("announcement before start on line " + std::to_string(line_no));
        }
    }
    return out;
}

std::vector<Announcement> load_announcements(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return parse_announcements(in);
}

RecessionCalendar random_calendar(MonthWindow window, std::size_t events, std::uint64_t seed) {
    if (window.empty() || static_cast<std::size_t>(window.length()) < events) {
        throw ConfigError("window too short for " + std::to_string(events) + " placebo events");
    }
    std::vector<std::int32_t> offsets(static_cast<std::size_t>(window.length()));
    std::iota(offsets.begin(), offsets.end(), 0);
    std::mt19937_64 rng(seed);
    std::vector<std::int32_t> picked;
    std::sample(offsets.begin(), offsets.end(), std::back_inserter(picked),
                static_cast<std::ptrdiff_t>(events), rng);
    std::vector<MonthIndex> starts;
    for (auto o : picked) starts.push_back(window.first + o);
    return RecessionCalendar(std::move(starts));
}

// --- training core ---------------------------------------------------------------

namespace {

struct PerfectRecord {
    std::uint32_t index;
    Threshold zeta;
    std::int64_t sum;
    std::int64_t sum_squares;
};

struct Trained {
    RunReport report;
    risk::Ensemble ensemble;
    frontier::Frontier frontier;
};

std::optional<SubWindowReport> sub_window_report(const RunConfig& config, MonthWindow window,
                                                 std::span<const MonthIndex> starts,
                                                 std::span<const MemberRow> members) {
    const auto& sw = config.sub_window;
    if (sw.empty() || sw.first < window.first || sw.last > window.last || members.empty()) {
        return std::nullopt;
    }
    SubWindowReport r;
    r.window = sw;
    std::vector<std::size_t> picks;
    for (std::size_t j = 0; j < starts.size(); ++j) {
        if (sw.contains(starts[j])) picks.push_back(j);
    }
    r.events = picks.size();
    if (picks.empty()) {
        return std::nullopt;
    }
    double total = 0.0;
    for (const auto& m : members) {
        double s = 0.0;
        for (auto j : picks) s += m.errors[j];
        total += s / static_cast<double>(picks.size());
    }
    r.mean_delay = total / static_cast<double>(members.size());

    if (!config.announcements.empty()) {
        std::vector<std::int32_t> delays;
        for (const auto& a : load_announcements(config.announcements)) {
            if (sw.contains(a.start)) delays.push_back(a.announced - a.start);
        }
        if (!delays.empty()) {
            const auto st = frontier::stats(delays);
            r.announcement_mean = st.mu;
            r.announcement_std = st.sigma;
        }
    }
    return r;
}

void assemble(const RunConfig& config, MonthWindow window, std::span<const MonthIndex> starts,
              const engine::SweepTotals& totals, Trained& out);

std::vector<std::size_t> apply_ties(std::vector<std::size_t> kept,
                                    std::span<const frontier::StatPoint> points, FrontierTies ties) {
    if (ties == FrontierTies::all) {
        return kept;
    }
    std::vector<std::size_t> one;
    for (auto i : kept) {
        if (one.empty() || points[one.back()].mu != points[i].mu ||
            points[one.back()].sigma != points[i].sigma) {
            one.push_back(i);
        }
    }
    return one;
}

Trained train_core(const RunConfig& config, const IndicatorGrid& grid, const MonthlySeries& first,
                   const MonthlySeries* second, const RecessionCalendar& calendar,
                   MonthWindow window) {
    const auto starts = calendar.starts_in(window);
    if (starts.empty()) {
        throw EmptyError("no calendar event starts inside " + window.first.to_string() + ".." +
                         window.last.to_string());
    }

    engine::SweepSettings settings;
    settings.zetas = config.zetas;
    settings.window = window;
    settings.events = starts.size();
    settings.options = config.options;
    settings.threads = config.threads;

    // Every perfect classifier has exactly J errors, so (sum, J*sumsq - sum^2) orders
    // (mu, sigma) exactly. Per error sum only the minimal-variance classifiers can
    // reach the frontier; the rest are dropped as the sweep streams by.
    struct Bucket {
        std::int64_t scaled_var = 0;
        std::vector<PerfectRecord> members;
    };
    const auto events = static_cast<std::int64_t>(starts.size());
    std::map<std::int64_t, Bucket> buckets;
    auto totals = engine::sweep_grid(
        grid, first, second, settings,
        [&](std::size_t index, Threshold zeta, std::span<const MonthIndex> dets) {
            std::int64_t sum = 0;
            std::int64_t sq = 0;
            for (std::size_t j = 0; j < dets.size(); ++j) {
                const std::int64_t e = dets[j] - starts[j];
                sum += e;
                sq += e * e;
            }
            const std::int64_t var = events * sq - sum * sum;
            auto& b = buckets[sum];
            if (b.members.empty() || var < b.scaled_var) {
                b.scaled_var = var;
                b.members.clear();
            } else if (var > b.scaled_var) {
                return;
            }
            b.members.push_back({static_cast<std::uint32_t>(index), zeta, sum, sq});
        });

    std::vector<PerfectRecord> records;
    for (auto& [sum, b] : buckets) {
        records.insert(records.end(), b.members.begin(), b.members.end());
    }
    buckets.clear();

    std::vector<frontier::StatPoint> points(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto st = frontier::stats_from_moments(events, records[i].sum, records[i].sum_squares);
        points[i] = {st.mu, st.sigma};
    }
    const auto kept = apply_ties(frontier::pareto_indices(points), points, config.ties);

    Trained out;
    std::map<std::uint32_t, MonthlySeries> cache;
    for (auto i : kept) {
        const auto& rec = records[i];
        auto it = cache.find(rec.index);
        if (it == cache.end()) {
            it = cache.emplace(rec.index, engine::materialize_indicator(grid.spec_at(rec.index), first, second)).first;
        }
        const auto outcome = engine::run_state_machine(it->second, rec.zeta, window, config.options);
        frontier::ClassifierStats cs;
        cs.spec = {grid.spec_at(rec.index), rec.zeta};
        cs.errors = frontier::detection_errors(outcome.detections, starts);
        const auto st = frontier::stats(cs.errors);
        if (st.mu != points[i].mu || st.sigma != points[i].sigma) {
            throw std::logic_error("frontier member disagrees with its sweep record: " +
                                   indicators::format_spec(cs.spec.indicator));
        }
        cs.mu = st.mu;
        cs.sigma = st.sigma;
        out.frontier.points.push_back(std::move(cs));
    }
    assemble(config, window, starts, totals, out);
    return out;
}

void assemble(const RunConfig& config, MonthWindow window, std::span<const MonthIndex> starts,
              const engine::SweepTotals& totals, Trained& out) {
    auto& report = out.report;
    report.train_window = window;
    report.event_starts.assign(starts.begin(), starts.end());
    report.totals = totals;
    for (const auto& p : out.frontier.points) report.frontier.push_back({p.spec, p.mu, p.sigma});

    out.ensemble.train_window = window;
    out.ensemble.sigma_max = config.sigma_max;
    out.ensemble.options = config.options;
    std::vector<const frontier::ClassifierStats*> chosen;
    for (const auto& p : out.frontier.points) {
        if (!(p.sigma < config.sigma_max)) continue;
        if (p.sigma == 0.0) {
            ++report.excluded_degenerate;
            continue;
        }
        chosen.push_back(&p);
    }
    std::sort(chosen.begin(), chosen.end(),
              [](const auto* a, const auto* b) { return a->spec < b->spec; });
    for (const auto* p : chosen) {
        risk::TrainedClassifier tc;
        tc.spec = p->spec;
        tc.mu = p->mu;
        tc.sigma = p->sigma;
        for (std::size_t j = 0; j < starts.size(); ++j) tc.detections.push_back(starts[j] + p->errors[j]);
        out.ensemble.members.push_back(tc);
        report.ensemble.push_back(MemberRow{p->spec, p->mu, p->sigma, tc.detections, p->errors, std::nullopt});
    }

    if (totals.perfect == 0) {
        report.status = "empty-frontier";
    } else if (report.ensemble.empty()) {
        report.status = "empty-ensemble";
    }
    if (!report.ensemble.empty()) {
        double mu = 0.0;
        double sigma = 0.0;
        for (const auto& m : report.ensemble) {
            mu += m.mu;
            sigma += m.sigma;
        }
        const auto k = static_cast<double>(report.ensemble.size());
        report.train_average = frontier::ErrorStats{mu / k, sigma / k};
    }
    report.sub_window = sub_window_report(config, window, starts, report.ensemble);
}

IndicatorGrid two_series_grid(const RunConfig& config, const Inputs& inputs) {
    IndicatorGrid grid(config.grid);
    if (grid.single_series()) {
        throw ConfigError("rise/fall combos belong to single-series mode");
    }
    if (!inputs.second) {
        throw UsageError("this mode needs both unemployment and vacancy");
    }
    return grid;
}

RunResult finish(Trained&& t, Mode mode) {
    t.report.mode = mode;
    return RunResult{std::move(t.report), std::move(t.ensemble), std::nullopt};
}

MonthlySeries truncate(const MonthlySeries& s, MonthIndex last) {
    if (!s.covers(last)) {
        throw AlignmentError("data ends before " + last.to_string());
    }
    return s.slice({s.start(), last});
}

}  // namespace

RunResult run_training(const RunConfig& config, const Inputs& inputs) {
    config.validate();
    const auto grid = two_series_grid(config, inputs);
    return finish(train_core(config, grid, inputs.first, inputs.second_ptr(), inputs.calendar,
                             config.train_window),
                  Mode::train);
}

RunResult run_training(const RunConfig& config) { return run_training(config, load_inputs(config)); }

RunResult summarize_perfect(const RunConfig& config, std::span<const frontier::ClassifierStats> perfect,
                            std::span<const MonthIndex> starts, engine::SweepTotals totals) {
    Trained out;
    std::vector<frontier::StatPoint> points(perfect.size());
    for (std::size_t i = 0; i < perfect.size(); ++i) {
        if (perfect[i].errors.size() != starts.size()) {
            throw NotPerfectError("classifier " + indicators::format_spec(perfect[i].spec.indicator) +
                                  " has " + std::to_string(perfect[i].errors.size()) + " errors for " +
                                  std::to_string(starts.size()) + " events");
        }
        points[i] = {perfect[i].mu, perfect[i].sigma};
    }
    for (auto i : apply_ties(frontier::pareto_indices(points), points, config.ties)) {
        out.frontier.points.push_back(perfect[i]);
    }
    totals.perfect = perfect.size();
    assemble(config, config.train_window, starts, totals, out);
    return finish(std::move(out), Mode::train);
}

// --- backtest -------------------------------------------------------------------

namespace {

TestResult match_test_window(const RunConfig& config, std::span<const MonthIndex> detections,
                             std::span<const MonthIndex> starts,
                             std::span<const std::optional<MonthIndex>> ends) {
    TestResult r;
    r.detections.assign(detections.begin(), detections.end());
    std::vector<bool> used(starts.size(), false);
    for (auto d : detections) {
        bool matched = false;
        for (std::size_t j = 0; j < starts.size(); ++j) {
            if (used[j]) continue;
            const auto end = std::max(ends[j].value_or(starts[j] + (config.default_duration - 1)),
                                      starts[j] + config.match_lead);
            if (starts[j] - config.match_lead <= d && d <= end) {
                used[j] = true;
                r.errors.push_back(d - starts[j]);
                matched = true;
                break;
            }
        }
        if (!matched) ++r.false_positives;
    }
    r.false_negatives = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
    return r;
}

}  // namespace

RunResult run_backtest(const RunConfig& config, const Inputs& inputs) {
    config.validate();
    const auto grid = two_series_grid(config, inputs);
    const auto train_end = config.train_window.last;
    const auto data_end = inputs.first.end();
    const auto test_end = config.test_end.value_or(data_end);
    if (test_end > data_end) {
        throw AlignmentError("test_end " + test_end.to_string() + " is past the data end");
    }

    // Training sees nothing after train_end.
    const auto first_train = truncate(inputs.first, train_end);
    const auto second_train = truncate(*inputs.second, train_end);
    auto trained = train_core(config, grid, first_train, &second_train, inputs.calendar,
                              config.train_window);
    auto result = finish(std::move(trained), Mode::backtest);
    auto& report = result.report;

    const MonthWindow test{train_end + 1, test_end};
    report.test_window = test;
    if (test.empty()) {
        report.test_status = "empty";
        return result;
    }

    std::vector<MonthIndex> starts;
    std::vector<std::optional<MonthIndex>> ends;
    const auto& all = inputs.calendar.starts();
    for (std::size_t j = 0; j < all.size(); ++j) {
        if (test.contains(all[j])) {
            starts.push_back(all[j]);
            ends.push_back(inputs.calendar.ends().empty() ? std::nullopt : inputs.calendar.ends()[j]);
        }
    }
    report.test_event_starts = starts;

    const auto first_full = truncate(inputs.first, test_end);
    const auto second_full = truncate(*inputs.second, test_end);
    for (auto& row : report.ensemble) {
        const auto indicator = engine::materialize_indicator(row.spec.indicator, first_full, &second_full);
        const auto fit = engine::run_state_machine(indicator, row.spec.zeta, config.train_window, config.options);
        if (fit.detections != row.detections) {
            throw std::logic_error("training detections changed when more data was appended");
        }
        const auto resumed = engine::resume_state(fit, indicator.slice(test));
        std::vector<MonthIndex> test_dets(resumed.detections.begin() +
                                              static_cast<std::ptrdiff_t>(fit.detections.size()),
                                          resumed.detections.end());
        row.test = match_test_window(config, test_dets, starts, ends);
        row.test->in_recession_at_start = fit.state.in_recession;
        report.false_positives += row.test->false_positives;
        report.false_negatives += row.test->false_negatives;
    }

    if (report.ensemble.empty()) {
        report.test_status = "empty";
    } else if (report.false_positives > 0) {
        report.test_status = "false-positive";
    } else if (starts.empty()) {
        report.test_status = "no-events";
    } else {
        TestAggregate agg;
        for (const auto& row : report.ensemble) {
            const auto& e = row.test->errors;
            if (e.empty()) continue;
            const auto st = frontier::stats(e);
            agg.mean += st.mu;
            agg.std += st.sigma;
            agg.min += *std::min_element(e.begin(), e.end());
            agg.max += *std::max_element(e.begin(), e.end());
            ++agg.classifiers;
        }
        if (agg.classifiers > 0) {
            const auto k = static_cast<double>(agg.classifiers);
            agg.mean /= k;
            agg.std /= k;
            agg.min /= k;
            agg.max /= k;
            report.test_average = agg;
        }
        report.test_status = "ok";
    }

    if (!result.ensemble.members.empty()) {
        result.timeline = risk::probability_timeline(result.ensemble, first_full, &second_full,
                                                     {config.train_window.first, test_end});
    }
    return result;
}

RunResult run_backtest(const RunConfig& config) { return run_backtest(config, load_inputs(config)); }

// --- placebo ------------------------------------------------------------------------

namespace {

RunResult placebo_with(const RunConfig& config, const Inputs& inputs, const RecessionCalendar& placebo) {
    const auto grid = two_series_grid(config, inputs);
    auto trained = train_core(config, grid, inputs.first, inputs.second_ptr(), placebo, config.train_window);
    auto result = finish(std::move(trained), Mode::placebo);
    auto& report = result.report;
    if (report.frontier.empty()) {
        return result;
    }
    double lo = report.frontier.front().sigma;
    for (const auto& p : report.frontier) lo = std::min(lo, p.sigma);
    report.min_frontier_sigma = lo;

    risk::Ensemble all;
    all.train_window = config.train_window;
    all.sigma_max = std::numeric_limits<double>::infinity();
    all.options = config.options;
    for (const auto& p : report.frontier) {
        if (p.sigma == 0.0) continue;
        risk::TrainedClassifier tc{p.spec, p.mu, p.sigma, {}};
        all.members.push_back(std::move(tc));
    }
    if (!all.members.empty()) {
        result.timeline = risk::probability_timeline(all, inputs.first, inputs.second_ptr(),
                                                     config.train_window);
    }
    return result;
}

}  // namespace

RunResult run_placebo(const RunConfig& config, const Inputs& inputs) {
    config.validate();
    const auto placebo = config.placebo_random
                             ? random_calendar(config.train_window, config.placebo_events, config.seed)
                             : ingest::load_calendar(config.placebo_calendar);
    return placebo_with(config, inputs, placebo);
}

RunResult run_placebo(const RunConfig& config) { return run_placebo(config, load_inputs(config)); }

// --- single series ------------------------------------------------------------------

RunResult run_single_series(const RunConfig& config, const Inputs& inputs) {
    config.validate();
    if (!indicators::is_single_series(config.direction)) {
        throw ConfigError("single-series direction must be rise or fall");
    }
    auto grid_config = config.grid;
    grid_config.combos = {config.direction};
    grid_config.deltas = {indicators::Tenths{10}};
    const IndicatorGrid grid(grid_config);
    auto result = finish(train_core(config, grid, inputs.first, nullptr, inputs.calendar, config.train_window),
                         Mode::single_series);
    result.report.direction = config.direction;
    return result;
}

RunResult run_single_series(const RunConfig& config) {
    return run_single_series(config, load_inputs(config));
}

RunResult run(const RunConfig& config, const Inputs& inputs) {
    switch (config.mode) {
        case Mode::train: return run_training(config, inputs);
        case Mode::backtest: return run_backtest(config, inputs);
        case Mode::placebo: return run_placebo(config, inputs);
        case Mode::single_series: return run_single_series(config, inputs);
    }
    throw ConfigError("unknown mode");
}

// --- report JSON ----------------------------------------------------------------------

namespace {

ordered_json months_json(std::span<const MonthIndex> months) {
    auto a = ordered_json::array();
    for (auto m : months) a.push_back(m.to_string());
    return a;
}

ordered_json spec_json(const ClassifierSpec& spec) {
    ordered_json j;
    j["spec"] = indicators::format_spec(spec.indicator);
    j["zeta"] = spec.zeta.to_string();
    return j;
}

}  // namespace

ordered_json RunReport::to_json() const {
    ordered_json j;
    j["format"] = "recess-report/1";
    j["mode"] = std::string(harness::to_string(mode));
    j["status"] = status;
    if (direction) j["direction"] = std::string(indicators::to_string(*direction));
    j["train_start"] = train_window.first.to_string();
    j["train_end"] = train_window.last.to_string();
    j["events"] = months_json(event_starts);
    j["totals"] = {{"indicators", totals.indicators},
                   {"classifiers", totals.classifiers},
                   {"perfect", totals.perfect}};
    j["frontier_size"] = frontier.size();
    auto& fj = j["frontier"] = ordered_json::array();
    for (const auto& p : frontier) {
        auto row = spec_json(p.spec);
        row["mu"] = p.mu;
        row["sigma"] = p.sigma;
        fj.push_back(std::move(row));
    }
    auto& ej = j["ensemble"] = ordered_json::array();
    for (const auto& m : ensemble) {
        auto row = spec_json(m.spec);
        row["mu"] = m.mu;
        row["sigma"] = m.sigma;
        row["detections"] = months_json(m.detections);
        row["errors"] = m.errors;
        if (m.test) {
            ordered_json t;
            t["detections"] = months_json(m.test->detections);
            t["errors"] = m.test->errors;
            t["false_positives"] = m.test->false_positives;
            t["false_negatives"] = m.test->false_negatives;
            t["in_recession_at_start"] = m.test->in_recession_at_start;
            row["test"] = std::move(t);
        }
        ej.push_back(std::move(row));
    }
    j["excluded_degenerate"] = excluded_degenerate;
    if (train_average) j["average"] = {{"mu", train_average->mu}, {"sigma", train_average->sigma}};
    if (sub_window) {
        ordered_json s;
        s["start"] = sub_window->window.first.to_string();
        s["end"] = sub_window->window.last.to_string();
        s["events"] = sub_window->events;
        s["mean_delay"] = sub_window->mean_delay;
        if (sub_window->announcement_mean) s["announcement_mean"] = *sub_window->announcement_mean;
        if (sub_window->announcement_std) s["announcement_std"] = *sub_window->announcement_std;
        j["sub_window"] = std::move(s);
    }
    if (test_window) {
        ordered_json t;
        t["start"] = test_window->first.to_string();
        t["end"] = test_window->last.to_string();
        t["events"] = months_json(test_event_starts);
        t["status"] = test_status;
        t["false_positives"] = false_positives;
        t["false_negatives"] = false_negatives;
        if (test_average) {
            t["average"] = {{"mean", test_average->mean},
                            {"std", test_average->std},
                            {"min", test_average->min},
                            {"max", test_average->max},
                            {"classifiers", test_average->classifiers}};
        }
        j["test"] = std::move(t);
    }
    if (mode == Mode::placebo) {
        j["min_frontier_sigma"] = min_frontier_sigma ? ordered_json(*min_frontier_sigma) : ordered_json();
    }
    return j;
}

void save_report(const std::filesystem::path& path, const RunReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << report.to_json().dump(2) << '\n';
}

namespace {

std::vector<MonthIndex> months_from(const json& a) {
    std::vector<MonthIndex> out;
    for (const auto& m : a) out.push_back(MonthIndex::parse(m.get<std::string>()));
    return out;
}

ClassifierSpec spec_from(const json& row) {
    return {indicators::parse_spec(row.at("spec").get<std::string>()),
            Threshold::from_double(std::stod(row.at("zeta").get<std::string>()))};
}

}  // namespace

RunReport RunReport::from_json(const json& j) {
    try {
        RunReport r;
        r.mode = parse_mode(j.at("mode").get<std::string>());
        r.status = j.value("status", std::string("ok"));
        if (j.contains("direction")) r.direction = indicators::parse_combination(j.at("direction").get<std::string>());
        r.train_window = {MonthIndex::parse(j.at("train_start").get<std::string>()),
                          MonthIndex::parse(j.at("train_end").get<std::string>())};
        r.event_starts = months_from(j.at("events"));
        const auto& t = j.at("totals");
        r.totals = {t.at("indicators").get<std::uint64_t>(), t.at("classifiers").get<std::uint64_t>(),
                    t.at("perfect").get<std::uint64_t>()};
        for (const auto& row : j.at("frontier")) {
            r.frontier.push_back({spec_from(row), row.at("mu").get<double>(), row.at("sigma").get<double>()});
        }
        for (const auto& row : j.at("ensemble")) {
            MemberRow m{spec_from(row), row.at("mu").get<double>(), row.at("sigma").get<double>(),
                        months_from(row.at("detections")), row.at("errors").get<std::vector<std::int32_t>>(),
                        std::nullopt};
            if (row.contains("test")) {
                const auto& tj = row.at("test");
                TestResult tr;
                tr.detections = months_from(tj.at("detections"));
                tr.errors = tj.at("errors").get<std::vector<std::int32_t>>();
                tr.false_positives = tj.at("false_positives").get<std::size_t>();
                tr.false_negatives = tj.at("false_negatives").get<std::size_t>();
                tr.in_recession_at_start = tj.at("in_recession_at_start").get<bool>();
                m.test = std::move(tr);
            }
            r.ensemble.push_back(std::move(m));
        }
        r.excluded_degenerate = j.value("excluded_degenerate", std::size_t{0});
        if (j.contains("average")) {
            r.train_average = frontier::ErrorStats{j["average"].at("mu").get<double>(),
                                                   j["average"].at("sigma").get<double>()};
        }
        if (j.contains("sub_window")) {
            const auto& sj = j.at("sub_window");
            SubWindowReport s;
            s.window = {MonthIndex::parse(sj.at("start").get<std::string>()),
                        MonthIndex::parse(sj.at("end").get<std::string>())};
            s.events = sj.at("events").get<std::size_t>();
            s.mean_delay = sj.at("mean_delay").get<double>();
            if (sj.contains("announcement_mean")) s.announcement_mean = sj["announcement_mean"].get<double>();
            if (sj.contains("announcement_std")) s.announcement_std = sj["announcement_std"].get<double>();
            r.sub_window = s;
        }
        if (j.contains("test")) {
            const auto& tj = j.at("test");
            r.test_window = MonthWindow{MonthIndex::parse(tj.at("start").get<std::string>()),
                                        MonthIndex::parse(tj.at("end").get<std::string>())};
            r.test_event_starts = months_from(tj.at("events"));
            r.test_status = tj.at("status").get<std::string>();
            r.false_positives = tj.at("false_positives").get<std::size_t>();
            r.false_negatives = tj.at("false_negatives").get<std::size_t>();
            if (tj.contains("average")) {
                const auto& a = tj.at("average");
                r.test_average = TestAggregate{a.at("mean").get<double>(), a.at("std").get<double>(),
                                               a.at("min").get<double>(), a.at("max").get<double>(),
                                               a.at("classifiers").get<std::size_t>()};
            }
        }
        if (j.contains("min_frontier_sigma") && !j["min_frontier_sigma"].is_null()) {
            r.min_frontier_sigma = j["min_frontier_sigma"].get<double>();
        }
        return r;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed report: ") + ex.what());
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("malformed report: ") + ex.what());
    }
}

RunReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw ConfigError("report " + path.string() + ": " + ex.what());
    }
    return RunReport::from_json(j);
}

// --- plot data ------------------------------------------------------------------------

PlotKind parse_plot_kind(std::string_view text) {
    if (text == "frontier-scatter") return PlotKind::frontier_scatter;
    if (text == "timeline") return PlotKind::timeline;
    if (text == "indicator-trace") return PlotKind::indicator_trace;
    if (text == "overlay") return PlotKind::overlay;
    throw UsageError("unknown plot kind '" + std::string(text) +
                     "' (frontier-scatter, timeline, indicator-trace, overlay)");
}

std::string spec_columns_header() { return "combo,smooth_method,alpha,beta,gamma,delta,zeta"; }

std::string spec_columns(const ClassifierSpec& spec) {
    const auto& s = spec.indicator;
    std::string out(indicators::to_string(s.combo));
    out += s.smoothing.method == indicators::SmoothingMethod::simple ? ",simple," : ",exponential,";
    out += s.smoothing.alpha_string();
    out += ',' + std::to_string(s.beta);
    out += ',' + s.gamma.to_string();
    out += ',' + s.delta.to_string();
    out += ',' + spec.zeta.to_string();
    return out;
}

ClassifierSpec parse_spec_columns(std::span<const std::string> f) {
    if (f.size() < 7) {
        throw FormatError(0, "expected " + spec_columns_header());
    }
    try {
        ClassifierSpec spec;
        auto& s = spec.indicator;
        s.combo = indicators::parse_combination(f[0]);
        if (f[1] == "simple") {
            s.smoothing = indicators::SmoothingSpec::simple(std::stoi(f[2]));
        } else if (f[1] == "exponential") {
            s.smoothing = indicators::SmoothingSpec::exponential(indicators::Tenths::from_double(std::stod(f[2])));
        } else {
            throw FormatError(0, "unknown smoothing method '" + f[1] + "'");
        }
        s.beta = std::stoi(f[3]);
        s.gamma = indicators::Tenths::from_double(std::stod(f[4]));
        s.delta = indicators::Tenths::from_double(std::stod(f[5]));
        s.validate();
        spec.zeta = Threshold::from_double(std::stod(f[6]));
        return spec;
    } catch (const std::logic_error& ex) {
        throw FormatError(0, std::string("bad classifier columns: ") + ex.what());
    }
}

void export_plot_data(const PlotInputs& in, std::string_view kind, std::ostream& out) {
    switch (parse_plot_kind(kind)) {
        case PlotKind::frontier_scatter: {
            if (in.report == nullptr) throw DataError("frontier-scatter needs a report");
            out << "mu,sigma," << spec_columns_header() << '\n';
            for (const auto& p : in.report->frontier) {
                out << ingest::format_value(p.mu) << ',' << ingest::format_value(p.sigma) << ','
                    << spec_columns(p.spec) << '\n';
            }
            return;
        }
        case PlotKind::timeline: {
            if (in.timeline == nullptr) throw DataError("timeline needs a probability timeline");
            ingest::write_monthly_series(out, MonthlySeries(in.timeline->start, in.timeline->ensemble));
            return;
        }
        case PlotKind::indicator_trace: {
            if (in.indicator == nullptr || !in.zeta) {
                throw DataError("indicator-trace needs an indicator and a threshold");
            }
            const auto outcome = engine::run_state_machine(*in.indicator, *in.zeta, in.indicator->range(),
                                                           in.options, /*record_path=*/true);
            out << "date,value,zeta,in_recession\n";
            auto m = in.indicator->start();
            const auto zeta = in.zeta->to_string();
            for (std::size_t t = 0; t < in.indicator->size(); ++t, ++m) {
                out << m.to_string() << ',' << ingest::format_value(in.indicator->values()[t]) << ','
                    << zeta << ',' << int{outcome.state_path[t]} << '\n';
            }
            return;
        }
        case PlotKind::overlay: {
            if (in.report == nullptr) throw DataError("overlay needs a report");
            out << "source,mu,sigma\n";
            auto emit = [&](const RunReport& r) {
                const std::string source = r.direction ? "single-" + std::string(indicators::to_string(*r.direction))
                                                       : "labor-market";
                for (const auto& p : r.frontier) {
                    out << source << ',' << ingest::format_value(p.mu) << ','
                        << ingest::format_value(p.sigma) << '\n';
                }
            };
            emit(*in.report);
            if (in.compare != nullptr) emit(*in.compare);
            return;
        }
    }
}

}  // namespace recess::harness
