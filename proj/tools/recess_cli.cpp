// recess: command-line front end for the recession-detection pipeline.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recess/classifier_engine.hpp"
#include "recess/errors.hpp"
#include "recess/experiment_harness.hpp"
#include "recess/frontier_eval.hpp"
#include "recess/indicator_lab.hpp"
#include "recess/risk_probability.hpp"
#include "recess/series_ingest.hpp"
#include "recess/synthetic.hpp"

namespace fs = std::filesystem;
using namespace recess;

namespace {

struct Globals {
    std::string config;
    int threads = -1;
    std::int64_t seed = -1;
};

struct Overrides {
    std::string dataset;
    std::string calendar;
    std::string train_start;
    std::string train_end;
    double zeta_min = 0.0;
    double zeta_max = 0.0;
    double zeta_step = 0.0;
};

harness::RunConfig base_config(const Globals& g, const Overrides& o) {
    auto c = g.config.empty() ? harness::RunConfig{} : harness::RunConfig::load(g.config);
    if (!o.dataset.empty()) c.dataset = o.dataset;
    if (!o.calendar.empty()) c.calendar = o.calendar;
    if (!o.train_start.empty()) c.train_window.first = MonthIndex::parse(o.train_start);
    if (!o.train_end.empty()) c.train_window.last = MonthIndex::parse(o.train_end);
    if (o.zeta_min > 0 || o.zeta_max > 0 || o.zeta_step > 0) {
        c.zetas = engine::ZetaGrid::from_values(o.zeta_min > 0 ? o.zeta_min : c.zetas.min.value(),
                                                o.zeta_max > 0 ? o.zeta_max : c.zetas.max.value(),
                                                o.zeta_step > 0 ? o.zeta_step : c.zetas.step / 10000.0);
    }
    if (g.threads >= 0) c.threads = static_cast<unsigned>(g.threads);
    if (g.seed >= 0) c.seed = static_cast<std::uint64_t>(g.seed);
    return c;
}

void add_overrides(CLI::App* sub, Overrides& o) {
    sub->add_option("--dataset", o.dataset, "Dataset bundle directory or manifest");
    sub->add_option("--calendar", o.calendar, "Event calendar CSV (start,end)");
    sub->add_option("--train-start", o.train_start, "First month of the training window (YYYY-MM)");
    sub->add_option("--train-end", o.train_end, "Last month of the training window (YYYY-MM)");
    sub->add_option("--zeta-min", o.zeta_min, "Smallest threshold (default 0.0001)");
    sub->add_option("--zeta-max", o.zeta_max, "Largest threshold (default 0.25)");
    sub->add_option("--zeta-step", o.zeta_step, "Threshold step (default 0.0001)");
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

MonthlySeries join_parts(const std::vector<std::string>& files, std::vector<std::string> anchors,
                         const std::vector<std::string>& defaults, const std::string& what) {
    if (files.empty()) throw UsageError("no " + what + " input");
    if (anchors.empty() && files.size() == defaults.size() + 1) anchors = defaults;
    if (anchors.size() + 1 != files.size()) {
        throw UsageError(what + ": " + std::to_string(files.size()) + " files need " +
                         std::to_string(files.size() - 1) + " splice months");
    }
    auto joined = ingest::load_monthly_series(files[0]);
    for (std::size_t i = 1; i < files.size(); ++i) {
        joined = ingest::splice_scaled(joined, ingest::load_monthly_series(files[i]),
                                       MonthIndex::parse(anchors[i - 1]));
    }
    return joined;
}

void print_run(const harness::RunReport& r) {
    std::cerr << "indicators " << r.totals.indicators << ", classifiers " << r.totals.classifiers
              << ", perfect " << r.totals.perfect << ", frontier " << r.frontier.size()
              << ", ensemble " << r.ensemble.size() << " [" << r.status << "]\n";
    if (r.train_average) {
        std::cerr << "training average mu " << r.train_average->mu << ", sigma " << r.train_average->sigma << "\n";
    }
    if (r.test_window) {
        std::cerr << "test " << r.test_window->first.to_string() << ".." << r.test_window->last.to_string()
                  << ": " << r.test_status << ", false positives " << r.false_positives << ", false negatives "
                  << r.false_negatives << "\n";
        if (r.test_average) {
            std::cerr << "test average mean " << r.test_average->mean << ", std " << r.test_average->std << "\n";
        }
    }
    if (r.min_frontier_sigma) std::cerr << "min frontier sigma " << *r.min_frontier_sigma << "\n";
}

int write_run(const harness::RunResult& result, const fs::path& dir) {
    fs::create_directories(dir);
    harness::save_report(dir / "report.json", result.report);
    risk::save_ensemble(dir / "ensemble.json", result.ensemble);
    {
        auto out = open_out(dir / "frontier.csv");
        harness::export_plot_data({&result.report}, "frontier-scatter", out);
    }
    if (result.timeline) risk::save_timeline(dir / "timeline.csv", *result.timeline);
    if (result.report.mode == harness::Mode::single_series) {
        auto out = open_out(dir / "overlay.csv");
        harness::export_plot_data({&result.report}, "overlay", out);
    }
    print_run(result.report);
    return result.report.status == "empty-frontier" ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recession detection from labor-market indicators"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Run configuration (JSON)");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores); affects speed only");
    app.add_option("--seed", g.seed, "Seed for random placebo calendars");

    int code = 0;

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Assemble a dataset bundle from monthly CSVs");
    std::vector<std::string> u_files, v_files, u_splice, v_splice;
    std::string v_count, labor_force, in_calendar, bundle_out;
    ingest_cmd->add_option("--unemployment", u_files, "Unemployment-rate CSV parts, oldest first")->required();
    ingest_cmd->add_option("--vacancy", v_files, "Vacancy-rate CSV parts, oldest first");
    ingest_cmd->add_option("--u-splice", u_splice, "Splice months between unemployment parts");
    ingest_cmd->add_option("--v-splice", v_splice, "Splice months between vacancy parts (default 1950-12 2001-01 for three parts)");
    ingest_cmd->add_option("--vacancy-count", v_count, "Job openings level CSV (month-end stock), appended as the last part");
    ingest_cmd->add_option("--labor-force", labor_force, "Labor force CSV used with --vacancy-count");
    ingest_cmd->add_option("--calendar", in_calendar, "Recession calendar CSV")->required();
    ingest_cmd->add_option("--out", bundle_out, "Output bundle directory")->required();
    ingest_cmd->callback([&] {
        auto u = join_parts(u_files, u_splice, {}, "unemployment");
        auto parts = v_files;
        fs::path tmp;
        if (!v_count.empty()) {
            if (labor_force.empty()) throw UsageError("--vacancy-count needs --labor-force");
            const auto rate = ingest::shift_forward_one_month(ingest::compute_rate(
                ingest::load_monthly_series(v_count), ingest::load_monthly_series(labor_force)));
            tmp = fs::temp_directory_path() / "recess_vacancy_rate.csv";
            ingest::save_monthly_series(tmp, rate);
            parts.push_back(tmp.string());
        }
        auto v = join_parts(parts, v_splice, {"1950-12", "2001-01"}, "vacancy");
        if (!tmp.empty()) fs::remove(tmp);
        const auto ds = ingest::make_dataset(u, v, ingest::load_calendar(in_calendar));
        ingest::save_dataset(bundle_out, ds);
        std::cerr << "dataset " << ds.range().first.to_string() << ".." << ds.range().last.to_string() << ", "
                  << ds.range().length() << " months, " << ds.calendar.size() << " events -> " << bundle_out << "\n";
    });

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic recession-like dataset bundle");
    synthetic::SyntheticSpec synth_spec;
    std::string synth_out, synth_start = "1929-04";
    synth_cmd->add_option("--out", synth_out, "Output bundle directory")->required();
    synth_cmd->add_option("--start", synth_start, "First month");
    synth_cmd->add_option("--months", synth_spec.months, "History length");
    synth_cmd->add_option("--events", synth_spec.recessions, "Number of recessions");
    synth_cmd->callback([&] {
        synth_spec.start = MonthIndex::parse(synth_start);
        if (g.seed >= 0) synth_spec.seed = static_cast<std::uint64_t>(g.seed);
        const auto ds = synthetic::generate(synth_spec);
        ingest::save_dataset(synth_out, ds);
        std::cerr << "synthetic dataset " << ds.range().first.to_string() << ".." << ds.range().last.to_string()
                  << " -> " << synth_out << "\n";
    });

    // indicators
    auto* ind_cmd = app.add_subcommand("indicators", "Enumerate the indicator grid or materialize one indicator");
    Overrides ind_o;
    add_overrides(ind_cmd, ind_o);
    std::string ind_spec, ind_out, ind_series;
    bool ind_list = false;
    ind_cmd->add_option("--spec", ind_spec, "Indicator, e.g. combo=minmax,smooth=ema:0.5,beta=5,gamma=1.0,delta=1.0");
    ind_cmd->add_option("--series", ind_series, "Single series CSV for rise/fall specs");
    ind_cmd->add_flag("--list", ind_list, "Write the grid enumeration (index,spec)");
    ind_cmd->add_option("--out", ind_out, "Output CSV (default stdout)");
    ind_cmd->callback([&] {
        const auto cfg = base_config(g, ind_o);
        std::ofstream file;
        if (!ind_out.empty()) file = open_out(ind_out);
        std::ostream& out = ind_out.empty() ? std::cout : file;
        if (ind_list || ind_spec.empty()) {
            const indicators::IndicatorGrid grid(cfg.grid);
            out << "index,spec\n";
            for (std::size_t i = 0; i < grid.size(); ++i) {
                out << i << ",\"" << indicators::format_spec(grid.spec_at(i)) << "\"\n";
            }
            std::cerr << grid.per_leg_count() << " per-leg transforms, " << grid.size() << " indicators, "
                      << grid.size() * cfg.zetas.size() << " classifiers\n";
            return;
        }
        const auto spec = indicators::parse_spec(ind_spec);
        if (indicators::is_single_series(spec.combo)) {
            if (ind_series.empty()) throw UsageError("rise/fall specs need --series");
            ingest::write_monthly_series(out, indicators::materialize_single(spec, ingest::load_monthly_series(ind_series)).series);
        } else {
            const auto in = harness::load_inputs(cfg);
            ingest::write_monthly_series(out, indicators::materialize(spec, in.first, *in.second).series);
        }
    });

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep every classifier and list the perfect ones");
    Overrides sweep_o;
    add_overrides(sweep_cmd, sweep_o);
    std::string sweep_out = "perfect.csv";
    sweep_cmd->add_option("--out", sweep_out, "perfect.csv path");
    sweep_cmd->callback([&] {
        const auto cfg = base_config(g, sweep_o);
        const auto in = harness::load_inputs(cfg);
        const indicators::IndicatorGrid grid(cfg.grid);
        engine::SweepSettings settings{cfg.zetas, cfg.train_window, in.calendar.count_in(cfg.train_window),
                                       cfg.options, cfg.threads};
        auto out = open_out(sweep_out);
        out << harness::spec_columns_header() << ",detections\n";
        const auto t0 = std::chrono::steady_clock::now();
        const auto totals = engine::sweep_grid(
            grid, in.first, in.second_ptr(), settings,
            [&](std::size_t index, engine::Threshold zeta, std::span<const MonthIndex> dets) {
                out << harness::spec_columns({grid.spec_at(index), zeta}) << ',';
                for (std::size_t j = 0; j < dets.size(); ++j) out << (j ? ";" : "") << dets[j].to_string();
                out << '\n';
            });
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << totals.indicators << " indicators, " << totals.classifiers << " classifiers, "
                  << totals.perfect << " perfect (" << secs << " s)\n";
        if (totals.perfect == 0) code = 4;
    });

    // frontier
    auto* fr_cmd = app.add_subcommand("frontier", "Frontier and ensemble from a perfect.csv");
    Overrides fr_o;
    add_overrides(fr_cmd, fr_o);
    std::string fr_in = "perfect.csv", fr_out = "ensemble.json", fr_csv;
    double lambda = -1.0, fr_sigma_max = -1.0;
    fr_cmd->add_option("--perfect", fr_in, "perfect.csv from the sweep");
    fr_cmd->add_option("--out", fr_out, "ensemble.json path");
    fr_cmd->add_option("--frontier-out", fr_csv, "frontier.csv path (default: next to --out)");
    fr_cmd->add_option("--sigma-max", fr_sigma_max, "Ensemble precision cut (default 3)");
    fr_cmd->add_option("--lambda", lambda, "Also report the member minimizing mu + lambda * sigma");
    fr_cmd->callback([&] {
        auto cfg = base_config(g, fr_o);
        if (fr_sigma_max > 0) cfg.sigma_max = fr_sigma_max;
        RecessionCalendar calendar = !cfg.calendar.empty() ? ingest::load_calendar(cfg.calendar)
                                     : !cfg.dataset.empty() ? ingest::load_dataset(cfg.dataset).calendar
                                                            : throw UsageError("frontier needs --calendar or --dataset");
        const auto starts = calendar.starts_in(cfg.train_window);
        std::ifstream in(fr_in);
        if (!in) throw DataError("cannot open " + fr_in);
        std::string line;
        std::getline(in, line);
        std::vector<frontier::ClassifierStats> perfect;
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto f = split(line, ',');
            if (f.size() != 8) throw FormatError(line_no, "expected 8 fields");
            frontier::ClassifierStats cs;
            cs.spec = harness::parse_spec_columns(f);
            std::vector<MonthIndex> dets;
            for (const auto& d : split(f[7], ';')) dets.push_back(MonthIndex::parse(d));
            cs.errors = frontier::detection_errors(dets, starts);
            const auto st = frontier::stats(cs.errors);
            cs.mu = st.mu;
            cs.sigma = st.sigma;
            perfect.push_back(std::move(cs));
        }
        const auto result = harness::summarize_perfect(cfg, perfect, starts);
        const fs::path ensemble_path(fr_out);
        {
            auto out = open_out(fr_csv.empty() ? ensemble_path.parent_path() / "frontier.csv" : fs::path(fr_csv));
            harness::export_plot_data({&result.report}, "frontier-scatter", out);
        }
        open_out(ensemble_path).close();
        risk::save_ensemble(ensemble_path, result.ensemble);
        print_run(result.report);
        if (lambda >= 0) {
            frontier::Frontier f;
            for (const auto& p : result.report.frontier) f.points.push_back({p.spec, {}, p.mu, p.sigma});
            const auto& best = frontier::select_by_preference(f, lambda);
            std::cout << harness::spec_columns(best.spec) << ',' << best.mu << ',' << best.sigma << '\n';
        }
        if (perfect.empty()) code = 4;
    });

    // probability
    auto* pr_cmd = app.add_subcommand("probability", "Recession probabilities from an ensemble");
    Overrides pr_o;
    add_overrides(pr_cmd, pr_o);
    std::string pr_ensemble = "ensemble.json", pr_out = "timeline.csv", pr_from, pr_to;
    pr_cmd->add_option("--ensemble", pr_ensemble, "ensemble.json");
    pr_cmd->add_option("--out", pr_out, "timeline.csv path");
    pr_cmd->add_option("--from", pr_from, "First reported month (default training start)");
    pr_cmd->add_option("--to", pr_to, "Last reported month (default data end)");
    pr_cmd->callback([&] {
        auto cfg = base_config(g, pr_o);
        const auto ensemble = risk::load_ensemble(pr_ensemble);
        if (!ensemble.members.empty() && indicators::is_single_series(ensemble.members.front().spec.indicator.combo)) {
            cfg.mode = harness::Mode::single_series;
        }
        const auto in = harness::load_inputs(cfg);
        const MonthWindow range{pr_from.empty() ? ensemble.train_window.first : MonthIndex::parse(pr_from),
                                pr_to.empty() ? in.first.end() : MonthIndex::parse(pr_to)};
        risk::save_timeline(pr_out, risk::probability_timeline(ensemble, in.first, in.second_ptr(), range));
    });

    // end-to-end runs
    struct RunCmd {
        Overrides o;
        std::string out = "run";
        std::string test_end, placebo_calendar, series, direction;
        bool random = false;
    };
    std::map<std::string, RunCmd> runs;
    auto add_run = [&](const std::string& name, const std::string& help, harness::Mode mode) {
        auto& rc = runs[name];
        auto* sub = app.add_subcommand(name, help);
        add_overrides(sub, rc.o);
        sub->add_option("--out", rc.out, "Output directory");
        if (mode == harness::Mode::backtest) sub->add_option("--test-end", rc.test_end, "Last test month");
        if (mode == harness::Mode::placebo) {
            sub->add_option("--placebo-calendar", rc.placebo_calendar, "Placebo event calendar CSV");
            sub->add_flag("--random", rc.random, "Draw a seeded random calendar instead");
        }
        if (mode == harness::Mode::single_series) {
            sub->add_option("--series", rc.series, "Series CSV");
            sub->add_option("--direction", rc.direction, "rise or fall (default fall)");
        }
        sub->callback([&, mode, name] {
            auto& r = runs[name];
            auto cfg = base_config(g, r.o);
            cfg.mode = mode;
            if (!r.test_end.empty()) cfg.test_end = MonthIndex::parse(r.test_end);
            if (!r.placebo_calendar.empty()) cfg.placebo_calendar = r.placebo_calendar;
            if (r.random) cfg.placebo_random = true;
            if (!r.series.empty()) cfg.series = r.series;
            if (!r.direction.empty()) cfg.direction = indicators::parse_combination(r.direction);
            cfg.validate();
            const auto t0 = std::chrono::steady_clock::now();
            const auto result = harness::run(cfg, harness::load_inputs(cfg));
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            code = write_run(result, r.out);
            std::cerr << "done in " << secs << " s -> " << r.out << "\n";
        });
    };
    add_run("train", "Full training run", harness::Mode::train);
    add_run("backtest", "Train up to --train-end, test afterwards", harness::Mode::backtest);
    add_run("placebo", "Training against placebo event dates", harness::Mode::placebo);
    add_run("single-series", "Per-leg pipeline on one series", harness::Mode::single_series);

    // export
    auto* ex_cmd = app.add_subcommand("export", "Plot-ready CSV tables");
    Overrides ex_o;
    add_overrides(ex_cmd, ex_o);
    std::string kind, ex_report, ex_compare, ex_timeline, ex_spec, ex_zeta, ex_series, ex_out;
    ex_cmd->add_option("--kind", kind, "frontier-scatter | timeline | indicator-trace | overlay")->required();
    ex_cmd->add_option("--report", ex_report, "report.json");
    ex_cmd->add_option("--compare", ex_compare, "Second report.json for overlay");
    ex_cmd->add_option("--timeline", ex_timeline, "timeline.csv");
    ex_cmd->add_option("--spec", ex_spec, "Indicator spec for indicator-trace");
    ex_cmd->add_option("--zeta", ex_zeta, "Threshold for indicator-trace");
    ex_cmd->add_option("--series", ex_series, "Series CSV for rise/fall indicator traces");
    ex_cmd->add_option("--out", ex_out, "Output CSV (default stdout)");
    ex_cmd->callback([&] {
        (void)harness::parse_plot_kind(kind);
        auto cfg = base_config(g, ex_o);
        std::optional<harness::RunReport> report, compare;
        std::optional<risk::ProbabilityTimeline> timeline;
        std::optional<MonthlySeries> indicator;
        harness::PlotInputs p;
        if (!ex_report.empty()) p.report = &report.emplace(harness::load_report(ex_report));
        if (!ex_compare.empty()) p.compare = &compare.emplace(harness::load_report(ex_compare));
        if (!ex_timeline.empty()) {
            const auto s = ingest::load_monthly_series(ex_timeline, "p_ensemble");
            auto& t = timeline.emplace();
            t.start = s.start();
            t.ensemble.assign(s.values().begin(), s.values().end());
            p.timeline = &t;
        }
        if (!ex_spec.empty()) {
            const auto spec = indicators::parse_spec(ex_spec);
            if (indicators::is_single_series(spec.combo)) {
                if (ex_series.empty()) throw UsageError("rise/fall specs need --series");
                indicator = indicators::materialize_single(spec, ingest::load_monthly_series(ex_series)).series;
            } else {
                const auto in = harness::load_inputs(cfg);
                indicator = indicators::materialize(spec, in.first, *in.second).series;
            }
            p.indicator = &*indicator;
        }
        if (!ex_zeta.empty()) p.zeta = engine::Threshold::from_double(std::stod(ex_zeta));
        p.options = cfg.options;
        std::ofstream file;
        if (!ex_out.empty()) file = open_out(ex_out);
        harness::export_plot_data(p, kind, ex_out.empty() ? std::cout : file);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const EmptyResultError& e) {
        std::cerr << "empty result: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return code;
}
