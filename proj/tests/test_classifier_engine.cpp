#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "recess/classifier_engine.hpp"
#include "recess/errors.hpp"

using namespace recess;
using namespace recess::engine;

namespace {

const MonthIndex kStart = MonthIndex::from_year_month(1980, 1);

MonthlySeries toy() { return MonthlySeries(kStart, {0, 0.1, 0.3, 0.2, 0, 0.4, 0}); }

MonthWindow whole(const MonthlySeries& s) { return s.range(); }

std::vector<MonthIndex> months(std::initializer_list<int> offsets) {
    std::vector<MonthIndex> out;
    for (const int o : offsets) out.push_back(kStart + o);
    return out;
}

std::vector<MonthIndex> to_months(const std::vector<std::size_t>& positions) {
    std::vector<MonthIndex> out;
    for (const auto p : positions) out.push_back(kStart + static_cast<std::int32_t>(p));
    return out;
}

}  // namespace

TEST_CASE("machine on a small indicator") {
    const auto s = toy();
    CHECK(run_state_machine(s, Threshold::from_double(0.25), whole(s)).detections == months({2, 5}));
    CHECK(run_state_machine(s, Threshold::from_double(0.05), whole(s)).detections == months({1, 5}));
    CHECK(run_state_machine(s, Threshold::from_double(0.45), whole(s)).detections.empty());
    CHECK(run_state_machine(s, Threshold::from_double(0.3), whole(s)).detections == months({2, 5}));

    const auto out = run_state_machine(s, Threshold::from_double(0.25), whole(s), {}, true);
    CHECK(out.state_path == std::vector<std::uint8_t>{0, 0, 1, 1, 0, 1, 0});
    CHECK_FALSE(out.state.in_recession);
    CHECK(out.state.last_detection == kStart + 5);

    CHECK_THROWS_AS((void)run_state_machine(s, Threshold{1}, {kStart, kStart + 7}), AlignmentError);
}

TEST_CASE("threshold parsing") {
    CHECK(Threshold::from_double(0.0023).ten_thousandths == 23);
    CHECK(Threshold{23}.to_string() == "0.0023");
    CHECK(Threshold{2500}.to_string() == "0.2500");
    CHECK_THROWS_AS((void)Threshold::from_double(0.00015), GridError);
    CHECK_THROWS_AS((void)Threshold::from_double(0.0), GridError);
    const ZetaGrid g;
    CHECK(g.size() == 2500);
    CHECK(g.values().front() == Threshold{1});
    CHECK(g.values().back() == Threshold{2500});
    CHECK(ZetaGrid::from_values(0.001, 0.01, 0.003).size() == 4);
    CHECK_THROWS_AS(ZetaGrid::from_values(0.01, 0.001, 0.001).validate(), GridError);
}

TEST_CASE("windows, start policy and zero epsilon") {
    const MonthlySeries s(kStart, {0.5, 0.4, 0.2, 0, 0.5, 0});
    const MonthWindow tail{kStart + 1, kStart + 5};
    CHECK(run_state_machine(s, Threshold{3000}, tail).detections == months({1, 4}));
    const EngineOptions warm{0.0, StartPolicy::warm};
    CHECK(run_state_machine(s, Threshold{3000}, tail, warm).detections == months({4}));
    const EngineOptions eps{0.25, StartPolicy::fresh};
    const MonthlySeries t(kStart, {0.5, 0.2, 0.5, 0});
    CHECK(run_state_machine(t, Threshold{4000}, whole(t)).detections == months({0}));
    CHECK(run_state_machine(t, Threshold{4000}, whole(t), eps).detections == months({0, 2}));
}

TEST_CASE("excursions and their running maxima") {
    const auto ex = excursion_decompose(toy());
    REQUIRE(ex.size() == 2);
    CHECK(ex[0].first == kStart + 1);
    CHECK(ex[0].last == kStart + 3);
    CHECK(ex[0].prefix_running_max == std::vector<double>{0.1, 0.3, 0.3});
    CHECK(ex[1].first == kStart + 5);
    CHECK(ex[1].last == kStart + 5);
    CHECK(excursion_decompose(MonthlySeries(kStart, {0.2, 0.3})).size() == 1);
    CHECK(excursion_decompose(MonthlySeries(kStart, {0, 0})).empty());
}

TEST_CASE("all-threshold sweep equals the machine") {
    std::mt19937_64 rng(4);
    const ZetaGrid grid = ZetaGrid::from_values(0.0001, 0.3, 0.0007);
    for (int trial = 0; trial < 60; ++trial) {
        const auto xs = oracle::random_indicator(rng, 300);
        const MonthlySeries s(kStart, xs);
        const MonthWindow w{kStart + 10, kStart + 280};
        for (const auto policy : {StartPolicy::fresh, StartPolicy::warm}) {
            const EngineOptions opts{0.0, policy};
            const ThresholdSweep sweep(s, w, opts);
            for (const auto z : grid.values()) {
                const auto ref = run_state_machine(s, z, w, opts).detections;
                CHECK(sweep.count(z) == ref.size());
                CHECK(sweep.detections(z) == ref);
                if (policy == StartPolicy::fresh) CHECK(ref == to_months(oracle::machine(xs, z.value(), 10, 280)));
            }
        }
    }
}

TEST_CASE("sweep_thresholds and select_perfect") {
    const auto s = toy();
    const ZetaGrid grid = ZetaGrid::from_values(0.05, 0.45, 0.05);
    const auto sums = sweep_thresholds(s, grid, whole(s));
    REQUIRE(sums.size() == 9);
    CHECK(sums[0].count == 2);
    CHECK(sums[8].count == 0);
    const RecessionCalendar cal({kStart + 2, kStart + 5});
    const auto perfect = select_perfect(sums, cal, whole(s));
    REQUIRE(perfect.size() == 6);
    CHECK(perfect.back().zeta == Threshold::from_double(0.3));
    CHECK(perfect.front().detections == months({1, 5}));

    const auto kept = sweep_thresholds(s, grid, whole(s), {}, 1);
    CHECK(kept[6].count == 1);
    CHECK(kept[6].detections == months({5}));
    CHECK(kept[0].detections.empty());
}

TEST_CASE("resume equals a single pass over the joined range") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> cut(1, 198);
    std::uniform_int_distribution<int> z(1, 3000);
    for (int trial = 0; trial < 200; ++trial) {
        const auto xs = oracle::random_indicator(rng, 200);
        const MonthlySeries s(kStart, xs);
        const int c = cut(rng);
        const Threshold zeta{z(rng)};
        const auto full = run_state_machine(s, zeta, whole(s), {}, true);
        const auto head = run_state_machine(s, zeta, {kStart, kStart + c - 1}, {}, true);
        const auto joined = resume_state(head, s.slice({kStart + c, s.end()}));
        CHECK(joined.detections == full.detections);
        CHECK(joined.state == full.state);
        CHECK(joined.state_path == full.state_path);
        CHECK(joined.window == full.window);
    }
    const auto s = toy();
    const auto head = run_state_machine(s, Threshold{1}, {kStart, kStart + 2});
    CHECK_THROWS_AS((void)resume_state(head, s.slice({kStart + 4, s.end()})), AlignmentError);
}

TEST_CASE("grid sweep finds every perfect classifier, independent of thread count") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> n(-0.05, 0.05);
    std::vector<double> u(160), v(160);
    for (std::size_t t = 0; t < u.size(); ++t) {
        const bool bad = (t % 40) >= 20 && (t % 40) < 26;
        u[t] = 5.0 + (bad ? 1.5 : 0.0) + n(rng);
        v[t] = 3.0 - (bad ? 1.0 : 0.0) + n(rng);
    }
    const MonthlySeries us(kStart, u), vs(kStart, v);
    indicators::GridConfig cfg;
    cfg.simple_alphas = {0, 3};
    cfg.ema_alphas = {indicators::Tenths{5}};
    cfg.betas = {2, 9};
    cfg.gammas = {indicators::Tenths{0}, indicators::Tenths{10}};
    cfg.deltas = {indicators::Tenths{0}, indicators::Tenths{5}, indicators::Tenths{10}};
    const indicators::IndicatorGrid grid(cfg);
    const RecessionCalendar cal({kStart + 20, kStart + 60, kStart + 100, kStart + 140});

    SweepSettings settings;
    settings.zetas = ZetaGrid::from_values(0.001, 0.5, 0.001);
    settings.window = us.range();
    settings.events = 4;

    struct Row {
        std::size_t index;
        Threshold zeta;
        std::vector<MonthIndex> dates;
        bool operator==(const Row&) const = default;
    };
    auto collect = [&](unsigned threads) {
        settings.threads = threads;
        std::vector<Row> rows;
        const auto totals = sweep_grid(grid, us, &vs, settings, [&](std::size_t i, Threshold z, auto d) {
            rows.push_back({i, z, {d.begin(), d.end()}});
        });
        CHECK(totals.indicators == grid.size());
        CHECK(totals.classifiers == grid.size() * settings.zetas.size());
        CHECK(totals.perfect == rows.size());
        return rows;
    };
    const auto one = collect(1);
    CHECK(collect(3) == one);

    std::vector<Row> naive;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto ind = materialize_indicator(grid.spec_at(i), us, &vs);
        for (const auto z : settings.zetas.values()) {
            auto d = run_state_machine(ind, z, settings.window).detections;
            if (d.size() == 4) naive.push_back({i, z, d});
        }
    }
    CHECK(naive.size() > 0);
    CHECK(naive == one);
}
