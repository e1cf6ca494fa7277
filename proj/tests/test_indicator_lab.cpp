#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "recess/errors.hpp"
#include "recess/indicator_lab.hpp"

using namespace recess;
using namespace recess::indicators;

namespace {

const MonthIndex kStart = MonthIndex::from_year_month(1960, 1);

MonthlySeries series(std::vector<double> xs) { return MonthlySeries(kStart, std::move(xs)); }

std::vector<double> vec(const MonthlySeries& s) { return {s.values().begin(), s.values().end()}; }

std::vector<double> positive(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> xs(n);
    for (auto& x : xs) x = d(rng);
    return xs;
}

void check_close(const std::vector<double>& got, const std::vector<double>& want, double tol) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(std::abs(got[i] - want[i]) <= tol * std::max(1.0, std::abs(want[i])));
    }
}

}  // namespace

TEST_CASE("simple moving average truncates at the start") {
    CHECK(vec(smooth_simple(series({2, 4, 6}), 1)) == std::vector<double>{2, 3, 5});
    CHECK(vec(smooth_simple(series({2, 4, 6}), 0)) == std::vector<double>{2, 4, 6});
    CHECK(vec(smooth_simple(series({3, 6, 9}), 11)) == std::vector<double>{3, 4.5, 6});
    CHECK_THROWS_AS((void)smooth_simple(series({1}), 12), GridError);
}

TEST_CASE("exponential smoothing seeds with the first value") {
    CHECK(vec(smooth_exponential(series({1, 3}), 0.5)) == std::vector<double>{1, 2});
    CHECK(vec(smooth_exponential(series({1, 3, 7}), 1.0)) == std::vector<double>{1, 3, 7});
    CHECK_THROWS_AS((void)smooth_exponential(series({1}), 0.25), GridError);
    CHECK_THROWS_AS((void)smooth_exponential(series({1}), 0.0), GridError);
}

TEST_CASE("trailing extremum includes the current month") {
    CHECK(vec(trailing_extremum(series({3, 2, 4}), 1, Extremum::min)) == std::vector<double>{3, 2, 2});
    CHECK(vec(trailing_extremum(series({3, 2, 4}), 1, Extremum::max)) == std::vector<double>{3, 3, 4});
    CHECK(vec(trailing_extremum(series({5, 1, 2, 3, 4}), 2, Extremum::min)) ==
          std::vector<double>{5, 1, 1, 1, 2});
}

TEST_CASE("box-cox gap") {
    const auto g0 = boxcox_gap(series({2}), series({1}), 0.0);
    CHECK(g0.values()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const auto g1 = boxcox_gap(series({5}), series({2}), 1.0);
    CHECK(g1.values()[0] == doctest::Approx(3.0));
    const auto gh = boxcox_gap(series({4}), series({1}), 0.5);
    CHECK(gh.values()[0] == doctest::Approx(2.0));
    CHECK(boxcox_gap(series({0.0}), series({0.0}), 1.0).values()[0] == 0.0);
    CHECK_THROWS_AS((void)boxcox_gap(series({1}), series({2}), 1.0), DomainError);
    CHECK_THROWS_AS((void)boxcox_gap(series({1}), series({0}), 0.5), DomainError);
    CHECK_THROWS_AS((void)boxcox_gap(series({1}), series({1}), 0.25), GridError);
}

TEST_CASE("combination") {
    const auto mm = combine(series({1}), series({3}), Combination::minmax, 0.5);
    CHECK(mm.values()[0] == doctest::Approx(2.0));
    const auto lin = combine(series({1, 4}), series({3, 0}), Combination::linear, 1.0);
    CHECK(vec(lin) == std::vector<double>{1, 4});
    const auto mx = combine(series({1, 4}), series({3, 0}), Combination::minmax, 0.0);
    CHECK(vec(mx) == std::vector<double>{3, 4});
    const auto mn = combine(series({1, 4}), series({3, 0}), Combination::minmax, 1.0);
    CHECK(vec(mn) == std::vector<double>{1, 0});
    CHECK_THROWS_AS((void)combine(series({1}), MonthlySeries(kStart + 1, {1}), Combination::linear, 0.5),
                    AlignmentError);
}

TEST_CASE("stage operations agree with reference implementations") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const auto xs = positive(rng, 200, 0.5, 12.0);
        const auto s = series(xs);
        for (int a = 0; a <= 11; ++a) check_close(vec(smooth_simple(s, a)), oracle::sma(xs, a), 1e-12);
        for (int a = 1; a <= 10; ++a) {
            check_close(vec(smooth_exponential(s, a / 10.0)), oracle::ema(xs, a / 10.0), 1e-12);
        }
        for (int b = 1; b <= 18; ++b) {
            CHECK(vec(trailing_extremum(s, b, Extremum::min)) == oracle::extremum(xs, b, true));
            CHECK(vec(trailing_extremum(s, b, Extremum::max)) == oracle::extremum(xs, b, false));
        }
        const auto lo = oracle::extremum(xs, 6, true);
        for (int g = 0; g <= 10; ++g) {
            check_close(vec(boxcox_gap(s, series(lo), g / 10.0)), oracle::gap(xs, lo, g / 10.0), 1e-12);
        }
    }
}

TEST_CASE("full pipeline agrees with composed references") {
    std::mt19937_64 rng(8);
    const auto us = positive(rng, 240, 2.0, 10.0);
    const auto vs = positive(rng, 240, 1.0, 6.0);
    std::uniform_int_distribution<int> pick(0, 1 << 30);
    const GridConfig config;
    const IndicatorGrid grid(config);
    for (int trial = 0; trial < 300; ++trial) {
        const auto spec = grid.spec_at(static_cast<std::size_t>(pick(rng)) % grid.size());
        auto smoothing = [&](const std::vector<double>& x) {
            return spec.smoothing.method == SmoothingMethod::simple ? oracle::sma(x, spec.smoothing.param)
                                                                    : oracle::ema(x, spec.smoothing.param / 10.0);
        };
        const auto su = smoothing(us);
        const auto sv = smoothing(vs);
        const auto ui = oracle::gap(su, oracle::extremum(su, spec.beta, true), spec.gamma.value());
        const auto vi = oracle::gap(oracle::extremum(sv, spec.beta, false), sv, spec.gamma.value());
        std::vector<double> want(ui.size());
        const double d = spec.delta.value();
        for (std::size_t t = 0; t < want.size(); ++t) {
            want[t] = spec.combo == Combination::linear
                          ? d * ui[t] + (1 - d) * vi[t]
                          : d * std::min(ui[t], vi[t]) + (1 - d) * std::max(ui[t], vi[t]);
        }
        const auto got = materialize(spec, series(us), series(vs)).series;
        check_close(vec(got), want, 1e-9);
        for (const double x : got.values()) CHECK(x >= 0.0);
    }
}

TEST_CASE("constant inputs give an all-zero indicator") {
    const IndicatorGrid grid;
    const auto u = series(std::vector<double>(60, 5.5));
    const auto v = series(std::vector<double>(60, 2.25));
    for (std::size_t i = 0; i < grid.size(); i += 97) {
        const auto ind = materialize(grid.spec_at(i), u, v).series;
        for (const double x : ind.values()) CHECK(x == 0.0);
    }
}

TEST_CASE("single-series legs") {
    const auto s = series({4, 5, 6, 5, 4, 3});
    auto spec = parse_spec("combo=rise,smooth=sma:0,beta=2,gamma=1.0");
    CHECK(vec(materialize_single(spec, s).series) == std::vector<double>{0, 1, 2, 0, 0, 0});
    spec.combo = Combination::fall;
    CHECK(vec(materialize_single(spec, s).series) == std::vector<double>{0, 0, 0, 1, 2, 2});
    CHECK_THROWS_AS((void)materialize(spec, s, s), GridError);
    CHECK_THROWS_AS((void)materialize_single(parse_spec("combo=linear,smooth=sma:0,beta=2,gamma=1.0,delta=0.5"), s),
                    GridError);
}

TEST_CASE("grid sizes") {
    const IndicatorGrid full;
    CHECK(full.per_leg_count() == 4356);
    CHECK(full.size() == 95832);
    CHECK(full.size() * 2500 == 239580000ULL);
    CHECK(IndicatorGrid(GridConfig::single_series(Combination::fall)).size() == 4356);
    CHECK(enumerate_grid().size() == 95832);

    GridConfig empty;
    empty.betas.clear();
    CHECK_THROWS_AS(IndicatorGrid{empty}, ConfigError);
    GridConfig off;
    off.betas = {19};
    CHECK_THROWS_AS(IndicatorGrid{off}, GridError);
}

TEST_CASE("grid index is a bijection in canonical order") {
    const IndicatorGrid grid;
    std::set<IndicatorSpec> seen;
    IndicatorSpec prev{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto spec = grid.spec_at(i);
        if (i > 0) CHECK(prev < spec);
        if (i % 101 == 0) CHECK(grid.index_of(spec) == i);
        prev = spec;
        seen.insert(spec);
    }
    CHECK(seen.size() == grid.size());
    GridConfig small;
    small.betas = {3};
    CHECK_THROWS_AS((void)IndicatorGrid(small).index_of(grid.spec_at(0)), GridError);
}

TEST_CASE("spec text round trip") {
    const IndicatorGrid grid;
    for (std::size_t i = 0; i < grid.size(); i += 37) {
        const auto spec = grid.spec_at(i);
        CHECK(parse_spec(format_spec(spec)) == spec);
    }
    CHECK(format_spec(parse_spec("beta=5,combo=minmax,gamma=1.0,smooth=ema:0.5,delta=1.0")) ==
          "combo=minmax,smooth=ema:0.5,beta=5,gamma=1.0,delta=1.0");
    CHECK_THROWS_AS((void)parse_spec("combo=minmax,smooth=ema:0.5,beta=5"), GridError);
    CHECK_THROWS_AS((void)parse_spec("combo=other,smooth=sma:1,beta=5,gamma=1.0,delta=1.0"), GridError);
}

TEST_CASE("grid from json") {
    const auto g = GridConfig::from_json(nlohmann::json::parse(
        R"({"combos":["minmax"],"simple_alpha":[0,2],"ema_alpha":[],"beta":[5],"gamma":[1.0],"delta":[0.5]})"));
    const IndicatorGrid grid(g);
    CHECK(grid.size() == 2);
    CHECK(format_spec(grid.spec_at(1)) == "combo=minmax,smooth=sma:2,beta=5,gamma=1.0,delta=0.5");
    CHECK_THROWS_AS((void)GridConfig::from_json(nlohmann::json::parse(R"({"beta":3})")), ConfigError);
}
