#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "recess/errors.hpp"
#include "recess/frontier_eval.hpp"

using namespace recess;
using namespace recess::frontier;

namespace {

MonthIndex ym(int y, int m) { return MonthIndex::from_year_month(y, m); }

ClassifierStats point(double mu, double sigma, std::int32_t zeta = 1) {
    ClassifierStats s;
    s.spec.zeta = engine::Threshold{zeta};
    s.mu = mu;
    s.sigma = sigma;
    return s;
}

std::set<std::pair<double, double>> coords(const Frontier& f) {
    std::set<std::pair<double, double>> out;
    for (const auto& p : f.points) out.insert({p.mu, p.sigma});
    return out;
}

}  // namespace

TEST_CASE("detection errors pair by rank") {
    const std::vector<MonthIndex> d{ym(1980, 6)};
    const std::vector<MonthIndex> s{ym(1980, 2)};
    CHECK(detection_errors(d, s) == std::vector<std::int32_t>{4});
    CHECK(detection_errors(s, s) == std::vector<std::int32_t>{0});
    const std::vector<MonthIndex> starts{ym(1950, 1), ym(1960, 5), ym(1970, 9)};
    std::vector<MonthIndex> shifted;
    for (const auto m : starts) shifted.push_back(m + 2);
    CHECK(detection_errors(shifted, starts) == std::vector<std::int32_t>{2, 2, 2});
    const std::vector<MonthIndex> early{ym(1949, 1), ym(1960, 1), ym(1970, 9)};
    CHECK(detection_errors(early, starts) == std::vector<std::int32_t>{-12, -4, 0});
    CHECK_THROWS_AS((void)detection_errors(d, starts), NotPerfectError);
}

TEST_CASE("population mean and standard deviation") {
    const std::vector<std::int32_t> e{1, 3};
    CHECK(stats(e) == ErrorStats{2.0, 1.0});
    const std::vector<std::int32_t> one{7};
    CHECK(stats(one) == ErrorStats{7.0, 0.0});
    const std::vector<std::int32_t> same{-2, -2, -2};
    CHECK(stats(same) == ErrorStats{-2.0, 0.0});
    CHECK_THROWS_AS((void)stats(std::span<const std::int32_t>{}), EmptyError);

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> v(-300, 300);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::int32_t> xs(1 + trial % 20);
        for (auto& x : xs) x = v(rng);
        long double m = 0;
        for (const auto x : xs) m += x;
        m /= xs.size();
        long double q = 0;
        for (const auto x : xs) q += (x - m) * (x - m);
        const auto st = stats(xs);
        CHECK(std::abs(st.mu - static_cast<double>(m)) < 1e-12);
        CHECK(std::abs(st.sigma - static_cast<double>(std::sqrt(q / xs.size()))) < 1e-9);
        std::int64_t sum = 0, sq = 0;
        for (const auto x : xs) {
            sum += x;
            sq += std::int64_t{x} * x;
        }
        CHECK(stats_from_moments(static_cast<std::int64_t>(xs.size()), sum, sq) == st);
        auto moved = xs;
        for (auto& x : moved) x += 17;
        const auto sh = stats(moved);
        CHECK(sh.mu == doctest::Approx(st.mu + 17).epsilon(1e-12));
        CHECK(sh.sigma == doctest::Approx(st.sigma).epsilon(1e-12));
    }
}

TEST_CASE("pareto frontier of a small set") {
    const std::vector<ClassifierStats> in{point(1, 3), point(2, 2), point(3, 1), point(2, 4)};
    const auto f = pareto_frontier(in);
    REQUIRE(f.points.size() == 3);
    CHECK(f.points[0].mu == 1);
    CHECK(f.points[1].mu == 2);
    CHECK(f.points[1].sigma == 2);
    CHECK(f.points[2].mu == 3);
    const std::vector<ClassifierStats> single{point(5, 5)};
    CHECK(pareto_frontier(single).points.size() == 1);
    CHECK(pareto_frontier(std::span<const ClassifierStats>{}).points.empty());
}

TEST_CASE("tied frontier points are all kept in input order") {
    const std::vector<ClassifierStats> in{point(1, 3, 5), point(1, 3, 2), point(1, 4, 1), point(0, 5, 9)};
    const auto f = pareto_frontier(in);
    REQUIRE(f.points.size() == 3);
    CHECK(f.points[0].spec.zeta.ten_thousandths == 9);
    CHECK(f.points[1].spec.zeta.ten_thousandths == 5);
    CHECK(f.points[2].spec.zeta.ten_thousandths == 2);
}

TEST_CASE("pareto indices match brute-force dominance") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        std::uniform_int_distribution<int> m(-40, 40), s(0, 30);
        std::vector<StatPoint> pts(1 + trial * 17);
        std::vector<std::pair<double, double>> raw;
        for (auto& p : pts) {
            p = {m(rng) / 4.0, s(rng) / 4.0};
            raw.emplace_back(p.mu, p.sigma);
        }
        auto want = oracle::pareto(raw);
        auto got = pareto_indices(pts);
        for (std::size_t i = 1; i < got.size(); ++i) {
            CHECK(pts[got[i - 1]].mu <= pts[got[i]].mu);
            CHECK(pts[got[i - 1]].sigma >= pts[got[i]].sigma);
        }
        std::sort(got.begin(), got.end());
        CHECK(got == want);
    }
}

TEST_CASE("high-precision selection") {
    const std::vector<ClassifierStats> in{point(1, 3.5), point(2, 3.0), point(3, 2.5), point(4, 1)};
    const auto f = pareto_frontier(in);
    CHECK(select_high_precision(f).size() == 2);
    CHECK(select_high_precision(f, 0.0).empty());
    CHECK(select_high_precision(f, INFINITY).size() == 4);
    std::size_t prev = 0;
    for (double cut = 0; cut <= 5; cut += 0.25) {
        const auto n = select_high_precision(f, cut).size();
        CHECK(n >= prev);
        prev = n;
    }
}

TEST_CASE("preference selection") {
    const std::vector<ClassifierStats> in{point(1, 3), point(3, 1)};
    const auto f = pareto_frontier(in);
    CHECK(select_by_preference(f, 10).mu == 3);
    CHECK(select_by_preference(f, 0.1).mu == 1);
    const auto tied = select_by_preference(f, 1.0);
    CHECK(tied.mu == 1);
    const std::vector<ClassifierStats> single{point(2, 2)};
    const auto g = pareto_frontier(single);
    for (const double l : {0.01, 1.0, 100.0}) CHECK(select_by_preference(g, l).mu == 2);
    CHECK_THROWS_AS((void)select_by_preference(Frontier{}, 1.0), EmptyFrontierError);
}

TEST_CASE("distance to the frontier") {
    const std::vector<ClassifierStats> in{point(1.8, 1.9), point(3.1, 1.6), point(1.5, 2.2)};
    const auto f = pareto_frontier(in);
    CHECK(distance_to_frontier({1.9, 2.3}, f) == doctest::Approx(std::sqrt(0.01 + 0.16)).epsilon(1e-12));
    CHECK(std::round(distance_to_frontier({1.9, 2.3}, f) * 100) / 100 == 0.41);
    CHECK(distance_to_frontier({3.1, 1.6}, f) == 0.0);
    const std::vector<ClassifierStats> one{point(3, 4)};
    CHECK(distance_to_frontier({0, 0}, pareto_frontier(one)) == doctest::Approx(5.0));
    CHECK(coords(f).size() == 3);
}
