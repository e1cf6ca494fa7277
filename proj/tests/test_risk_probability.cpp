#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "recess/errors.hpp"
#include "recess/risk_probability.hpp"

using namespace recess;
using namespace recess::risk;

namespace {

const MonthIndex kStart = MonthIndex::from_year_month(1990, 1);

MonthlySeries rising() {
    return MonthlySeries(kStart, {5, 5, 5, 6, 7, 7, 5, 5, 5, 5, 6, 5, 5, 5, 8, 9, 9, 9});
}

TrainedClassifier member(const char* spec, std::int32_t zeta, double mu, double sigma) {
    TrainedClassifier c;
    c.spec.indicator = indicators::parse_spec(spec);
    c.spec.zeta = engine::Threshold{zeta};
    c.mu = mu;
    c.sigma = sigma;
    return c;
}

}  // namespace

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(std::abs(normal_cdf(1.0) - 0.8413447460685429) < 1e-12);
    CHECK(std::abs(normal_cdf(1.0) - static_cast<double>(oracle::phi(1.0L))) < 1e-12);
    for (double x = -8; x <= 8; x += 0.37) {
        CHECK(std::abs(normal_cdf(-x) - (1.0 - normal_cdf(x))) <= 1e-12);
        CHECK(std::abs(normal_cdf(x) - static_cast<double>(oracle::phi(x))) <= 1e-7);
    }
}

TEST_CASE("classifier probability") {
    const auto d = kStart + 10;
    CHECK(classifier_probability(true, d, 0.0, 2.0, d) == 0.5);
    CHECK(classifier_probability(false, d, 2.0, 2.0, d) == 0.0);
    CHECK(classifier_probability(false, std::nullopt, 2.0, 0.0, d) == 0.0);
    CHECK(classifier_probability(true, d, 2.0, 2.0, d) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-15));
    CHECK(classifier_probability(true, d, -4.0, 2.0, d + 4) == 0.5);
    CHECK_THROWS_AS((void)classifier_probability(true, d, 2.0, 0.0, d), DegenerateError);
    CHECK_THROWS_AS((void)classifier_probability(true, std::nullopt, 2.0, 1.0, d), DegenerateError);
    double prev = 0;
    for (int k = 0; k < 12; ++k) {
        const double p = classifier_probability(true, d, 1.0, 2.5, d + k);
        CHECK(p > prev);
        prev = p;
    }
}

TEST_CASE("ensemble probability") {
    const std::vector<double> zeros(4, 0.0);
    CHECK(ensemble_probability(zeros) == 0.0);
    const std::vector<double> half{0.0, 1.0};
    CHECK(ensemble_probability(half) == 0.5);
    const std::vector<double> ones(11, 1.0);
    CHECK(ensemble_probability(ones) == 1.0);
    CHECK_THROWS_AS((void)ensemble_probability(std::span<const double>{}), EmptyError);
    std::vector<double> xs{0.1, 0.7, 0.3, 0.9};
    const double a = ensemble_probability(xs);
    std::reverse(xs.begin(), xs.end());
    CHECK(ensemble_probability(xs) == doctest::Approx(a).epsilon(1e-15));
}

TEST_CASE("timeline follows the machine of each member") {
    const auto s = rising();
    Ensemble e;
    e.train_window = {kStart, kStart + 11};
    e.members = {member("combo=rise,smooth=sma:0,beta=3,gamma=1.0", 5000, 2.0, 2.0),
                 member("combo=rise,smooth=sma:0,beta=3,gamma=1.0", 15000, -1.0, 1.5)};
    const auto tl = probability_timeline(e, s, nullptr, s.range());
    REQUIRE(tl.months() == s.size());
    CHECK(tl.start == kStart);

    std::vector<double> ind{0, 0, 0, 1, 2, 2, 0, 0, 0, 0, 1, 0, 0, 0, 3, 4, 4, 1};
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& m = e.members[k];
        bool rec = false;
        std::optional<std::size_t> last;
        for (std::size_t t = 0; t < ind.size(); ++t) {
            if (!rec && ind[t] >= m.spec.zeta.value()) {
                rec = true;
                last = t;
            } else if (rec && ind[t] <= 0) {
                rec = false;
            }
            const double want =
                rec ? static_cast<double>(oracle::phi((static_cast<long double>(t) + m.mu - *last) / m.sigma)) : 0.0;
            CHECK(std::abs(tl.per_classifier[k][t] - want) < 1e-9);
        }
    }
    for (std::size_t t = 0; t < tl.months(); ++t) {
        CHECK(tl.ensemble[t] == doctest::Approx((tl.per_classifier[0][t] + tl.per_classifier[1][t]) / 2));
        CHECK(tl.ensemble[t] >= 0.0);
        CHECK(tl.ensemble[t] <= 1.0);
    }
    CHECK(tl.per_classifier[0][6] == 0.0);
    CHECK(tl.ensemble[0] == 0.0);

    const auto tail = probability_timeline(e, s, nullptr, {kStart + 12, s.end()});
    for (std::size_t t = 0; t < tail.months(); ++t) CHECK(tail.ensemble[t] == tl.ensemble[t + 12]);

    Ensemble one = e;
    one.members.resize(1);
    const auto single = probability_timeline(one, s, nullptr, s.range());
    CHECK(single.ensemble == single.per_classifier[0]);
    CHECK(single.per_classifier[0] == tl.per_classifier[0]);

    CHECK_THROWS_AS((void)probability_timeline(e, s, nullptr, {kStart - 1, s.end()}), AlignmentError);
    CHECK_THROWS_AS((void)probability_timeline(e, s, nullptr, {kStart, s.end() + 1}), AlignmentError);
    CHECK_THROWS_AS((void)probability_timeline(Ensemble{}, s, nullptr, s.range()), EmptyError);
}

TEST_CASE("ensemble json and timeline csv") {
    Ensemble e;
    e.train_window = {kStart, kStart + 11};
    e.options.start_policy = engine::StartPolicy::warm;
    e.members = {member("combo=minmax,smooth=ema:0.3,beta=7,gamma=0.2,delta=0.6", 23, 1.25, 1.75)};
    e.members[0].detections = {kStart + 3, kStart + 9};
    const auto back = ensemble_from_json(nlohmann::json::parse(to_json(e).dump()));
    CHECK(back.members == e.members);
    CHECK(back.train_window == e.train_window);
    CHECK(back.options.start_policy == engine::StartPolicy::warm);
    CHECK(back.sigma_max == 3.0);

    const auto path = std::filesystem::temp_directory_path() / "recess_tests_ensemble.json";
    save_ensemble(path, e);
    CHECK(load_ensemble(path).members == e.members);

    CHECK_THROWS_AS((void)ensemble_from_json(nlohmann::json::parse(R"({"format":"other"})")), ConfigError);
    CHECK_THROWS_AS((void)ensemble_from_json(nlohmann::json::parse("[1,2]")), ConfigError);

    ProbabilityTimeline tl{kStart, {{0.0, 0.5}, {1.0, 0.25}}, {0.5, 0.375}};
    std::ostringstream out;
    write_timeline(out, tl);
    CHECK(out.str() == "date,p_ensemble,p_1,p_2\n1990-01,0.5,0,1\n1990-02,0.375,0.5,0.25\n");
}
