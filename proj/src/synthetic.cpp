#include "recess/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "recess/errors.hpp"

namespace recess::synthetic {

namespace {

struct Episode {
    std::int32_t start;
    std::int32_t length;
    double u_amplitude;
    double v_amplitude;
    std::int32_t v_lead;
    double decay;
};

// Linear climb over the episode, exponential reversion afterwards.
double bump(const Episode& e, std::int32_t t, double amplitude, std::int32_t lead) {
    const std::int32_t s = e.start - lead;
    if (t < s) {
        return 0.0;
    }
    const std::int32_t end = s + e.length;
    if (t < end) {
        return amplitude * static_cast<double>(t - s + 1) / e.length;
    }
    return amplitude * std::exp(-static_cast<double>(t - end + 1) / e.decay);
}

}  // namespace

ingest::Dataset generate(const SyntheticSpec& spec) {
    constexpr std::int32_t head = 24;
    constexpr std::int32_t tail = 30;
    const auto n = static_cast<std::int32_t>(spec.months);
    const auto j = static_cast<std::int32_t>(spec.recessions);
    const std::int32_t slack = n - head - tail - (j - 1) * spec.min_gap;
    if (j < 1 || slack < 0) {
        throw ConfigError("synthetic history too short for the requested recessions");
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::int32_t> offset(0, slack);
    std::vector<std::int32_t> offsets(static_cast<std::size_t>(j));
    for (auto& o : offsets) o = offset(rng);
    std::sort(offsets.begin(), offsets.end());

    std::uniform_int_distribution<std::int32_t> length(4, 20);
    std::uniform_int_distribution<std::int32_t> lead(0, 3);
    std::uniform_real_distribution<double> u_amp(0.2, 0.7);
    std::uniform_real_distribution<double> v_amp(0.2, 0.6);
    std::uniform_real_distribution<double> decay(24.0, 48.0);
    std::vector<Episode> episodes;
    for (std::int32_t k = 0; k < j; ++k) {
        episodes.push_back({head + offsets[static_cast<std::size_t>(k)] + k * spec.min_gap,
                            length(rng), u_amp(rng), v_amp(rng), lead(rng), decay(rng)});
    }

    // Mild non-recession slowdowns between events: they trip low thresholds only.
    std::vector<Episode> scares;
    std::uniform_int_distribution<std::int32_t> when(head, n - tail);
    std::uniform_int_distribution<std::int32_t> scare_length(2, 8);
    std::uniform_real_distribution<double> scare_amp(0.03, 0.15);
    std::uniform_real_distribution<double> scare_decay(4.0, 12.0);
    while (scares.size() < spec.recessions) {
        const auto t = when(rng);
        const bool clear = std::all_of(episodes.begin(), episodes.end(), [&](const Episode& e) {
            return t < e.start - 12 || t > e.start + e.length + 24;
        });
        const auto len = scare_length(rng);
        const auto amp = scare_amp(rng);
        const auto dec = scare_decay(rng);
        if (clear) scares.push_back({t, len, amp, amp * 0.8, 0, dec});
    }

    std::normal_distribution<double> shock(0.0, spec.noise);
    std::vector<double> u(spec.months), v(spec.months);
    double drift_u = 0.0;
    double drift_v = 0.0;
    for (std::int32_t t = 0; t < n; ++t) {
        drift_u = 0.98 * drift_u + shock(rng) * 0.5;
        drift_v = 0.98 * drift_v + shock(rng) * 0.5;
        double xu = std::log(5.0) + drift_u + shock(rng);
        double xv = std::log(3.0) + drift_v + shock(rng);
        for (const auto& e : episodes) {
            xu += bump(e, t, e.u_amplitude, 0);
            xv -= bump(e, t, e.v_amplitude, e.v_lead);
        }
        for (const auto& e : scares) {
            xu += bump(e, t, e.u_amplitude, 0);
            xv -= bump(e, t, e.v_amplitude, 0);
        }
        u[static_cast<std::size_t>(t)] = std::exp(xu);
        v[static_cast<std::size_t>(t)] = std::exp(xv);
    }

    std::vector<MonthIndex> starts;
    std::vector<std::optional<MonthIndex>> ends;
    for (const auto& e : episodes) {
        starts.push_back(spec.start + e.start);
        ends.push_back(spec.start + (e.start + e.length - 1));
    }
    return ingest::make_dataset(MonthlySeries(spec.start, std::move(u)),
                                MonthlySeries(spec.start, std::move(v)),
                                RecessionCalendar(std::move(starts), std::move(ends)));
}

}  // namespace recess::synthetic
