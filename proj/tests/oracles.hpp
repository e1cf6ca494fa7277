#pragma once

// Straightforward reference implementations, written independently of the
// library, that the tests compare against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<double> sma(const std::vector<double>& x, int alpha) {
    std::vector<double> out(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        const std::size_t lo = t >= static_cast<std::size_t>(alpha) ? t - alpha : 0;
        long double s = 0;
        for (std::size_t k = lo; k <= t; ++k) s += x[k];
        out[t] = static_cast<double>(s / static_cast<long double>(t - lo + 1));
    }
    return out;
}

inline std::vector<double> ema(const std::vector<double>& x, double alpha) {
    std::vector<double> out(x.size());
    long double prev = x.empty() ? 0 : x[0];
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (t > 0) prev = alpha * static_cast<long double>(x[t]) + (1 - static_cast<long double>(alpha)) * prev;
        out[t] = static_cast<double>(prev);
    }
    return out;
}

inline std::vector<double> extremum(const std::vector<double>& x, int beta, bool want_min) {
    std::vector<double> out(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        const std::size_t lo = t >= static_cast<std::size_t>(beta) ? t - beta : 0;
        double e = x[t];
        for (std::size_t k = lo; k <= t; ++k) e = want_min ? std::min(e, x[k]) : std::max(e, x[k]);
        out[t] = e;
    }
    return out;
}

inline std::vector<double> gap(const std::vector<double>& high, const std::vector<double>& low, double gamma) {
    std::vector<double> out(high.size());
    for (std::size_t t = 0; t < high.size(); ++t) {
        const long double h = high[t];
        const long double l = low[t];
        out[t] = static_cast<double>(gamma == 0.0 ? std::log(h / l)
                                                  : (std::pow(h, static_cast<long double>(gamma)) -
                                                     std::pow(l, static_cast<long double>(gamma))) / gamma);
    }
    return out;
}

/// Detections (as positions) of the expansion/recession machine, starting in
/// expansion at `first`, counting positions first..last inclusive.
inline std::vector<std::size_t> machine(const std::vector<double>& x, double zeta, std::size_t first,
                                        std::size_t last, double eps = 0.0) {
    std::vector<std::size_t> out;
    bool recession = false;
    for (std::size_t t = first; t <= last; ++t) {
        if (!recession && x[t] >= zeta) {
            recession = true;
            out.push_back(t);
        } else if (recession && x[t] <= eps) {
            recession = false;
        }
    }
    return out;
}

/// Indices of points not dominated by any other (minimizing both coordinates).
inline std::vector<std::size_t> pareto(const std::vector<std::pair<double, double>>& p) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < p.size() && !dominated; ++j) {
            dominated = p[j].first <= p[i].first && p[j].second <= p[i].second &&
                        (p[j].first < p[i].first || p[j].second < p[i].second);
        }
        if (!dominated) out.push_back(i);
    }
    return out;
}

/// Standard normal CDF by composite Simpson quadrature of the density from 0.
inline long double phi(long double x) {
    const int n = 20000;  // even
    const long double h = x / n;
    const long double c = 1.0L / std::sqrt(2.0L * 3.14159265358979323846264338327950288L);
    auto f = [&](long double t) { return c * std::exp(-t * t / 2); };
    long double s = f(0) + f(x);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4 : 2) * f(k * h);
    return 0.5L + s * h / 3;
}

/// Nonnegative random indicator: runs of zeros (about zero_share of months)
/// separated by positive bumps with values rounded to 1e-4, so many ties sit
/// exactly on the threshold grid.
inline std::vector<double> random_indicator(std::mt19937_64& rng, std::size_t n, double zero_share = 0.3,
                                            double scale = 0.3) {
    std::vector<double> x(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool zero = u(rng) < zero_share;
    for (auto& v : x) {
        if (u(rng) < 0.15) zero = u(rng) < zero_share;
        v = zero ? 0.0 : std::round(u(rng) * scale * 10000.0) / 10000.0;
    }
    return x;
}

}  // namespace oracle
