#include "recess/indicator_lab.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "recess/errors.hpp"

namespace recess::indicators {

namespace {

constexpr int kMaxSimpleAlpha = 11;
constexpr int kMaxBeta = 18;

void require_aligned(const MonthlySeries& a, const MonthlySeries& b, const char* what) {
    if (a.range() != b.range()) {
        throw AlignmentError(std::string(what) + ": inputs cover " + a.start().to_string() + ".." +
                             a.end().to_string() + " and " + b.start().to_string() + ".." +
                             b.end().to_string());
    }
}

MonthlySeries with_values(MonthIndex start, std::vector<double> values) {
    return MonthlySeries(start, std::move(values));
}

void check_gamma(Tenths g) {
    if (g.n < 0 || g.n > 10) {
        throw GridError("gamma " + g.to_string() + " outside 0.0..1.0");
    }
}

void check_delta(Tenths d) {
    if (d.n < 0 || d.n > 10) {
        throw GridError("delta " + d.to_string() + " outside 0.0..1.0");
    }
}

void check_beta(int beta) {
    if (beta < 1 || beta > kMaxBeta) {
        throw GridError("beta " + std::to_string(beta) + " outside 1..18");
    }
}

}  // namespace

Tenths Tenths::from_double(double x) {
    double scaled = x * 10.0;
    double rounded = std::round(scaled);
    if (!std::isfinite(x) || std::abs(scaled - rounded) > 1e-9) {
        throw GridError("value " + std::to_string(x) + " is not a multiple of 0.1");
    }
    return Tenths{static_cast<std::int32_t>(rounded)};
}

std::string Tenths::to_string() const {
    auto whole = n / 10;
    auto frac = n % 10;
    if (n < 0) {
        return "-" + Tenths{-n}.to_string();
    }
    return std::to_string(whole) + "." + std::to_string(frac);
}

void SmoothingSpec::validate() const {
    if (method == SmoothingMethod::simple) {
        if (param < 0 || param > kMaxSimpleAlpha) {
            throw GridError("simple smoothing alpha " + std::to_string(param) + " outside 0..11");
        }
    } else if (param < 1 || param > 10) {
        throw GridError("exponential smoothing alpha " + Tenths{param}.to_string() +
                        " outside 0.1..1.0");
    }
}

std::string SmoothingSpec::alpha_string() const {
    return method == SmoothingMethod::simple ? std::to_string(param) : Tenths{param}.to_string();
}

std::string_view to_string(Combination c) noexcept {
    switch (c) {
        case Combination::linear: return "linear";
        case Combination::minmax: return "minmax";
        case Combination::rise: return "rise";
        case Combination::fall: return "fall";
    }
    return "?";
}

Combination parse_combination(std::string_view text) {
    for (auto c : {Combination::linear, Combination::minmax, Combination::rise, Combination::fall}) {
        if (text == to_string(c)) {
            return c;
        }
    }
    throw GridError("unknown combination '" + std::string(text) + "'");
}

void IndicatorSpec::validate() const {
    smoothing.validate();
    check_beta(beta);
    check_gamma(gamma);
    check_delta(delta);
    if (is_single_series(combo) && delta.n != 10) {
        throw GridError("single-series indicators take delta = 1.0");
    }
}

std::string format_spec(const IndicatorSpec& spec) {
    std::ostringstream out;
    out << "combo=" << to_string(spec.combo) << ",smooth="
        << (spec.smoothing.method == SmoothingMethod::simple ? "sma:" : "ema:")
        << spec.smoothing.alpha_string() << ",beta=" << spec.beta
        << ",gamma=" << spec.gamma.to_string() << ",delta=" << spec.delta.to_string();
    return out.str();
}

IndicatorSpec parse_spec(std::string_view text) {
    std::map<std::string, std::string, std::less<>> fields;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
        auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw GridError("malformed spec item '" + std::string(item) + "'");
        }
        fields[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = fields.find(key);
        if (it == fields.end()) {
            throw GridError(std::string("spec lacks '") + key + "'");
        }
        return it->second;
    };
    auto number = [](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw GridError("bad number '" + s + "' in spec");
        }
        if (used != s.size()) {
            throw GridError("bad number '" + s + "' in spec");
        }
        return v;
    };

    IndicatorSpec spec;
    spec.combo = parse_combination(need("combo"));
    const auto& smooth = need("smooth");
    auto colon = smooth.find(':');
    if (colon == std::string::npos) {
        throw GridError("smooth must be sma:<alpha> or ema:<alpha>");
    }
    auto kind = smooth.substr(0, colon);
    double alpha = number(smooth.substr(colon + 1));
    if (kind == "sma") {
        if (alpha != std::floor(alpha)) {
            throw GridError("simple smoothing alpha must be an integer");
        }
        spec.smoothing = SmoothingSpec::simple(static_cast<int>(alpha));
    } else if (kind == "ema") {
        spec.smoothing = SmoothingSpec::exponential(Tenths::from_double(alpha));
    } else {
        throw GridError("unknown smoothing '" + kind + "'");
    }
    double beta = number(need("beta"));
    if (beta != std::floor(beta)) {
        throw GridError("beta must be an integer number of months");
    }
    spec.beta = static_cast<int>(beta);
    spec.gamma = Tenths::from_double(number(need("gamma")));
    if (is_single_series(spec.combo) && !fields.contains("delta")) {
        spec.delta = Tenths{10};
    } else {
        spec.delta = Tenths::from_double(number(need("delta")));
    }
    spec.validate();
    return spec;
}

// --- kernels -------------------------------------------------------------------

namespace kernel {

void smooth_simple(std::span<const double> in, int alpha, std::span<double> out) {
    const std::size_t window = static_cast<std::size_t>(alpha) + 1;
    for (std::size_t t = 0; t < in.size(); ++t) {
        const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
        // Mean as reference + average deviation: exact for constant windows.
        const double ref = in[t];
        double dev = 0.0;
        double lo = ref;
        double hi = ref;
        for (std::size_t k = first; k < t; ++k) {
            dev += in[k] - ref;
            lo = std::min(lo, in[k]);
            hi = std::max(hi, in[k]);
        }
        const double mean = ref + dev / static_cast<double>(t - first + 1);
        out[t] = std::clamp(mean, lo, hi);
    }
}

void smooth_exponential(std::span<const double> in, double alpha, std::span<double> out) {
    if (in.empty()) {
        return;
    }
    out[0] = in[0];
    if (alpha == 1.0) {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    for (std::size_t t = 1; t < in.size(); ++t) {
        const double prev = out[t - 1];
        const double next = prev + alpha * (in[t] - prev);
        out[t] = std::clamp(next, std::min(prev, in[t]), std::max(prev, in[t]));
    }
}

void smooth(std::span<const double> in, const SmoothingSpec& spec, std::span<double> out) {
    if (spec.method == SmoothingMethod::simple) {
        smooth_simple(in, spec.param, out);
    } else {
        smooth_exponential(in, Tenths{spec.param}.value(), out);
    }
}

void trailing_extremum(std::span<const double> in, int beta, Extremum mode,
                       std::span<double> out) {
    // Monotonic deque of indices; front holds the extremum of [t - beta, t].
    std::deque<std::size_t> idx;
    const auto better = [mode](double a, double b) { return mode == Extremum::min ? a <= b : a >= b; };
    const auto window = static_cast<std::size_t>(beta);
    for (std::size_t t = 0; t < in.size(); ++t) {
        while (!idx.empty() && better(in[t], in[idx.back()])) {
            idx.pop_back();
        }
        idx.push_back(t);
        if (idx.front() + window < t) {
            idx.pop_front();
        }
        out[t] = in[idx.front()];
    }
}

void boxcox_gap(std::span<const double> high, std::span<const double> low, Tenths gamma,
                std::span<double> out, MonthIndex start) {
    check_gamma(gamma);
    const double g = gamma.value();
    for (std::size_t t = 0; t < high.size(); ++t) {
        const double h = high[t];
        const double l = low[t];
        if (!(h >= l) || !(l >= 0.0) || (gamma.n < 10 && !(l > 0.0))) {
            throw DomainError("Box-Cox gap undefined at " +
                              (start + static_cast<std::int32_t>(t)).to_string() +
                              " (high " + std::to_string(h) + ", low " + std::to_string(l) + ")");
        }
        double gap = 0.0;
        if (gamma.n == 10) {
            gap = h - l;
        } else if (gamma.n == 0) {
            gap = std::log(h / l);
        } else {
            gap = (std::pow(h, g) - std::pow(l, g)) / g;
        }
        out[t] = gap > 0.0 ? gap : 0.0;
    }
}

void combine(std::span<const double> u, std::span<const double> v, Combination combo,
             Tenths delta, std::span<double> out) {
    check_delta(delta);
    const double d = delta.value();
    const double e = 1.0 - d;
    for (std::size_t t = 0; t < u.size(); ++t) {
        const double lo = std::min(u[t], v[t]);
        const double hi = std::max(u[t], v[t]);
        const double x = combo == Combination::minmax ? d * lo + e * hi : d * u[t] + e * v[t];
        out[t] = std::clamp(x, lo, hi);
    }
}

}  // namespace kernel

// --- series-level operations -------------------------------------------------

MonthlySeries smooth_simple(const MonthlySeries& series, int alpha) {
    SmoothingSpec::simple(alpha).validate();
    std::vector<double> out(series.size());
    kernel::smooth_simple(series.values(), alpha, out);
    return with_values(series.start(), std::move(out));
}

MonthlySeries smooth_exponential(const MonthlySeries& series, double alpha) {
    auto spec = SmoothingSpec::exponential(Tenths::from_double(alpha));
    spec.validate();
    std::vector<double> out(series.size());
    kernel::smooth_exponential(series.values(), Tenths{spec.param}.value(), out);
    return with_values(series.start(), std::move(out));
}

MonthlySeries smooth(const MonthlySeries& series, const SmoothingSpec& spec) {
    spec.validate();
    std::vector<double> out(series.size());
    kernel::smooth(series.values(), spec, out);
    return with_values(series.start(), std::move(out));
}

MonthlySeries trailing_extremum(const MonthlySeries& series, int beta, Extremum mode) {
    check_beta(beta);
    std::vector<double> out(series.size());
    kernel::trailing_extremum(series.values(), beta, mode, out);
    return with_values(series.start(), std::move(out));
}

MonthlySeries boxcox_gap(const MonthlySeries& high, const MonthlySeries& low, double gamma) {
    require_aligned(high, low, "boxcox_gap");
    std::vector<double> out(high.size());
    kernel::boxcox_gap(high.values(), low.values(), Tenths::from_double(gamma), out, high.start());
    return with_values(high.start(), std::move(out));
}

MonthlySeries combine(const MonthlySeries& u_ind, const MonthlySeries& v_ind, Combination combo,
                      double delta) {
    require_aligned(u_ind, v_ind, "combine");
    if (is_single_series(combo)) {
        throw GridError("combine takes linear or minmax");
    }
    std::vector<double> out(u_ind.size());
    kernel::combine(u_ind.values(), v_ind.values(), combo, Tenths::from_double(delta), out);
    return with_values(u_ind.start(), std::move(out));
}

namespace {

MonthlySeries rise_leg(const IndicatorSpec& spec, const MonthlySeries& series) {
    auto smoothed = smooth(series, spec.smoothing);
    auto low = trailing_extremum(smoothed, spec.beta, Extremum::min);
    return boxcox_gap(smoothed, low, spec.gamma.value());
}

MonthlySeries fall_leg(const IndicatorSpec& spec, const MonthlySeries& series) {
    auto smoothed = smooth(series, spec.smoothing);
    auto high = trailing_extremum(smoothed, spec.beta, Extremum::max);
    return boxcox_gap(high, smoothed, spec.gamma.value());
}

}  // namespace

IndicatorSeries materialize(const IndicatorSpec& spec, const MonthlySeries& u,
                            const MonthlySeries& v) {
    spec.validate();
    if (is_single_series(spec.combo)) {
        throw GridError("materialize takes a linear or minmax spec; use materialize_single");
    }
    require_aligned(u, v, "materialize");
    auto u_hat = rise_leg(spec, u);
    auto v_hat = fall_leg(spec, v);
    return {spec, combine(u_hat, v_hat, spec.combo, spec.delta.value())};
}

IndicatorSeries materialize_single(const IndicatorSpec& spec, const MonthlySeries& series) {
    spec.validate();
    if (!is_single_series(spec.combo)) {
        throw GridError("materialize_single takes a rise or fall spec");
    }
    return {spec, spec.combo == Combination::rise ? rise_leg(spec, series) : fall_leg(spec, series)};
}

// --- grid ----------------------------------------------------------------------

GridConfig GridConfig::single_series(Combination direction) {
    if (!is_single_series(direction)) {
        throw GridError("single-series grid needs direction rise or fall");
    }
    GridConfig g;
    g.combos = {direction};
    g.deltas = {Tenths{10}};
    return g;
}

GridConfig GridConfig::from_json(const nlohmann::json& j) {
    GridConfig g;
    if (!j.is_object()) {
        throw ConfigError("grid config must be a JSON object");
    }
    try {
        for (const auto& [key, value] : j.items()) {
            if (!value.is_array()) {
                throw ConfigError("grid dimension '" + key + "' must be a list");
            }
            if (key == "combos") {
                g.combos.clear();
                for (const auto& c : value) g.combos.push_back(parse_combination(c.get<std::string>()));
            } else if (key == "simple_alpha") {
                g.simple_alphas = value.get<std::vector<int>>();
            } else if (key == "ema_alpha") {
                g.ema_alphas.clear();
                for (const auto& a : value) g.ema_alphas.push_back(Tenths::from_double(a.get<double>()));
            } else if (key == "beta") {
                g.betas = value.get<std::vector<int>>();
            } else if (key == "gamma") {
                g.gammas.clear();
                for (const auto& x : value) g.gammas.push_back(Tenths::from_double(x.get<double>()));
            } else if (key == "delta") {
                g.deltas.clear();
                for (const auto& x : value) g.deltas.push_back(Tenths::from_double(x.get<double>()));
            } else {
                throw ConfigError("unknown grid dimension '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("grid config: ") + e.what());
    }
    return g;
}

nlohmann::ordered_json GridConfig::to_json() const {
    nlohmann::ordered_json j;
    j["combos"] = nlohmann::json::array();
    for (auto c : combos) j["combos"].push_back(std::string(to_string(c)));
    j["simple_alpha"] = simple_alphas;
    j["ema_alpha"] = nlohmann::json::array();
    for (auto a : ema_alphas) j["ema_alpha"].push_back(a.value());
    j["beta"] = betas;
    j["gamma"] = nlohmann::json::array();
    for (auto x : gammas) j["gamma"].push_back(x.value());
    j["delta"] = nlohmann::json::array();
    for (auto x : deltas) j["delta"].push_back(x.value());
    return j;
}

namespace {

template <class T>
std::vector<T> sorted_unique(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

IndicatorGrid::IndicatorGrid(const GridConfig& config)
    : combos_(sorted_unique(config.combos)),
      betas_(sorted_unique(config.betas)),
      gammas_(sorted_unique(config.gammas)),
      deltas_(sorted_unique(config.deltas)) {
    for (int a : sorted_unique(config.simple_alphas)) {
        smoothings_.push_back(SmoothingSpec::simple(a));
    }
    for (auto a : sorted_unique(config.ema_alphas)) {
        smoothings_.push_back(SmoothingSpec::exponential(a));
    }
    if (combos_.empty() || smoothings_.empty() || betas_.empty() || gammas_.empty() ||
        deltas_.empty()) {
        throw ConfigError("indicator grid has an empty dimension");
    }
    for (const auto& s : smoothings_) s.validate();
    for (int b : betas_) check_beta(b);
    for (auto g : gammas_) check_gamma(g);
    for (auto d : deltas_) check_delta(d);
    const bool single = is_single_series(combos_.front());
    for (auto c : combos_) {
        if (is_single_series(c) != single) {
            throw ConfigError("grid cannot mix single-series and two-series combinations");
        }
    }
    if (single && (deltas_.size() != 1 || deltas_.front().n != 10)) {
        throw ConfigError("single-series grid takes delta = [1.0] only");
    }
}

bool IndicatorGrid::single_series() const noexcept { return is_single_series(combos_.front()); }

IndicatorSpec IndicatorGrid::spec_at(std::size_t index) const {
    const auto nd = deltas_.size();
    const auto ng = gammas_.size();
    const auto nb = betas_.size();
    const auto ns = smoothings_.size();
    IndicatorSpec spec;
    spec.delta = deltas_[index % nd];
    index /= nd;
    spec.gamma = gammas_[index % ng];
    index /= ng;
    spec.beta = betas_[index % nb];
    index /= nb;
    spec.smoothing = smoothings_[index % ns];
    index /= ns;
    spec.combo = combos_.at(index);
    return spec;
}

std::size_t IndicatorGrid::index_of(const IndicatorSpec& spec) const {
    auto pos = [&](const auto& list, const auto& value, const char* dim) {
        auto it = std::lower_bound(list.begin(), list.end(), value);
        if (it == list.end() || !(*it == value)) {
            throw GridError(std::string("spec ") + format_spec(spec) + " not in grid (" + dim + ")");
        }
        return static_cast<std::size_t>(it - list.begin());
    };
    std::size_t index = pos(combos_, spec.combo, "combo");
    index = index * smoothings_.size() + pos(smoothings_, spec.smoothing, "smoothing");
    index = index * betas_.size() + pos(betas_, spec.beta, "beta");
    index = index * gammas_.size() + pos(gammas_, spec.gamma, "gamma");
    index = index * deltas_.size() + pos(deltas_, spec.delta, "delta");
    return index;
}

std::vector<IndicatorSpec> enumerate_grid(const GridConfig& config) {
    IndicatorGrid grid(config);
    std::vector<IndicatorSpec> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.push_back(grid.spec_at(i));
    }
    return out;
}

}  // namespace recess::indicators
