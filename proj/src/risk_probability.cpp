#include "recess/risk_probability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "recess/errors.hpp"
#include "recess/series_ingest.hpp"

namespace recess::risk {

using engine::ClassifierSpec;
using engine::StartPolicy;
using engine::Threshold;

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double classifier_probability(bool in_recession, std::optional<MonthIndex> last_detection,
                              double mu, double sigma, MonthIndex t) {
    if (!in_recession) {
        return 0.0;
    }
    if (!(sigma > 0.0)) {
        throw DegenerateError("probability needs sigma > 0");
    }
    if (!last_detection) {
        throw DegenerateError("recession state without a detection");
    }
    return normal_cdf((static_cast<double>(t - *last_detection) + mu) / sigma);
}

double ensemble_probability(std::span<const double> probabilities) {
    if (probabilities.empty()) {
        throw EmptyError("ensemble probability of zero classifiers");
    }
    const double sum = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    return std::clamp(sum / static_cast<double>(probabilities.size()), 0.0, 1.0);
}

nlohmann::ordered_json to_json(const Ensemble& ensemble) {
    nlohmann::ordered_json j;
    j["format"] = "recess-ensemble/1";
    j["train_start"] = ensemble.train_window.first.to_string();
    j["train_end"] = ensemble.train_window.last.to_string();
    j["sigma_max"] = ensemble.sigma_max;
    j["zero_epsilon"] = ensemble.options.zero_epsilon;
    j["start_policy"] = ensemble.options.start_policy == StartPolicy::warm ? "warm" : "fresh";
    auto& members = j["classifiers"] = nlohmann::ordered_json::array();
    for (const auto& m : ensemble.members) {
        nlohmann::ordered_json row;
        row["spec"] = indicators::format_spec(m.spec.indicator);
        row["zeta"] = m.spec.zeta.value();
        row["mu"] = m.mu;
        row["sigma"] = m.sigma;
        auto& dets = row["detections"] = nlohmann::ordered_json::array();
        for (auto d : m.detections) dets.push_back(d.to_string());
        members.push_back(std::move(row));
    }
    return j;
}

Ensemble ensemble_from_json(const nlohmann::json& j) {
    try {
        Ensemble e;
        e.train_window = {MonthIndex::parse(j.at("train_start").get<std::string>()),
                          MonthIndex::parse(j.at("train_end").get<std::string>())};
        e.sigma_max = j.value("sigma_max", 3.0);
        e.options.zero_epsilon = j.value("zero_epsilon", 0.0);
        e.options.start_policy =
            j.value("start_policy", std::string("fresh")) == "warm" ? StartPolicy::warm : StartPolicy::fresh;
        for (const auto& row : j.at("classifiers")) {
            TrainedClassifier m;
            m.spec.indicator = indicators::parse_spec(row.at("spec").get<std::string>());
            m.spec.zeta = Threshold::from_double(row.at("zeta").get<double>());
            m.mu = row.at("mu").get<double>();
            m.sigma = row.at("sigma").get<double>();
            for (const auto& d : row.value("detections", nlohmann::json::array())) {
                m.detections.push_back(MonthIndex::parse(d.get<std::string>()));
            }
            e.members.push_back(std::move(m));
        }
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed ensemble: ") + ex.what());
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("malformed ensemble: ") + ex.what());
    }
}

void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << to_json(ensemble).dump(2) << '\n';
}

Ensemble load_ensemble(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed ensemble: ") + ex.what());
    }
    return ensemble_from_json(j);
}

ProbabilityTimeline probability_timeline(const Ensemble& ensemble, const MonthlySeries& first,
                                         const MonthlySeries* second, MonthWindow range) {
    if (ensemble.members.empty()) {
        throw EmptyError("timeline of an empty ensemble");
    }
    const auto& train = ensemble.train_window;
    if (range.empty() || range.first < train.first || !first.covers(range) ||
        !first.covers(train.first)) {
        throw AlignmentError("timeline range must lie inside the data and start at or after " +
                             train.first.to_string());
    }
    ProbabilityTimeline out;
    out.start = range.first;
    const auto months = static_cast<std::size_t>(range.length());
    for (const auto& member : ensemble.members) {
        const auto indicator = engine::materialize_indicator(member.spec.indicator, first, second);
        // Training pass, then continuation over whatever follows the training end.
        const MonthWindow fit{train.first, std::min(train.last, range.last)};
        auto outcome = engine::run_state_machine(indicator, member.spec.zeta, fit, ensemble.options,
                                                 /*record_path=*/true);
        if (range.last > fit.last) {
            outcome = engine::resume_state(outcome, indicator.slice({fit.last + 1, range.last}));
        }
        std::vector<double> p(months);
        std::size_t next_detection = 0;
        std::optional<MonthIndex> last;
        for (auto t = outcome.window.first; t <= range.last; ++t) {
            while (next_detection < outcome.detections.size() &&
                   outcome.detections[next_detection] <= t) {
                last = outcome.detections[next_detection++];
            }
            if (t < range.first) {
                continue;
            }
            const bool in_recession = outcome.state_path[static_cast<std::size_t>(t - outcome.window.first)] != 0;
            p[static_cast<std::size_t>(t - range.first)] =
                classifier_probability(in_recession, last, member.mu, member.sigma, t);
        }
        out.per_classifier.push_back(std::move(p));
    }
    out.ensemble.resize(months);
    std::vector<double> column(out.per_classifier.size());
    for (std::size_t t = 0; t < months; ++t) {
        for (std::size_t k = 0; k < column.size(); ++k) column[k] = out.per_classifier[k][t];
        out.ensemble[t] = ensemble_probability(column);
    }
    return out;
}

void write_timeline(std::ostream& out, const ProbabilityTimeline& timeline) {
    out << "date,p_ensemble";
    for (std::size_t k = 1; k <= timeline.per_classifier.size(); ++k) out << ",p_" << k;
    out << '\n';
    auto m = timeline.start;
    for (std::size_t t = 0; t < timeline.months(); ++t, ++m) {
        out << m.to_string() << ',' << ingest::format_value(timeline.ensemble[t]);
        for (const auto& row : timeline.per_classifier) out << ',' << ingest::format_value(row[t]);
        out << '\n';
    }
}

void save_timeline(const std::filesystem::path& path, const ProbabilityTimeline& timeline) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_timeline(out, timeline);
}

}  // namespace recess::risk
