#include "recess/series_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "recess/errors.hpp"

namespace recess::ingest {

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    return s;
}

MonthIndex parse_month_field(std::string_view text, std::size_t line) {
    try {
        return MonthIndex::parse(text);
    } catch (const std::invalid_argument& e) {
        throw FormatError(line, e.what());
    }
}

double parse_number(std::string_view text, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw FormatError(line, "unparseable number '" + std::string(text) + "'");
    }
    return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

}  // namespace

MonthlySeries parse_monthly_series(std::istream& in, std::string_view column) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t col = 0;
    bool have_header = false;
    std::optional<MonthIndex> start;
    std::optional<MonthIndex> prev;
    std::vector<double> values;

    while (std::getline(in, line)) {
        ++line_no;
        auto row = trim(line);
        if (row.empty()) {
            continue;
        }
        auto fields = split_row(row);
        if (!have_header) {
            if (trim(fields[0]) != "date") {
                throw FormatError(line_no, "header must start with 'date'");
            }
            auto it = std::find_if(fields.begin() + 1, fields.end(),
                                   [&](std::string_view f) { return trim(f) == column; });
            if (it == fields.end()) {
                throw FormatError(line_no, "no column named '" + std::string(column) + "'");
            }
            col = static_cast<std::size_t>(it - fields.begin());
            have_header = true;
            continue;
        }
        if (fields.size() <= col) {
            throw FormatError(line_no, "too few fields");
        }
        auto month = parse_month_field(trim(fields[0]), line_no);
        if (prev) {
            if (month <= *prev) {
                throw FormatError(line_no, "dates not ascending at " + month.to_string());
            }
            if (month != *prev + 1) {
                throw GapError(*prev + 1);
            }
        } else {
            start = month;
        }
        values.push_back(parse_number(trim(fields[col]), line_no));
        prev = month;
    }
    if (!have_header || values.empty()) {
        throw EmptyError("monthly series file has no data rows");
    }
    return MonthlySeries(*start, std::move(values));
}

MonthlySeries load_monthly_series(const std::filesystem::path& path, std::string_view column) {
    auto in = open_input(path);
    return parse_monthly_series(in, column);
}

std::string format_value(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_monthly_series(std::ostream& out, const MonthlySeries& series) {
    out << "date,value\n";
    auto m = series.start();
    for (double v : series.values()) {
        out << m.to_string() << ',' << format_value(v) << '\n';
        ++m;
    }
}

void save_monthly_series(const std::filesystem::path& path, const MonthlySeries& series) {
    auto out = open_output(path);
    write_monthly_series(out, series);
}

MonthlySeries compute_rate(const MonthlySeries& count, const MonthlySeries& labor_force) {
    auto [c, lf] = align(count, labor_force);
    std::vector<double> rate(c.size());
    auto month = c.start();
    for (std::size_t i = 0; i < rate.size(); ++i, ++month) {
        double denom = lf.values()[i];
        if (!(denom > 0.0)) {
            throw DomainError("nonpositive labor force at " + month.to_string());
        }
        rate[i] = 100.0 * c.values()[i] / denom;
    }
    return MonthlySeries(c.start(), std::move(rate));
}

MonthlySeries shift_forward_one_month(const MonthlySeries& series) {
    auto values = series.values();
    return MonthlySeries(series.start() + 1, std::vector<double>(values.begin(), values.end()));
}

MonthlySeries splice_scaled(const MonthlySeries& early, const MonthlySeries& late,
                            MonthIndex anchor) {
    if (!early.covers(anchor) || !late.covers(anchor)) {
        throw AlignmentError("splice anchor " + anchor.to_string() + " not covered by both series");
    }
    double e = early.at(anchor);
    double l = late.at(anchor);
    if (!(e > 0.0) || !(l > 0.0)) {
        throw DomainError("nonpositive value at splice anchor " + anchor.to_string());
    }
    double factor = l / e;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(late.end() - early.start() + 1));
    for (auto m = early.start(); m < anchor; ++m) {
        out.push_back(early.at(m) * factor);
    }
    auto tail = late.values().subspan(late.offset_of(anchor));
    out.insert(out.end(), tail.begin(), tail.end());
    return MonthlySeries(early.start(), std::move(out));
}

std::pair<MonthlySeries, MonthlySeries> align(const MonthlySeries& a, const MonthlySeries& b) {
    MonthWindow overlap{std::max(a.start(), b.start()), std::min(a.end(), b.end())};
    if (overlap.empty()) {
        throw AlignmentError("series ranges do not overlap");
    }
    return {a.slice(overlap), b.slice(overlap)};
}

RecessionCalendar parse_calendar(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<MonthIndex> starts;
    std::vector<std::optional<MonthIndex>> ends;
    while (std::getline(in, line)) {
        ++line_no;
        auto row = trim(line);
        if (row.empty()) {
            continue;
        }
        auto fields = split_row(row);
        if (!have_header) {
            if (fields.size() < 2 || trim(fields[0]) != "start" || trim(fields[1]) != "end") {
                throw FormatError(line_no, "calendar header must be 'start,end'");
            }
            have_header = true;
            continue;
        }
        starts.push_back(parse_month_field(trim(fields[0]), line_no));
        auto end_text = fields.size() > 1 ? trim(fields[1]) : std::string_view{};
        if (end_text.empty()) {
            ends.emplace_back();
        } else {
            ends.emplace_back(parse_month_field(end_text, line_no));
        }
    }
    if (!have_header) {
        throw EmptyError("calendar file has no header");
    }
    return RecessionCalendar(std::move(starts), std::move(ends));
}

RecessionCalendar load_calendar(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_calendar(in);
}

void write_calendar(std::ostream& out, const RecessionCalendar& calendar) {
    out << "start,end\n";
    for (std::size_t j = 0; j < calendar.size(); ++j) {
        out << calendar.starts()[j].to_string() << ',';
        if (calendar.ends()[j]) {
            out << calendar.ends()[j]->to_string();
        }
        out << '\n';
    }
}

void save_calendar(const std::filesystem::path& path, const RecessionCalendar& calendar) {
    auto out = open_output(path);
    write_calendar(out, calendar);
}

Dataset make_dataset(const MonthlySeries& unemployment, const MonthlySeries& vacancy,
                     RecessionCalendar calendar) {
    auto [u, v] = align(unemployment, vacancy);
    for (const auto* s : {&u, &v}) {
        auto month = s->start();
        for (double x : s->values()) {
            if (!(x > 0.0)) {
                throw DomainError("rates must be positive; found " + format_value(x) + " at " +
                                  month.to_string());
            }
            ++month;
        }
    }
    return Dataset{std::move(u), std::move(v), std::move(calendar)};
}

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
    std::filesystem::create_directories(dir);
    save_monthly_series(dir / "unemployment.csv", dataset.unemployment);
    save_monthly_series(dir / "vacancy.csv", dataset.vacancy);
    save_calendar(dir / "calendar.csv", dataset.calendar);
    nlohmann::ordered_json manifest = {
        {"format", "recess-dataset/1"},
        {"start", dataset.range().first.to_string()},
        {"end", dataset.range().last.to_string()},
        {"months", dataset.unemployment.size()},
        {"events", dataset.calendar.size()},
        {"unemployment", "unemployment.csv"},
        {"vacancy", "vacancy.csv"},
        {"calendar", "calendar.csv"},
    };
    auto out = open_output(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path) {
    auto dir = std::filesystem::is_directory(path) ? path : path.parent_path();
    auto manifest_path = dir / "manifest.json";
    auto in = open_input(manifest_path);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed " + manifest_path.string() + ": " + e.what());
    }
    auto file = [&](const char* key) {
        if (!manifest.contains(key) || !manifest[key].is_string()) {
            throw DataError(manifest_path.string() + " lacks '" + key + "'");
        }
        return dir / manifest[key].get<std::string>();
    };
    return make_dataset(load_monthly_series(file("unemployment")),
                        load_monthly_series(file("vacancy")), load_calendar(file("calendar")));
}

}  // namespace recess::ingest
