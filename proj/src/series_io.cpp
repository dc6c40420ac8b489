#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <string_view>
#include <vector>

#include "cropcast/error.hpp"
#include "cropcast/series.hpp"

namespace cropcast {

namespace {

constexpr std::string_view kMarketHeader = "date,market_id,crop_id,modal_price,arrival_qty";
constexpr std::string_view kWeatherHeader =
    "date,market_id,avg_temp_c,avg_humidity_pct,total_rainfall_mm";

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

double parse_optional_number(std::string_view field, std::string_view name, std::size_t line) {
    if (field.empty()) return kAbsent;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ParseError("non-numeric " + std::string(name) + " '" + std::string(field) + "'",
                         line);
    }
    return v;
}

struct CsvReader {
    std::ifstream in;
    std::size_t line_no = 0;

    CsvReader(const std::filesystem::path& path, std::string_view header) : in(path) {
        if (!in) throw Error("cannot open " + path.string());
        std::string first;
        if (!std::getline(in, first)) throw ParseError("missing header", 1);
        line_no = 1;
        std::string_view h = trim_cr(first);
        if (h.size() >= 3 && h.substr(0, 3) == "\xEF\xBB\xBF") h.remove_prefix(3);
        if (h != header) {
            throw ParseError("header must be '" + std::string(header) + "'", 1);
        }
    }

    // Returns false at end of file; skips blank lines.
    bool next(std::vector<std::string_view>& fields, std::string& storage) {
        while (std::getline(in, storage)) {
            ++line_no;
            std::string_view view = trim_cr(storage);
            if (view.empty()) continue;
            fields = split_fields(view);
            return true;
        }
        return false;
    }
};

Day parse_row_date(std::string_view field, const TradingCalendar& calendar, std::size_t line,
                   bool& in_range) {
    const auto day = parse_date(field);
    if (!day) throw ParseError("bad date '" + std::string(field) + "'", line);
    in_range = *day >= calendar.start() && *day <= calendar.end();
    if (in_range && weekday_of(*day) == calendar.closed_weekday()) {
        throw ParseError("date " + std::string(field) + " falls on the closed weekday", line);
    }
    return *day;
}

void write_value(std::ostream& out, double v) {
    if (!is_absent(v)) out << format_number(v);
}

}  // namespace

std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

AlignedSeries AlignedSeries::absent(std::string market, std::string crop,
                                    TradingCalendar calendar) {
    AlignedSeries s;
    s.market_id = std::move(market);
    s.crop_id = std::move(crop);
    s.calendar = std::move(calendar);
    const auto n = static_cast<Eigen::Index>(s.calendar.size());
    s.price = Eigen::VectorXd::Constant(n, kAbsent);
    s.arrival = Eigen::VectorXd::Constant(n, kAbsent);
    s.temp = Eigen::VectorXd::Constant(n, kAbsent);
    s.humidity = Eigen::VectorXd::Constant(n, kAbsent);
    s.rainfall = Eigen::VectorXd::Constant(n, kAbsent);
    return s;
}

AlignedSeries AlignedSeries::slice(std::size_t first, std::size_t count) const {
    AlignedSeries s;
    s.market_id = market_id;
    s.crop_id = crop_id;
    s.calendar = calendar.slice(first, count);
    const auto f = static_cast<Eigen::Index>(first);
    const auto c = static_cast<Eigen::Index>(count);
    s.price = price.segment(f, c);
    s.arrival = arrival.segment(f, c);
    s.temp = temp.segment(f, c);
    s.humidity = humidity.segment(f, c);
    s.rainfall = rainfall.segment(f, c);
    return s;
}

void AlignedSeries::check_shape() const {
    const auto n = static_cast<Eigen::Index>(calendar.size());
    if (price.size() != n || arrival.size() != n || temp.size() != n || humidity.size() != n ||
        rainfall.size() != n) {
        throw ShapeError("series '" + market_id + "' has columns of the wrong length");
    }
}

bool same_values(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (is_absent(a[i]) != is_absent(b[i])) return false;
        if (!is_absent(a[i]) && a[i] != b[i]) return false;
    }
    return true;
}

bool operator==(const AlignedSeries& a, const AlignedSeries& b) {
    return a.market_id == b.market_id && a.crop_id == b.crop_id && a.calendar == b.calendar &&
           same_values(a.price, b.price) && same_values(a.arrival, b.arrival) &&
           same_values(a.temp, b.temp) && same_values(a.humidity, b.humidity) &&
           same_values(a.rainfall, b.rainfall);
}

SeriesCollection load_market_csv(const std::filesystem::path& path,
                                 const TradingCalendar& calendar) {
    CsvReader reader(path, kMarketHeader);
    SeriesCollection out;
    std::set<std::tuple<Day, std::string, std::string>> seen;
    std::vector<std::string_view> f;
    std::string storage;
    while (reader.next(f, storage)) {
        const std::size_t line = reader.line_no;
        if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), line);
        bool in_range = false;
        const Day day = parse_row_date(f[0], calendar, line, in_range);
        if (f[1].empty() || f[2].empty()) throw ParseError("empty market_id or crop_id", line);
        const double price = parse_optional_number(f[3], "modal_price", line);
        const double arrival = parse_optional_number(f[4], "arrival_qty", line);
        if (!is_absent(price) && price <= 0.0) throw ParseError("modal_price must be positive", line);
        if (!is_absent(arrival) && arrival < 0.0) throw ParseError("arrival_qty must be >= 0", line);

        std::string market(f[1]), crop(f[2]);
        if (!seen.emplace(day, market, crop).second) {
            throw DuplicateKeyError("line " + std::to_string(line) + ": duplicate row for (" +
                                    std::string(f[0]) + ", " + market + ", " + crop + ")");
        }
        if (!in_range) continue;
        SeriesKey key{market, crop};
        auto it = out.find(key);
        if (it == out.end()) {
            it = out.emplace(key, AlignedSeries::absent(market, crop, calendar)).first;
        }
        const auto idx = static_cast<Eigen::Index>(*calendar.index_of(day));
        it->second.price[idx] = price;
        it->second.arrival[idx] = arrival;
    }
    return out;
}

WeatherCollection load_weather_csv(const std::filesystem::path& path,
                                   const TradingCalendar& calendar) {
    CsvReader reader(path, kWeatherHeader);
    WeatherCollection out;
    std::set<std::pair<Day, std::string>> seen;
    std::vector<std::string_view> f;
    std::string storage;
    while (reader.next(f, storage)) {
        const std::size_t line = reader.line_no;
        if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), line);
        bool in_range = false;
        const Day day = parse_row_date(f[0], calendar, line, in_range);
        if (f[1].empty()) throw ParseError("empty market_id", line);
        const double temp = parse_optional_number(f[2], "avg_temp_c", line);
        const double humidity = parse_optional_number(f[3], "avg_humidity_pct", line);
        const double rainfall = parse_optional_number(f[4], "total_rainfall_mm", line);
        if (!is_absent(humidity) && (humidity < 0.0 || humidity > 100.0)) {
            throw ValidationError("line " + std::to_string(line) + ": humidity " +
                                  std::string(f[3]) + " outside [0, 100]");
        }
        if (!is_absent(rainfall) && rainfall < 0.0) {
            throw ValidationError("line " + std::to_string(line) + ": negative rainfall");
        }
        std::string market(f[1]);
        if (!seen.emplace(day, market).second) {
            throw DuplicateKeyError("line " + std::to_string(line) + ": duplicate row for (" +
                                    std::string(f[0]) + ", " + market + ")");
        }
        if (!in_range) continue;
        auto it = out.find(market);
        if (it == out.end()) {
            it = out.emplace(market, AlignedSeries::absent(market, "", calendar)).first;
        }
        const auto idx = static_cast<Eigen::Index>(*calendar.index_of(day));
        it->second.temp[idx] = temp;
        it->second.humidity[idx] = humidity;
        it->second.rainfall[idx] = rainfall;
    }
    return out;
}

void write_market_csv(const std::filesystem::path& path, const SeriesCollection& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << kMarketHeader << '\n';
    for (const auto& [key, s] : series) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            if (is_absent(s.price[r]) && is_absent(s.arrival[r])) continue;
            out << format_date(s.calendar[i]) << ',' << s.market_id << ',' << s.crop_id << ',';
            write_value(out, s.price[r]);
            out << ',';
            write_value(out, s.arrival[r]);
            out << '\n';
        }
    }
}

void write_weather_csv(const std::filesystem::path& path, const WeatherCollection& weather) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << kWeatherHeader << '\n';
    for (const auto& [market, s] : weather) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            if (is_absent(s.temp[r]) && is_absent(s.humidity[r]) && is_absent(s.rainfall[r])) continue;
            out << format_date(s.calendar[i]) << ',' << market << ',';
            write_value(out, s.temp[r]);
            out << ',';
            write_value(out, s.humidity[r]);
            out << ',';
            write_value(out, s.rainfall[r]);
            out << '\n';
        }
    }
}

AlignedSeries align(const AlignedSeries& market, const AlignedSeries& weather) {
    if (market.market_id != weather.market_id) {
        throw AlignmentError("cannot align market '" + market.market_id + "' with weather of '" +
                             weather.market_id + "'");
    }
    const TradingCalendar cal = market.calendar.intersect(weather.calendar);
    if (cal.empty()) {
        throw AlignmentError("no shared trading days for market '" + market.market_id + "'");
    }
    AlignedSeries out = AlignedSeries::absent(market.market_id, market.crop_id, cal);
    const auto m0 = static_cast<Eigen::Index>(*market.calendar.index_of(cal[0]));
    const auto w0 = static_cast<Eigen::Index>(*weather.calendar.index_of(cal[0]));
    const auto n = static_cast<Eigen::Index>(cal.size());
    out.price = market.price.segment(m0, n);
    out.arrival = market.arrival.segment(m0, n);
    out.temp = weather.temp.segment(w0, n);
    out.humidity = weather.humidity.segment(w0, n);
    out.rainfall = weather.rainfall.segment(w0, n);
    return out;
}

}  // namespace cropcast
