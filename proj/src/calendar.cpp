#include "cropcast/calendar.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "cropcast/error.hpp"

namespace cropcast {

namespace {

namespace chr = std::chrono;

chr::sys_days to_sys(Day day) { return chr::sys_days{chr::days{day}}; }

bool parse_uint(std::string_view text, unsigned& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Day> parse_date(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(iso.substr(0, 4), y) || !parse_uint(iso.substr(5, 2), m) ||
        !parse_uint(iso.substr(8, 2), d)) {
        return std::nullopt;
    }
    const chr::year_month_day ymd{chr::year{static_cast<int>(y)}, chr::month{m}, chr::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return static_cast<Day>(chr::sys_days{ymd}.time_since_epoch().count());
}

CivilDate civil_date(Day day) {
    const chr::year_month_day ymd{to_sys(day)};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
            static_cast<unsigned>(ymd.day())};
}

std::string format_date(Day day) {
    const CivilDate c = civil_date(day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

Weekday weekday_of(Day day) {
    return static_cast<Weekday>(chr::weekday{to_sys(day)}.c_encoding());
}

Weekday parse_weekday(std::string_view name) {
    static constexpr std::string_view names[] = {"sunday",   "monday", "tuesday", "wednesday",
                                                 "thursday", "friday", "saturday"};
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (int i = 0; i < 7; ++i) {
        if (lower == names[i] || lower == names[i].substr(0, 3)) return static_cast<Weekday>(i);
    }
    throw ValidationError("unknown weekday '" + std::string(name) + "'");
}

TradingCalendar::TradingCalendar(Day start, Day end, Weekday closed)
    : start_(start), end_(end), closed_(closed) {
    if (end < start) return;
    days_.reserve(static_cast<std::size_t>(end - start + 1));
    for (Day d = start; d <= end; ++d) {
        if (weekday_of(d) != closed) days_.push_back(d);
    }
}

TradingCalendar TradingCalendar::with_trading_days(Day start, std::size_t n_days,
                                                   Weekday closed) {
    if (n_days == 0) return TradingCalendar(start, start - 1, closed);
    Day d = start;
    while (weekday_of(d) == closed) ++d;
    const Day first = d;
    std::size_t count = 1;
    while (count < n_days) {
        ++d;
        if (weekday_of(d) != closed) ++count;
    }
    return TradingCalendar(first, d, closed);
}

bool TradingCalendar::is_trading_day(Day day) const {
    return day >= start_ && day <= end_ && weekday_of(day) != closed_;
}

std::optional<std::size_t> TradingCalendar::index_of(Day day) const {
    auto it = std::lower_bound(days_.begin(), days_.end(), day);
    if (it == days_.end() || *it != day) return std::nullopt;
    return static_cast<std::size_t>(it - days_.begin());
}

TradingCalendar TradingCalendar::intersect(const TradingCalendar& other) const {
    if (closed_ != other.closed_) {
        throw AlignmentError("calendars close on different weekdays");
    }
    return TradingCalendar(std::max(start_, other.start_), std::min(end_, other.end_), closed_);
}

TradingCalendar TradingCalendar::slice(std::size_t first, std::size_t count) const {
    if (first + count > days_.size()) throw IndexError("calendar slice out of range");
    if (count == 0) return TradingCalendar(start_, start_ - 1, closed_);
    return TradingCalendar(days_[first], days_[first + count - 1], closed_);
}

}  // namespace cropcast
