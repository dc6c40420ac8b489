#ifndef CROPCAST_CALENDAR_HPP
#define CROPCAST_CALENDAR_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cropcast {

/// Days since 1970-01-01. Files carry ISO-8601 dates; everything in memory uses
/// this index so windowing is plain integer arithmetic.
using Day = std::int32_t;

/// 0 = Sunday ... 6 = Saturday.
enum class Weekday : int { Sunday = 0, Monday, Tuesday, Wednesday, Thursday, Friday, Saturday };

struct CivilDate {
    int year;
    unsigned month;  // 1..12
    unsigned day;    // 1..31
};

/// Parses `YYYY-MM-DD`; returns nullopt on anything else (including 2019-02-30).
std::optional<Day> parse_date(std::string_view iso);
std::string format_date(Day day);
CivilDate civil_date(Day day);
Weekday weekday_of(Day day);
Weekday parse_weekday(std::string_view name);

/// Trading days between `start` and `end` inclusive, minus one closed weekday.
/// Public holidays are not modeled; a holiday is just a missing value.
class TradingCalendar {
public:
    TradingCalendar() = default;
    TradingCalendar(Day start, Day end, Weekday closed = Weekday::Sunday);

    /// Calendar starting at the first trading day >= `start` with exactly
    /// `n_days` trading days.
    static TradingCalendar with_trading_days(Day start, std::size_t n_days,
                                             Weekday closed = Weekday::Sunday);

    Day start() const { return start_; }
    Day end() const { return end_; }
    Weekday closed_weekday() const { return closed_; }

    const std::vector<Day>& days() const { return days_; }
    std::size_t size() const { return days_.size(); }
    bool empty() const { return days_.empty(); }
    Day operator[](std::size_t i) const { return days_[i]; }

    bool is_trading_day(Day day) const;
    std::optional<std::size_t> index_of(Day day) const;

    /// Calendar of the trading days shared by both; empty when disjoint.
    /// Throws AlignmentError when the closed weekdays differ.
    TradingCalendar intersect(const TradingCalendar& other) const;

    /// Trading days [first, first + count).
    TradingCalendar slice(std::size_t first, std::size_t count) const;

    bool operator==(const TradingCalendar& other) const {
        return days_ == other.days_ && closed_ == other.closed_;
    }

private:
    Day start_ = 0;
    Day end_ = -1;
    Weekday closed_ = Weekday::Sunday;
    std::vector<Day> days_;
};

}  // namespace cropcast

#endif  // CROPCAST_CALENDAR_HPP
