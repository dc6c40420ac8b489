#ifndef CROPCAST_SERIES_HPP
#define CROPCAST_SERIES_HPP

#include <cmath>
#include <compare>
#include <filesystem>
#include <limits>
#include <map>
#include <string>

#include <Eigen/Core>

#include "cropcast/calendar.hpp"

namespace cropcast {

/// Absent values are quiet NaNs inside dense columns.
inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
inline bool is_absent(double v) { return std::isnan(v); }

/// Boolean per trading day.
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

template <typename Derived>
Mask absent_mask(const Eigen::DenseBase<Derived>& column) {
    return column.derived().array().isNaN();
}

/// One (market, crop) record on a trading calendar. Every column has one entry
/// per trading day in calendar order.
struct AlignedSeries {
    std::string market_id;
    std::string crop_id;
    TradingCalendar calendar;
    Eigen::VectorXd price;     // currency per quintal
    Eigen::VectorXd arrival;   // quintals
    Eigen::VectorXd temp;      // degrees Celsius
    Eigen::VectorXd humidity;  // percent
    Eigen::VectorXd rainfall;  // millimetres

    std::size_t size() const { return calendar.size(); }

    /// Series with every column absent on `calendar`.
    static AlignedSeries absent(std::string market, std::string crop, TradingCalendar calendar);

    /// Rows [first, first + count).
    AlignedSeries slice(std::size_t first, std::size_t count) const;
    AlignedSeries prefix(std::size_t count) const { return slice(0, count); }

    /// Throws ShapeError when a column length disagrees with the calendar.
    void check_shape() const;
};

/// NaN-aware equality (absent == absent).
bool same_values(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
bool operator==(const AlignedSeries& a, const AlignedSeries& b);

struct SeriesKey {
    std::string market_id;
    std::string crop_id;
    auto operator<=>(const SeriesKey&) const = default;
};

using SeriesCollection = std::map<SeriesKey, AlignedSeries>;
/// Weather columns per market; price/arrival stay absent.
using WeatherCollection = std::map<std::string, AlignedSeries>;

/// Market CSV: `date,market_id,crop_id,modal_price,arrival_qty`. Rows outside
/// the calendar range are skipped; a row on the closed weekday is an error.
SeriesCollection load_market_csv(const std::filesystem::path& path,
                                 const TradingCalendar& calendar);

/// Weather CSV: `date,market_id,avg_temp_c,avg_humidity_pct,total_rainfall_mm`.
WeatherCollection load_weather_csv(const std::filesystem::path& path,
                                   const TradingCalendar& calendar);

/// Writes only days with at least one present field; absent fields are empty.
/// Numbers use the shortest representation that round-trips exactly.
void write_market_csv(const std::filesystem::path& path, const SeriesCollection& series);
void write_weather_csv(const std::filesystem::path& path, const WeatherCollection& weather);

/// Joins price/arrival of `market` with the weather of `weather` on the shared
/// trading days. Throws AlignmentError for different markets or an empty overlap.
AlignedSeries align(const AlignedSeries& market, const AlignedSeries& weather);

std::string format_number(double v);

}  // namespace cropcast

#endif  // CROPCAST_SERIES_HPP
