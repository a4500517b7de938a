#pragma once

#include "rhedge/core.hpp"

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rhedge::market_data {

/// Intraday window on a fixed interval grid. Interval i (0-based) covers
/// (start + i*len, start + (i+1)*len]; a bar stamped exactly at `start` is kept
/// as the day's anchor close so the first interval also yields a return.
struct TradingWindow {
    int start_minute = 10 * 60;
    int end_minute = 15 * 60 + 30;
    int interval_minutes = 5;

    [[nodiscard]] int interval_count() const {
        return (end_minute - start_minute) / interval_minutes;
    }
    void validate() const;
};

struct Bar {
    int interval = 0;
    double close = 0.0;
};

struct DayBars {
    Date date;
    std::optional<double> anchor_close;
    std::vector<Bar> bars;  // strictly increasing interval
};

struct IntradayBarSeries {
    std::string symbol;
    TradingWindow window;
    std::vector<DayBars> days;  // strictly increasing dates

    [[nodiscard]] const DayBars* find_day(const Date& date) const;
};

enum class SeriesKind { variance, covariance, ret };

struct RealizedSeries {
    std::string label;
    SeriesKind kind = SeriesKind::variance;
    std::vector<Date> dates;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    /// Throws DataError when lengths differ, dates are not strictly
    /// increasing, or a variance is negative.
    void validate() const;
    /// Restricts to dates inside the range (inclusive).
    [[nodiscard]] RealizedSeries slice(const DateRange& range) const;
};

enum class MissingDayPolicy { drop, forward_fill };

/// Parses "HH:MM" into minutes after midnight.
[[nodiscard]] int parse_clock(std::string_view text);

/// Reads a date,time,open,high,low,close,volume CSV. Bars outside the window
/// are discarded; a bar stamped HH:MM is snapped to the interval ending at or
/// after HH:MM; the last row wins for duplicate intervals.
[[nodiscard]] IntradayBarSeries parse_bar_file(std::istream& stream, const std::string& symbol,
                                               const TradingWindow& window);

struct IntervalReturn {
    int interval = 0;
    double value = 0.0;
};

/// Log returns between consecutive available intervals of one day.
[[nodiscard]] std::vector<IntervalReturn> interval_log_returns(const IntradayBarSeries& series,
                                                               const Date& day);
[[nodiscard]] std::vector<IntervalReturn> interval_log_returns(const DayBars& day);

/// (M / M_x) * sum r^2, or nullopt for an empty day.
[[nodiscard]] std::optional<double> realized_variance(std::span<const double> returns, int M);
[[nodiscard]] std::optional<double> realized_variance(std::span<const IntervalReturn> returns,
                                                      int M);

/// Inner join on interval index, then (M / M_xy) * sum r_x r_y; nullopt when
/// the join is empty.
[[nodiscard]] std::optional<double> realized_covariance(std::span<const IntervalReturn> returns_x,
                                                        std::span<const IntervalReturn> returns_y,
                                                        int M);

/// Daily RV series for one symbol.
[[nodiscard]] RealizedSeries daily_realized_variance(const IntradayBarSeries& series,
                                                     MissingDayPolicy policy,
                                                     Warnings* warnings = nullptr);

/// Daily RCV series over the dates both symbols traded.
[[nodiscard]] RealizedSeries daily_realized_covariance(const IntradayBarSeries& x,
                                                       const IntradayBarSeries& y,
                                                       MissingDayPolicy policy,
                                                       Warnings* warnings = nullptr);

/// Close-to-close log returns using the last in-window bar of each day.
[[nodiscard]] RealizedSeries daily_close_returns(const IntradayBarSeries& series,
                                                 Warnings* warnings = nullptr);

/// Pearson correlation on dates common to both series inside `range`.
[[nodiscard]] double pair_correlation(const RealizedSeries& r_s, const RealizedSeries& r_f,
                                      const DateRange& range);

/// Intersection of date vectors (each strictly increasing).
[[nodiscard]] std::vector<Date> common_dates(std::span<const RealizedSeries* const> series);

/// Restricts a series to the given dates, which must all be present.
[[nodiscard]] RealizedSeries align_to(const RealizedSeries& series, std::span<const Date> dates);

struct AlignedPair {
    RealizedSeries rv_s;
    RealizedSeries rv_f;
    RealizedSeries rcv_sf;
};

/// Puts RV_S, RV_F and RCV_SF on their common date vector.
[[nodiscard]] AlignedPair align_pair(const RealizedSeries& rv_s, const RealizedSeries& rv_f,
                                     const RealizedSeries& rcv_sf);

/// date,value CSV.
void write_realized_csv(std::ostream& out, const RealizedSeries& series);
[[nodiscard]] RealizedSeries read_realized_csv(std::istream& in, const std::string& label,
                                               SeriesKind kind);

}  // namespace rhedge::market_data
