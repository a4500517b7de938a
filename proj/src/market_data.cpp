#include "rhedge/market_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <string>

#include <fmt/core.h>
#include <fmt/ostream.h>

namespace rhedge::market_data {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Splits into at most N fields; returns the number found.
template <std::size_t N>
std::size_t split(std::string_view line, std::array<std::string_view, N>& fields) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while (count < N) {
        const auto comma = line.find(',', pos);
        fields[count++] = trim(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
        if (comma == std::string_view::npos) return count;
        pos = comma + 1;
    }
    return count + 1;  // more fields than expected
}

bool parse_double(std::string_view text, double& value) {
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc{} && ptr == end && !text.empty();
}

int interval_for(const TradingWindow& window, int minute) {
    // -1 marks the anchor bar, -2 a bar outside the window.
    if (minute == window.start_minute) return -1;
    if (minute < window.start_minute || minute > window.end_minute) return -2;
    const int offset = minute - window.start_minute;
    const int idx = (offset + window.interval_minutes - 1) / window.interval_minutes - 1;
    return idx < window.interval_count() ? idx : -2;
}

}  // namespace

void TradingWindow::validate() const {
    if (interval_minutes <= 0 || end_minute <= start_minute ||
        (end_minute - start_minute) < interval_minutes) {
        throw ConfigError("trading window must span at least one positive-length interval");
    }
}

const DayBars* IntradayBarSeries::find_day(const Date& date) const {
    auto it = std::lower_bound(days.begin(), days.end(), date,
                               [](const DayBars& d, const Date& x) { return d.date < x; });
    return (it != days.end() && it->date == date) ? &*it : nullptr;
}

void RealizedSeries::validate() const {
    if (dates.size() != values.size()) {
        throw DataError(fmt::format("series '{}': {} dates but {} values", label, dates.size(),
                                    values.size()));
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw DataError(fmt::format("series '{}': dates not strictly increasing at {}", label,
                                        format_date(dates[i])));
        }
    }
    if (kind == SeriesKind::variance) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] >= 0.0)) {
                throw DataError(fmt::format("series '{}': negative variance on {}", label,
                                            format_date(dates[i])));
            }
        }
    }
}

RealizedSeries RealizedSeries::slice(const DateRange& range) const {
    RealizedSeries out{label, kind, {}, {}};
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (range.contains(dates[i])) {
            out.dates.push_back(dates[i]);
            out.values.push_back(values[i]);
        }
    }
    return out;
}

int parse_clock(std::string_view text) {
    text = trim(text);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon > 2 || text.size() != colon + 3) {
        throw DataError(fmt::format("malformed time '{}'", text));
    }
    int hh = 0;
    int mm = 0;
    auto h = std::from_chars(text.data(), text.data() + colon, hh);
    auto m = std::from_chars(text.data() + colon + 1, text.data() + text.size(), mm);
    if (h.ec != std::errc{} || m.ec != std::errc{} || h.ptr != text.data() + colon ||
        m.ptr != text.data() + text.size() || hh > 23 || mm > 59 || hh < 0 || mm < 0) {
        throw DataError(fmt::format("malformed time '{}'", text));
    }
    return hh * 60 + mm;
}

IntradayBarSeries parse_bar_file(std::istream& stream, const std::string& symbol,
                                 const TradingWindow& window) {
    window.validate();
    IntradayBarSeries series{symbol, window, {}};

    std::string line;
    std::size_t line_no = 0;
    // header
    while (std::getline(stream, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) return series;
    {
        std::array<std::string_view, 7> fields;
        static constexpr std::array<std::string_view, 7> expected = {
            "date", "time", "open", "high", "low", "close", "volume"};
        if (split(line, fields) != 7) {
            throw DataError(fmt::format("{}: line {}: expected header {}", symbol, line_no,
                                        "date,time,open,high,low,close,volume"));
        }
        for (std::size_t i = 0; i < 7; ++i) {
            if (lower(fields[i]) != expected[i]) {
                throw DataError(fmt::format("{}: line {}: unexpected header column '{}'", symbol,
                                            line_no, fields[i]));
            }
        }
    }

    std::optional<DateFormat> format;
    std::string last_date_text;
    std::map<int, double> current;  // interval -> close, for the day being read
    std::optional<double> anchor;

    auto flush = [&]() {
        if (series.days.empty()) return;
        auto& day = series.days.back();
        day.anchor_close = anchor;
        day.bars.reserve(current.size());
        for (const auto& [interval, close] : current) day.bars.push_back({interval, close});
        current.clear();
        anchor.reset();
    };

    while (std::getline(stream, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::array<std::string_view, 7> f;
        if (split(line, f) != 7) {
            throw DataError(fmt::format("{}: line {}: expected 7 columns", symbol, line_no));
        }
        if (!format) {
            try {
                format = detect_date_format(f[0]);
            } catch (const DataError& e) {
                throw DataError(fmt::format("{}: line {}: {}", symbol, line_no, e.what()));
            }
        }
        Date date;
        int minute = 0;
        double close = 0.0;
        try {
            if (f[0] != last_date_text) {
                date = parse_date(f[0], *format);
            } else {
                date = series.days.back().date;
            }
            minute = parse_clock(f[1]);
        } catch (const DataError& e) {
            throw DataError(fmt::format("{}: line {}: {}", symbol, line_no, e.what()));
        }
        if (!parse_double(f[5], close)) {
            throw DataError(fmt::format("{}: line {}: malformed close '{}'", symbol, line_no, f[5]));
        }
        if (!(close > 0.0)) {
            throw DataError(
                fmt::format("{}: line {}: non-positive close price {}", symbol, line_no, close));
        }

        if (series.days.empty() || series.days.back().date != date) {
            if (!series.days.empty() && date < series.days.back().date) {
                throw DataError(fmt::format("{}: line {}: date {} is out of order", symbol, line_no,
                                            format_date(date)));
            }
            flush();
            series.days.push_back({date, std::nullopt, {}});
        }
        last_date_text.assign(f[0]);

        const int idx = interval_for(window, minute);
        if (idx == -1) {
            anchor = close;
        } else if (idx >= 0) {
            current[idx] = close;
        }
    }
    flush();
    return series;
}

std::vector<IntervalReturn> interval_log_returns(const DayBars& day) {
    std::vector<IntervalReturn> out;
    if (day.bars.empty()) return out;
    out.reserve(day.bars.size());
    if (day.anchor_close && day.bars.front().interval == 0) {
        out.push_back({0, std::log(day.bars.front().close / *day.anchor_close)});
    }
    for (std::size_t k = 1; k < day.bars.size(); ++k) {
        if (day.bars[k].interval == day.bars[k - 1].interval + 1) {
            out.push_back(
                {day.bars[k].interval, std::log(day.bars[k].close / day.bars[k - 1].close)});
        }
    }
    return out;
}

std::vector<IntervalReturn> interval_log_returns(const IntradayBarSeries& series, const Date& day) {
    const auto* d = series.find_day(day);
    if (d == nullptr) {
        throw DataError(
            fmt::format("{}: no bars recorded for {}", series.symbol, format_date(day)));
    }
    return interval_log_returns(*d);
}

std::optional<double> realized_variance(std::span<const double> returns, int M) {
    if (M < 1) throw ConfigError("M must be at least 1");
    if (returns.empty()) return std::nullopt;
    double sum = 0.0;
    for (double r : returns) sum += r * r;
    return static_cast<double>(M) / static_cast<double>(returns.size()) * sum;
}

std::optional<double> realized_variance(std::span<const IntervalReturn> returns, int M) {
    if (M < 1) throw ConfigError("M must be at least 1");
    if (returns.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& r : returns) sum += r.value * r.value;
    return static_cast<double>(M) / static_cast<double>(returns.size()) * sum;
}

std::optional<double> realized_covariance(std::span<const IntervalReturn> returns_x,
                                          std::span<const IntervalReturn> returns_y, int M) {
    if (M < 1) throw ConfigError("M must be at least 1");
    double sum = 0.0;
    std::size_t joined = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < returns_x.size() && j < returns_y.size()) {
        if (returns_x[i].interval < returns_y[j].interval) {
            ++i;
        } else if (returns_y[j].interval < returns_x[i].interval) {
            ++j;
        } else {
            sum += returns_x[i].value * returns_y[j].value;
            ++joined;
            ++i;
            ++j;
        }
    }
    if (joined == 0) return std::nullopt;
    return static_cast<double>(M) / static_cast<double>(joined) * sum;
}

namespace {

void push_measure(RealizedSeries& out, const Date& date, std::optional<double> value,
                  MissingDayPolicy policy, Warnings* warnings) {
    if (value) {
        out.dates.push_back(date);
        out.values.push_back(*value);
        return;
    }
    if (policy == MissingDayPolicy::forward_fill && !out.values.empty()) {
        warn(warnings, fmt::format("{}: no returns on {}, carrying previous value forward",
                                   out.label, format_date(date)));
        out.dates.push_back(date);
        out.values.push_back(out.values.back());
    } else {
        warn(warnings, fmt::format("{}: no returns on {}, day dropped", out.label,
                                   format_date(date)));
    }
}

}  // namespace

RealizedSeries daily_realized_variance(const IntradayBarSeries& series, MissingDayPolicy policy,
                                       Warnings* warnings) {
    RealizedSeries out{series.symbol, SeriesKind::variance, {}, {}};
    const int M = series.window.interval_count();
    out.dates.reserve(series.days.size());
    out.values.reserve(series.days.size());
    for (const auto& day : series.days) {
        const auto returns = interval_log_returns(day);
        push_measure(out, day.date, realized_variance(std::span{returns}, M), policy, warnings);
    }
    return out;
}

RealizedSeries daily_realized_covariance(const IntradayBarSeries& x, const IntradayBarSeries& y,
                                         MissingDayPolicy policy, Warnings* warnings) {
    if (x.window.interval_count() != y.window.interval_count()) {
        throw ConfigError("symbols parsed with different trading windows");
    }
    RealizedSeries out{x.symbol + "_" + y.symbol, SeriesKind::covariance, {}, {}};
    const int M = x.window.interval_count();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < x.days.size() && j < y.days.size()) {
        if (x.days[i].date < y.days[j].date) {
            ++i;
        } else if (y.days[j].date < x.days[i].date) {
            ++j;
        } else {
            const auto rx = interval_log_returns(x.days[i]);
            const auto ry = interval_log_returns(y.days[j]);
            push_measure(out, x.days[i].date, realized_covariance(rx, ry, M), policy, warnings);
            ++i;
            ++j;
        }
    }
    return out;
}

RealizedSeries daily_close_returns(const IntradayBarSeries& series, Warnings* warnings) {
    RealizedSeries out{series.symbol, SeriesKind::ret, {}, {}};
    std::optional<double> previous;
    for (const auto& day : series.days) {
        std::optional<double> last;
        if (!day.bars.empty()) {
            last = day.bars.back().close;
        } else if (day.anchor_close) {
            last = day.anchor_close;
        }
        if (!last) {
            warn(warnings, fmt::format("{}: no in-window bars on {}, skipped", series.symbol,
                                       format_date(day.date)));
            continue;
        }
        if (previous) {
            out.dates.push_back(day.date);
            out.values.push_back(std::log(*last / *previous));
        }
        previous = last;
    }
    return out;
}

double pair_correlation(const RealizedSeries& r_s, const RealizedSeries& r_f,
                        const DateRange& range) {
    std::vector<double> a;
    std::vector<double> b;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < r_s.dates.size() && j < r_f.dates.size()) {
        if (r_s.dates[i] < r_f.dates[j]) {
            ++i;
        } else if (r_f.dates[j] < r_s.dates[i]) {
            ++j;
        } else {
            if (range.contains(r_s.dates[i])) {
                a.push_back(r_s.values[i]);
                b.push_back(r_f.values[j]);
            }
            ++i;
            ++j;
        }
    }
    if (a.size() < 3) {
        throw DataError(fmt::format("correlation of {} and {} needs at least 3 common dates",
                                    r_s.label, r_f.label));
    }
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw NumericError(fmt::format("degenerate correlation: {} or {} is constant", r_s.label,
                                       r_f.label));
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<Date> common_dates(std::span<const RealizedSeries* const> series) {
    if (series.empty()) return {};
    std::vector<Date> out = series.front()->dates;
    for (std::size_t k = 1; k < series.size(); ++k) {
        std::vector<Date> next;
        next.reserve(out.size());
        std::set_intersection(out.begin(), out.end(), series[k]->dates.begin(),
                              series[k]->dates.end(), std::back_inserter(next));
        out = std::move(next);
    }
    return out;
}

RealizedSeries align_to(const RealizedSeries& series, std::span<const Date> dates) {
    RealizedSeries out{series.label, series.kind, {}, {}};
    out.dates.reserve(dates.size());
    out.values.reserve(dates.size());
    std::size_t i = 0;
    for (const auto& d : dates) {
        while (i < series.dates.size() && series.dates[i] < d) ++i;
        if (i == series.dates.size() || series.dates[i] != d) {
            throw DataError(
                fmt::format("series '{}' has no value on {}", series.label, format_date(d)));
        }
        out.dates.push_back(d);
        out.values.push_back(series.values[i]);
    }
    return out;
}

AlignedPair align_pair(const RealizedSeries& rv_s, const RealizedSeries& rv_f,
                       const RealizedSeries& rcv_sf) {
    const std::array<const RealizedSeries*, 3> all{&rv_s, &rv_f, &rcv_sf};
    const auto dates = common_dates(all);
    return {align_to(rv_s, dates), align_to(rv_f, dates), align_to(rcv_sf, dates)};
}

void write_realized_csv(std::ostream& out, const RealizedSeries& series) {
    fmt::print(out, "date,value\n");
    for (std::size_t i = 0; i < series.size(); ++i) {
        fmt::print(out, "{},{:.17g}\n", format_date(series.dates[i]), series.values[i]);
    }
}

RealizedSeries read_realized_csv(std::istream& in, const std::string& label, SeriesKind kind) {
    RealizedSeries out{label, kind, {}, {}};
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::array<std::string_view, 2> f;
        if (split(line, f) != 2) {
            throw DataError(fmt::format("{}: line {}: expected 2 columns", label, line_no));
        }
        if (header) {
            header = false;
            if (lower(f[0]) != "date" || lower(f[1]) != "value") {
                throw DataError(fmt::format("{}: expected header date,value", label));
            }
            continue;
        }
        double v = 0.0;
        if (!parse_double(f[1], v)) {
            throw DataError(fmt::format("{}: line {}: malformed value '{}'", label, line_no, f[1]));
        }
        out.dates.push_back(parse_date(f[0]));
        out.values.push_back(v);
    }
    out.validate();
    return out;
}

}  // namespace rhedge::market_data
