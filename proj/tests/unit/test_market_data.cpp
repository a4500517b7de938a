#include "doctest.h"

#include "rhedge/market_data.hpp"

#include <cmath>
#include <sstream>

using namespace rhedge;
using namespace rhedge::market_data;
using namespace std::chrono;

namespace {

const TradingWindow kWindow{};

IntradayBarSeries parse(const std::string& body) {
    std::istringstream in("date,time,open,high,low,close,volume\n" + body);
    return parse_bar_file(in, "X", kWindow);
}

std::string row(const std::string& date, const std::string& time, double close) {
    std::ostringstream os;
    os << date << ',' << time << ",1,1,1," << close << ",10\n";
    return os.str();
}

Date ymd(int y, unsigned m, unsigned d) { return Date{year{y}, month{m}, day{d}}; }

}  // namespace

TEST_SUITE("market_data") {

TEST_CASE("window defaults give 66 five-minute intervals") {
    CHECK(kWindow.interval_count() == 66);
    CHECK_THROWS_AS((TradingWindow{600, 600, 5}.validate()), ConfigError);
}

TEST_CASE("bars outside the window are discarded") {
    const auto s = parse(row("2020-01-02", "09:35", 100) + row("2020-01-02", "16:00", 101));
    REQUIRE(s.days.size() == 1);
    CHECK(s.days[0].bars.empty());
    CHECK_FALSE(s.days[0].anchor_close.has_value());
}

TEST_CASE("a 10:05 bar lands in interval 0") {
    const auto s = parse(row("2020-01-02", "10:05", 100));
    REQUIRE(s.days.size() == 1);
    REQUIRE(s.days[0].bars.size() == 1);
    CHECK(s.days[0].bars[0].interval == 0);
    CHECK(s.days[0].bars[0].close == 100.0);
}

TEST_CASE("duplicate interval keeps the last close") {
    const auto s = parse(row("2020-01-02", "10:05", 100) + row("2020-01-02", "10:05", 102));
    REQUIRE(s.days[0].bars.size() == 1);
    CHECK(s.days[0].bars[0].close == 102.0);
}

TEST_CASE("off-grid stamps snap to the interval ending at or after them") {
    const auto s = parse(row("2020-01-02", "10:03", 100) + row("2020-01-02", "10:07", 101) +
                         row("2020-01-02", "15:30", 99));
    REQUIRE(s.days[0].bars.size() == 3);
    CHECK(s.days[0].bars[0].interval == 0);
    CHECK(s.days[0].bars[1].interval == 1);
    CHECK(s.days[0].bars[2].interval == 65);
}

TEST_CASE("a bar at the window open is the anchor close") {
    const auto s = parse(row("2020-01-02", "10:00", 100) + row("2020-01-02", "10:05", 110));
    REQUIRE(s.days[0].anchor_close.has_value());
    const auto r = interval_log_returns(s.days[0]);
    REQUIRE(r.size() == 1);
    CHECK(r[0].interval == 0);
    CHECK(r[0].value == doctest::Approx(std::log(1.1)));
}

TEST_CASE("US dates are accepted and days must be ordered") {
    const auto s = parse(row("01/02/2020", "10:05", 100) + row("01/03/2020", "10:05", 100));
    REQUIRE(s.days.size() == 2);
    CHECK(s.days[1].date == ymd(2020, 1, 3));
    CHECK_THROWS_AS((void)parse(row("2020-01-03", "10:05", 100) + row("2020-01-02", "10:05", 100)),
                    DataError);
}

TEST_CASE("malformed input raises DataError") {
    CHECK_THROWS_AS((void)parse(row("2020-13-02", "10:05", 100)), DataError);
    CHECK_THROWS_AS((void)parse(row("2020-01-02", "1005", 100)), DataError);
    CHECK_THROWS_AS((void)parse(row("2020-01-02", "10:05", -1)), DataError);
    CHECK_THROWS_AS((void)parse("2020-01-02,10:05,1,1\n"), DataError);
    std::istringstream bad_header("day,time,open,high,low,close,volume\n");
    CHECK_THROWS_AS((void)parse_bar_file(bad_header, "X", kWindow), DataError);
}

TEST_CASE("interval log returns") {
    DayBars flat{ymd(2020, 1, 2), std::nullopt, {{0, 100}, {1, 100}, {2, 100}}};
    const auto r0 = interval_log_returns(flat);
    REQUIRE(r0.size() == 2);
    CHECK(r0[0].value == 0.0);
    CHECK(r0[1].value == 0.0);

    DayBars up{ymd(2020, 1, 2), std::nullopt, {{0, 100}, {1, 110}}};
    const auto r1 = interval_log_returns(up);
    REQUIRE(r1.size() == 1);
    CHECK(r1[0].value == doctest::Approx(0.09531).epsilon(1e-4));

    DayBars gap{ymd(2020, 1, 2), std::nullopt, {{0, 100}, {2, 110}}};
    CHECK(interval_log_returns(gap).empty());
}

TEST_CASE("realized variance scaling") {
    const std::vector<double> zeros(10, 0.0);
    CHECK(*realized_variance(std::span<const double>(zeros), 66) == 0.0);

    std::vector<double> half(33, std::sqrt(0.5 / 33.0));
    CHECK(*realized_variance(std::span<const double>(half), 66) == doctest::Approx(1.0));

    const std::vector<double> full(66, 0.01);
    CHECK(*realized_variance(std::span<const double>(full), 66) == doctest::Approx(6.6e-3));

    CHECK_FALSE(realized_variance(std::span<const double>(), 66).has_value());
    CHECK_THROWS_AS((void)realized_variance(std::span<const double>(full), 0), ConfigError);
}

TEST_CASE("realized covariance") {
    const std::vector<IntervalReturn> x{{0, 0.01}, {1, -0.02}, {2, 0.005}};
    std::vector<IntervalReturn> neg = x;
    for (auto& r : neg) r.value = -r.value;
    const auto rv = *realized_variance(std::span<const IntervalReturn>(x), 66);
    CHECK(*realized_covariance(x, x, 66) == doctest::Approx(rv));
    CHECK(*realized_covariance(x, neg, 66) == doctest::Approx(-rv));

    const std::vector<IntervalReturn> a{{0, 0.03}, {1, 0.01}};
    const std::vector<IntervalReturn> b{{1, 0.02}, {2, 0.04}};
    CHECK(*realized_covariance(a, b, 66) == doctest::Approx(0.0132));

    const std::vector<IntervalReturn> c{{5, 0.01}};
    CHECK_FALSE(realized_covariance(a, c, 66).has_value());
}

TEST_CASE("realized covariance is bilinear") {
    const std::vector<IntervalReturn> x{{0, 0.01}, {1, -0.02}, {2, 0.005}, {3, 0.001}};
    const std::vector<IntervalReturn> y{{0, 0.02}, {1, 0.01}, {2, -0.004}, {3, 0.003}};
    const std::vector<IntervalReturn> z{{0, -0.01}, {1, 0.015}, {2, 0.002}, {3, 0.0}};
    std::vector<IntervalReturn> combo = x;
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i].value = 2.0 * x[i].value - 3.0 * z[i].value;
    const double lhs = *realized_covariance(combo, y, 66);
    const double rhs = 2.0 * *realized_covariance(x, y, 66) - 3.0 * *realized_covariance(z, y, 66);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("daily close returns") {
    const auto flat = parse(row("2020-01-02", "15:30", 100) + row("2020-01-03", "15:30", 100));
    const auto r0 = daily_close_returns(flat);
    REQUIRE(r0.size() == 1);
    CHECK(r0.values[0] == 0.0);
    CHECK(r0.dates[0] == ymd(2020, 1, 3));

    const auto tri = parse(row("2020-01-02", "15:30", 100) + row("2020-01-03", "15:30", 105) +
                           row("2020-01-06", "15:30", 100));
    const auto r1 = daily_close_returns(tri);
    REQUIRE(r1.size() == 2);
    CHECK(r1.values[0] == doctest::Approx(std::log(1.05)));
    CHECK(r1.values[1] == doctest::Approx(std::log(100.0 / 105.0)));
    CHECK(r1.values[0] + r1.values[1] == doctest::Approx(0.0).epsilon(1e-15));

    CHECK(daily_close_returns(parse(row("2020-01-02", "15:30", 100))).size() == 0);
}

TEST_CASE("pair correlation") {
    auto make = [](std::vector<double> v) {
        RealizedSeries s{"r", SeriesKind::ret, {}, std::move(v)};
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            s.dates.push_back(Date{sys_days{ymd(2020, 1, 1)} + days{static_cast<int>(i)}});
        }
        return s;
    };
    const DateRange all{ymd(2000, 1, 1), ymd(2100, 1, 1)};
    const auto a = make({1, 2, 3});
    CHECK(pair_correlation(a, make({1, 3, 2}), all) == doctest::Approx(0.5));
    CHECK(pair_correlation(a, a, all) == doctest::Approx(1.0));
    CHECK(pair_correlation(a, make({-1, -2, -3}), all) == doctest::Approx(-1.0));
    CHECK_THROWS_AS((void)pair_correlation(a, make({2, 2, 2}), all), NumericError);
    CHECK_THROWS_AS((void)pair_correlation(make({1, 2}), make({1, 2}), all), DataError);
}

TEST_CASE("missing days: drop vs forward fill") {
    // Day 2 has a single bar and so no returns.
    const auto s = parse(row("2020-01-02", "10:05", 100) + row("2020-01-02", "10:10", 101) +
                         row("2020-01-03", "10:05", 100) + row("2020-01-06", "10:05", 100) +
                         row("2020-01-06", "10:10", 99));
    Warnings w;
    const auto dropped = daily_realized_variance(s, MissingDayPolicy::drop, &w);
    CHECK(dropped.size() == 2);
    CHECK(w.size() == 1);
    const auto filled = daily_realized_variance(s, MissingDayPolicy::forward_fill);
    REQUIRE(filled.size() == 3);
    CHECK(filled.values[1] == filled.values[0]);
    CHECK(filled.dates[1] == ymd(2020, 1, 3));
}

TEST_CASE("alignment on common dates") {
    auto make = [](std::vector<int> day_offsets, SeriesKind kind) {
        RealizedSeries s{"s", kind, {}, {}};
        for (int d : day_offsets) {
            s.dates.push_back(Date{sys_days{ymd(2020, 1, 1)} + days{d}});
            s.values.push_back(1.0 + d);
        }
        return s;
    };
    const auto a = make({0, 1, 2, 4}, SeriesKind::variance);
    const auto b = make({1, 2, 3, 4}, SeriesKind::variance);
    const auto c = make({0, 2, 4}, SeriesKind::covariance);
    const auto p = align_pair(a, b, c);
    REQUIRE(p.rv_s.size() == 2);
    CHECK(p.rv_s.dates == p.rv_f.dates);
    CHECK(p.rv_s.dates == p.rcv_sf.dates);
    CHECK(p.rcv_sf.values[0] == 3.0);

    const std::vector<Date> missing{ymd(2020, 2, 1)};
    CHECK_THROWS_AS((void)align_to(a, missing), DataError);
}

TEST_CASE("validate rejects bad series") {
    RealizedSeries s{"v", SeriesKind::variance, {ymd(2020, 1, 2), ymd(2020, 1, 2)}, {1, 1}};
    CHECK_THROWS_AS(s.validate(), DataError);
    s.dates[1] = ymd(2020, 1, 3);
    s.values[1] = -1;
    CHECK_THROWS_AS(s.validate(), DataError);
    s.kind = SeriesKind::covariance;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("realized CSV round trip is exact") {
    RealizedSeries s{"v", SeriesKind::variance, {ymd(2020, 1, 2), ymd(2020, 1, 3)},
                     {0.1 + 0.2, 1.0 / 3.0}};
    std::ostringstream out;
    write_realized_csv(out, s);
    std::istringstream in(out.str());
    const auto back = read_realized_csv(in, "v", SeriesKind::variance);
    CHECK(back.dates == s.dates);
    CHECK(back.values == s.values);
}

}  // TEST_SUITE
