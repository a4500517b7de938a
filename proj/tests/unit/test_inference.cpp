#include "doctest.h"

#include "support.hpp"

#include "rhedge/backtest.hpp"
#include "rhedge/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace rhedge;
using namespace rhedge::inference;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double mu = 0.0, double scale = 0.01) {
    SplitMix64 rng(seed);
    std::vector<double> x(n);
    for (double& v : x) v = mu + scale * rng.normal();
    return x;
}

std::vector<std::size_t> ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    return idx;
}

double lag1_autocorrelation(std::span<const double> x) {
    const double m = testsupport::mean(x);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - m) * (x[i] - m);
        if (i > 0) num += (x[i] - m) * (x[i - 1] - m);
    }
    return num / den;
}

BootstrapOptions opts(std::size_t reps, std::uint64_t seed, std::size_t block = 250) {
    BootstrapOptions o;
    o.block_length = block;
    o.replications = reps;
    o.seed = seed;
    return o;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("metric values match the backtest definitions") {
    const auto r = normals(300, 81, 0.0005);
    CHECK(metric_value(Metric::pnl, r) == backtest::pnl(r));
    CHECK(metric_value(Metric::sharpe, r) == backtest::sharpe(r));
    CHECK(metric_value(Metric::omega, r) == backtest::omega(r));
    CHECK(metric_value(Metric::max_drawdown, r) == backtest::max_drawdown(r));
    CHECK(metric_value(Metric::var95, r) == backtest::value_at_risk(r));
    CHECK(metric_value(Metric::es95, r) == doctest::Approx(backtest::expected_shortfall(r)));
    CHECK(std::isnan(metric_value(Metric::sharpe, std::vector<double>(20, 0.01))));
    for (auto m : all_metrics()) CHECK(parse_metric(to_string(m)) == m);
    CHECK_THROWS_AS((void)parse_metric("calmar"), ConfigError);
}

TEST_CASE("sign p-value") {
    const std::vector<double> d{0.1, -0.2, 0.0, 0.3, std::nan("")};
    CHECK(sign_p_value(d, 1.0) == doctest::Approx(0.25));
    CHECK(sign_p_value(d, -1.0) == doctest::Approx(0.5));
    const std::vector<double> pos{0.1, 0.2, 0.3};
    CHECK(sign_p_value(pos, 0.5) == 0.0);
}

TEST_CASE("identical series give zero differences") {
    const auto r = normals(600, 82);
    for (auto res : {block_bootstrap(r, r, Metric::sharpe, opts(200, 1)),
                     meb_bootstrap(r, r, Metric::sharpe, opts(200, 1))}) {
        CHECK(res.mean_difference == 0.0);
        for (double d : res.differences) CHECK(d == 0.0);
        CHECK(res.p_value == 0.0);
    }
}

TEST_CASE("constant daily shift gives 0.25 per 250-day block") {
    const auto standard = normals(700, 83);
    std::vector<double> robust = standard;
    for (double& v : robust) v += 0.001;

    // Every block start, enumerated.
    double oracle = 0.0;
    const std::size_t starts = standard.size() - 250 + 1;
    for (std::size_t s = 0; s < starts; ++s) {
        oracle += backtest::pnl(std::span(robust).subspan(s, 250)) -
                  backtest::pnl(std::span(standard).subspan(s, 250));
    }
    oracle /= static_cast<double>(starts);
    CHECK(oracle == doctest::Approx(0.25).epsilon(1e-10));

    for (auto res : {block_bootstrap(robust, standard, Metric::pnl, opts(2000, 2)),
                     meb_bootstrap(robust, standard, Metric::pnl, opts(2000, 2))}) {
        CHECK(res.mean_difference == doctest::Approx(0.25).epsilon(1e-9));
        CHECK(res.p_value == 0.0);
        CHECK(res.sample_difference > 0.0);
        CHECK(res.valid_replications == 2000);
    }
}

TEST_CASE("maximum entropy replicates keep the rank pattern") {
    const auto x = normals(250, 84);
    const auto want = ranks(x);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto rep = meb_replicate(x, s);
        REQUIRE(rep.values.size() == x.size());
        CHECK(ranks(rep.values) == want);
    }
}

TEST_CASE("constant series come back unchanged") {
    const std::vector<double> c(30, 0.7);
    const auto rep = meb_replicate(c, 5);
    CHECK(rep.constant);
    CHECK(rep.values == c);
    CHECK_THROWS_AS((void)meb_replicate(std::vector<double>{1, 2, 3}, 1), DataError);
}

TEST_CASE("replicates preserve the mean") {
    const auto x = normals(100, 85, 1.0, 0.3);
    const double target = testsupport::mean(x);
    double total = 0.0;
    const int reps = 10000;
    for (int s = 0; s < reps; ++s) total += testsupport::mean(meb_replicate(x, static_cast<std::uint64_t>(s)).values);
    CHECK(total / reps == doctest::Approx(target).epsilon(0.01));
}

TEST_CASE("replicates retain lag-1 dependence of an AR(1)") {
    const auto x = testsupport::simulate_ar(0.0, {0.7}, 1.0, 500, 86);
    const double original = lag1_autocorrelation(x);
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 1000; ++s) sum += lag1_autocorrelation(meb_replicate(x, s).values);
    CHECK(std::abs(sum / 1000.0 - original) <= 0.1);
}

TEST_CASE("sorted uniforms are sorted and inside (0, 1)") {
    SplitMix64 rng(87);
    std::vector<double> u;
    sorted_uniforms(rng, 500, u);
    REQUIRE(u.size() == 500);
    CHECK(std::is_sorted(u.begin(), u.end()));
    CHECK(u.front() > 0.0);
    CHECK(u.back() < 1.0);
}

TEST_CASE("results are reproducible and independent of the thread count") {
    const auto a = normals(800, 88, 0.0003);
    const auto b = normals(800, 89);
    for (auto scheme : {Scheme::random_block, Scheme::max_entropy}) {
        auto run = [&](unsigned threads) {
            auto o = opts(300, 9);
            o.threads = threads;
            return scheme == Scheme::random_block ? block_bootstrap(a, b, all_metrics(), o)
                                                  : meb_bootstrap(a, b, all_metrics(), o);
        };
        const auto one = run(1);
        const auto again = run(1);
        const auto three = run(3);
        REQUIRE(one.size() == all_metrics().size());
        for (std::size_t m = 0; m < one.size(); ++m) {
            CHECK(one[m].differences == again[m].differences);
            CHECK(one[m].differences == three[m].differences);
            CHECK(one[m].p_value == three[m].p_value);
            CHECK(one[m].p_value >= 0.0);
            CHECK(one[m].p_value <= 1.0);
        }
        // Multi-metric and single-metric runs share draws.
        const auto single = scheme == Scheme::random_block
                                ? block_bootstrap(a, b, Metric::omega, opts(300, 9))
                                : meb_bootstrap(a, b, Metric::omega, opts(300, 9));
        CHECK(single.differences == one[2].differences);
    }
}

TEST_CASE("pooling averages per-replication differences") {
    const auto a = normals(400, 90, 0.001);
    const auto b = normals(400, 91);
    const auto c = normals(400, 92);
    const std::vector<BootstrapResult> parts{block_bootstrap(a, b, Metric::pnl, opts(100, 3)),
                                             block_bootstrap(c, b, Metric::pnl, opts(100, 3))};
    const auto pooled = pool(parts);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(pooled.differences[i] ==
              doctest::Approx(0.5 * (parts[0].differences[i] + parts[1].differences[i])));
    }
    CHECK(pooled.sample_difference ==
          doctest::Approx(0.5 * (parts[0].sample_difference + parts[1].sample_difference)));
    CHECK(pooled.p_value == sign_p_value(pooled.differences, pooled.sample_difference));
    CHECK_THROWS_AS((void)pool(std::span<const BootstrapResult>{}), DataError);
}

TEST_CASE("invalid inputs") {
    const auto a = normals(100, 93);
    CHECK_THROWS_AS((void)block_bootstrap(a, a, Metric::pnl, opts(10, 1)), DataError);
    CHECK_THROWS_AS((void)block_bootstrap(a, std::span(a).first(99), Metric::pnl, opts(10, 1, 50)),
                    DataError);
    CHECK_THROWS_AS((void)meb_bootstrap(a, a, Metric::pnl, opts(0, 1, 50)), ConfigError);
}

}  // TEST_SUITE
