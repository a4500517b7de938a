#include "rhedge/inference.hpp"

#include "rhedge/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include <fmt/core.h>

namespace rhedge::inference {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::size_t kMetricCount = 6;

// All six metrics in two passes plus a partial selection for the tail. Sums
// run in the same order as the backtest functions, so values match them
// exactly. `sorted` may hold the series already sorted ascending.
void all_metric_values(std::span<const double> r, std::vector<double>& scratch,
                       const std::vector<double>* sorted, double* out) {
    const std::size_t n = r.size();
    if (n < 2) {
        std::fill(out, out + kMetricCount, kNaN);
        return;
    }
    double sum = 0.0;
    double gains = 0.0;
    double losses = 0.0;
    double cumulative = 0.0;
    double peak = 0.0;
    double drawdown = 0.0;
    for (double v : r) {
        sum += v;
        if (v > 0.0) gains += v;
        else losses -= v;
        cumulative += v;
        peak = std::max(peak, cumulative);
        drawdown = std::max(drawdown, peak - cumulative);
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    out[static_cast<int>(Metric::pnl)] = sum;
    out[static_cast<int>(Metric::sharpe)] =
        backtest::negligible_sd(sd, mean) ? kNaN : mean / sd * std::sqrt(backtest::kAnnualization);
    out[static_cast<int>(Metric::omega)] = losses == 0.0 ? backtest::kOmegaCap : gains / losses;
    out[static_cast<int>(Metric::max_drawdown)] = drawdown;

    auto k = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n) - 1e-12));
    k = std::clamp<std::size_t>(k, 1, n);
    const double* low = nullptr;
    std::size_t ties = 0;
    double q = 0.0;
    if (sorted != nullptr) {
        low = sorted->data();
        q = low[k - 1];
        for (std::size_t i = k; i < n && low[i] == q; ++i) ++ties;
    } else {
        scratch.assign(r.begin(), r.end());
        std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1),
                         scratch.end());
        std::sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1));
        low = scratch.data();
        q = low[k - 1];
        for (std::size_t i = k; i < n; ++i) ties += scratch[i] == q ? 1 : 0;
    }
    const double var = -q;
    double tail = 0.0;
    for (std::size_t i = 0; i < k; ++i) tail += -low[i];
    for (std::size_t i = 0; i < ties; ++i) tail += var;
    out[static_cast<int>(Metric::var95)] = var;
    out[static_cast<int>(Metric::es95)] = tail / static_cast<double>(k + ties);
}

std::size_t check_inputs(std::span<const double> a, std::span<const double> b,
                         const BootstrapOptions& options) {
    if (a.size() != b.size()) {
        throw DataError(fmt::format("bootstrap: paired series lengths differ ({} vs {})", a.size(),
                                    b.size()));
    }
    if (options.block_length < 4) throw ConfigError("bootstrap: block length must be at least 4");
    if (options.replications == 0) throw ConfigError("bootstrap: replications must be positive");
    if (a.size() < options.block_length) {
        throw DataError(fmt::format("bootstrap: series of {} observations is shorter than the {}-day block",
                                    a.size(), options.block_length));
    }
    return a.size() - options.block_length + 1;
}

// Runs body(rep, thread_index) over all replications on `threads` workers.
// Each replication only writes its own slots, so results do not depend on
// the thread count.
template <typename Body>
void for_each_replication(std::size_t reps, unsigned threads, Body&& body) {
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
    if (workers == 1) {
        for (std::size_t r = 0; r < reps; ++r) body(r, 0U);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t r = w; r < reps; r += workers) body(r, w);
        });
    }
    for (auto& t : pool) t.join();
}

std::vector<BootstrapResult> make_results(std::span<const Metric> metrics, Scheme scheme,
                                          const BootstrapOptions& options,
                                          std::span<const double> a, std::span<const double> b) {
    std::vector<BootstrapResult> results(metrics.size());
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        auto& res = results[m];
        res.metric = metrics[m];
        res.scheme = scheme;
        res.replications = options.replications;
        res.block_length = options.block_length;
        res.sample_difference = metric_value(metrics[m], a) - metric_value(metrics[m], b);
        res.differences.assign(options.replications, 0.0);
    }
    return results;
}

double trimmed_mean(std::vector<double> v, double trim) {
    std::sort(v.begin(), v.end());
    const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(v.size()) * trim));
    double sum = 0.0;
    for (std::size_t i = cut; i < v.size() - cut; ++i) sum += v[i];
    return sum / static_cast<double>(v.size() - 2 * cut);
}

}  // namespace

const std::vector<Metric>& all_metrics() {
    static const std::vector<Metric> metrics{Metric::pnl,          Metric::sharpe, Metric::omega,
                                             Metric::max_drawdown, Metric::var95,  Metric::es95};
    return metrics;
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::pnl: return "pnl";
        case Metric::sharpe: return "sharpe";
        case Metric::omega: return "omega";
        case Metric::max_drawdown: return "max_drawdown";
        case Metric::var95: return "var95";
        case Metric::es95: return "es95";
    }
    return "unknown";
}

std::string to_string(Scheme s) { return s == Scheme::max_entropy ? "max_entropy" : "random_block"; }

Metric parse_metric(std::string_view s) {
    for (Metric m : all_metrics()) {
        if (to_string(m) == s) return m;
    }
    throw ConfigError(fmt::format("unknown metric '{}'", s));
}

double metric_value(Metric m, std::span<const double> r) noexcept {
    try {
        switch (m) {
            case Metric::pnl: return backtest::pnl(r);
            case Metric::sharpe: return backtest::sharpe(r);
            case Metric::omega: return backtest::omega(r);
            case Metric::max_drawdown: return backtest::max_drawdown(r);
            case Metric::var95: return backtest::value_at_risk(r);
            case Metric::es95: return backtest::expected_shortfall(r);
        }
    } catch (...) {
    }
    return kNaN;
}

double sign_p_value(std::span<const double> differences, double sample) {
    const int ref = (sample > 0.0) - (sample < 0.0);
    std::size_t valid = 0;
    std::size_t opposite = 0;
    for (double d : differences) {
        if (std::isnan(d)) continue;
        ++valid;
        const int s = (d > 0.0) - (d < 0.0);
        if (s != 0 && s != ref) ++opposite;
    }
    return valid == 0 ? kNaN : static_cast<double>(opposite) / static_cast<double>(valid);
}

void summarize(BootstrapResult& result) {
    double sum = 0.0;
    std::size_t valid = 0;
    for (double d : result.differences) {
        if (std::isnan(d)) continue;
        sum += d;
        ++valid;
    }
    result.valid_replications = valid;
    result.mean_difference = valid == 0 ? kNaN : sum / static_cast<double>(valid);
    result.p_value = sign_p_value(result.differences, result.sample_difference);
}

std::vector<BootstrapResult> block_bootstrap(std::span<const double> r_robust,
                                             std::span<const double> r_standard,
                                             std::span<const Metric> metrics,
                                             const BootstrapOptions& options) {
    const std::size_t starts = check_inputs(r_robust, r_standard, options);
    auto results = make_results(metrics, Scheme::random_block, options, r_robust, r_standard);
    const std::size_t L = options.block_length;
    const std::size_t k = metrics.size();
    const unsigned workers = std::max(1U, options.threads);
    std::vector<std::vector<double>> scratch(workers);

    for_each_replication(options.replications, workers, [&](std::size_t rep, unsigned w) {
        SplitMix64 rng(derive_seed(options.seed, rep));
        const std::size_t start = rng.below(starts);
        double va[kMetricCount];
        double vb[kMetricCount];
        all_metric_values(r_robust.subspan(start, L), scratch[w], nullptr, va);
        all_metric_values(r_standard.subspan(start, L), scratch[w], nullptr, vb);
        for (std::size_t m = 0; m < k; ++m) {
            const auto idx = static_cast<std::size_t>(metrics[m]);
            results[m].differences[rep] = va[idx] - vb[idx];
        }
    });
    for (auto& res : results) summarize(res);
    return results;
}

BootstrapResult block_bootstrap(std::span<const double> r_robust, std::span<const double> r_standard,
                                Metric metric, const BootstrapOptions& options) {
    const Metric one[] = {metric};
    return std::move(block_bootstrap(r_robust, r_standard, one, options).front());
}

MebSkeleton meb_skeleton(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 4) throw DataError(fmt::format("maximum entropy bootstrap needs 4 values, got {}", n));
    MebSkeleton sk;
    sk.order.resize(n);
    std::iota(sk.order.begin(), sk.order.end(), std::size_t{0});
    std::stable_sort(sk.order.begin(), sk.order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = x[sk.order[i]];
    if (s.front() == s.back()) {
        sk.constant = true;
        sk.original.assign(x.begin(), x.end());
        return sk;
    }

    std::vector<double> abs_diff(n - 1);
    for (std::size_t t = 1; t < n; ++t) abs_diff[t - 1] = std::abs(x[t] - x[t - 1]);
    const double tail = trimmed_mean(std::move(abs_diff), 0.10);

    sk.z.resize(n + 1);
    sk.z[0] = s[0] - tail;
    for (std::size_t i = 1; i < n; ++i) sk.z[i] = 0.5 * (s[i - 1] + s[i]);
    sk.z[n] = s[n - 1] + tail;

    sk.shift.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double target = 0.0;
        if (i == 0) target = 0.75 * s[0] + 0.25 * s[1];
        else if (i == n - 1) target = 0.25 * s[n - 2] + 0.75 * s[n - 1];
        else target = 0.25 * s[i - 1] + 0.5 * s[i] + 0.25 * s[i + 1];
        sk.shift[i] = target - 0.5 * (sk.z[i] + sk.z[i + 1]);
    }
    return sk;
}

void sorted_uniforms(SplitMix64& rng, std::size_t n, std::vector<double>& out) {
    out.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += rng.exponential();
        out[i] = total;
    }
    total += rng.exponential();
    for (auto& u : out) u /= total;
}

namespace {

// Quantile draws in ascending order. The per-interval shifts only perturb
// the order locally, so insertion sort is close to linear here.
void meb_sorted_values(const MebSkeleton& sk, std::span<const double> sorted_u,
                       std::vector<double>& q) {
    const std::size_t n = sk.order.size();
    if (sorted_u.size() != n) throw DataError("meb_replicate: uniform count differs from series length");
    q.resize(n);
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double pos = sorted_u[j] * dn;
        const auto k = std::min(n - 1, static_cast<std::size_t>(pos));
        const double frac = pos - static_cast<double>(k);
        const double v = sk.z[k] + frac * (sk.z[k + 1] - sk.z[k]) + sk.shift[k];
        std::size_t i = j;
        while (i > 0 && q[i - 1] > v) {
            q[i] = q[i - 1];
            --i;
        }
        q[i] = v;
    }
}

void place_by_rank(const MebSkeleton& sk, const std::vector<double>& q, std::vector<double>& out) {
    out.resize(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) out[sk.order[j]] = q[j];
}

}  // namespace

void meb_replicate(const MebSkeleton& sk, std::span<const double> sorted_u,
                   std::vector<double>& out) {
    if (sk.constant) {
        out = sk.original;
        return;
    }
    std::vector<double> q;
    meb_sorted_values(sk, sorted_u, q);
    place_by_rank(sk, q, out);
}

MebReplicate meb_replicate(std::span<const double> x, std::uint64_t seed) {
    const auto sk = meb_skeleton(x);
    SplitMix64 rng(seed);
    std::vector<double> u;
    sorted_uniforms(rng, x.size(), u);
    MebReplicate rep;
    rep.constant = sk.constant;
    meb_replicate(sk, u, rep.values);
    return rep;
}

std::vector<BootstrapResult> meb_bootstrap(std::span<const double> r_robust,
                                           std::span<const double> r_standard,
                                           std::span<const Metric> metrics,
                                           const BootstrapOptions& options) {
    const std::size_t starts = check_inputs(r_robust, r_standard, options);
    auto results = make_results(metrics, Scheme::max_entropy, options, r_robust, r_standard);
    const std::size_t L = options.block_length;
    const std::size_t k = metrics.size();

    // Block starts are drawn up front so skeletons can be built once per
    // distinct start before the parallel pass.
    std::vector<std::size_t> start_of(options.replications);
    for (std::size_t rep = 0; rep < options.replications; ++rep) {
        SplitMix64 rng(derive_seed(options.seed, rep));
        start_of[rep] = rng.below(starts);
    }
    std::vector<std::optional<std::pair<MebSkeleton, MebSkeleton>>> skeletons(starts);
    for (std::size_t start : start_of) {
        if (!skeletons[start]) {
            skeletons[start].emplace(meb_skeleton(r_robust.subspan(start, L)),
                                     meb_skeleton(r_standard.subspan(start, L)));
        }
    }

    const unsigned workers = std::max(1U, options.threads);
    struct Scratch {
        std::vector<double> u, qa, qb, a, b, buf;
    };
    std::vector<Scratch> scratch(workers);

    // One replicate: sorted draws (reused for the tail metrics) and the
    // series placed back in the original rank order.
    auto replicate = [](const MebSkeleton& sk, const std::vector<double>& u, std::vector<double>& q,
                        std::vector<double>& series) -> const std::vector<double>* {
        if (sk.constant) {
            series = sk.original;
            return nullptr;
        }
        meb_sorted_values(sk, u, q);
        place_by_rank(sk, q, series);
        return &q;
    };

    for_each_replication(options.replications, workers, [&](std::size_t rep, unsigned w) {
        auto& s = scratch[w];
        SplitMix64 rng(derive_seed(options.seed, rep));
        (void)rng.below(starts);  // keep the stream aligned with start_of
        sorted_uniforms(rng, L, s.u);
        const auto& pair = *skeletons[start_of[rep]];
        const auto* sorted_a = replicate(pair.first, s.u, s.qa, s.a);
        const auto* sorted_b = replicate(pair.second, s.u, s.qb, s.b);
        double va[kMetricCount];
        double vb[kMetricCount];
        all_metric_values(s.a, s.buf, sorted_a, va);
        all_metric_values(s.b, s.buf, sorted_b, vb);
        for (std::size_t m = 0; m < k; ++m) {
            const auto idx = static_cast<std::size_t>(metrics[m]);
            results[m].differences[rep] = va[idx] - vb[idx];
        }
    });
    for (auto& res : results) summarize(res);
    return results;
}

BootstrapResult meb_bootstrap(std::span<const double> r_robust, std::span<const double> r_standard,
                              Metric metric, const BootstrapOptions& options) {
    const Metric one[] = {metric};
    return std::move(meb_bootstrap(r_robust, r_standard, one, options).front());
}

BootstrapResult pool(std::span<const BootstrapResult> results) {
    if (results.empty()) throw DataError("pool: no bootstrap results");
    BootstrapResult out;
    const auto& first = results.front();
    out.metric = first.metric;
    out.scheme = first.scheme;
    out.replications = first.replications;
    out.block_length = first.block_length;
    out.differences.assign(first.differences.size(), 0.0);
    double sample = 0.0;
    for (const auto& r : results) {
        if (r.metric != first.metric || r.scheme != first.scheme ||
            r.differences.size() != first.differences.size()) {
            throw DataError("pool: results differ in metric, scheme or replication count");
        }
        sample += r.sample_difference;
        for (std::size_t i = 0; i < r.differences.size(); ++i) out.differences[i] += r.differences[i];
    }
    const double count = static_cast<double>(results.size());
    out.sample_difference = sample / count;
    for (auto& d : out.differences) d /= count;
    summarize(out);
    return out;
}

}  // namespace rhedge::inference
