#include "rhedge/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

namespace rhedge::backtest {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) {
        throw DataError(fmt::format("{}: series lengths differ ({} vs {})", what, a.size(), b.size()));
    }
}

double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<double> sorted_copy(std::span<const double> x) {
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    return s;
}

double lower_quantile(const std::vector<double>& sorted, double prob) {
    auto k = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(sorted.size()) - 1e-12));
    k = std::clamp<std::size_t>(k, 1, sorted.size());
    return sorted[k - 1];
}

}  // namespace

std::string to_string(Method m) { return m == Method::robust ? "robust" : "standard"; }

HedgedReturns hedged_returns(std::span<const double> r_S, std::span<const double> r_F,
                             std::span<const double> h, int tau, double bp) {
    require_same_length(r_S, r_F, "hedged_returns");
    require_same_length(r_S, h, "hedged_returns");
    if (tau < 1) throw ConfigError("hedged_returns: tau must be at least 1");
    if (!(bp >= 0.0)) throw ConfigError("hedged_returns: cost rate must be non-negative");

    HedgedReturns out;
    const std::size_t n = r_S.size();
    out.bp = bp;
    out.r_unhedged.assign(r_S.begin(), r_S.end());
    out.r_hedged.resize(n);
    out.r_net.resize(n);
    out.costs.assign(n, 0.0);
    out.position.resize(n);
    out.dates.resize(n);

    double held = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % static_cast<std::size_t>(tau) == 0) {
            out.costs[i] = std::abs(h[i] - held) * bp;
            if (i == 0) out.opening_cost = out.costs[i];
            held = h[i];
        }
        out.position[i] = held;
        out.r_hedged[i] = r_S[i] - held * r_F[i];
        out.r_net[i] = out.r_hedged[i] - out.costs[i];
    }
    return out;
}

HedgedReturns hedged_returns(const market_data::RealizedSeries& r_S,
                             const market_data::RealizedSeries& r_F,
                             const robust_hedge::HedgePath& path, Method which, double bp) {
    if (r_S.dates != r_F.dates) {
        throw DataError(fmt::format("hedged_returns: {} and {} are not date-aligned", r_S.label,
                                    r_F.label));
    }
    if (r_S.size() != path.size()) {
        throw DataError(fmt::format("hedged_returns: {} returns vs {} hedge ratios", r_S.size(),
                                    path.size()));
    }
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (!(r_S.dates[i] > path.dates[i])) {
            throw DataError(fmt::format(
                "hedged_returns: return dated {} does not follow hedge origin {}",
                format_date(r_S.dates[i]), format_date(path.dates[i])));
        }
    }
    const auto& h = which == Method::robust ? path.h_robust : path.h_standard;
    auto out = hedged_returns(r_S.values, r_F.values, h, path.tau, bp);
    out.dates = r_S.dates;
    return out;
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) throw DataError("variance needs at least 2 observations");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double hedge_effectiveness(std::span<const double> r_h, std::span<const double> r_S) {
    require_same_length(r_h, r_S, "hedge_effectiveness");
    const double var_s = sample_variance(r_S);
    if (var_s == 0.0) throw NumericError("hedge_effectiveness: zero unhedged variance");
    return 1.0 - sample_variance(r_h) / var_s;
}

double conditional_hedge_effectiveness(std::span<const double> r_h, std::span<const double> r_S,
                                       double delta) {
    require_same_length(r_h, r_S, "conditional_hedge_effectiveness");
    std::vector<double> h_sub;
    std::vector<double> s_sub;
    for (std::size_t i = 0; i < r_S.size(); ++i) {
        if (r_S[i] < delta) {
            h_sub.push_back(r_h[i]);
            s_sub.push_back(r_S[i]);
        }
    }
    if (s_sub.size() < 2) {
        throw DataError(fmt::format(
            "conditional_hedge_effectiveness: {} dates below threshold {}, need 2", s_sub.size(),
            delta));
    }
    return hedge_effectiveness(h_sub, s_sub);
}

double tail_return_ratio(std::span<const double> r_h, std::span<const double> r_S, double delta) {
    require_same_length(r_h, r_S, "tail_return_ratio");
    double sum_h = 0.0;
    double sum_s = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < r_S.size(); ++i) {
        if (r_S[i] < delta) {
            sum_h += r_h[i];
            sum_s += r_S[i];
            ++count;
        }
    }
    if (count == 0) throw DataError(fmt::format("tail_return_ratio: no dates below {}", delta));
    if (sum_s == 0.0) throw NumericError("tail_return_ratio: zero conditional mean");
    // Counts cancel in the ratio of conditional means.
    return sum_h / sum_s;
}

double quantile_linear(std::span<const double> x, double prob) {
    if (x.empty()) throw DataError("quantile of an empty sample");
    const auto s = sorted_copy(x);
    const double pos = prob * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return s[lo] + frac * (s[hi] - s[lo]);
}

double quartile_threshold(std::span<const double> r_S) { return quantile_linear(r_S, 0.25); }

double pnl(std::span<const double> r) { return std::accumulate(r.begin(), r.end(), 0.0); }

double sharpe(std::span<const double> r, double annualization) {
    const double sd = std::sqrt(sample_variance(r));
    const double m = mean(r);
    if (negligible_sd(sd, m)) throw NumericError("sharpe: zero return standard deviation");
    return m / sd * std::sqrt(annualization);
}

double omega(std::span<const double> r, bool* capped) {
    double gains = 0.0;
    double losses = 0.0;
    for (double v : r) {
        if (v > 0.0) gains += v;
        else losses -= v;
    }
    const bool cap = losses == 0.0;
    if (capped != nullptr) *capped = cap;
    return cap ? kOmegaCap : gains / losses;
}

double max_drawdown(std::span<const double> r) {
    double cumulative = 0.0;
    double peak = 0.0;
    double worst = 0.0;
    for (double v : r) {
        cumulative += v;
        peak = std::max(peak, cumulative);
        worst = std::max(worst, peak - cumulative);
    }
    return worst;
}

double value_at_risk(std::span<const double> r, double level) {
    if (r.empty()) throw DataError("value_at_risk of an empty sample");
    return -lower_quantile(sorted_copy(r), 1.0 - level);
}

double expected_shortfall(std::span<const double> r, double level) {
    if (r.empty()) throw DataError("expected_shortfall of an empty sample");
    const auto s = sorted_copy(r);
    const double var = -lower_quantile(s, 1.0 - level);
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : s) {
        if (-v < var) break;
        sum += -v;
        ++count;
    }
    return sum / static_cast<double>(count);
}

MetricsReport performance_report(const HedgedReturns& r, double delta, double annualization) {
    if (r.r_net.size() < kMinReportObservations) {
        throw DataError(fmt::format("performance_report: {} observations, need {}", r.r_net.size(),
                                    kMinReportObservations));
    }
    MetricsReport m;
    m.n_obs = r.r_net.size();
    m.delta_threshold = delta;
    m.cost_bp = r.bp;
    m.he = hedge_effectiveness(r.r_hedged, r.r_unhedged);
    m.he_c = conditional_hedge_effectiveness(r.r_hedged, r.r_unhedged, delta);
    m.he_r = tail_return_ratio(r.r_hedged, r.r_unhedged, delta);
    m.pnl = pnl(r.r_net);
    // A constant net series (a perfect hedge without costs) has no Sharpe ratio.
    try {
        m.sharpe = sharpe(r.r_net, annualization);
    } catch (const NumericError&) {
        m.sharpe = std::numeric_limits<double>::quiet_NaN();
    }
    m.omega = omega(r.r_net, &m.omega_capped);
    m.max_drawdown = max_drawdown(r.r_net);
    m.var95 = value_at_risk(r.r_net);
    m.es95 = expected_shortfall(r.r_net);
    m.total_cost = std::accumulate(r.costs.begin(), r.costs.end(), 0.0);
    m.opening_cost = r.opening_cost;
    return m;
}

}  // namespace rhedge::backtest
