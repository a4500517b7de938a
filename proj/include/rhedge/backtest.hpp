#pragma once

#include "rhedge/core.hpp"
#include "rhedge/market_data.hpp"
#include "rhedge/robust_hedge.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace rhedge::backtest {

enum class Method { standard, robust };

[[nodiscard]] std::string to_string(Method m);

struct HedgedReturns {
    std::vector<Date> dates;  // return dates
    std::vector<double> r_unhedged;
    std::vector<double> r_hedged;
    std::vector<double> r_net;
    std::vector<double> costs;  // costs[0] includes the opening cost
    std::vector<double> position;
    double bp = 0.0;  // fraction, 5bp = 0.0005
    double opening_cost = 0.0;

    [[nodiscard]] std::size_t size() const { return dates.size(); }
};

/// Ratio set on path date i earns the return dated i. The position is reset
/// every tau observations and held in between; each reset costs |dh| * bp,
/// and the first one costs |h_0| * bp.
[[nodiscard]] HedgedReturns hedged_returns(const market_data::RealizedSeries& r_S,
                                           const market_data::RealizedSeries& r_F,
                                           const robust_hedge::HedgePath& path, Method which,
                                           double bp);

/// Same rule on raw vectors, for callers without dates.
[[nodiscard]] HedgedReturns hedged_returns(std::span<const double> r_S, std::span<const double> r_F,
                                           std::span<const double> h, int tau, double bp);

[[nodiscard]] double sample_variance(std::span<const double> x);

/// 1 - Var(r_h) / Var(r_S).
[[nodiscard]] double hedge_effectiveness(std::span<const double> r_h, std::span<const double> r_S);

/// Variance ratio on the dates with r_S < delta.
[[nodiscard]] double conditional_hedge_effectiveness(std::span<const double> r_h,
                                                     std::span<const double> r_S, double delta);

/// E[r_h | r_S < delta] / E[r_S | r_S < delta].
[[nodiscard]] double tail_return_ratio(std::span<const double> r_h, std::span<const double> r_S,
                                       double delta);

/// Linear-interpolation quantile between order statistics (R type 7).
[[nodiscard]] double quantile_linear(std::span<const double> x, double prob);

/// First quartile.
[[nodiscard]] double quartile_threshold(std::span<const double> r_S);

inline constexpr double kOmegaCap = 100.0;
inline constexpr double kAnnualization = 252.0;

/// A constant series leaves roundoff in its sd; anything this small relative
/// to the mean is treated as zero.
[[nodiscard]] inline bool negligible_sd(double sd, double mean) {
    return sd <= 1e-12 * std::abs(mean);
}

[[nodiscard]] double pnl(std::span<const double> r);
/// mean / sd * sqrt(annualization); throws NumericError on zero sd.
[[nodiscard]] double sharpe(std::span<const double> r, double annualization = kAnnualization);
/// Gains over losses against zero; capped at kOmegaCap when there are no losses.
[[nodiscard]] double omega(std::span<const double> r, bool* capped = nullptr);
/// Largest fall of cumulative P&L (starting from 0) below its running peak.
[[nodiscard]] double max_drawdown(std::span<const double> r);
/// Minus the lower empirical 5% quantile, x_(ceil(0.05 n)).
[[nodiscard]] double value_at_risk(std::span<const double> r, double level = 0.95);
/// Mean of the losses at or beyond value_at_risk.
[[nodiscard]] double expected_shortfall(std::span<const double> r, double level = 0.95);

struct MetricsReport {
    double he = 0.0;
    double he_c = 0.0;
    double he_r = 0.0;
    double pnl = 0.0;
    double sharpe = 0.0;  // NaN for a constant net series
    double omega = 0.0;
    bool omega_capped = false;
    double max_drawdown = 0.0;
    double var95 = 0.0;
    double es95 = 0.0;
    double delta_threshold = 0.0;
    double cost_bp = 0.0;  // fraction
    double total_cost = 0.0;
    double opening_cost = 0.0;
    std::size_t n_obs = 0;
};

inline constexpr std::size_t kMinReportObservations = 30;

/// Effectiveness measures use gross hedged returns; performance and risk
/// measures use returns net of costs.
[[nodiscard]] MetricsReport performance_report(const HedgedReturns& r, double delta,
                                               double annualization = kAnnualization);

}  // namespace rhedge::backtest
