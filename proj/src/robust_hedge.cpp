#include "rhedge/robust_hedge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

namespace rhedge::robust_hedge {

void UncertaintyBox::validate() const {
    if (!(sigma_S_sq > 0.0) || !(sigma_F_sq > 0.0)) {
        throw ConfigError("uncertainty box: variances must be positive");
    }
    if (!(theta_S >= 0.0) || !(theta_F >= 0.0)) {
        throw ConfigError("uncertainty box: half-widths must be non-negative");
    }
    if (!std::isfinite(sigma_SF)) throw ConfigError("uncertainty box: covariance is not finite");
}

double portfolio_variance(double h, double var_S, double var_F, double cov_SF) {
    return var_S + h * h * var_F - 2.0 * h * cov_SF;
}

double worst_case_variance(double h, const UncertaintyBox& box) {
    return portfolio_variance(h, box.sigma_S_sq + box.theta_S, box.sigma_F_sq + box.theta_F,
                              box.sigma_SF);
}

double robust_hedge_ratio(const UncertaintyBox& box) {
    const double denom = box.sigma_F_sq + box.theta_F;
    if (!(denom > 0.0)) {
        throw NumericError(fmt::format("robust hedge ratio: non-positive denominator {}", denom));
    }
    return box.sigma_SF / denom;
}

std::array<std::array<double, 2>, 4> box_corners(const UncertaintyBox& box) {
    const double s_lo = box.sigma_S_sq - box.theta_S;
    const double s_hi = box.sigma_S_sq + box.theta_S;
    const double f_lo = box.sigma_F_sq - box.theta_F;
    const double f_hi = box.sigma_F_sq + box.theta_F;
    return {{{s_lo, f_lo}, {s_lo, f_hi}, {s_hi, f_lo}, {s_hi, f_hi}}};
}

double grid_minmax_oracle(const UncertaintyBox& box, double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("grid oracle: invalid grid");
    const auto corners = box_corners(box);
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    double best_h = lo;
    double best_value = std::numeric_limits<double>::infinity();
    for (long long i = 0; i <= n; ++i) {
        const double h = lo + static_cast<double>(i) * step;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& c : corners) {
            worst = std::max(worst, portfolio_variance(h, c[0], c[1], box.sigma_SF));
        }
        if (worst < best_value) {
            best_value = worst;
            best_h = h;
        }
    }
    return best_h;
}

HedgePath hedge_path(std::span<const ts_models::ForecastPath> forecasts_F,
                     std::span<const ts_models::ForecastPath> forecasts_SF, int tau, double floor,
                     Warnings* warnings) {
    if (forecasts_F.size() != forecasts_SF.size()) {
        throw DataError(fmt::format("hedge path: {} variance forecasts vs {} covariance forecasts",
                                    forecasts_F.size(), forecasts_SF.size()));
    }
    HedgePath path;
    path.tau = tau;
    const std::size_t n = forecasts_F.size();
    path.dates.reserve(n);
    path.h_standard.reserve(n);
    path.h_robust.reserve(n);
    path.theta_used.reserve(n);
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = forecasts_F[i];
        const auto& sf = forecasts_SF[i];
        if (f.origin_date != sf.origin_date) {
            throw DataError(fmt::format("hedge path: forecast origins differ at position {}", i));
        }
        if (f.tau != tau || sf.tau != tau) {
            throw DataError(fmt::format("hedge path: forecast horizon differs from {} at position {}",
                                        tau, i));
        }
        if (!(f.theta >= 0.0)) throw NumericError("hedge path: negative uncertainty");
        double var_F = f.integrated_point;
        if (!(var_F >= floor)) {
            var_F = floor;
            ++clamped;
        }
        const double cov = sf.integrated_point;
        path.dates.push_back(f.origin_date.value_or(Date{}));
        path.h_standard.push_back(cov / var_F);
        path.h_robust.push_back(cov / (var_F + f.theta));
        path.theta_used.push_back(f.theta);
    }
    if (clamped > 0) {
        warn(warnings, fmt::format("hedge path: {} variance forecasts clamped to {}", clamped, floor));
    }
    return path;
}

}  // namespace rhedge::robust_hedge
