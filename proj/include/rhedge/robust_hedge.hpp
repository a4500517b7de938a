#pragma once

#include "rhedge/core.hpp"
#include "rhedge/ts_models.hpp"

#include <array>
#include <span>
#include <vector>

namespace rhedge::robust_hedge {

/// Point estimates plus half-widths of the box around each variance.
struct UncertaintyBox {
    double sigma_S_sq = 1.0;
    double sigma_F_sq = 1.0;
    double sigma_SF = 0.0;
    double theta_S = 0.0;
    double theta_F = 0.0;

    /// Throws ConfigError on a non-positive variance or negative half-width.
    void validate() const;
};

/// (sigma_S^2 + theta_S) + h^2 (sigma_F^2 + theta_F) - 2 h sigma_SF.
[[nodiscard]] double worst_case_variance(double h, const UncertaintyBox& box);

/// Portfolio variance for a given (S, F) variance pair inside the box.
[[nodiscard]] double portfolio_variance(double h, double var_S, double var_F, double cov_SF);

/// sigma_SF / (sigma_F^2 + theta_F).
[[nodiscard]] double robust_hedge_ratio(const UncertaintyBox& box);

/// The four (var_S, var_F) corners of the box.
[[nodiscard]] std::array<std::array<double, 2>, 4> box_corners(const UncertaintyBox& box);

/// Brute force: argmin over the grid lo, lo+step, ..., hi of the max over corners.
[[nodiscard]] double grid_minmax_oracle(const UncertaintyBox& box, double lo, double hi,
                                        double step);

struct HedgePath {
    std::vector<Date> dates;  // forecast origin dates
    std::vector<double> h_standard;
    std::vector<double> h_robust;
    std::vector<double> theta_used;
    int tau = 1;

    [[nodiscard]] std::size_t size() const { return dates.size(); }
};

inline constexpr double kVarianceFloor = 1e-12;

/// Ratios from integrated forecasts; theta comes from each F forecast.
/// Integrated variance forecasts under `floor` are clamped with a warning.
[[nodiscard]] HedgePath hedge_path(std::span<const ts_models::ForecastPath> forecasts_F,
                                   std::span<const ts_models::ForecastPath> forecasts_SF, int tau,
                                   double floor = kVarianceFloor, Warnings* warnings = nullptr);

}  // namespace rhedge::robust_hedge
