#pragma once

#include "rhedge/core.hpp"
#include "rhedge/market_data.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rhedge::ts_models {

enum class Transform { level, log };
enum class ModelKind { ar, har };
enum class ThetaMode { closed_form, empirical };
enum class ThetaScale { level, log };

/// Fitted autoregression y_t = intercept + sum_k coeffs[k-1] y_{t-k} + eta_t on
/// the fit scale (log values for Transform::log). HAR fits are stored in the
/// same form with tied coefficients, so every downstream routine applies.
struct ArModel {
    ModelKind kind = ModelKind::ar;
    Transform transform = Transform::level;
    double intercept = 0.0;
    std::vector<double> coeffs;
    double noise_variance = 0.0;
    /// In-sample j-step forecast-error variances on the fit scale, j = 1..tau_max.
    std::vector<double> horizon_error_variance;
    /// In-sample standard deviation of the tau-step integrated forecast error on
    /// the level scale (bias-corrected forecasts for log fits), tau = 1..tau_max.
    std::vector<double> integrated_error_sd;
    /// Standard errors of the regression parameters: (intercept, coeffs...) for
    /// AR, (intercept, daily, averaged) for HAR.
    std::vector<double> std_errors;
    std::size_t n_obs = 0;
    bool stationary = false;

    [[nodiscard]] int order() const { return static_cast<int>(coeffs.size()); }
    /// Unconditional mean intercept / (1 - sum coeffs) on the fit scale.
    [[nodiscard]] double equilibrium() const;
};

struct FitOptions {
    int tau_max = 10;
};

/// Builds a model from known parameters; stationarity is evaluated, the
/// in-sample error tables are left empty.
[[nodiscard]] ArModel make_ar(double intercept, std::vector<double> coeffs, double noise_variance,
                              Transform transform = Transform::level);

/// Conditional Gaussian ML (least squares on the p-lag regression).
[[nodiscard]] ArModel fit_ar(const market_data::RealizedSeries& series, int p, Transform transform,
                             const FitOptions& options = {});
[[nodiscard]] ArModel fit_ar(std::span<const double> values, int p, Transform transform,
                             const FitOptions& options = {});

/// y_{t+1} = c + b_d y_t + b_w * mean(y_{t-1..t-4}), stored as a tied AR(5).
[[nodiscard]] ArModel fit_har(const market_data::RealizedSeries& series, Transform transform,
                              const FitOptions& options = {});
[[nodiscard]] ArModel fit_har(std::span<const double> values, Transform transform,
                              const FitOptions& options = {});

/// Maps level values to the model's fit scale.
[[nodiscard]] std::vector<double> to_fit_scale(const ArModel& model,
                                               std::span<const double> level_values);
[[nodiscard]] std::vector<double> to_fit_scale(Transform transform,
                                               std::span<const double> level_values);

struct ForecastPath {
    std::optional<Date> origin_date;
    int tau = 1;
    std::vector<double> point;  // level scale, j = 1..tau
    double integrated_point = 0.0;
    double theta = 0.0;
    ThetaMode theta_mode = ThetaMode::empirical;
    ThetaScale theta_scale = ThetaScale::level;
};

/// Recursive plug-in forecasts from `history` (fit scale, most recent last).
/// Log fits are mapped back with log_bias_correct.
[[nodiscard]] ForecastPath forecast_path(const ArModel& model, std::span<const double> history,
                                         int tau, ThetaMode mode = ThetaMode::empirical,
                                         std::optional<Date> origin = std::nullopt);

/// Fit-scale point forecasts only, j = 1..tau.
[[nodiscard]] std::vector<double> forecast_fit_scale(const ArModel& model,
                                                     std::span<const double> history, int tau);

[[nodiscard]] double log_bias_correct(double log_point, double error_variance);

/// psi_0..psi_n of the MA(inf) representation.
[[nodiscard]] std::vector<double> ma_coefficients(const ArModel& model, int n);

/// Var(y_{t+j} - E_t y_{t+j}) = sigma^2 * sum_{i<j} psi_i^2.
[[nodiscard]] double step_error_variance(const ArModel& model, int j);

/// Var(sum_{j<=tau} (y_{t+j} - E_t y_{t+j})) under orthonormal innovations.
[[nodiscard]] double integrated_error_variance(const ArModel& model, int tau);

/// Level-scale integrated forecast errors over every in-sample origin.
/// `values` are on the level scale.
[[nodiscard]] std::vector<double> in_sample_integrated_errors(const ArModel& model,
                                                              std::span<const double> values,
                                                              int tau);

struct Theta {
    double value = 0.0;
    ThetaScale scale = ThetaScale::level;
};

/// closed_form: sqrt(integrated_error_variance), on the fit scale.
/// empirical: sample sd of `in_sample_errors` when given, else the stored
/// table from the fit.
[[nodiscard]] Theta uncertainty_theta(const ArModel& model, int tau, ThetaMode mode,
                                      std::optional<std::span<const double>> in_sample_errors =
                                          std::nullopt);

/// Deviation of the hedge ratio from its equilibrium h steps after a unit
/// shock to both the covariance and the variance process.
[[nodiscard]] double impulse_response_delta(const ArModel& model_sf, const ArModel& model_f,
                                            int h);

struct AdfResult {
    double statistic = 0.0;
    bool reject_unit_root = false;
    double critical_value = -2.86;
    std::size_t n_obs = 0;
};

inline constexpr double kAdfCritical5 = -2.86;

/// Constant-only augmented Dickey-Fuller regression.
[[nodiscard]] AdfResult adf_test(std::span<const double> values, int lag_order);
[[nodiscard]] AdfResult adf_test(const market_data::RealizedSeries& series, int lag_order);

[[nodiscard]] double rmse(std::span<const double> forecasts, std::span<const double> realized);

struct RmseRatio {
    double a = 0.0;
    double b = 0.0;
};

/// (rmse(a)/rmse(base), rmse(b)/rmse(base)).
[[nodiscard]] RmseRatio rmse_ratio(std::span<const double> forecasts_a,
                                   std::span<const double> forecasts_b,
                                   std::span<const double> forecasts_base,
                                   std::span<const double> realized);

[[nodiscard]] std::string to_string(Transform t);
[[nodiscard]] std::string to_string(ModelKind k);
[[nodiscard]] std::string to_string(ThetaMode m);
[[nodiscard]] Transform parse_transform(std::string_view s);
[[nodiscard]] ThetaMode parse_theta_mode(std::string_view s);

}  // namespace rhedge::ts_models
