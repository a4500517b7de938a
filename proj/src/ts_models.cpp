#include "rhedge/ts_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/core.h>

namespace rhedge::ts_models {

namespace {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd std_errors;
    double rss = 0.0;
    double sigma2 = 0.0;
};

// Least squares with a rank check; sigma^2 uses n - k degrees of freedom.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* what) {
    const auto n = X.rows();
    const auto k = X.cols();
    if (n <= k) {
        throw DataError(fmt::format("{}: {} observations for {} parameters", what, n, k));
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        throw NumericError(fmt::format("{}: degenerate regression (collinear or constant regressors)",
                                       what));
    }
    OlsFit fit;
    fit.beta = qr.solve(y);
    const Eigen::VectorXd resid = y - X * fit.beta;
    fit.rss = resid.squaredNorm();
    fit.sigma2 = fit.rss / static_cast<double>(n - k);
    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    fit.std_errors = (xtx_inv.diagonal() * fit.sigma2).cwiseMax(0.0).cwiseSqrt();
    return fit;
}

bool is_stationary(std::span<const double> coeffs) {
    const auto p = static_cast<Eigen::Index>(coeffs.size());
    if (p == 0) return true;
    if (p == 1) return std::abs(coeffs[0]) < 1.0;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index k = 0; k < p; ++k) companion(0, k) = coeffs[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 1; k < p; ++k) companion(k, k - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) return false;
    return solver.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
}

std::vector<double> fit_scale_values(std::span<const double> values, Transform transform) {
    std::vector<double> y(values.begin(), values.end());
    if (transform == Transform::log) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!(y[i] > 0.0)) {
                throw DataError(fmt::format(
                    "log transform needs positive values; value {} at position {}", y[i], i));
            }
            y[i] = std::log(y[i]);
        }
    }
    return y;
}

double to_level(Transform transform, double v) { return transform == Transform::log ? std::exp(v) : v; }

// Welford running mean and variance.
struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    [[nodiscard]] double variance() const { return m2 / static_cast<double>(n - 1); }
};

// Runs the recursion from every in-sample origin and fills the two error
// tables. Origins t use y[0..t]; the last usable origin leaves one value ahead.
void fill_in_sample_tables(ArModel& model, std::span<const double> y, int tau_max) {
    const int p = model.order();
    const auto n = static_cast<int>(y.size());
    std::vector<Moments> step(static_cast<std::size_t>(tau_max));
    std::vector<double> fc;

    for (int t = p - 1; t + 1 < n; ++t) {
        const int horizon = std::min(tau_max, n - 1 - t);
        fc = forecast_fit_scale(model, y.subspan(0, static_cast<std::size_t>(t + 1)), horizon);
        for (int j = 1; j <= horizon; ++j) {
            step[j - 1].add(y[static_cast<std::size_t>(t + j)] - fc[static_cast<std::size_t>(j - 1)]);
        }
    }
    model.horizon_error_variance.clear();
    for (const auto& m : step) {
        if (m.n < 2) break;
        model.horizon_error_variance.push_back(m.variance());
    }
    // Population j-step variances of a stationary process never fall with j;
    // sampling noise can, so the table is made monotone.
    if (model.stationary) {
        for (std::size_t j = 1; j < model.horizon_error_variance.size(); ++j) {
            model.horizon_error_variance[j] =
                std::max(model.horizon_error_variance[j], model.horizon_error_variance[j - 1]);
        }
    }

    // Level-scale integrated errors; log fits use the bias-corrected points.
    const int usable = static_cast<int>(model.horizon_error_variance.size());
    std::vector<Moments> integrated(static_cast<std::size_t>(usable));
    for (int t = p - 1; t + 1 < n; ++t) {
        const int horizon = std::min(usable, n - 1 - t);
        fc = forecast_fit_scale(model, y.subspan(0, static_cast<std::size_t>(t + 1)), horizon);
        double actual = 0.0;
        double predicted = 0.0;
        for (int j = 1; j <= horizon; ++j) {
            actual += to_level(model.transform, y[static_cast<std::size_t>(t + j)]);
            predicted += model.transform == Transform::log
                             ? log_bias_correct(fc[j - 1], model.horizon_error_variance[j - 1])
                             : fc[j - 1];
            integrated[j - 1].add(actual - predicted);
        }
    }
    model.integrated_error_sd.clear();
    for (const auto& m : integrated) {
        if (m.n < 30) break;
        model.integrated_error_sd.push_back(std::sqrt(m.variance()));
    }
}

void check_length(std::size_t n, int p, const char* what) {
    if (n < static_cast<std::size_t>(p) + 20) {
        throw DataError(fmt::format("{}: insufficient data ({} observations, need at least {})",
                                    what, n, p + 20));
    }
}

}  // namespace

double ArModel::equilibrium() const {
    const double s = std::accumulate(coeffs.begin(), coeffs.end(), 0.0);
    return intercept / (1.0 - s);
}

ArModel make_ar(double intercept, std::vector<double> coeffs, double noise_variance,
                Transform transform) {
    if (coeffs.empty()) throw ConfigError("AR model needs at least one coefficient");
    if (!(noise_variance >= 0.0)) throw ConfigError("noise variance must be non-negative");
    ArModel m;
    m.transform = transform;
    m.intercept = intercept;
    m.coeffs = std::move(coeffs);
    m.noise_variance = noise_variance;
    m.stationary = is_stationary(m.coeffs);
    return m;
}

ArModel fit_ar(std::span<const double> values, int p, Transform transform,
               const FitOptions& options) {
    if (p < 1) throw ConfigError("AR order must be at least 1");
    check_length(values.size(), p, "fit_ar");
    const auto y = fit_scale_values(values, transform);
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::Index rows = n - p;

    Eigen::MatrixXd X(rows, p + 1);
    Eigen::VectorXd target(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = r + p;
        X(r, 0) = 1.0;
        for (int k = 1; k <= p; ++k) X(r, k) = y[static_cast<std::size_t>(t - k)];
        target(r) = y[static_cast<std::size_t>(t)];
    }
    const auto fit = ols(X, target, "fit_ar");

    ArModel m;
    m.kind = ModelKind::ar;
    m.transform = transform;
    m.intercept = fit.beta(0);
    m.coeffs.assign(fit.beta.data() + 1, fit.beta.data() + p + 1);
    m.noise_variance = fit.sigma2;
    m.std_errors.assign(fit.std_errors.data(), fit.std_errors.data() + fit.std_errors.size());
    m.n_obs = y.size();
    m.stationary = is_stationary(m.coeffs);
    fill_in_sample_tables(m, y, options.tau_max);
    return m;
}

ArModel fit_ar(const market_data::RealizedSeries& series, int p, Transform transform,
               const FitOptions& options) {
    return fit_ar(std::span{series.values}, p, transform, options);
}

ArModel fit_har(std::span<const double> values, Transform transform, const FitOptions& options) {
    constexpr int p = 5;
    check_length(values.size(), p, "fit_har");
    const auto y = fit_scale_values(values, transform);
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::Index rows = n - p;

    Eigen::MatrixXd X(rows, 3);
    Eigen::VectorXd target(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto t = static_cast<std::size_t>(r + p);
        X(r, 0) = 1.0;
        X(r, 1) = y[t - 1];
        X(r, 2) = (y[t - 2] + y[t - 3] + y[t - 4] + y[t - 5]) / 4.0;
        target(r) = y[t];
    }
    const auto fit = ols(X, target, "fit_har");

    ArModel m;
    m.kind = ModelKind::har;
    m.transform = transform;
    m.intercept = fit.beta(0);
    const double tied = fit.beta(2) / 4.0;
    m.coeffs = {fit.beta(1), tied, tied, tied, tied};
    m.noise_variance = fit.sigma2;
    m.std_errors.assign(fit.std_errors.data(), fit.std_errors.data() + fit.std_errors.size());
    m.n_obs = y.size();
    m.stationary = is_stationary(m.coeffs);
    fill_in_sample_tables(m, y, options.tau_max);
    return m;
}

ArModel fit_har(const market_data::RealizedSeries& series, Transform transform,
                const FitOptions& options) {
    return fit_har(std::span{series.values}, transform, options);
}

std::vector<double> to_fit_scale(const ArModel& model, std::span<const double> level_values) {
    return fit_scale_values(level_values, model.transform);
}

std::vector<double> to_fit_scale(Transform transform, std::span<const double> level_values) {
    return fit_scale_values(level_values, transform);
}

std::vector<double> forecast_fit_scale(const ArModel& model, std::span<const double> history,
                                       int tau) {
    const auto p = static_cast<std::size_t>(model.order());
    if (history.size() < p) {
        throw DataError(fmt::format("forecast needs {} history values, got {}", p, history.size()));
    }
    // window holds the last p values followed by the forecasts so far.
    std::vector<double> window(history.end() - static_cast<std::ptrdiff_t>(p), history.end());
    window.reserve(p + static_cast<std::size_t>(std::max(tau, 0)));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(tau, 0)));
    for (int j = 0; j < tau; ++j) {
        double next = model.intercept;
        const std::size_t last = window.size() - 1;
        for (std::size_t k = 0; k < p; ++k) next += model.coeffs[k] * window[last - k];
        window.push_back(next);
        out.push_back(next);
    }
    return out;
}

double log_bias_correct(double log_point, double error_variance) {
    return std::exp(log_point + 0.5 * error_variance);
}

ForecastPath forecast_path(const ArModel& model, std::span<const double> history, int tau,
                           ThetaMode mode, std::optional<Date> origin) {
    if (tau < 1) throw ConfigError("forecast horizon must be at least 1");
    if (model.transform == Transform::log &&
        static_cast<std::size_t>(tau) > model.horizon_error_variance.size()) {
        throw ConfigError(fmt::format(
            "horizon {} exceeds the {} steps with in-sample error variances", tau,
            model.horizon_error_variance.size()));
    }
    ForecastPath path;
    path.origin_date = origin;
    path.tau = tau;
    const auto fc = forecast_fit_scale(model, history, tau);
    path.point.reserve(fc.size());
    for (int j = 0; j < tau; ++j) {
        path.point.push_back(model.transform == Transform::log
                                 ? log_bias_correct(fc[j], model.horizon_error_variance[j])
                                 : fc[j]);
    }
    path.integrated_point = std::accumulate(path.point.begin(), path.point.end(), 0.0);
    const auto theta = uncertainty_theta(model, tau, mode);
    path.theta = theta.value;
    path.theta_mode = mode;
    path.theta_scale = theta.scale;
    return path;
}

std::vector<double> ma_coefficients(const ArModel& model, int n) {
    if (n < 0) throw ConfigError("number of MA coefficients must be non-negative");
    const int p = model.order();
    std::vector<double> psi(static_cast<std::size_t>(n) + 1, 0.0);
    psi[0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        double s = 0.0;
        for (int k = 1; k <= std::min(i, p); ++k) s += model.coeffs[k - 1] * psi[i - k];
        psi[i] = s;
    }
    return psi;
}

double step_error_variance(const ArModel& model, int j) {
    if (j < 1) throw ConfigError("step must be at least 1");
    const auto psi = ma_coefficients(model, j - 1);
    double s = 0.0;
    for (double v : psi) s += v * v;
    return s * model.noise_variance;
}

double integrated_error_variance(const ArModel& model, int tau) {
    if (tau < 1) throw ConfigError("horizon must be at least 1");
    // Innovation eta_{t+m} enters e_tau with weight sum_{i=0}^{tau-m} psi_i.
    const auto psi = ma_coefficients(model, tau - 1);
    double total = 0.0;
    double cumulative = 0.0;
    for (int m = tau; m >= 1; --m) {
        cumulative += psi[static_cast<std::size_t>(tau - m)];
        total += cumulative * cumulative;
    }
    return total * model.noise_variance;
}

std::vector<double> in_sample_integrated_errors(const ArModel& model,
                                                std::span<const double> values, int tau) {
    if (tau < 1) throw ConfigError("horizon must be at least 1");
    if (model.transform == Transform::log &&
        static_cast<std::size_t>(tau) > model.horizon_error_variance.size()) {
        throw ConfigError("horizon exceeds the model's in-sample error variances");
    }
    const auto y = fit_scale_values(values, model.transform);
    const int p = model.order();
    const auto n = static_cast<int>(y.size());
    std::vector<double> errors;
    for (int t = p - 1; t + tau < n; ++t) {
        const auto fc = forecast_fit_scale(model, std::span{y}.subspan(0, static_cast<std::size_t>(t + 1)), tau);
        double actual = 0.0;
        double predicted = 0.0;
        for (int j = 1; j <= tau; ++j) {
            actual += values[static_cast<std::size_t>(t + j)];
            predicted += model.transform == Transform::log
                             ? log_bias_correct(fc[j - 1], model.horizon_error_variance[j - 1])
                             : fc[j - 1];
        }
        errors.push_back(actual - predicted);
    }
    return errors;
}

Theta uncertainty_theta(const ArModel& model, int tau, ThetaMode mode,
                        std::optional<std::span<const double>> in_sample_errors) {
    if (tau < 1) throw ConfigError("horizon must be at least 1");
    if (mode == ThetaMode::closed_form) {
        return {std::sqrt(integrated_error_variance(model, tau)),
                model.transform == Transform::log ? ThetaScale::log : ThetaScale::level};
    }
    if (in_sample_errors) {
        const auto e = *in_sample_errors;
        if (e.size() < 30) {
            throw DataError(fmt::format(
                "empirical uncertainty needs at least 30 in-sample errors, got {}", e.size()));
        }
        const double n = static_cast<double>(e.size());
        const double mean = std::accumulate(e.begin(), e.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : e) ss += (v - mean) * (v - mean);
        return {std::sqrt(ss / (n - 1.0)), ThetaScale::level};
    }
    if (static_cast<std::size_t>(tau) > model.integrated_error_sd.size()) {
        throw DataError(fmt::format(
            "no empirical uncertainty for horizon {} (fit provides {} horizons with >= 30 errors)",
            tau, model.integrated_error_sd.size()));
    }
    return {model.integrated_error_sd[static_cast<std::size_t>(tau - 1)], ThetaScale::level};
}

double impulse_response_delta(const ArModel& model_sf, const ArModel& model_f, int h) {
    if (h < 0) throw ConfigError("impulse horizon must be non-negative");
    if (!model_sf.stationary || !model_f.stationary) {
        throw NumericError("impulse response needs stationary models");
    }
    const double sf_inf = model_sf.equilibrium();
    const double f_inf = model_f.equilibrium();
    const double psi_sf = ma_coefficients(model_sf, h).back();
    const double psi_f = ma_coefficients(model_f, h).back();
    const double denom = f_inf + psi_f;
    if (denom == 0.0 || f_inf == 0.0) {
        throw NumericError("impulse response: zero variance denominator");
    }
    return (sf_inf + psi_sf) / denom - sf_inf / f_inf;
}

AdfResult adf_test(std::span<const double> values, int lag_order) {
    if (lag_order < 0) throw ConfigError("ADF lag order must be non-negative");
    check_length(values.size(), lag_order, "adf_test");
    const auto n = static_cast<Eigen::Index>(values.size());
    const Eigen::Index first = lag_order + 1;
    const Eigen::Index rows = n - first;
    Eigen::MatrixXd X(rows, 2 + lag_order);
    Eigen::VectorXd dy(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto t = static_cast<std::size_t>(r + first);
        dy(r) = values[t] - values[t - 1];
        X(r, 0) = 1.0;
        X(r, 1) = values[t - 1];
        for (int k = 1; k <= lag_order; ++k) X(r, 1 + k) = values[t - k] - values[t - k - 1];
    }
    const auto fit = ols(X, dy, "adf_test");
    if (!(fit.std_errors(1) > 0.0)) {
        throw NumericError("adf_test: zero standard error on the lagged level");
    }
    AdfResult result;
    result.statistic = fit.beta(1) / fit.std_errors(1);
    result.critical_value = kAdfCritical5;
    result.reject_unit_root = result.statistic < kAdfCritical5;
    result.n_obs = static_cast<std::size_t>(rows);
    return result;
}

AdfResult adf_test(const market_data::RealizedSeries& series, int lag_order) {
    return adf_test(std::span{series.values}, lag_order);
}

double rmse(std::span<const double> forecasts, std::span<const double> realized) {
    if (forecasts.size() != realized.size()) {
        throw DataError("rmse: forecasts and realized values are not aligned");
    }
    if (forecasts.empty()) throw DataError("rmse: empty overlap");
    double s = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double e = forecasts[i] - realized[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(forecasts.size()));
}

RmseRatio rmse_ratio(std::span<const double> forecasts_a, std::span<const double> forecasts_b,
                     std::span<const double> forecasts_base, std::span<const double> realized) {
    const double base = rmse(forecasts_base, realized);
    if (base == 0.0) throw NumericError("rmse_ratio: base model has zero RMSE");
    return {rmse(forecasts_a, realized) / base, rmse(forecasts_b, realized) / base};
}

std::string to_string(Transform t) { return t == Transform::log ? "log" : "level"; }
std::string to_string(ModelKind k) { return k == ModelKind::har ? "har" : "ar"; }
std::string to_string(ThetaMode m) {
    return m == ThetaMode::closed_form ? "closed_form" : "empirical";
}

Transform parse_transform(std::string_view s) {
    if (s == "log") return Transform::log;
    if (s == "level") return Transform::level;
    throw ConfigError(fmt::format("unknown transform '{}'", s));
}

ThetaMode parse_theta_mode(std::string_view s) {
    if (s == "closed_form") return ThetaMode::closed_form;
    if (s == "empirical") return ThetaMode::empirical;
    throw ConfigError(fmt::format("unknown theta mode '{}'", s));
}

}  // namespace rhedge::ts_models
