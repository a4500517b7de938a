#include "rhedge/backtest.hpp"
#include "rhedge/inference.hpp"
#include "rhedge/io.hpp"
#include "rhedge/market_data.hpp"
#include "rhedge/pipeline.hpp"
#include "rhedge/robust_hedge.hpp"
#include "rhedge/synthetic.hpp"
#include "rhedge/ts_models.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace rhedge;

namespace {

using Vec = std::vector<double>;

py::dict report_dict(const backtest::MetricsReport& r) {
    py::dict d;
    d["he"] = r.he;
    d["he_c"] = r.he_c;
    d["he_r"] = r.he_r;
    d["pnl"] = r.pnl;
    d["sharpe"] = r.sharpe;
    d["omega"] = r.omega;
    d["omega_capped"] = r.omega_capped;
    d["max_drawdown"] = r.max_drawdown;
    d["var95"] = r.var95;
    d["es95"] = r.es95;
    d["delta"] = r.delta_threshold;
    d["bp"] = r.cost_bp;
    d["total_cost"] = r.total_cost;
    d["opening_cost"] = r.opening_cost;
    d["n_obs"] = r.n_obs;
    return d;
}

py::dict bootstrap_dict(const inference::BootstrapResult& r) {
    py::dict d;
    d["metric"] = inference::to_string(r.metric);
    d["scheme"] = inference::to_string(r.scheme);
    d["mean_difference"] = r.mean_difference;
    d["p_value"] = r.p_value;
    d["sample_difference"] = r.sample_difference;
    d["replications"] = r.replications;
    d["valid_replications"] = r.valid_replications;
    d["block_length"] = r.block_length;
    d["differences"] = r.differences;
    return d;
}

inference::BootstrapOptions boot_options(std::size_t block, std::size_t reps, std::uint64_t seed,
                                         unsigned threads) {
    inference::BootstrapOptions o;
    o.block_length = block;
    o.replications = reps;
    o.seed = seed;
    o.threads = threads;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Robust minimum-variance hedging under variance-forecast uncertainty";
    m.attr("__version__") = RHEDGE_VERSION;

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    // realized measures
    m.def("realized_variance",
          [](const Vec& returns, int M) { return market_data::realized_variance(std::span<const double>(returns), M); },
          py::arg("returns"), py::arg("M"), "(M / M_x) * sum r^2; None for an empty day.");
    m.def(
        "realized_covariance",
        [](const std::vector<std::pair<int, double>>& x, const std::vector<std::pair<int, double>>& y, int M) {
            auto conv = [](const auto& v) {
                std::vector<market_data::IntervalReturn> out;
                for (const auto& [i, r] : v) out.push_back({i, r});
                return out;
            };
            return market_data::realized_covariance(conv(x), conv(y), M);
        },
        py::arg("returns_x"), py::arg("returns_y"), py::arg("M"),
        "Inner join of (interval, return) lists, scaled by M over the joined count.");

    // time-series models
    py::class_<ts_models::ArModel>(m, "ArModel")
        .def_property_readonly("kind", [](const ts_models::ArModel& a) { return ts_models::to_string(a.kind); })
        .def_property_readonly("transform",
                               [](const ts_models::ArModel& a) { return ts_models::to_string(a.transform); })
        .def_readonly("intercept", &ts_models::ArModel::intercept)
        .def_readonly("coeffs", &ts_models::ArModel::coeffs)
        .def_readonly("noise_variance", &ts_models::ArModel::noise_variance)
        .def_readonly("std_errors", &ts_models::ArModel::std_errors)
        .def_readonly("horizon_error_variance", &ts_models::ArModel::horizon_error_variance)
        .def_readonly("integrated_error_sd", &ts_models::ArModel::integrated_error_sd)
        .def_readonly("stationary", &ts_models::ArModel::stationary)
        .def_readonly("n_obs", &ts_models::ArModel::n_obs)
        .def("equilibrium", &ts_models::ArModel::equilibrium)
        .def("to_json", [](const ts_models::ArModel& a) { return io::model_to_json(a); })
        .def("__repr__", [](const ts_models::ArModel& a) {
            return "<ArModel " + ts_models::to_string(a.kind) + " p=" + std::to_string(a.order()) + ">";
        });

    m.def(
        "make_ar",
        [](double intercept, Vec coeffs, double noise_variance, const std::string& transform) {
            return ts_models::make_ar(intercept, std::move(coeffs), noise_variance,
                                      ts_models::parse_transform(transform));
        },
        py::arg("intercept"), py::arg("coeffs"), py::arg("noise_variance"), py::arg("transform") = "level");
    m.def(
        "fit_ar",
        [](const Vec& values, int p, const std::string& transform, int tau_max) {
            return ts_models::fit_ar(values, p, ts_models::parse_transform(transform), {tau_max});
        },
        py::arg("values"), py::arg("p"), py::arg("transform") = "level", py::arg("tau_max") = 10,
        "Least-squares AR(p); `values` are on the level scale.");
    m.def(
        "fit_har",
        [](const Vec& values, const std::string& transform, int tau_max) {
            return ts_models::fit_har(values, ts_models::parse_transform(transform), {tau_max});
        },
        py::arg("values"), py::arg("transform") = "level", py::arg("tau_max") = 10);
    m.def(
        "forecast",
        [](const ts_models::ArModel& model, const Vec& history, int tau, const std::string& theta_mode) {
            const auto f = ts_models::forecast_path(model, history, tau, ts_models::parse_theta_mode(theta_mode));
            py::dict d;
            d["point"] = f.point;
            d["integrated_point"] = f.integrated_point;
            d["theta"] = f.theta;
            d["theta_scale"] = f.theta_scale == ts_models::ThetaScale::log ? "log" : "level";
            return d;
        },
        py::arg("model"), py::arg("history"), py::arg("tau"), py::arg("theta_mode") = "empirical",
        "`history` is on the model's fit scale, most recent last.");
    m.def("ma_coefficients", &ts_models::ma_coefficients, py::arg("model"), py::arg("n"));
    m.def("step_error_variance", &ts_models::step_error_variance, py::arg("model"), py::arg("j"));
    m.def("integrated_error_variance", &ts_models::integrated_error_variance, py::arg("model"),
          py::arg("tau"));
    m.def("log_bias_correct", &ts_models::log_bias_correct, py::arg("log_point"), py::arg("error_variance"));
    m.def("impulse_response_delta", &ts_models::impulse_response_delta, py::arg("model_sf"),
          py::arg("model_f"), py::arg("h"));
    m.def(
        "adf_test",
        [](const Vec& values, int lags) {
            const auto r = ts_models::adf_test(std::span<const double>(values), lags);
            py::dict d;
            d["statistic"] = r.statistic;
            d["reject_unit_root"] = r.reject_unit_root;
            d["critical_value"] = r.critical_value;
            d["n_obs"] = r.n_obs;
            return d;
        },
        py::arg("values"), py::arg("lags") = 1);

    // hedge ratios
    m.def(
        "robust_hedge_ratio",
        [](double sigma_SF, double sigma_F_sq, double theta_F) {
            return robust_hedge::robust_hedge_ratio({1.0, sigma_F_sq, sigma_SF, 0.0, theta_F});
        },
        py::arg("sigma_SF"), py::arg("sigma_F_sq"), py::arg("theta_F") = 0.0);
    m.def(
        "worst_case_variance",
        [](double h, double sigma_S_sq, double sigma_F_sq, double sigma_SF, double theta_S, double theta_F) {
            return robust_hedge::worst_case_variance(h, {sigma_S_sq, sigma_F_sq, sigma_SF, theta_S, theta_F});
        },
        py::arg("h"), py::arg("sigma_S_sq"), py::arg("sigma_F_sq"), py::arg("sigma_SF"),
        py::arg("theta_S") = 0.0, py::arg("theta_F") = 0.0);
    m.def(
        "grid_minmax_oracle",
        [](double sigma_S_sq, double sigma_F_sq, double sigma_SF, double theta_S, double theta_F, double lo,
           double hi, double step) {
            return robust_hedge::grid_minmax_oracle({sigma_S_sq, sigma_F_sq, sigma_SF, theta_S, theta_F}, lo,
                                                    hi, step);
        },
        py::arg("sigma_S_sq"), py::arg("sigma_F_sq"), py::arg("sigma_SF"), py::arg("theta_S"),
        py::arg("theta_F"), py::arg("lo") = -5.0, py::arg("hi") = 5.0, py::arg("step") = 1e-4);

    // backtest
    m.def(
        "hedged_returns",
        [](const Vec& r_S, const Vec& r_F, const Vec& h, int tau, double bp) {
            const auto r = backtest::hedged_returns(r_S, r_F, h, tau, bp);
            py::dict d;
            d["r_hedged"] = r.r_hedged;
            d["r_net"] = r.r_net;
            d["costs"] = r.costs;
            d["position"] = r.position;
            d["opening_cost"] = r.opening_cost;
            return d;
        },
        py::arg("r_S"), py::arg("r_F"), py::arg("h"), py::arg("tau") = 1, py::arg("bp") = 0.0,
        "`bp` is a fraction: 5 basis points is 0.0005.");
    m.def(
        "performance_report",
        [](const Vec& r_S, const Vec& r_F, const Vec& h, int tau, double bp, std::optional<double> delta) {
            const auto r = backtest::hedged_returns(r_S, r_F, h, tau, bp);
            return report_dict(backtest::performance_report(r, delta.value_or(backtest::quartile_threshold(r_S))));
        },
        py::arg("r_S"), py::arg("r_F"), py::arg("h"), py::arg("tau") = 1, py::arg("bp") = 0.0,
        py::arg("delta") = py::none());
    m.def("hedge_effectiveness", &backtest::hedge_effectiveness, py::arg("r_h"), py::arg("r_S"));
    m.def("value_at_risk", &backtest::value_at_risk, py::arg("r"), py::arg("level") = 0.95);
    m.def("expected_shortfall", &backtest::expected_shortfall, py::arg("r"), py::arg("level") = 0.95);
    m.def("max_drawdown", &backtest::max_drawdown, py::arg("r"));

    // bootstrap
    m.def(
        "block_bootstrap",
        [](const Vec& robust, const Vec& standard, const std::string& metric, std::size_t block,
           std::size_t reps, std::uint64_t seed, unsigned threads) {
            const auto m = inference::parse_metric(metric);
            inference::BootstrapResult r;
            {
                py::gil_scoped_release release;
                r = inference::block_bootstrap(robust, standard, m, boot_options(block, reps, seed, threads));
            }
            return bootstrap_dict(r);
        },
        py::arg("r_robust"), py::arg("r_standard"), py::arg("metric") = "pnl", py::arg("block_length") = 250,
        py::arg("replications") = 10000, py::arg("seed") = 0, py::arg("threads") = 1);
    m.def(
        "meb_bootstrap",
        [](const Vec& robust, const Vec& standard, const std::string& metric, std::size_t block,
           std::size_t reps, std::uint64_t seed, unsigned threads) {
            const auto m = inference::parse_metric(metric);
            inference::BootstrapResult r;
            {
                py::gil_scoped_release release;
                r = inference::meb_bootstrap(robust, standard, m, boot_options(block, reps, seed, threads));
            }
            return bootstrap_dict(r);
        },
        py::arg("r_robust"), py::arg("r_standard"), py::arg("metric") = "pnl", py::arg("block_length") = 250,
        py::arg("replications") = 10000, py::arg("seed") = 0, py::arg("threads") = 1);
    m.def(
        "meb_replicate", [](const Vec& x, std::uint64_t seed) { return inference::meb_replicate(x, seed).values; },
        py::arg("x"), py::arg("seed"));

    // pipeline
    m.def(
        "generate_synthetic",
        [](const std::filesystem::path& out_dir, std::size_t n_days, std::uint64_t seed, const std::string& universe) {
            if (universe != "default" && universe != "pair") {
                throw ConfigError("universe must be 'default' or 'pair'");
            }
            const auto spec = universe == "pair" ? synthetic::two_instrument(n_days, seed)
                                                 : synthetic::default_universe(n_days, seed);
            return synthetic::generate_synthetic(spec, out_dir);
        },
        py::arg("out_dir"), py::arg("n_days"), py::arg("seed") = 1, py::arg("universe") = "default");
    m.def(
        "config_hash", [](const std::string& text) { return pipeline::config_hash(pipeline::config_from_json(text)); },
        py::arg("config_json"));
    m.def(
        "run_pipeline",
        [](const std::filesystem::path& config_path, const std::string& stage) {
            const auto config = pipeline::load_config(config_path);
            pipeline::RunManifest manifest;
            {
                py::gil_scoped_release release;
                manifest = pipeline::run_pipeline(config, pipeline::parse_stage(stage));
            }
            return manifest.to_json();
        },
        py::arg("config_path"), py::arg("stage") = "run", "Returns the manifest as JSON text.");
}
