// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance [--workdir DIR] [--only N]...

#include "support.hpp"

#include "rhedge/backtest.hpp"
#include "rhedge/inference.hpp"
#include "rhedge/io.hpp"
#include "rhedge/market_data.hpp"
#include "rhedge/pipeline.hpp"
#include "rhedge/robust_hedge.hpp"
#include "rhedge/synthetic.hpp"
#include "rhedge/ts_models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "json.hpp"

using namespace rhedge;
namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path fresh_dir(const fs::path& p) {
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::map<std::string, std::string> file_hashes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), dir).string()] = io::sha256_hex(io::read_file(e.path()));
        }
    }
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::istringstream in(io::read_file(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

// 1. Robust ratio against a brute-force min-max over a grid.
Outcome minmax_oracle() {
    const auto t0 = Clock::now();
    SplitMix64 rng(1001);
    const double step = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        robust_hedge::UncertaintyBox b;
        b.sigma_S_sq = 0.1 + 2.0 * rng.uniform();
        b.sigma_F_sq = 0.1 + 2.0 * rng.uniform();
        b.sigma_SF = (2.0 * rng.uniform() - 1.0) * std::sqrt(b.sigma_S_sq * b.sigma_F_sq);
        b.theta_S = rng.uniform() * b.sigma_S_sq;
        b.theta_F = rng.uniform() * b.sigma_F_sq;
        const double grid = robust_hedge::grid_minmax_oracle(b, -5.0, 5.0, step);
        worst = std::max(worst, std::abs(grid - robust_hedge::robust_hedge_ratio(b)));
    }
    const double secs = seconds_since(t0);
    return {worst <= step && secs < 10.0,
            fmt::format("max |h* - grid| = {:.3g} (step {}), {:.2f} s", worst, step, secs)};
}

// 2. Closed-form integrated error sd against simulated forecast errors.
Outcome closed_form_theta() {
    const auto t0 = Clock::now();
    struct Case {
        std::string name;
        std::vector<double> phi;
    };
    const std::vector<Case> cases{{"AR(1) 0.3", {0.3}},
                                  {"AR(1) 0.7", {0.7}},
                                  {"AR(5)", {0.35, 0.2, 0.1, 0.08, 0.05}}};
    const int paths = 1000000;
    const int tau_max = 10;
    double worst = 0.0;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto& phi = cases[c].phi;
        const std::size_t p = phi.size();
        const double intercept = 0.1;
        const auto model = ts_models::make_ar(intercept, phi, 1.0);

        // Origin history and its conditional mean path.
        std::vector<double> hist(p);
        for (std::size_t k = 0; k < p; ++k) hist[k] = 0.5 - 0.2 * static_cast<double>(k);
        std::vector<double> mean_path = hist;
        for (int j = 0; j < tau_max; ++j) {
            double v = intercept;
            for (std::size_t k = 0; k < p; ++k) v += phi[k] * mean_path[mean_path.size() - 1 - k];
            mean_path.push_back(v);
        }

        SplitMix64 rng(2000 + c);
        std::vector<double> sum(tau_max, 0.0);
        std::vector<double> sumsq(tau_max, 0.0);
        std::vector<double> y(p + tau_max);
        for (int path = 0; path < paths; ++path) {
            std::copy(hist.begin(), hist.end(), y.begin());
            double cum_err = 0.0;
            for (int j = 0; j < tau_max; ++j) {
                double v = intercept + rng.normal();
                for (std::size_t k = 0; k < p; ++k) v += phi[k] * y[p + j - 1 - k];
                y[p + j] = v;
                cum_err += v - mean_path[p + j];
                sum[j] += cum_err;
                sumsq[j] += cum_err * cum_err;
            }
        }
        for (int tau = 1; tau <= tau_max; ++tau) {
            const double m = sum[tau - 1] / paths;
            const double sd = std::sqrt((sumsq[tau - 1] - paths * m * m) / (paths - 1));
            const double closed =
                ts_models::uncertainty_theta(model, tau, ts_models::ThetaMode::closed_form).value;
            worst = std::max(worst, std::abs(sd / closed - 1.0));
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 0.02 && secs < 120.0,
            fmt::format("max relative gap {:.3f}% over 3 models x tau 1..10, {:.1f} s", 100.0 * worst, secs)};
}

// 3. Four-step error variance of an AR(3), hand-expanded.
Outcome ar3_symbolic() {
    SplitMix64 rng(3003);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double p1 = 2.0 * rng.uniform() - 1.0;
        const double p2 = 2.0 * rng.uniform() - 1.0;
        const double p3 = 2.0 * rng.uniform() - 1.0;
        const double s2 = 0.1 + 2.0 * rng.uniform();
        const double a = p1 * p1 + p2;
        const double b = a * p1 + p1 * p2 + p3;
        const double hand = (1.0 + p1 * p1 + a * a + b * b) * s2;
        const auto m = ts_models::make_ar(0.0, {p1, p2, p3}, s2);
        const double got = ts_models::step_error_variance(m, 4);
        worst = std::max(worst, std::abs(got - hand) / std::max(1.0, std::abs(hand)));
    }
    return {worst <= 1e-12, fmt::format("max deviation {:.3g} over 100 draws", worst)};
}

// 4. Shrinkage and dispersion of the hedge ratios on a synthetic pair.
Outcome shrinkage(const fs::path& work) {
    const auto data = fresh_dir(work / "c4_data");
    (void)synthetic::generate_synthetic(synthetic::two_instrument(5000, 404), data);
    const auto out = work / "c4_out";
    json cfg{{"data_dir", data.string()},
             {"output_dir", out.string()},
             {"symbols", {"S", "F"}},
             {"pairs", json::array({json::array({"S", "F"})})},
             {"asset_classes", {{"S", "equity"}, {"F", "equity"}}}};
    (void)pipeline::run_pipeline(pipeline::config_from_json(cfg.dump()), pipeline::Stage::hedge);

    std::size_t files = 0;
    std::size_t points = 0;
    std::size_t violations = 0;
    bool dispersion = true;
    std::string worst_ratio;
    double max_ratio = 0.0;
    for (const auto& e : fs::directory_iterator(out / "hedge")) {
        const auto rows = read_csv(e.path());
        std::vector<double> hs;
        std::vector<double> hr;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double h_std = std::stod(rows[i][1]);
            const double h_rob = std::stod(rows[i][2]);
            const double theta = std::stod(rows[i][3]);
            if (theta > 0.0 && std::abs(h_rob) > std::abs(h_std)) ++violations;
            hs.push_back(h_std);
            hr.push_back(h_rob);
        }
        const double ratio = std::sqrt(testsupport::variance(hr) / testsupport::variance(hs));
        if (ratio > max_ratio) {
            max_ratio = ratio;
            worst_ratio = e.path().filename().string();
        }
        dispersion = dispersion && ratio < 1.0;
        points += hs.size();
        ++files;
    }
    return {files > 0 && violations == 0 && dispersion,
            fmt::format("{} paths, {} points, {} shrinkage violations, max sd ratio {:.3f} ({})",
                        files, points, violations, max_ratio, worst_ratio)};
}

// 5. Effectiveness of the perfect hedge and of no hedge.
Outcome effectiveness_sanity() {
    SplitMix64 rng(505);
    std::vector<double> r_S(500);
    std::vector<double> r_F(500);
    for (std::size_t i = 0; i < r_S.size(); ++i) {
        r_S[i] = 0.01 * rng.normal();
        r_F[i] = 0.01 * rng.normal();
    }
    const double delta = backtest::quartile_threshold(r_S);
    const auto perfect = backtest::performance_report(
        backtest::hedged_returns(r_S, r_S, std::vector<double>(500, 1.0), 1, 0.0), delta);
    const auto none = backtest::performance_report(
        backtest::hedged_returns(r_S, r_F, std::vector<double>(500, 0.0), 1, 0.0), delta);
    const bool ok = perfect.he == 1.0 && perfect.he_c == 1.0 && perfect.he_r == 0.0 &&
                    none.he == 0.0 && none.he_c == 0.0 && none.he_r == 1.0;
    return {ok, fmt::format("h=1: HE {} HE_C {} HE_R {}; h=0: HE {} HE_C {} HE_R {}", perfect.he,
                            perfect.he_c, perfect.he_r, none.he, none.he_c, none.he_r)};
}

// 6. Grid search over a constant hedge recovers the sample MV ratio.
Outcome in_sample_optimality() {
    const double step = 1e-3;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = synthetic::simulate(synthetic::two_instrument(500, 600 + seed));
        const auto r_S = market_data::daily_close_returns(data.bars[0]);
        const auto r_F = market_data::daily_close_returns(data.bars[1]);
        const double mv = testsupport::covariance(r_S.values, r_F.values) /
                          testsupport::variance(r_F.values);
        double best_h = 0.0;
        double best_he = -1e300;
        const std::vector<double> ones(r_S.size(), 1.0);
        for (int k = -3000; k <= 3000; ++k) {
            const double h = k * step;
            std::vector<double> hv(r_S.size(), h);
            const auto hr = backtest::hedged_returns(r_S.values, r_F.values, hv, 1, 0.0);
            const double he = backtest::hedge_effectiveness(hr.r_hedged, r_S.values);
            if (he > best_he) {
                best_he = he;
                best_h = h;
            }
        }
        worst = std::max(worst, std::abs(best_h - mv));
    }
    return {worst <= step, fmt::format("max |argmax HE - MV ratio| = {:.3g} (step {}) over 20 datasets",
                                       worst, step)};
}

// 7. Bias-corrected level forecasts of a log-AR(1) against simulated means.
Outcome bias_correction() {
    const double c = -0.9;
    const double phi = 0.9;
    const double sigma = 0.3;
    const int tau = 10;
    const int paths = 100000;

    // Fitted on a long history so the in-sample error table drives the correction.
    auto log_hist = testsupport::simulate_ar(c, {phi}, sigma, 20000, 707);
    std::vector<double> level(log_hist.size());
    std::transform(log_hist.begin(), log_hist.end(), level.begin(), [](double v) { return std::exp(v); });
    ts_models::FitOptions opts;
    opts.tau_max = tau;
    const auto fitted = ts_models::fit_ar(std::span<const double>(level), 1, ts_models::Transform::log, opts);
    const auto known = ts_models::make_ar(c, {phi}, sigma * sigma, ts_models::Transform::log);

    const double origin = log_hist.back();
    SplitMix64 rng(708);
    std::vector<double> mc(tau, 0.0);
    for (int path = 0; path < paths; ++path) {
        double x = origin;
        for (int j = 0; j < tau; ++j) {
            x = c + phi * x + sigma * rng.normal();
            mc[j] += std::exp(x);
        }
    }
    for (double& v : mc) v /= paths;

    const std::vector<double> hist{origin};
    const auto fitted_path = ts_models::forecast_path(fitted, hist, tau);
    const auto known_fc = ts_models::forecast_fit_scale(known, hist, tau);
    double worst_known = 0.0;
    double worst_fitted = 0.0;
    double worst_naive = 0.0;
    for (int j = 1; j <= tau; ++j) {
        const double corrected =
            ts_models::log_bias_correct(known_fc[j - 1], ts_models::step_error_variance(known, j));
        worst_known = std::max(worst_known, std::abs(corrected / mc[j - 1] - 1.0));
        worst_fitted = std::max(worst_fitted, std::abs(fitted_path.point[j - 1] / mc[j - 1] - 1.0));
        worst_naive = std::max(worst_naive, std::abs(std::exp(known_fc[j - 1]) / mc[j - 1] - 1.0));
    }
    return {worst_known <= 0.01 && worst_fitted <= 0.01,
            fmt::format("max gap: known params {:.3f}%, fitted {:.3f}% (uncorrected {:.1f}%)",
                        100.0 * worst_known, 100.0 * worst_fitted, 100.0 * worst_naive)};
}

// 8. HAR stored as a tied AR(5).
Outcome har_tie() {
    const auto y = testsupport::simulate_ar(0.05, {0.3, 0.1, 0.1, 0.1, 0.1}, 1.0, 50000, 808);
    const auto har = ts_models::fit_har(y, ts_models::Transform::level);
    const auto tied = ts_models::make_ar(har.intercept,
                                         {har.coeffs[0], har.coeffs[1], har.coeffs[1], har.coeffs[1],
                                          har.coeffs[1]},
                                         har.noise_variance);
    bool identical = true;
    for (std::size_t end = 5; end < y.size(); end += 997) {
        const std::span<const double> h(y.data(), end);
        identical = identical && ts_models::forecast_fit_scale(har, h, 10) ==
                                     ts_models::forecast_fit_scale(tied, h, 10);
    }
    const double z1 = (har.coeffs[0] - 0.3) / har.std_errors[1];
    const double z2 = (4.0 * har.coeffs[1] - 0.4) / har.std_errors[2];
    return {identical && std::abs(z1) < 3.0 && std::abs(z2) < 3.0,
            fmt::format("forecasts bit-identical: {}; phi1 {:.4f} (z {:.2f}), phi2 {:.4f} (z {:.2f})",
                        identical, har.coeffs[0], z1, 4.0 * har.coeffs[1], z2)};
}

// 9. Bootstrap machinery.
Outcome bootstrap_machinery(const fs::path& work) {
    SplitMix64 rng(909);
    std::vector<double> standard(1000);
    for (double& v : standard) v = 0.01 * rng.normal();
    std::vector<double> robust = standard;
    for (double& v : robust) v += 0.001;

    inference::BootstrapOptions o;
    o.replications = 10000;
    o.seed = 9;
    const auto block = inference::block_bootstrap(robust, standard, inference::Metric::pnl, o);
    const auto meb = inference::meb_bootstrap(robust, standard, inference::Metric::pnl, o);
    const bool shift_ok = std::abs(block.mean_difference - 0.25) < 1e-9 && block.p_value == 0.0 &&
                          std::abs(meb.mean_difference - 0.25) < 1e-9 && meb.p_value == 0.0;

    std::vector<std::size_t> order(250);
    std::iota(order.begin(), order.end(), 0);
    const std::vector<double> x(standard.begin(), standard.begin() + 250);
    auto ranks = [&](const std::vector<double>& v) {
        auto idx = order;
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        return idx;
    };
    const auto want = ranks(x);
    int rank_failures = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        if (ranks(inference::meb_replicate(x, s).values) != want) ++rank_failures;
    }

    const auto data = fresh_dir(work / "c9_data");
    (void)synthetic::generate_synthetic(synthetic::two_instrument(800, 909), data);
    auto run = [&](const std::string& name) {
        json cfg{{"data_dir", data.string()},
                 {"output_dir", (work / name).string()},
                 {"symbols", {"S", "F"}},
                 {"pairs", "all"},
                 {"asset_classes", {{"S", "equity"}, {"F", "equity"}}},
                 {"bootstrap", {{"replications", 500}, {"seed", 99}}}};
        (void)pipeline::run_pipeline(pipeline::config_from_json(cfg.dump()));
        return io::read_file(work / name / "bootstrap.csv");
    };
    const auto first = run("c9_a");
    const auto second = run("c9_b");
    const std::string header =
        "measure,mean_difference,p_value,mean_difference_temporal,p_value_temporal";
    const bool schema = first.substr(0, first.find('\n')).ends_with(header);
    const bool reproducible = !first.empty() && first == second;

    return {shift_ok && rank_failures == 0 && schema && reproducible,
            fmt::format("shift: block {:.12g} (p {}), meb {:.12g} (p {}); rank failures {}/1000; "
                        "schema {}; rerun identical {}",
                        block.mean_difference, block.p_value, meb.mean_difference, meb.p_value,
                        rank_failures, schema, reproducible)};
}

// 10. Full grid on the 13-symbol universe, run twice.
Outcome end_to_end(const fs::path& work) {
    const auto data = fresh_dir(work / "c10_data");
    (void)synthetic::generate_synthetic(synthetic::default_universe(2000, 1010), data);
    json cfg{{"data_dir", data.string()},
             {"symbols", {"IVV", "ICLN", "QQQM", "ASHR", "EWH", "IEV", "CORP", "IGOV", "GOVT", "BNO",
                          "UNG", "AAAU", "GSG"}},
             {"pairs", "all"},
             {"models", json::array({{{"kind", "ar"}, {"p", 1}}, {{"kind", "ar"}, {"p", 5}}})},
             {"tau", {1, 10}},
             {"cost_bp", {0, 5, 10}},
             {"bootstrap", {{"replications", 10000}, {"seed", 20240101}}}};
    std::vector<double> secs;
    std::vector<std::map<std::string, std::string>> hashes;
    pipeline::RunManifest manifest;
    for (const char* name : {"c10_a", "c10_b"}) {
        cfg["output_dir"] = (work / name).string();
        fs::remove_all(work / name);
        const auto t0 = Clock::now();
        manifest = pipeline::run_pipeline(pipeline::config_from_json(cfg.dump()));
        secs.push_back(seconds_since(t0));
        hashes.push_back(file_hashes(work / name));
    }
    const bool identical = hashes[0] == hashes[1];
    const double slowest = *std::max_element(secs.begin(), secs.end());
    return {identical && slowest < 600.0 && manifest.metric_rows > 0,
            fmt::format("{} files, {} metric rows, {} bootstrap rows; runs {:.1f} s and {:.1f} s on {} "
                        "hardware threads; identical {}",
                        hashes[0].size(), manifest.metric_rows, manifest.bootstrap_rows, secs[0],
                        secs[1], std::thread::hardware_concurrency(), identical)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string workdir = (fs::temp_directory_path() / "rhedge_acceptance").string();
    std::vector<int> only;
    app.add_option("--workdir", workdir, "Scratch directory");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);
    const fs::path work = fresh_dir(workdir);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"min-max oracle equivalence", minmax_oracle},
        {"closed-form theta vs Monte Carlo", closed_form_theta},
        {"AR(3) four-step variance expansion", ar3_symbolic},
        {"shrinkage and dispersion", [&] { return shrinkage(work); }},
        {"effectiveness sanity", effectiveness_sanity},
        {"in-sample optimality", in_sample_optimality},
        {"log bias correction", bias_correction},
        {"HAR / tied AR(5)", har_tie},
        {"bootstrap machinery", [&] { return bootstrap_machinery(work); }},
        {"end-to-end determinism and runtime", [&] { return end_to_end(work); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, fmt::format("threw: {}", e.what())};
        }
        if (!o.pass) ++failures;
        fmt::print("[{}] criterion {:2d} {}: {}\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                   o.detail);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
