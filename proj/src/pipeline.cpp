#include "rhedge/pipeline.hpp"

#include "rhedge/io.hpp"
#include "rhedge/robust_hedge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include "json.hpp"

#ifndef RHEDGE_VERSION
#define RHEDGE_VERSION "0.0.0"
#endif

namespace rhedge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using market_data::RealizedSeries;
using ts_models::ArModel;

namespace {

// ---------------------------------------------------------------- helpers

std::string clock_text(int minute) { return fmt::format("{:02d}:{:02d}", minute / 60, minute % 60); }

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1U, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first failure
// by index is rethrown, so errors do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// Re-raises a library error with the stage and item prefixed, keeping its category.
template <typename Fn>
auto in_context(std::string_view stage, std::string_view item, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        const auto what = fmt::format("stage '{}' ({}): {}", stage, item, e.what());
        switch (e.category()) {
            case Error::Category::config: throw ConfigError(what);
            case Error::Category::data: throw DataError(what);
            case Error::Category::numeric: throw NumericError(what);
        }
        throw;
    } catch (const std::exception& e) {
        throw NumericError(fmt::format("stage '{}' ({}): {}", stage, item, e.what()));
    }
}

double bp_fraction(double bp) { return bp * 1e-4; }

std::string model_file_label(const std::string& series, const std::string& model) {
    return series + "_" + model;
}

// ------------------------------------------------------------------ config

const std::set<std::string> kConfigKeys = {
    "data_dir",      "output_dir",     "symbols",          "pairs",
    "asset_classes", "window",         "missing_day_policy", "models",
    "variance_transform", "covariance_transform", "tau",   "theta_mode",
    "cost_bp",       "delta",          "split",            "bootstrap",
    "variance_floor", "adf_lags",      "threads"};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

market_data::MissingDayPolicy parse_policy(std::string_view s) {
    if (s == "drop") return market_data::MissingDayPolicy::drop;
    if (s == "forward_fill") return market_data::MissingDayPolicy::forward_fill;
    throw ConfigError(fmt::format("unknown missing_day_policy '{}'", s));
}

std::string to_string(market_data::MissingDayPolicy p) {
    return p == market_data::MissingDayPolicy::drop ? "drop" : "forward_fill";
}

std::pair<std::string, std::string> parse_pair(const json& j) {
    if (j.is_array() && j.size() == 2) return {j[0].get<std::string>(), j[1].get<std::string>()};
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const auto colon = s.find(':');
        if (colon != std::string::npos && colon > 0 && colon + 1 < s.size()) {
            return {s.substr(0, colon), s.substr(colon + 1)};
        }
    }
    throw ConfigError(fmt::format("pair must be [\"S\", \"F\"] or \"S:F\", got {}", j.dump()));
}

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.is_absolute() || base.empty()) return p;
    return base / p;
}

// ------------------------------------------------------------- run state

struct SeriesEntry {
    RealizedSeries series;
    ts_models::Transform transform = ts_models::Transform::level;
    std::vector<double> fit_scale;  // full sample on the fit scale
    RealizedSeries train;
};

struct CellKey {
    std::size_t pair = 0;
    std::size_t model = 0;
    std::size_t tau = 0;
};

struct PairData {
    std::string hedged;
    std::string hedging;
    std::string label;
    std::size_t rcv = 0;  // index into the covariance entries
    double rho = 0.0;
    int type = 0;
};

struct CellResult {
    robust_hedge::HedgePath path;
    RealizedSeries r_S;
    RealizedSeries r_F;
    double delta = 0.0;
    std::vector<std::array<backtest::MetricsReport, 2>> reports;  // [bp][method]
    // Net returns [standard, robust] kept for the bootstrap cost levels.
    std::map<double, std::array<std::vector<double>, 2>> net;
};

// Point forecasts keyed by origin index into the series dates.
struct ForecastTable {
    std::vector<std::optional<ts_models::ForecastPath>> by_index;
};

class Runner {
public:
    Runner(const PipelineConfig& config, Stage last)
        : config_(config), last_(last), threads_(resolve_threads(config.threads)) {}

    RunManifest run() {
        config_.validate();
        manifest_.config_hash = config_hash(config_);
        manifest_.version = RHEDGE_VERSION;
        manifest_.seed = config_.bootstrap.seed;
        fs::create_directories(config_.output_dir);

        ingest();
        if (reached(Stage::fit)) fit();
        if (reached(Stage::forecast)) forecast();
        if (reached(Stage::hedge)) hedge();
        if (reached(Stage::backtest)) run_backtest();
        if (reached(Stage::bootstrap)) run_bootstrap();
        if (last_ == Stage::all) emit_scatter();
        write_manifest();
        return manifest_;
    }

private:
    bool reached(Stage s) const { return static_cast<int>(last_) >= static_cast<int>(s); }

    void output(const std::string& stage, const std::string& rel, const std::string& content) {
        io::write_atomic(config_.output_dir / rel, content);
        ManifestFile f{stage, rel, 0, io::sha256_hex(content)};
        f.rows = rel.ends_with(".csv") ? io::csv_row_count(content) : 1;
        std::lock_guard lock(files_mutex_);
        manifest_.files.push_back(std::move(f));
    }

    void merge_warnings(std::vector<Warnings>& per_task) {
        for (auto& w : per_task) {
            for (auto& s : w) manifest_.warnings.push_back(std::move(s));
        }
    }

    std::size_t symbol_index(const std::string& s) const {
        const auto it = std::find(symbols_.begin(), symbols_.end(), s);
        return static_cast<std::size_t>(it - symbols_.begin());
    }

    // ------------------------------------------------------------ ingest
    void ingest() {
        symbols_ = config_.symbols;
        if (symbols_.empty()) {
            for (const auto& [s, f] : config_.pairs) {
                for (const auto* x : {&s, &f}) {
                    if (std::find(symbols_.begin(), symbols_.end(), *x) == symbols_.end()) {
                        symbols_.push_back(*x);
                    }
                }
            }
        }
        const std::size_t n = symbols_.size();
        bars_.resize(n);
        rv_.resize(n);
        ret_.resize(n);
        std::vector<Warnings> warns(n);
        parallel_for(n, threads_, [&](std::size_t i) {
            in_context("ingest", symbols_[i], [&] {
                const auto path = config_.data_dir / (symbols_[i] + ".csv");
                std::ifstream in(path);
                if (!in) throw DataError(fmt::format("cannot open bar file '{}'", path.string()));
                bars_[i] = market_data::parse_bar_file(in, symbols_[i], config_.window);
                rv_[i].series = market_data::daily_realized_variance(
                    bars_[i], config_.missing_day_policy, &warns[i]);
                rv_[i].transform = config_.variance_transform;
                ret_[i] = market_data::daily_close_returns(bars_[i], &warns[i]);
            });
        });
        merge_warnings(warns);

        // One covariance series per unordered pair, labelled in symbol order.
        for (const auto& [s, f] : config_.pairs) {
            const std::size_t a = std::min(symbol_index(s), symbol_index(f));
            const std::size_t b = std::max(symbol_index(s), symbol_index(f));
            const auto key = std::make_pair(a, b);
            if (!rcv_index_.contains(key)) {
                rcv_index_[key] = rcv_keys_.size();
                rcv_keys_.push_back(key);
            }
        }
        rcv_.resize(rcv_keys_.size());
        std::vector<Warnings> rcv_warns(rcv_keys_.size());
        parallel_for(rcv_keys_.size(), threads_, [&](std::size_t k) {
            const auto [a, b] = rcv_keys_[k];
            rcv_[k].series = market_data::daily_realized_covariance(
                bars_[a], bars_[b], config_.missing_day_policy, &rcv_warns[k]);
            rcv_[k].transform = config_.covariance_transform;
        });
        merge_warnings(rcv_warns);
        bars_.clear();
        bars_.shrink_to_fit();

        resolve_split();

        for (std::size_t i = 0; i < n; ++i) {
            std::ostringstream rv;
            market_data::write_realized_csv(rv, rv_[i].series);
            output("ingest", "realized/" + symbols_[i] + "_rv.csv", rv.str());
            std::ostringstream rt;
            market_data::write_realized_csv(rt, ret_[i]);
            output("ingest", "realized/" + symbols_[i] + "_ret.csv", rt.str());
        }
        for (auto& e : rcv_) {
            std::ostringstream out;
            market_data::write_realized_csv(out, e.series);
            output("ingest", "realized/" + e.series.label + "_rcv.csv", out.str());
        }
    }

    void resolve_split() {
        std::set<Date> calendar;
        for (const auto& e : rv_) calendar.insert(e.series.dates.begin(), e.series.dates.end());
        if (calendar.empty()) return;
        const std::vector<Date> cal(calendar.begin(), calendar.end());
        if (config_.train_end && config_.test_start) {
            train_end_ = *config_.train_end;
            test_start_ = *config_.test_start;
        } else if (config_.train_end) {
            train_end_ = *config_.train_end;
            const auto it = std::upper_bound(cal.begin(), cal.end(), train_end_);
            if (it == cal.end()) throw ConfigError("split: no dates after train_end");
            test_start_ = *it;
        } else if (config_.test_start) {
            test_start_ = *config_.test_start;
            const auto it = std::lower_bound(cal.begin(), cal.end(), test_start_);
            if (it == cal.begin()) throw ConfigError("split: no dates before test_start");
            train_end_ = *std::prev(it);
        } else {
            auto idx = static_cast<std::size_t>(std::floor(config_.train_fraction *
                                                           static_cast<double>(cal.size())));
            idx = std::clamp<std::size_t>(idx, 1, cal.size() - 1);
            train_end_ = cal[idx - 1];
            test_start_ = cal[idx];
        }
        train_range_ = DateRange{cal.front(), train_end_};
        manifest_.train_end = format_date(train_end_);
        manifest_.test_start = format_date(test_start_);
    }

    // --------------------------------------------------------------- fit
    std::vector<SeriesEntry*> all_series() {
        std::vector<SeriesEntry*> out;
        for (auto& e : rv_) out.push_back(&e);
        for (auto& e : rcv_) out.push_back(&e);
        return out;
    }

    void fit() {
        auto series = all_series();
        const std::size_t n_models = config_.models.size();
        models_.assign(series.size(), std::vector<ArModel>(n_models));
        adf_.assign(series.size(), {});
        std::vector<Warnings> warns(series.size() * n_models);
        const ts_models::FitOptions options{config_.tau_max()};

        parallel_for(series.size(), threads_, [&](std::size_t s) {
            auto& entry = *series[s];
            in_context("fit", entry.series.label, [&] {
                entry.train = entry.series.slice(train_range_);
                entry.fit_scale = ts_models::to_fit_scale(entry.transform, entry.series.values);
                const auto train_fit = std::span{entry.fit_scale}.first(entry.train.size());
                adf_[s] = ts_models::adf_test(train_fit, config_.adf_lags);
            });
        });
        parallel_for(series.size() * n_models, threads_, [&](std::size_t k) {
            const std::size_t s = k / n_models;
            const std::size_t m = k % n_models;
            const auto& entry = *series[s];
            const auto& spec = config_.models[m];
            in_context("fit", model_file_label(entry.series.label, spec.name), [&] {
                models_[s][m] = spec.kind == ts_models::ModelKind::har
                                    ? ts_models::fit_har(entry.train.values, entry.transform, options)
                                    : ts_models::fit_ar(entry.train.values, spec.p, entry.transform,
                                                        options);
                if (!models_[s][m].stationary) {
                    warn(&warns[k], fmt::format("{} {}: fitted model is not stationary",
                                                entry.series.label, spec.name));
                }
            });
        });
        merge_warnings(warns);

        for (std::size_t s = 0; s < series.size(); ++s) {
            for (std::size_t m = 0; m < n_models; ++m) {
                output("fit",
                       "models/" + model_file_label(series[s]->series.label, config_.models[m].name) +
                           ".json",
                       io::model_to_json(models_[s][m]) + "\n");
            }
        }
        fmt::memory_buffer adf;
        fmt::format_to(std::back_inserter(adf),
                       "series,transform,statistic,critical_value,reject_unit_root,n_obs\n");
        for (std::size_t s = 0; s < series.size(); ++s) {
            fmt::format_to(std::back_inserter(adf), "{},{},{},{},{},{}\n", series[s]->series.label,
                           ts_models::to_string(series[s]->transform), adf_[s].statistic,
                           adf_[s].critical_value, adf_[s].reject_unit_root ? 1 : 0,
                           adf_[s].n_obs);
        }
        output("fit", "adf.csv", fmt::to_string(adf));
    }

    // ---------------------------------------------------------- forecast
    void forecast() {
        auto series = all_series();
        const std::size_t n_models = config_.models.size();
        const std::size_t n_taus = config_.taus.size();
        forecasts_.assign(series.size(), std::vector<std::vector<ForecastTable>>(
                                             n_models, std::vector<ForecastTable>(n_taus)));
        const std::size_t total = series.size() * n_models * n_taus;
        parallel_for(total, threads_, [&](std::size_t k) {
            const std::size_t s = k / (n_models * n_taus);
            const std::size_t m = (k / n_taus) % n_models;
            const std::size_t t = k % n_taus;
            const auto& entry = *series[s];
            const auto& model = models_[s][m];
            const int tau = config_.taus[t];
            const std::string label =
                fmt::format("{}_{}_tau{}", entry.series.label, config_.models[m].name, tau);
            in_context("forecast", label, [&] {
                auto& table = forecasts_[s][m][t].by_index;
                table.assign(entry.series.size(), std::nullopt);
                fmt::memory_buffer csv;
                fmt::format_to(std::back_inserter(csv), "origin_date,j,point,theta\n");
                const auto& dates = entry.series.dates;
                const auto first = static_cast<std::size_t>(
                    std::lower_bound(dates.begin(), dates.end(), test_start_) - dates.begin());
                for (std::size_t i = std::max(first, static_cast<std::size_t>(model.order() - 1));
                     i < dates.size(); ++i) {
                    auto path = ts_models::forecast_path(
                        model, std::span{entry.fit_scale}.first(i + 1), tau, config_.theta_mode,
                        dates[i]);
                    const auto date = format_date(dates[i]);
                    for (int j = 0; j < tau; ++j) {
                        fmt::format_to(std::back_inserter(csv), "{},{},{},{}\n", date, j + 1,
                                       path.point[j], path.theta);
                    }
                    table[i] = std::move(path);
                }
                output("forecast", "forecasts/" + label + ".csv", fmt::to_string(csv));
            });
        });
        rmse_table();
    }

    // One-step out-of-sample RMSE of AR(1), AR(5) and HAR variance forecasts,
    // normalised by AR(1).
    void rmse_table() {
        const std::size_t n = rv_.size();
        std::vector<std::optional<std::array<double, 3>>> rows(n);
        std::vector<Warnings> warns(n);
        parallel_for(n, threads_, [&](std::size_t i) {
            const auto& entry = rv_[i];
            try {
                const std::array<ArModel, 3> fits{
                    ts_models::fit_ar(entry.train.values, 1, entry.transform),
                    ts_models::fit_ar(entry.train.values, 5, entry.transform),
                    ts_models::fit_har(entry.train.values, entry.transform)};
                const auto& dates = entry.series.dates;
                const auto first = static_cast<std::size_t>(
                    std::lower_bound(dates.begin(), dates.end(), test_start_) - dates.begin());
                std::array<std::vector<double>, 3> fc;
                std::vector<double> realized;
                for (std::size_t o = std::max<std::size_t>(first, 4); o + 1 < dates.size(); ++o) {
                    const auto hist = std::span{entry.fit_scale}.first(o + 1);
                    for (std::size_t m = 0; m < 3; ++m) {
                        fc[m].push_back(ts_models::forecast_path(fits[m], hist, 1,
                                                                 ts_models::ThetaMode::closed_form)
                                            .point[0]);
                    }
                    realized.push_back(entry.series.values[o + 1]);
                }
                const auto ratio = ts_models::rmse_ratio(fc[1], fc[2], fc[0], realized);
                rows[i] = {ts_models::rmse(fc[0], realized), ratio.a, ratio.b};
            } catch (const Error& e) {
                warn(&warns[i], fmt::format("rmse: {} skipped: {}", symbols_[i], e.what()));
            }
        });
        merge_warnings(warns);
        fmt::memory_buffer csv;
        fmt::format_to(std::back_inserter(csv), "symbol,rmse_ar1,ratio_ar5,ratio_har\n");
        for (std::size_t i = 0; i < n; ++i) {
            if (!rows[i]) continue;
            fmt::format_to(std::back_inserter(csv), "{},{},{},{}\n", symbols_[i], (*rows[i])[0],
                           (*rows[i])[1], (*rows[i])[2]);
        }
        output("forecast", "rmse.csv", fmt::to_string(csv));
    }

    // ------------------------------------------------------------- hedge
    void prepare_pairs() {
        pairs_.clear();
        for (const auto& [s, f] : config_.pairs) {
            PairData p;
            p.hedged = s;
            p.hedging = f;
            p.label = s + "_" + f;
            const std::size_t a = symbol_index(s);
            const std::size_t b = symbol_index(f);
            p.rcv = rcv_index_.at({std::min(a, b), std::max(a, b)});
            p.rho = in_context("hedge", p.label, [&] {
                return market_data::pair_correlation(ret_[a], ret_[b], train_range_);
            });
            const auto cs = config_.asset_classes.find(s);
            const auto cf = config_.asset_classes.find(f);
            p.type = cs == config_.asset_classes.end() || cf == config_.asset_classes.end()
                         ? 0
                         : pair_type(cs->second, cf->second);
            pairs_.push_back(std::move(p));
        }
        cells_.clear();
        for (std::size_t p = 0; p < pairs_.size(); ++p) {
            for (std::size_t m = 0; m < config_.models.size(); ++m) {
                for (std::size_t t = 0; t < config_.taus.size(); ++t) cells_.push_back({p, m, t});
            }
        }
        results_.assign(cells_.size(), {});
    }

    std::string cell_label(const CellKey& c) const {
        return fmt::format("{}_{}_tau{}", pairs_[c.pair].label, config_.models[c.model].name,
                           config_.taus[c.tau]);
    }

    void hedge() {
        prepare_pairs();
        const std::size_t n_rv = rv_.size();
        std::vector<Warnings> warns(cells_.size());
        parallel_for(cells_.size(), threads_, [&](std::size_t k) {
            const auto& c = cells_[k];
            const auto& pair = pairs_[c.pair];
            const std::size_t is = symbol_index(pair.hedged);
            const std::size_t ifut = symbol_index(pair.hedging);
            const auto label = cell_label(c);
            in_context("hedge", label, [&] {
                const auto& rv_f = rv_[ifut].series;
                const auto& rcv = rcv_[pair.rcv].series;
                const std::array<const RealizedSeries*, 5> parts{
                    &rv_[is].series, &rv_f, &rcv, &ret_[is], &ret_[ifut]};
                const auto dates = market_data::common_dates(parts);

                std::vector<ts_models::ForecastPath> f_F;
                std::vector<ts_models::ForecastPath> f_SF;
                std::vector<Date> return_dates;
                const auto& table_F = forecasts_[ifut][c.model][c.tau].by_index;
                const auto& table_SF = forecasts_[n_rv + pair.rcv][c.model][c.tau].by_index;
                std::size_t iF = 0;
                std::size_t iSF = 0;
                for (std::size_t d = 0; d + 1 < dates.size(); ++d) {
                    if (dates[d] < test_start_) continue;
                    while (rv_f.dates[iF] < dates[d]) ++iF;
                    while (rcv.dates[iSF] < dates[d]) ++iSF;
                    if (!table_F[iF] || !table_SF[iSF]) {
                        throw DataError(fmt::format("no forecast at origin {}", format_date(dates[d])));
                    }
                    f_F.push_back(*table_F[iF]);
                    f_SF.push_back(*table_SF[iSF]);
                    return_dates.push_back(dates[d + 1]);
                }
                auto& res = results_[k];
                res.path = robust_hedge::hedge_path(f_F, f_SF, config_.taus[c.tau],
                                                    config_.variance_floor, &warns[k]);
                res.r_S = market_data::align_to(ret_[is], return_dates);
                res.r_F = market_data::align_to(ret_[ifut], return_dates);

                fmt::memory_buffer csv;
                fmt::format_to(std::back_inserter(csv), "date,h_standard,h_robust,theta,tau\n");
                for (std::size_t i = 0; i < res.path.size(); ++i) {
                    fmt::format_to(std::back_inserter(csv), "{},{},{},{},{}\n",
                                   format_date(res.path.dates[i]), res.path.h_standard[i],
                                   res.path.h_robust[i], res.path.theta_used[i], res.path.tau);
                }
                output("hedge", "hedge/" + label + ".csv", fmt::to_string(csv));
            });
        });
        for (std::size_t k = 0; k < warns.size(); ++k) {
            for (auto& w : warns[k]) w = cell_label(cells_[k]) + ": " + w;
        }
        merge_warnings(warns);
    }

    // ---------------------------------------------------------- backtest
    static double sd_of(std::span<const double> x) {
        return x.size() < 2 ? 0.0 : std::sqrt(backtest::sample_variance(x));
    }

    void run_backtest() {
        const auto& bps = config_.cost_bp;
        parallel_for(cells_.size(), threads_, [&](std::size_t k) {
            in_context("backtest", cell_label(cells_[k]), [&] {
                auto& res = results_[k];
                res.delta = config_.delta ? *config_.delta
                                          : backtest::quartile_threshold(res.r_S.values);
                res.reports.resize(bps.size());
                const auto& boot_bps = config_.bootstrap.cost_bp;
                for (std::size_t b = 0; b < bps.size(); ++b) {
                    const bool keep = config_.bootstrap.enabled &&
                                      std::find(boot_bps.begin(), boot_bps.end(), bps[b]) != boot_bps.end();
                    for (int m = 0; m < 2; ++m) {
                        const auto method = m == 0 ? backtest::Method::standard
                                                   : backtest::Method::robust;
                        auto r = backtest::hedged_returns(res.r_S, res.r_F, res.path, method,
                                                          bp_fraction(bps[b]));
                        res.reports[b][m] = backtest::performance_report(r, res.delta);
                        if (keep) res.net[bps[b]][m] = std::move(r.r_net);
                    }
                }
            });
        });

        fmt::memory_buffer csv;
        json rows = json::array();
        fmt::format_to(std::back_inserter(csv),
                       "pair,hedged,hedging,model,tau,method,bp,he,he_c,he_r,pnl,sharpe,omega,"
                       "omega_capped,max_drawdown,var95,es95,delta,total_cost,opening_cost,n_obs,"
                       "rho,pair_type,std_h\n");
        for (std::size_t k = 0; k < cells_.size(); ++k) {
            const auto& c = cells_[k];
            const auto& pair = pairs_[c.pair];
            const auto& res = results_[k];
            for (std::size_t b = 0; b < bps.size(); ++b) {
                for (int m = 0; m < 2; ++m) {
                    const auto& r = res.reports[b][m];
                    const auto method = m == 0 ? backtest::Method::standard : backtest::Method::robust;
                    const double std_h =
                        sd_of(m == 0 ? res.path.h_standard : res.path.h_robust);
                    fmt::format_to(std::back_inserter(csv),
                                   "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                                   pair.label, pair.hedged, pair.hedging, config_.models[c.model].name,
                                   config_.taus[c.tau], backtest::to_string(method), bps[b], r.he,
                                   r.he_c, r.he_r, r.pnl, r.sharpe, r.omega, r.omega_capped ? 1 : 0,
                                   r.max_drawdown, r.var95, r.es95, r.delta_threshold, r.total_cost,
                                   r.opening_cost, r.n_obs, pair.rho, pair.type, std_h);
                    rows.push_back({{"pair", pair.label},
                                    {"hedged", pair.hedged},
                                    {"hedging", pair.hedging},
                                    {"model", config_.models[c.model].name},
                                    {"tau", config_.taus[c.tau]},
                                    {"method", backtest::to_string(method)},
                                    {"bp", bps[b]},
                                    {"he", r.he},
                                    {"he_c", r.he_c},
                                    {"he_r", r.he_r},
                                    {"pnl", r.pnl},
                                    {"sharpe", r.sharpe},
                                    {"omega", r.omega},
                                    {"omega_capped", r.omega_capped},
                                    {"max_drawdown", r.max_drawdown},
                                    {"var95", r.var95},
                                    {"es95", r.es95},
                                    {"delta", r.delta_threshold},
                                    {"total_cost", r.total_cost},
                                    {"opening_cost", r.opening_cost},
                                    {"n_obs", r.n_obs},
                                    {"rho", pair.rho},
                                    {"pair_type", pair.type},
                                    {"std_h", std_h}});
                    ++manifest_.metric_rows;
                }
            }
        }
        report_csv_ = fmt::to_string(csv);
        output("backtest", "report.csv", report_csv_);
        output("backtest", "report.json", rows.dump(2) + "\n");
    }

    // --------------------------------------------------------- bootstrap
    void run_bootstrap() {
        const auto& bs = config_.bootstrap;
        if (!bs.enabled) return;
        const auto& metrics = inference::all_metrics();
        const std::size_t n_metrics = metrics.size();
        inference::BootstrapOptions options;
        options.block_length = bs.block_length;
        options.replications = bs.replications;
        options.seed = bs.seed;
        options.threads = 1;

        fmt::memory_buffer csv;
        fmt::format_to(std::back_inserter(csv),
                       "pair,model,tau,bp,measure,mean_difference,p_value,mean_difference_temporal,"
                       "p_value_temporal\n");
        auto emit = [&](const std::string& pair, const std::string& model, int tau, double bp,
                        const inference::BootstrapResult& block,
                        const inference::BootstrapResult& meb) {
            fmt::format_to(std::back_inserter(csv), "{},{},{},{},{},{},{},{},{}\n", pair, model, tau,
                           bp, inference::to_string(block.metric), block.mean_difference,
                           block.p_value, meb.mean_difference, meb.p_value);
            ++manifest_.bootstrap_rows;
        };

        // Groups of cells sharing (model, tau, bp) are pooled into "ALL" rows.
        // Every cell uses the same master seed, so replication i draws the same
        // block start for every pair with the same test length.
        const std::size_t n_pairs = pairs_.size();
        const std::size_t n_models = config_.models.size();
        const std::size_t n_taus = config_.taus.size();
        for (std::size_t m = 0; m < n_models; ++m) {
            for (std::size_t t = 0; t < n_taus; ++t) {
                for (double bp : bs.cost_bp) {
                    std::vector<std::array<std::vector<inference::BootstrapResult>, 2>> per_pair(n_pairs);
                    std::array<std::vector<inference::BootstrapResult>, 2> pooled_acc;
                    std::size_t pooled_count = 0;

                    // Pairs run in batches so that at most one batch of full
                    // replication vectors is alive at a time.
                    const std::size_t batch = std::max<std::size_t>(threads_ * 2, 1);
                    for (std::size_t start = 0; start < n_pairs; start += batch) {
                        const std::size_t stop = std::min(n_pairs, start + batch);
                        parallel_for(stop - start, threads_, [&](std::size_t off) {
                            const std::size_t p = start + off;
                            const std::size_t k = (p * n_models + m) * n_taus + t;
                            in_context("bootstrap", cell_label(cells_[k]), [&] {
                                auto& res = results_[k];
                                if (!res.net.contains(bp)) {
                                    for (int meth = 0; meth < 2; ++meth) {
                                        res.net[bp][meth] =
                                            backtest::hedged_returns(
                                                res.r_S, res.r_F, res.path,
                                                meth == 0 ? backtest::Method::standard
                                                          : backtest::Method::robust,
                                                bp_fraction(bp))
                                                .r_net;
                                    }
                                }
                                const auto& net = res.net.at(bp);
                                per_pair[p][0] =
                                    inference::block_bootstrap(net[1], net[0], metrics, options);
                                per_pair[p][1] =
                                    inference::meb_bootstrap(net[1], net[0], metrics, options);
                            });
                        });
                        for (std::size_t p = start; p < stop; ++p) {
                            for (std::size_t scheme = 0; scheme < 2; ++scheme) {
                                auto& acc = pooled_acc[scheme];
                                auto& cur = per_pair[p][scheme];
                                if (acc.empty()) {
                                    acc = cur;
                                } else {
                                    for (std::size_t q = 0; q < n_metrics; ++q) {
                                        if (acc[q].differences.size() != cur[q].differences.size()) {
                                            throw DataError("bootstrap: replication counts differ");
                                        }
                                        acc[q].sample_difference += cur[q].sample_difference;
                                        for (std::size_t r = 0; r < cur[q].differences.size(); ++r) {
                                            acc[q].differences[r] += cur[q].differences[r];
                                        }
                                    }
                                }
                                for (auto& res : cur) {
                                    res.differences.clear();
                                    res.differences.shrink_to_fit();
                                }
                            }
                            ++pooled_count;
                        }
                    }
                    const auto& model = config_.models[m].name;
                    const int tau = config_.taus[t];
                    for (std::size_t p = 0; p < n_pairs; ++p) {
                        for (std::size_t q = 0; q < n_metrics; ++q) {
                            emit(pairs_[p].label, model, tau, bp, per_pair[p][0][q], per_pair[p][1][q]);
                        }
                    }
                    if (pooled_count > 0) {
                        for (auto& acc : pooled_acc) {
                            for (auto& res : acc) {
                                const double c = static_cast<double>(pooled_count);
                                res.sample_difference /= c;
                                for (auto& d : res.differences) d /= c;
                                inference::summarize(res);
                            }
                        }
                        for (std::size_t q = 0; q < n_metrics; ++q) {
                            emit("ALL", model, tau, bp, pooled_acc[0][q], pooled_acc[1][q]);
                        }
                    }
                }
            }
        }
        output("bootstrap", "bootstrap.csv", fmt::to_string(csv));
    }

    // ----------------------------------------------------------- scatter
    void emit_scatter() {
        if (report_csv_.empty()) return;
        output("scatter", "scatter.csv", scatter_csv(report_csv_, ColorKey::pair_correlation));
    }

    void write_manifest() {
        std::sort(manifest_.files.begin(), manifest_.files.end(),
                  [](const ManifestFile& a, const ManifestFile& b) { return a.path < b.path; });
        io::write_atomic(config_.output_dir / "manifest.json", manifest_.to_json());
    }

    PipelineConfig config_;
    Stage last_;
    unsigned threads_;
    RunManifest manifest_;
    std::mutex files_mutex_;

    std::vector<std::string> symbols_;
    std::vector<market_data::IntradayBarSeries> bars_;
    std::vector<SeriesEntry> rv_;
    std::vector<RealizedSeries> ret_;
    std::vector<SeriesEntry> rcv_;
    std::vector<std::pair<std::size_t, std::size_t>> rcv_keys_;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> rcv_index_;
    Date train_end_{};
    Date test_start_{};
    DateRange train_range_{};

    std::vector<std::vector<ArModel>> models_;  // [series][model]
    std::vector<ts_models::AdfResult> adf_;
    std::vector<std::vector<std::vector<ForecastTable>>> forecasts_;  // [series][model][tau]
    std::vector<PairData> pairs_;
    std::vector<CellKey> cells_;
    std::vector<CellResult> results_;
    std::string report_csv_;
};

}  // namespace

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const {
    window.validate();
    if (taus.empty()) throw ConfigError("tau list is empty");
    for (int t : taus) {
        if (t < 1) throw ConfigError(fmt::format("tau must be at least 1, got {}", t));
    }
    if (models.empty()) throw ConfigError("model list is empty");
    std::set<std::string> names;
    for (const auto& m : models) {
        if (m.name.empty()) throw ConfigError("model name is empty");
        if (!names.insert(m.name).second) throw ConfigError(fmt::format("duplicate model '{}'", m.name));
        if (m.kind == ts_models::ModelKind::ar && m.p < 1) {
            throw ConfigError(fmt::format("model '{}': order must be at least 1", m.name));
        }
    }
    for (double bp : cost_bp) {
        if (!(bp >= 0.0)) throw ConfigError("cost_bp values must be non-negative");
    }
    for (double bp : bootstrap.cost_bp) {
        if (!(bp >= 0.0)) throw ConfigError("bootstrap cost_bp values must be non-negative");
    }
    if (bootstrap.replications < 1) throw ConfigError("bootstrap replications must be at least 1");
    if (bootstrap.block_length < 4) throw ConfigError("bootstrap block_length must be at least 4");
    if (train_end && test_start && !(*train_end < *test_start)) {
        throw ConfigError("train_end must precede test_start");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0, 1)");
    }
    if (!(variance_floor > 0.0)) throw ConfigError("variance_floor must be positive");
    if (adf_lags < 0) throw ConfigError("adf_lags must be non-negative");
    if (theta_mode == ts_models::ThetaMode::closed_form &&
        (variance_transform == ts_models::Transform::log ||
         covariance_transform == ts_models::Transform::log)) {
        throw ConfigError(
            "closed_form theta is on the log scale for log fits; use empirical theta or level fits");
    }
    std::set<std::string> known(symbols.begin(), symbols.end());
    if (known.size() != symbols.size()) throw ConfigError("duplicate symbols");
    for (const auto& [s, f] : pairs) {
        if (s == f) throw ConfigError(fmt::format("pair {}:{} hedges a symbol with itself", s, f));
        if (!symbols.empty() && (!known.contains(s) || !known.contains(f))) {
            throw ConfigError(fmt::format("pair {}:{} references an unknown symbol", s, f));
        }
    }
}

int PipelineConfig::tau_max() const {
    return taus.empty() ? 1 : *std::max_element(taus.begin(), taus.end());
}

std::map<std::string, std::string> default_asset_classes() {
    return {{"IVV", "equity"},  {"ICLN", "equity"}, {"QQQM", "equity"}, {"ASHR", "equity"},
            {"EWH", "equity"},  {"IEV", "equity"},  {"CORP", "bond"},   {"IGOV", "bond"},
            {"GOVT", "bond"},   {"BNO", "commodity"}, {"UNG", "commodity"}, {"AAAU", "commodity"},
            {"GSG", "commodity"}};
}

std::vector<std::pair<std::string, std::string>> all_pairs(const std::vector<std::string>& symbols) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : symbols) {
        for (const auto& f : symbols) {
            if (s != f) out.emplace_back(s, f);
        }
    }
    return out;
}

int pair_type(const std::string& hedged, const std::string& hedging) {
    static const std::map<std::pair<std::string, std::string>, int> codes = {
        {{"equity", "equity"}, 1},      {{"bond", "bond"}, 2},         {{"commodity", "commodity"}, 3},
        {{"equity", "bond"}, 4},        {{"equity", "commodity"}, 5},  {{"bond", "equity"}, 6},
        {{"bond", "commodity"}, 7},     {{"commodity", "equity"}, 8},  {{"commodity", "bond"}, 9}};
    const auto it = codes.find({hedged, hedging});
    if (it == codes.end()) {
        throw ConfigError(fmt::format("unknown asset classes '{}', '{}'", hedged, hedging));
    }
    return it->second;
}

PipelineConfig config_from_json(std::string_view text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!kConfigKeys.contains(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
    PipelineConfig c;
    try {
        c.data_dir = resolve(get_or<std::string>(j, "data_dir", "data"), base_dir);
        c.output_dir = resolve(get_or<std::string>(j, "output_dir", "out"), base_dir);
        c.symbols = get_or<std::vector<std::string>>(j, "symbols", {});
        c.asset_classes = default_asset_classes();
        if (j.contains("asset_classes")) {
            for (const auto& [k, v] : j.at("asset_classes").items()) c.asset_classes[k] = v.get<std::string>();
        }
        if (j.contains("pairs")) {
            const auto& p = j.at("pairs");
            if (p.is_string() && p.get<std::string>() == "all") {
                c.pairs = all_pairs(c.symbols);
            } else if (p.is_array()) {
                for (const auto& item : p) c.pairs.push_back(parse_pair(item));
            } else {
                throw ConfigError("pairs must be \"all\" or a list");
            }
        }
        if (j.contains("window")) {
            const auto& w = j.at("window");
            for (const auto& [k, v] : w.items()) {
                if (k != "start" && k != "end" && k != "interval_minutes") {
                    throw ConfigError(fmt::format("unknown window key '{}'", k));
                }
            }
            c.window.start_minute = market_data::parse_clock(get_or<std::string>(w, "start", "10:00"));
            c.window.end_minute = market_data::parse_clock(get_or<std::string>(w, "end", "15:30"));
            c.window.interval_minutes = get_or<int>(w, "interval_minutes", 5);
        }
        c.missing_day_policy = parse_policy(get_or<std::string>(j, "missing_day_policy", "drop"));
        if (j.contains("models")) {
            c.models.clear();
            for (const auto& m : j.at("models")) {
                ModelSpec spec;
                const auto kind = get_or<std::string>(m, "kind", "ar");
                if (kind == "har") {
                    spec.kind = ts_models::ModelKind::har;
                    spec.p = 5;
                } else if (kind == "ar") {
                    spec.p = m.at("p").get<int>();
                } else {
                    throw ConfigError(fmt::format("unknown model kind '{}'", kind));
                }
                spec.name = get_or<std::string>(
                    m, "name", spec.kind == ts_models::ModelKind::har ? "HAR" : fmt::format("AR{}", spec.p));
                c.models.push_back(spec);
            }
        }
        c.variance_transform =
            ts_models::parse_transform(get_or<std::string>(j, "variance_transform", "log"));
        c.covariance_transform =
            ts_models::parse_transform(get_or<std::string>(j, "covariance_transform", "level"));
        if (j.contains("tau")) {
            const auto& t = j.at("tau");
            c.taus = t.is_array() ? t.get<std::vector<int>>() : std::vector<int>{t.get<int>()};
        }
        c.theta_mode = ts_models::parse_theta_mode(get_or<std::string>(j, "theta_mode", "empirical"));
        if (j.contains("cost_bp")) c.cost_bp = j.at("cost_bp").get<std::vector<double>>();
        if (j.contains("delta")) {
            const auto& d = j.at("delta");
            if (d.is_string() && d.get<std::string>() == "quartile") {
                c.delta.reset();
            } else if (d.is_number()) {
                c.delta = d.get<double>();
            } else {
                throw ConfigError("delta must be \"quartile\" or a number");
            }
        }
        if (j.contains("split")) {
            const auto& s = j.at("split");
            for (const auto& [k, v] : s.items()) {
                if (k != "train_end" && k != "test_start" && k != "train_fraction") {
                    throw ConfigError(fmt::format("unknown split key '{}'", k));
                }
            }
            if (s.contains("train_end")) c.train_end = parse_date(s.at("train_end").get<std::string>());
            if (s.contains("test_start")) c.test_start = parse_date(s.at("test_start").get<std::string>());
            c.train_fraction = get_or<double>(s, "train_fraction", 0.5);
        }
        if (j.contains("bootstrap")) {
            const auto& b = j.at("bootstrap");
            for (const auto& [k, v] : b.items()) {
                if (k != "enabled" && k != "block_length" && k != "replications" && k != "seed" &&
                    k != "cost_bp") {
                    throw ConfigError(fmt::format("unknown bootstrap key '{}'", k));
                }
            }
            c.bootstrap.enabled = get_or<bool>(b, "enabled", true);
            c.bootstrap.block_length = get_or<std::size_t>(b, "block_length", 250);
            c.bootstrap.replications = get_or<std::size_t>(b, "replications", 10000);
            c.bootstrap.seed = get_or<std::uint64_t>(b, "seed", c.bootstrap.seed);
            if (b.contains("cost_bp")) c.bootstrap.cost_bp = b.at("cost_bp").get<std::vector<double>>();
        }
        c.variance_floor = get_or<double>(j, "variance_floor", 1e-12);
        c.adf_lags = get_or<int>(j, "adf_lags", 1);
        c.threads = get_or<unsigned>(j, "threads", 0);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config: {}", e.what()));
    } catch (const DataError& e) {
        throw ConfigError(fmt::format("config: {}", e.what()));
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(text, path.parent_path());
}

namespace {

// Everything that changes results. Output location and thread count do not,
// so they stay out of the hash.
json canonical(const PipelineConfig& c) {
    json j;
    j["data_dir"] = c.data_dir.generic_string();
    j["symbols"] = c.symbols;
    json pairs = json::array();
    for (const auto& [s, f] : c.pairs) pairs.push_back({s, f});
    j["pairs"] = pairs;
    j["asset_classes"] = c.asset_classes;
    j["window"] = {{"start", clock_text(c.window.start_minute)},
                   {"end", clock_text(c.window.end_minute)},
                   {"interval_minutes", c.window.interval_minutes}};
    j["missing_day_policy"] = to_string(c.missing_day_policy);
    json models = json::array();
    for (const auto& m : c.models) {
        models.push_back({{"name", m.name}, {"kind", ts_models::to_string(m.kind)}, {"p", m.p}});
    }
    j["models"] = models;
    j["variance_transform"] = ts_models::to_string(c.variance_transform);
    j["covariance_transform"] = ts_models::to_string(c.covariance_transform);
    j["tau"] = c.taus;
    j["theta_mode"] = ts_models::to_string(c.theta_mode);
    j["cost_bp"] = c.cost_bp;
    j["delta"] = c.delta ? json(*c.delta) : json("quartile");
    json split = {{"train_fraction", c.train_fraction}};
    if (c.train_end) split["train_end"] = format_date(*c.train_end);
    if (c.test_start) split["test_start"] = format_date(*c.test_start);
    j["split"] = split;
    j["bootstrap"] = {{"enabled", c.bootstrap.enabled},
                      {"block_length", c.bootstrap.block_length},
                      {"replications", c.bootstrap.replications},
                      {"seed", c.bootstrap.seed},
                      {"cost_bp", c.bootstrap.cost_bp}};
    j["variance_floor"] = c.variance_floor;
    j["adf_lags"] = c.adf_lags;
    return j;
}

}  // namespace

std::string config_to_json(const PipelineConfig& config) {
    auto j = canonical(config);
    j["output_dir"] = config.output_dir.generic_string();
    j["threads"] = config.threads;
    return j.dump(2) + "\n";
}

std::string config_hash(const PipelineConfig& config) { return io::sha256_hex(canonical(config).dump()); }

Stage parse_stage(std::string_view s) {
    if (s == "ingest") return Stage::ingest;
    if (s == "fit") return Stage::fit;
    if (s == "forecast") return Stage::forecast;
    if (s == "hedge") return Stage::hedge;
    if (s == "backtest") return Stage::backtest;
    if (s == "bootstrap") return Stage::bootstrap;
    if (s == "run" || s == "all") return Stage::all;
    throw ConfigError(fmt::format("unknown stage '{}'", s));
}

std::string to_string(Stage s) {
    switch (s) {
        case Stage::ingest: return "ingest";
        case Stage::fit: return "fit";
        case Stage::forecast: return "forecast";
        case Stage::hedge: return "hedge";
        case Stage::backtest: return "backtest";
        case Stage::bootstrap: return "bootstrap";
        case Stage::all: return "all";
    }
    return "unknown";
}

std::string RunManifest::to_json() const {
    json j;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["seed"] = seed;
    j["split"] = {{"train_end", train_end}, {"test_start", test_start}};
    json files_json = json::array();
    for (const auto& f : files) {
        files_json.push_back({{"stage", f.stage}, {"path", f.path}, {"rows", f.rows}, {"sha256", f.sha256}});
    }
    j["files"] = files_json;
    j["metric_rows"] = metric_rows;
    j["bootstrap_rows"] = bootstrap_rows;
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

RunManifest run_pipeline(const PipelineConfig& config, Stage last) { return Runner(config, last).run(); }

ColorKey parse_color_key(std::string_view s) {
    if (s == "pair_correlation" || s == "rho") return ColorKey::pair_correlation;
    if (s == "pair_type") return ColorKey::pair_type;
    throw ConfigError(fmt::format("unknown color key '{}'", s));
}

std::string scatter_csv(std::string_view report_csv, ColorKey key) {
    std::istringstream in{std::string(report_csv)};
    std::string line;
    if (!std::getline(in, line)) throw DataError("scatter: report is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    auto col = [&](std::string_view name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(fmt::format("scatter: report has no '{}' column", name));
        return static_cast<std::size_t>(it - header.begin());
    };
    static const std::vector<std::string> metrics = {"he",     "he_c",         "he_r",  "pnl", "sharpe",
                                                     "omega",  "max_drawdown", "var95", "es95"};
    const std::size_t c_pair = col("pair");
    const std::size_t c_model = col("model");
    const std::size_t c_tau = col("tau");
    const std::size_t c_bp = col("bp");
    const std::size_t c_method = col("method");
    const std::size_t c_color = col(key == ColorKey::pair_type ? "pair_type" : "rho");
    std::vector<std::size_t> c_metrics;
    for (const auto& m : metrics) c_metrics.push_back(col(m));

    // (pair, model, tau, bp) -> [standard, robust] rows, in first-seen order.
    std::vector<std::string> order;
    std::map<std::string, std::array<std::optional<std::vector<std::string>>, 2>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size()) {
            throw DataError(fmt::format("scatter: report line {} has {} columns, expected {}", line_no,
                                        cells.size(), header.size()));
        }
        const std::string key_text = fmt::format("{},{},{},{}", cells[c_pair], cells[c_model],
                                                 cells[c_tau], cells[c_bp]);
        const int slot = cells[c_method] == "robust" ? 1 : cells[c_method] == "standard" ? 0 : -1;
        if (slot < 0) throw DataError(fmt::format("scatter: unknown method '{}'", cells[c_method]));
        if (!rows.contains(key_text)) order.push_back(key_text);
        rows[key_text][slot] = std::move(cells);
    }

    fmt::memory_buffer out;
    fmt::format_to(std::back_inserter(out), "pair,model,tau,bp,metric,x_standard,y_robust,{}\n",
                   key == ColorKey::pair_type ? "pair_type" : "rho");
    for (const auto& k : order) {
        const auto& pair = rows.at(k);
        if (!pair[0] || !pair[1]) {
            throw DataError(fmt::format("scatter: missing {} report for {}", pair[0] ? "robust" : "standard", k));
        }
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            fmt::format_to(std::back_inserter(out), "{},{},{},{},{}\n", k, metrics[m],
                           (*pair[0])[c_metrics[m]], (*pair[1])[c_metrics[m]], (*pair[0])[c_color]);
        }
    }
    return fmt::to_string(out);
}

}  // namespace rhedge::pipeline
