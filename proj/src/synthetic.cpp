#include "rhedge/synthetic.hpp"

#include "rhedge/io.hpp"
#include "rhedge/rng.hpp"

#include <cmath>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <set>

#include <fmt/format.h>
#include "json.hpp"

namespace rhedge::synthetic {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_process(const LogAr1& p, const std::string& what, bool allow_nonstationary) {
    if (!std::isfinite(p.intercept) || !std::isfinite(p.phi) || !(p.sigma >= 0.0)) {
        throw ConfigError(fmt::format("synthetic spec: invalid parameters for {}", what));
    }
    if (!allow_nonstationary && !(std::abs(p.phi) < 1.0)) {
        throw ConfigError(fmt::format("synthetic spec: {} is not stationary (phi = {})", what, p.phi));
    }
}

class LogAr1Path {
public:
    LogAr1Path(const LogAr1& p, SplitMix64& rng) : p_(p) {
        x_ = std::abs(p.phi) < 1.0 ? p.mean() + p.sigma / std::sqrt(1.0 - p.phi * p.phi) * rng.normal()
                                   : p.intercept;
    }
    double variance() const { return std::exp(x_); }
    void step(SplitMix64& rng) { x_ = p_.intercept + p_.phi * x_ + p_.sigma * rng.normal(); }

private:
    LogAr1 p_;
    double x_ = 0.0;
};

// For a symbol driven by the global factor alone, RV_t = b^2 exp(x_t) C_t
// with C_t ~ chi2(M)/M independent of x. log RV is then AR(1) plus white
// noise, and a least-squares AR(1) fit converges to the projection below.
json log_rv_projection(const SyntheticSpec& spec, double loading) {
    const auto& g = spec.global;
    const double half_m = 0.5 * spec.window.interval_count();
    const double noise_mean = boost::math::digamma(half_m) - std::log(half_m);
    const double noise_var = boost::math::trigamma(half_m);
    const double latent_var = g.sigma * g.sigma / (1.0 - g.phi * g.phi);
    const double total_var = latent_var + noise_var;
    const double phi = g.phi * latent_var / total_var;
    const double mean = g.mean() + std::log(loading * loading) + noise_mean;
    return {{"intercept", mean * (1.0 - phi)},
            {"phi", phi},
            {"noise_variance", total_var * (1.0 - phi * phi)},
            {"latent_phi", g.phi},
            {"sampling_noise_variance", noise_var}};
}

json process_json(const LogAr1& p) {
    return {{"intercept", p.intercept}, {"phi", p.phi}, {"sigma", p.sigma}};
}

}  // namespace

void SyntheticSpec::validate() const {
    window.validate();
    check_process(global, "global factor", allow_nonstationary);
    for (const auto& [name, p] : class_factors) {
        check_process(p, fmt::format("class factor '{}'", name), allow_nonstationary);
    }
    std::set<std::string> names;
    std::size_t idio = 0;
    for (const auto& s : symbols) {
        if (s.name.empty()) throw ConfigError("synthetic spec: empty symbol name");
        if (!names.insert(s.name).second) {
            throw ConfigError(fmt::format("synthetic spec: duplicate symbol '{}'", s.name));
        }
        if (s.class_loading != 0.0 && !class_factors.contains(s.asset_class)) {
            throw ConfigError(fmt::format("synthetic spec: no factor for class '{}' of {}",
                                          s.asset_class, s.name));
        }
        if (s.idiosyncratic) {
            check_process(*s.idiosyncratic, fmt::format("idiosyncratic term of {}", s.name),
                          allow_nonstationary);
            ++idio;
        }
    }
    const std::size_t components = 1 + class_factors.size() + idio;
    if (components > static_cast<std::size_t>(window.interval_count())) {
        throw ConfigError(fmt::format("synthetic spec: {} factors exceed {} intervals per day",
                                      components, window.interval_count()));
    }
    if (!(initial_price > 0.0)) throw ConfigError("synthetic spec: initial price must be positive");
}

SyntheticSpec default_universe(std::size_t n_days, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_days = n_days;
    spec.seed = seed;
    spec.global = LogAr1::from_mean(std::log(1.0e-4), 0.97, 0.20);
    spec.class_factors["equity"] = LogAr1::from_mean(std::log(0.5e-4), 0.90, 0.30);
    spec.class_factors["bond"] = LogAr1::from_mean(std::log(0.1e-4), 0.90, 0.25);
    spec.class_factors["commodity"] = LogAr1::from_mean(std::log(1.5e-4), 0.92, 0.30);

    auto idio = [](double scale) { return LogAr1::from_mean(std::log(scale * 1e-5), 0.80, 0.30); };
    // IVV carries the global factor alone so its log RV is an exact AR(1).
    spec.symbols = {
        {"IVV", "equity", 1.00, 0.00, std::nullopt},
        {"ICLN", "equity", 1.10, 0.90, idio(8.0)},
        {"QQQM", "equity", 1.15, 0.60, idio(2.0)},
        {"ASHR", "equity", 0.60, 0.80, idio(10.0)},
        {"EWH", "equity", 0.70, 0.70, idio(6.0)},
        {"IEV", "equity", 0.90, 0.50, idio(3.0)},
        {"CORP", "bond", 0.15, 0.80, idio(0.5)},
        {"IGOV", "bond", 0.05, 0.70, idio(0.8)},
        {"GOVT", "bond", -0.10, 1.00, idio(0.3)},
        {"BNO", "commodity", 0.50, 1.10, idio(12.0)},
        {"UNG", "commodity", 0.30, 0.60, idio(30.0)},
        {"AAAU", "commodity", 0.10, 0.40, idio(5.0)},
        {"GSG", "commodity", 0.45, 0.90, idio(4.0)},
    };
    return spec;
}

SyntheticSpec two_instrument(std::size_t n_days, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_days = n_days;
    spec.seed = seed;
    spec.global = LogAr1::from_mean(std::log(1.0e-4), 0.95, 0.25);
    spec.symbols = {
        {"S", "equity", 1.0, 0.0, LogAr1::from_mean(std::log(4e-5), 0.85, 0.30)},
        {"F", "equity", 0.9, 0.0, LogAr1::from_mean(std::log(2e-5), 0.85, 0.30)},
    };
    return spec;
}

std::vector<Date> weekday_calendar(Date start, std::size_t n) {
    using std::chrono::sys_days;
    using std::chrono::weekday;
    std::vector<Date> dates;
    dates.reserve(n);
    sys_days d{start};
    while (dates.size() < n) {
        const weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) dates.emplace_back(d);
        d += std::chrono::days{1};
    }
    return dates;
}

SyntheticData simulate(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t n_sym = spec.symbols.size();
    const auto M = static_cast<std::size_t>(spec.window.interval_count());

    SyntheticData data;
    data.dates = weekday_calendar(spec.start_date, spec.n_days);
    data.target_variance.assign(n_sym, std::vector<double>(spec.n_days));
    data.bars.resize(n_sym);
    for (std::size_t i = 0; i < n_sym; ++i) {
        data.bars[i].symbol = spec.symbols[i].name;
        data.bars[i].window = spec.window;
        data.bars[i].days.reserve(spec.n_days);
    }

    SplitMix64 factor_rng(derive_seed(spec.seed, 0));
    SplitMix64 intraday_rng(derive_seed(spec.seed, 1));

    // Component layout: global, then class factors in map order, then the
    // idiosyncratic terms in symbol order.
    std::vector<LogAr1Path> paths;
    paths.emplace_back(spec.global, factor_rng);
    std::map<std::string, std::size_t> class_index;
    for (const auto& [name, p] : spec.class_factors) {
        class_index[name] = paths.size();
        paths.emplace_back(p, factor_rng);
    }
    std::vector<std::optional<std::size_t>> idio_index(n_sym);
    for (std::size_t i = 0; i < n_sym; ++i) {
        if (spec.symbols[i].idiosyncratic) {
            idio_index[i] = paths.size();
            paths.emplace_back(*spec.symbols[i].idiosyncratic, factor_rng);
        }
    }
    const std::size_t K = paths.size();

    std::vector<double> price(n_sym, spec.initial_price);
    std::vector<double> loading(n_sym * K);
    std::vector<double> q(K * M);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(M));
    for (std::size_t t = 0; t < spec.n_days; ++t) {
        if (t > 0) {
            for (auto& p : paths) p.step(factor_rng);
        }
        std::fill(loading.begin(), loading.end(), 0.0);
        for (std::size_t i = 0; i < n_sym; ++i) {
            const auto& s = spec.symbols[i];
            double* row = &loading[i * K];
            row[0] = s.global_loading * std::sqrt(paths[0].variance());
            if (s.class_loading != 0.0) {
                const std::size_t c = class_index.at(s.asset_class);
                row[c] = s.class_loading * std::sqrt(paths[c].variance());
            }
            if (idio_index[i]) row[*idio_index[i]] = std::sqrt(paths[*idio_index[i]].variance());
            double var = 0.0;
            for (std::size_t k = 0; k < K; ++k) var += row[k] * row[k];
            data.target_variance[i][t] = var;
        }

        // Brownian increments with per-interval variance 1/M: realized
        // measures are unbiased for the day's covariance but carry the usual
        // finite-sampling noise.
        for (auto& v : q) v = intraday_rng.normal() * inv_sqrt_m;
        for (std::size_t i = 0; i < n_sym; ++i) {
            market_data::DayBars day{data.dates[t], price[i], {}};
            day.bars.reserve(M);
            const double* row = &loading[i * K];
            double p = price[i];
            for (std::size_t m = 0; m < M; ++m) {
                double r = 0.0;
                for (std::size_t k = 0; k < K; ++k) r += row[k] * q[k * M + m];
                p *= std::exp(r);
                day.bars.push_back({static_cast<int>(m), p});
            }
            price[i] = p;
            data.bars[i].days.push_back(std::move(day));
        }
    }
    return data;
}

std::string bar_csv(const market_data::IntradayBarSeries& series) {
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf), "date,time,open,high,low,close,volume\n");
    const auto& w = series.window;
    for (const auto& day : series.days) {
        const std::string date = format_date(day.date);
        double prev = day.anchor_close.value_or(day.bars.empty() ? 0.0 : day.bars.front().close);
        if (day.anchor_close) {
            const double a = *day.anchor_close;
            fmt::format_to(std::back_inserter(buf), "{},{:02d}:{:02d},{:.10g},{:.10g},{:.10g},{:.10g},1000\n",
                           date, w.start_minute / 60, w.start_minute % 60, a, a, a, a);
        }
        for (const auto& bar : day.bars) {
            const int minute = w.start_minute + (bar.interval + 1) * w.interval_minutes;
            fmt::format_to(std::back_inserter(buf), "{},{:02d}:{:02d},{:.10g},{:.10g},{:.10g},{:.10g},1000\n",
                           date, minute / 60, minute % 60, prev, std::max(prev, bar.close),
                           std::min(prev, bar.close), bar.close);
            prev = bar.close;
        }
    }
    return fmt::to_string(buf);
}

std::string truth_json(const SyntheticSpec& spec) {
    json j;
    j["n_days"] = spec.n_days;
    j["seed"] = spec.seed;
    j["start_date"] = format_date(spec.start_date);
    j["global_factor"] = process_json(spec.global);
    j["class_factors"] = json::object();
    for (const auto& [name, p] : spec.class_factors) j["class_factors"][name] = process_json(p);
    j["symbols"] = json::array();
    for (const auto& s : spec.symbols) {
        json entry{{"name", s.name},
                   {"asset_class", s.asset_class},
                   {"global_loading", s.global_loading},
                   {"class_loading", s.class_loading}};
        entry["idiosyncratic"] = s.idiosyncratic ? process_json(*s.idiosyncratic) : json(nullptr);
        if (s.class_loading == 0.0 && !s.idiosyncratic && s.global_loading != 0.0) {
            entry["log_rv_ar1"] = log_rv_projection(spec, s.global_loading);
        }
        j["symbols"].push_back(std::move(entry));
    }
    return j.dump(2) + "\n";
}

std::vector<fs::path> generate_synthetic(const SyntheticSpec& spec, const fs::path& out_dir) {
    const auto data = simulate(spec);
    std::vector<fs::path> written;
    for (const auto& series : data.bars) {
        auto path = out_dir / (series.symbol + ".csv");
        io::write_atomic(path, bar_csv(series));
        written.push_back(std::move(path));
    }
    auto truth = out_dir / "truth.json";
    io::write_atomic(truth, truth_json(spec));
    written.push_back(std::move(truth));
    return written;
}

}  // namespace rhedge::synthetic
