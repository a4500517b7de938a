#pragma once

#include "rhedge/core.hpp"
#include "rhedge/market_data.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rhedge::synthetic {

/// Log-variance AR(1): x_t = intercept + phi x_{t-1} + sigma eps_t, variance exp(x_t).
struct LogAr1 {
    double intercept = 0.0;
    double phi = 0.0;
    double sigma = 0.0;

    [[nodiscard]] double mean() const { return intercept / (1.0 - phi); }
    [[nodiscard]] static LogAr1 from_mean(double mean, double phi, double sigma) {
        return {mean * (1.0 - phi), phi, sigma};
    }
};

struct SymbolSpec {
    std::string name;
    std::string asset_class;
    double global_loading = 1.0;
    double class_loading = 0.0;
    std::optional<LogAr1> idiosyncratic;
};

/// Daily covariance from a factor model: a global factor, one factor per
/// asset class, and optional idiosyncratic terms, each with its own log-AR(1)
/// variance. Intraday returns are Gaussian increments whose daily covariance
/// equals the factor covariance in expectation.
struct SyntheticSpec {
    std::size_t n_days = 0;
    Date start_date{std::chrono::year{2016}, std::chrono::January, std::chrono::day{4}};
    market_data::TradingWindow window;
    std::uint64_t seed = 1;
    LogAr1 global;
    std::map<std::string, LogAr1> class_factors;
    std::vector<SymbolSpec> symbols;
    double initial_price = 100.0;
    bool allow_nonstationary = false;

    /// Throws ConfigError on an invalid or (unless allowed) non-stationary spec.
    void validate() const;
};

/// The 13-symbol equity/bond/commodity universe.
[[nodiscard]] SyntheticSpec default_universe(std::size_t n_days, std::uint64_t seed);

/// Hedged asset S and hedging instrument F sharing a global factor.
[[nodiscard]] SyntheticSpec two_instrument(std::size_t n_days, std::uint64_t seed);

struct SyntheticData {
    std::vector<Date> dates;
    std::vector<market_data::IntradayBarSeries> bars;
    /// Target daily variance per symbol (same order as the spec).
    std::vector<std::vector<double>> target_variance;
};

/// Weekday calendar of n dates starting at `start` (moved to a weekday).
[[nodiscard]] std::vector<Date> weekday_calendar(Date start, std::size_t n);

[[nodiscard]] SyntheticData simulate(const SyntheticSpec& spec);

/// Bar CSV in the ingestion format.
[[nodiscard]] std::string bar_csv(const market_data::IntradayBarSeries& series);

/// JSON with the spec and, for symbols driven by the global factor alone,
/// the AR(1) projection of log realized variance including sampling noise.
[[nodiscard]] std::string truth_json(const SyntheticSpec& spec);

/// Writes {symbol}.csv for every symbol and truth.json; returns the paths.
std::vector<std::filesystem::path> generate_synthetic(const SyntheticSpec& spec,
                                                      const std::filesystem::path& out_dir);

}  // namespace rhedge::synthetic
