#pragma once

#include "rhedge/backtest.hpp"
#include "rhedge/core.hpp"
#include "rhedge/inference.hpp"
#include "rhedge/market_data.hpp"
#include "rhedge/ts_models.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rhedge::pipeline {

struct ModelSpec {
    std::string name;
    ts_models::ModelKind kind = ts_models::ModelKind::ar;
    int p = 1;
};

struct BootstrapSettings {
    bool enabled = true;
    std::size_t block_length = 250;
    std::size_t replications = 10000;
    std::uint64_t seed = 20240101;
    std::vector<double> cost_bp{5.0};  // basis points
};

struct PipelineConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path output_dir = "out";
    std::vector<std::string> symbols;
    std::vector<std::pair<std::string, std::string>> pairs;  // (hedged, hedging)
    std::map<std::string, std::string> asset_classes;
    market_data::TradingWindow window;
    market_data::MissingDayPolicy missing_day_policy = market_data::MissingDayPolicy::drop;
    std::vector<ModelSpec> models{{"AR1", ts_models::ModelKind::ar, 1},
                                  {"AR5", ts_models::ModelKind::ar, 5}};
    ts_models::Transform variance_transform = ts_models::Transform::log;
    ts_models::Transform covariance_transform = ts_models::Transform::level;
    std::vector<int> taus{1, 10};
    ts_models::ThetaMode theta_mode = ts_models::ThetaMode::empirical;
    std::vector<double> cost_bp{0.0, 5.0, 10.0};  // basis points
    std::optional<double> delta;                    // unset: first quartile of r_S
    std::optional<Date> train_end;
    std::optional<Date> test_start;
    double train_fraction = 0.5;
    BootstrapSettings bootstrap;
    double variance_floor = 1e-12;
    int adf_lags = 1;
    unsigned threads = 0;  // 0: hardware concurrency

    /// Throws ConfigError when the configuration is inconsistent.
    void validate() const;
    [[nodiscard]] int tau_max() const;
};

/// Asset classes of the default 13-symbol universe.
[[nodiscard]] std::map<std::string, std::string> default_asset_classes();

/// Parses JSON text; unknown keys are rejected. `pairs` may be "all".
[[nodiscard]] PipelineConfig config_from_json(std::string_view text,
                                              const std::filesystem::path& base_dir = {});
[[nodiscard]] PipelineConfig load_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, resolved defaults).
[[nodiscard]] std::string config_to_json(const PipelineConfig& config);
/// SHA-256 of the canonical JSON; independent of key order in the input.
[[nodiscard]] std::string config_hash(const PipelineConfig& config);

/// Every ordered pair of distinct symbols.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> all_pairs(
    const std::vector<std::string>& symbols);

/// 1 equity/equity, 2 bond/bond, 3 commodity/commodity, then the mixed
/// (hedged, hedging) combinations: 4 equity/bond, 5 equity/commodity,
/// 6 bond/equity, 7 bond/commodity, 8 commodity/equity, 9 commodity/bond.
[[nodiscard]] int pair_type(const std::string& class_hedged, const std::string& class_hedging);

enum class Stage { ingest = 1, fit, forecast, hedge, backtest, bootstrap, all };

[[nodiscard]] Stage parse_stage(std::string_view s);
[[nodiscard]] std::string to_string(Stage s);

struct ManifestFile {
    std::string stage;
    std::string path;  // relative to output_dir
    std::size_t rows = 0;
    std::string sha256;
};

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::uint64_t seed = 0;
    std::string train_end;
    std::string test_start;
    std::vector<ManifestFile> files;
    std::vector<std::string> warnings;
    std::size_t metric_rows = 0;
    std::size_t bootstrap_rows = 0;

    [[nodiscard]] std::string to_json() const;
};

/// Runs every stage up to `last` and writes its outputs plus manifest.json.
RunManifest run_pipeline(const PipelineConfig& config, Stage last = Stage::all);

enum class ColorKey { pair_correlation, pair_type };

[[nodiscard]] ColorKey parse_color_key(std::string_view s);

/// Scatter rows (standard metric vs robust metric per pair) from report.csv text.
[[nodiscard]] std::string scatter_csv(std::string_view report_csv, ColorKey key);

}  // namespace rhedge::pipeline
