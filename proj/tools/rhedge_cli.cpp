// rhedge: robust hedge-ratio pipeline from intraday bars to bootstrap tests.

#include "rhedge/io.hpp"
#include "rhedge/pipeline.hpp"
#include "rhedge/synthetic.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace rhedge;

namespace {

struct RunFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string pairs;
    std::vector<int> tau;
    std::vector<double> bp;
    std::string out;
    std::optional<unsigned> threads;
};

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string& text,
                                                             const std::vector<std::string>& symbols) {
    if (text == "all") return pipeline::all_pairs(symbols);
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
            throw ConfigError(fmt::format("--pairs expects S:F[,S:F...] or 'all', got '{}'", item));
        }
        out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
    }
    return out;
}

pipeline::PipelineConfig resolve_config(const RunFlags& f) {
    auto config = pipeline::load_config(f.config);
    if (f.seed) config.bootstrap.seed = *f.seed;
    if (!f.pairs.empty()) config.pairs = parse_pairs(f.pairs, config.symbols);
    if (!f.tau.empty()) config.taus = f.tau;
    if (!f.bp.empty()) config.cost_bp = f.bp;
    if (!f.out.empty()) config.output_dir = f.out;
    if (f.threads) config.threads = *f.threads;
    config.validate();
    return config;
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config, "Pipeline configuration (JSON)")->required();
    cmd->add_option("--seed", f.seed, "Bootstrap master seed");
    cmd->add_option("--pairs", f.pairs, "Pairs as S:F[,S:F...] or 'all'");
    cmd->add_option("--tau", f.tau, "Forecast horizons")->delimiter(',');
    cmd->add_option("--bp", f.bp, "Transaction costs in basis points")->delimiter(',');
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
}

int exit_code(const Error& e) {
    switch (e.category()) {
        case Error::Category::config: return 1;
        case Error::Category::data: return 2;
        case Error::Category::numeric: return 3;
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust minimum-variance hedging under variance-forecast uncertainty"};
    app.require_subcommand(1);
    app.set_version_flag("--version", RHEDGE_CLI_VERSION);

    RunFlags flags;
    const std::vector<std::pair<std::string, std::string>> stages = {
        {"ingest", "Compute realized variances, covariances and daily returns"},
        {"fit", "Fit variance and covariance models on the training window"},
        {"forecast", "Produce out-of-sample forecasts with uncertainty intervals"},
        {"hedge", "Build standard and robust hedge-ratio paths"},
        {"backtest", "Evaluate hedged portfolios with transaction costs"},
        {"bootstrap", "Bootstrap robust-vs-standard metric differences"},
        {"run", "Run every stage"},
    };
    std::vector<CLI::App*> stage_cmds;
    for (const auto& [name, help] : stages) {
        auto* cmd = app.add_subcommand(name, help);
        add_run_flags(cmd, flags);
        stage_cmds.push_back(cmd);
    }

    std::string synth_out;
    std::size_t synth_days = 2000;
    std::uint64_t synth_seed = 1;
    std::string synth_universe = "default";
    auto* synth = app.add_subcommand("synth", "Write a synthetic intraday dataset");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--days", synth_days, "Number of trading days");
    synth->add_option("--seed", synth_seed, "Random seed");
    synth->add_option("--universe", synth_universe, "default (13 symbols) or pair (S, F)")
        ->check(CLI::IsMember({"default", "pair"}));

    std::string scatter_report;
    std::string scatter_out;
    std::string scatter_key = "pair_correlation";
    auto* scatter = app.add_subcommand("scatter", "Standard-vs-robust scatter data from a report");
    scatter->add_option("--report", scatter_report, "report.csv from a backtest run")->required();
    scatter->add_option("--out", scatter_out, "Output CSV")->required();
    scatter->add_option("--color-key", scatter_key, "pair_correlation or pair_type")
        ->check(CLI::IsMember({"pair_correlation", "pair_type"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        for (std::size_t i = 0; i < stage_cmds.size(); ++i) {
            if (!stage_cmds[i]->parsed()) continue;
            const auto config = resolve_config(flags);
            const auto stage = pipeline::parse_stage(stages[i].first);
            const auto manifest = pipeline::run_pipeline(config, stage);
            fmt::print("{}: {} files, {} metric rows, {} bootstrap rows, {} warnings -> {}\n",
                       stages[i].first, manifest.files.size(), manifest.metric_rows,
                       manifest.bootstrap_rows, manifest.warnings.size(),
                       (config.output_dir / "manifest.json").string());
            return 0;
        }
        if (synth->parsed()) {
            auto spec = synth_universe == "pair" ? synthetic::two_instrument(synth_days, synth_seed)
                                                 : synthetic::default_universe(synth_days, synth_seed);
            const auto files = synthetic::generate_synthetic(spec, synth_out);
            fmt::print("synth: wrote {} files to {}\n", files.size(), synth_out);
            return 0;
        }
        if (scatter->parsed()) {
            const auto report = io::read_file(scatter_report);
            io::write_atomic(scatter_out,
                             pipeline::scatter_csv(report, pipeline::parse_color_key(scatter_key)));
            fmt::print("scatter: wrote {}\n", scatter_out);
            return 0;
        }
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 3;
    }
    return 0;
}
