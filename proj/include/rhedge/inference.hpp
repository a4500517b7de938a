#pragma once

#include "rhedge/core.hpp"
#include "rhedge/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rhedge::inference {

enum class Metric { pnl, sharpe, omega, max_drawdown, var95, es95 };
enum class Scheme { random_block, max_entropy };

[[nodiscard]] const std::vector<Metric>& all_metrics();
[[nodiscard]] std::string to_string(Metric m);
[[nodiscard]] std::string to_string(Scheme s);
[[nodiscard]] Metric parse_metric(std::string_view s);

/// Metric on a return series; NaN where the metric is undefined.
[[nodiscard]] double metric_value(Metric m, std::span<const double> r) noexcept;

struct BootstrapOptions {
    std::size_t block_length = 250;
    std::size_t replications = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct BootstrapResult {
    Metric metric = Metric::pnl;
    Scheme scheme = Scheme::random_block;
    double mean_difference = 0.0;
    double p_value = 0.0;
    double sample_difference = 0.0;  // metric(robust) - metric(standard), full sample
    std::size_t replications = 0;
    std::size_t valid_replications = 0;
    std::size_t block_length = 0;
    std::vector<double> differences;  // per replication, robust - standard
};

/// Share of differences whose sign opposes `sample`; zeros agree.
[[nodiscard]] double sign_p_value(std::span<const double> differences, double sample);

/// Fills mean_difference, p_value and valid_replications from `differences`.
void summarize(BootstrapResult& result);

/// Random contiguous blocks; each replication draws one start shared by all
/// metrics and both series.
[[nodiscard]] std::vector<BootstrapResult> block_bootstrap(std::span<const double> r_robust,
                                                           std::span<const double> r_standard,
                                                           std::span<const Metric> metrics,
                                                           const BootstrapOptions& options);
[[nodiscard]] BootstrapResult block_bootstrap(std::span<const double> r_robust,
                                              std::span<const double> r_standard, Metric metric,
                                              const BootstrapOptions& options);

/// Sorted values, their time positions, interval end points z_0..z_n and the
/// per-interval shifts that make each interval mean match its target.
struct MebSkeleton {
    std::vector<std::size_t> order;
    std::vector<double> z;
    std::vector<double> shift;
    bool constant = false;
    std::vector<double> original;  // kept for constant series
};

[[nodiscard]] MebSkeleton meb_skeleton(std::span<const double> x);

/// n sorted uniforms on (0, 1) from normalized exponential spacings.
void sorted_uniforms(SplitMix64& rng, std::size_t n, std::vector<double>& out);

/// Maps sorted uniforms through the maximum-entropy quantile function and
/// places the results in the original's rank order.
void meb_replicate(const MebSkeleton& skeleton, std::span<const double> sorted_u,
                   std::vector<double>& out);

struct MebReplicate {
    std::vector<double> values;
    bool constant = false;
};

[[nodiscard]] MebReplicate meb_replicate(std::span<const double> x, std::uint64_t seed);

/// Random block, then a maximum-entropy replicate of each series in the
/// block built from the same uniforms.
[[nodiscard]] std::vector<BootstrapResult> meb_bootstrap(std::span<const double> r_robust,
                                                         std::span<const double> r_standard,
                                                         std::span<const Metric> metrics,
                                                         const BootstrapOptions& options);
[[nodiscard]] BootstrapResult meb_bootstrap(std::span<const double> r_robust,
                                            std::span<const double> r_standard, Metric metric,
                                            const BootstrapOptions& options);

/// Averages per-replication differences across results for the same metric
/// and scheme; the reference sign is the mean of the sample differences.
[[nodiscard]] BootstrapResult pool(std::span<const BootstrapResult> results);

}  // namespace rhedge::inference
