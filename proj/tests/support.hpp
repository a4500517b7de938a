#pragma once

// Simulation helpers shared by the unit and acceptance tests. They only use
// the RNG from the library, so every oracle here is independent of the code
// under test.

#include "rhedge/rng.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace testsupport {

// y_t = c + sum phi_k y_{t-k} + sigma eps_t, started at the mean and burned in.
inline std::vector<double> simulate_ar(double c, const std::vector<double>& phi, double sigma,
                                       std::size_t n, std::uint64_t seed,
                                       std::size_t burn = 1000) {
    rhedge::SplitMix64 rng(seed);
    const double sum_phi = std::accumulate(phi.begin(), phi.end(), 0.0);
    const double mu = std::abs(1.0 - sum_phi) > 1e-12 ? c / (1.0 - sum_phi) : 0.0;
    const std::size_t p = phi.size();
    std::vector<double> y(n + burn + p, mu);
    for (std::size_t t = p; t < y.size(); ++t) {
        double v = c + sigma * rng.normal();
        for (std::size_t k = 0; k < p; ++k) v += phi[k] * y[t - 1 - k];
        y[t] = v;
    }
    return {y.end() - static_cast<std::ptrdiff_t>(n), y.end()};
}

inline double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double covariance(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x);
    const double my = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size() - 1);
}

}  // namespace testsupport
