#pragma once

#include "fadefuse/model.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

inline double log_uniform(std::mt19937_64& gen, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(gen));
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

struct SnapshotShape {
    double gamma_lo = 0.5, gamma_hi = 500.0;
    double s_lo = 0.05, s_hi = 20.0;
    double noiseless_chance = 0.0;
};

inline fadefuse::Snapshot random_snapshot(std::mt19937_64& gen, std::size_t k, const SnapshotShape& shape = {}) {
    std::bernoulli_distribution noiseless(shape.noiseless_chance);
    std::vector<double> gamma_inv(k), s(k);
    for (std::size_t i = 0; i < k; ++i) {
        gamma_inv[i] = noiseless(gen) ? 0.0 : 1.0 / log_uniform(gen, shape.gamma_lo, shape.gamma_hi);
        s[i] = log_uniform(gen, shape.s_lo, shape.s_hi);
    }
    return fadefuse::Snapshot(fadefuse::SignalPrior(log_uniform(gen, 0.1, 10.0)), std::move(gamma_inv), std::move(s));
}

inline fadefuse::Snapshot make_snapshot(double variance, std::vector<double> gamma, std::vector<double> s) {
    std::vector<double> gamma_inv(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma_inv[i] = std::isinf(gamma[i]) ? 0.0 : 1.0 / gamma[i];
    return fadefuse::Snapshot(fadefuse::SignalPrior(variance), std::move(gamma_inv), std::move(s));
}

/// Information r delivered by transmit power p.
inline double info_at_power(double p, double gamma_inv, double s) {
    const double pe = p * s / (1.0 + gamma_inv);
    return pe / (gamma_inv * pe + 1.0);
}

/// Transmit power needed to deliver information r (r < gamma).
inline double power_for_info(double r, double gamma_inv, double s) {
    return (1.0 + gamma_inv) * r / (s * (1.0 - r * gamma_inv));
}

}  // namespace testing
