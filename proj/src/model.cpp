#include "fadefuse/model.hpp"

#include "fadefuse/errors.hpp"
#include "fadefuse/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

namespace fadefuse {

SignalPrior::SignalPrior(double variance_theta) : variance_theta_(variance_theta) {
    if (!(variance_theta > 0.0) || !std::isfinite(variance_theta)) {
        throw ConfigError("signal variance must be positive and finite");
    }
}

SensorSite SensorSite::noisy(double gamma, double channel_snr) {
    if (!(gamma > 0.0)) throw ConfigError("observation SNR must be positive");
    return from_inverse(std::isinf(gamma) ? 0.0 : 1.0 / gamma, channel_snr);
}

SensorSite SensorSite::noiseless(double channel_snr) { return from_inverse(0.0, channel_snr); }

SensorSite SensorSite::from_inverse(double gamma_inv, double channel_snr) {
    if (!(gamma_inv >= 0.0) || !std::isfinite(gamma_inv)) {
        throw ConfigError("inverse observation SNR must be finite and nonnegative");
    }
    if (!(channel_snr >= 0.0) || !std::isfinite(channel_snr)) {
        throw ConfigError("channel SNR must be finite and nonnegative");
    }
    return SensorSite(gamma_inv, channel_snr);
}

double SensorSite::gamma() const noexcept {
    return gamma_inv_ == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / gamma_inv_;
}

double merit(const SensorSite& sensor) noexcept {
    return sensor.channel_snr() / (1.0 + sensor.gamma_inv());
}

double transmit_power(double alpha_prime, double gamma) {
    if (!(alpha_prime >= 0.0)) throw ConfigError("amplification budget must be nonnegative");
    if (!(gamma > 0.0)) throw ConfigError("observation SNR must be positive");
    const double gamma_inv = std::isinf(gamma) ? 0.0 : 1.0 / gamma;
    return alpha_prime * (1.0 + gamma_inv);
}

Snapshot::Snapshot(SignalPrior prior, std::span<const SensorSite> sensors) : prior_(prior) {
    gamma_inv_.reserve(sensors.size());
    s_.reserve(sensors.size());
    for (const auto& site : sensors) {
        gamma_inv_.push_back(site.gamma_inv());
        s_.push_back(site.channel_snr());
    }
    validate();
}

Snapshot::Snapshot(SignalPrior prior, std::vector<double> gamma_inv, std::vector<double> channel_snr)
    : prior_(prior), gamma_inv_(std::move(gamma_inv)), s_(std::move(channel_snr)) {
    validate();
}

void Snapshot::validate() const {
    if (s_.empty()) throw ConfigError("a snapshot needs at least one sensor");
    if (gamma_inv_.size() != s_.size()) throw ConfigError("sensor column lengths differ");
    for (std::size_t k = 0; k < s_.size(); ++k) {
        if (!(gamma_inv_[k] >= 0.0) || !std::isfinite(gamma_inv_[k]) || !(s_[k] >= 0.0) || !std::isfinite(s_[k])) {
            throw ConfigError("invalid parameters for sensor " + std::to_string(k));
        }
    }
}

std::vector<double> Snapshot::merits() const {
    std::vector<double> out(size());
    kernels::active().merits(s_, gamma_inv_, out);
    return out;
}

double Snapshot::distortion_floor() const {
    double gamma_sum = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        if (s_[k] <= 0.0) continue;  // a dead channel can never deliver its observation
        if (gamma_inv_[k] == 0.0) return 0.0;
        gamma_sum += 1.0 / gamma_inv_[k];
    }
    if (gamma_sum == 0.0) return std::numeric_limits<double>::infinity();
    return variance_theta() / gamma_sum;
}

Allocation::Allocation(std::vector<double> alpha_prime) : alpha_prime_(std::move(alpha_prime)) {
    for (double a : alpha_prime_) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("allocation entries must be finite and nonnegative");
    }
}

std::vector<double> Allocation::transmit_powers(const Snapshot& snapshot) const {
    if (snapshot.size() != size()) throw ConfigError("allocation length does not match the snapshot");
    std::vector<double> out(size());
    const auto gi = snapshot.gamma_inv();
    for (std::size_t k = 0; k < size(); ++k) out[k] = alpha_prime_[k] * (1.0 + gi[k]);
    return out;
}

double Allocation::total_power(const Snapshot& snapshot) const {
    if (snapshot.size() != size()) throw ConfigError("allocation length does not match the snapshot");
    return kernels::active().transmit_power_sum(alpha_prime_, snapshot.gamma_inv());
}

std::size_t Allocation::active_count() const noexcept {
    std::size_t n = 0;
    for (double a : alpha_prime_) n += a > 0.0 ? 1 : 0;
    return n;
}

double fusion_information(const Snapshot& snapshot, const Allocation& allocation) {
    if (snapshot.size() != allocation.size()) throw ConfigError("allocation length does not match the snapshot");
    return kernels::active().information_sum(allocation.alpha_prime(), snapshot.channel_snr(), snapshot.gamma_inv());
}

double blue_mse(const Snapshot& snapshot, const Allocation& allocation) {
    const double info = fusion_information(snapshot, allocation);
    if (!(info > 0.0)) throw AllPowerZero();
    return snapshot.variance_theta() / info;
}

double blue_mse_matrix_oracle(const Snapshot& snapshot, const Allocation& allocation) {
    if (snapshot.size() != allocation.size()) throw ConfigError("allocation length does not match the snapshot");
    // Physical parameters consistent with (gamma, s, alpha'): unit channel
    // noise, g = s, sigma_k^2 = sigma_theta^2 / gamma, alpha = alpha' / sigma_theta^2.
    const double var_theta = snapshot.variance_theta();
    const double channel_noise = 1.0;
    const auto n = static_cast<Eigen::Index>(snapshot.size());
    Eigen::VectorXd h(n);
    Eigen::MatrixXd noise_cov = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const double gain = snapshot.channel_snr()[idx] * channel_noise;
        const double amplification = allocation[idx] / var_theta;
        const double obs_noise = var_theta * snapshot.gamma_inv()[idx];
        h(k) = std::sqrt(amplification * gain);
        noise_cov(k, k) = obs_noise * amplification * gain + channel_noise;
    }
    const Eigen::VectorXd weighted = noise_cov.ldlt().solve(h);
    const double quad = h.dot(weighted);
    if (!(quad > 0.0)) throw AllPowerZero();
    return 1.0 / quad;
}

Allocation equal_allocation(const Snapshot& snapshot, double total_power) {
    if (!(total_power >= 0.0) || !std::isfinite(total_power)) throw ConfigError("total power must be nonnegative");
    const double share = total_power / static_cast<double>(snapshot.size());
    std::vector<double> alpha(snapshot.size());
    const auto gi = snapshot.gamma_inv();
    for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] = share / (1.0 + gi[k]);
    return Allocation(std::move(alpha));
}

double equal_power_information(const Snapshot& snapshot, double total_power) {
    const double share = total_power / static_cast<double>(snapshot.size());
    return kernels::active().equal_power_information_sum(snapshot.channel_snr(), snapshot.gamma_inv(), share);
}

double equal_power_mse(const Snapshot& snapshot, double total_power) {
    if (!(total_power > 0.0) || !std::isfinite(total_power)) throw ConfigError("total power must be positive");
    const double info = equal_power_information(snapshot, total_power);
    if (!(info > 0.0)) throw AllPowerZero();
    return snapshot.variance_theta() / info;
}

}  // namespace fadefuse
