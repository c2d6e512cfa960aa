#pragma once

// Random network realizations: path loss, Rayleigh fading and observation
// noise, composed into per-sensor (gamma, s).
//
// Channel SNR of sensor k:
//     s_k = G0 |r_k|^2 / (xi^2 d_k^n)
// with |r_k|^2 exponential of mean delta^2 and n = 2 unless configured.

#include "fadefuse/model.hpp"
#include "fadefuse/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fadefuse {

struct PropagationModel {
    double nominal_gain = 1e-3;             ///< G0, linear
    std::vector<double> distances{100.0};   ///< metres; one entry applies to every sensor
    double channel_noise_variance = 1e-12;  ///< xi^2, watts
    double path_loss_exponent = 2.0;

    double distance(std::size_t sensor) const;
    /// Channel SNR for |r|^2 = 1.
    double mean_free_snr(std::size_t sensor) const;
    void validate() const;
};

struct FadingModel {
    enum class Kind { rayleigh, none };
    Kind kind = Kind::rayleigh;
    double mean_power = 1.0;  ///< delta^2 = E|r|^2

    void validate() const;
};

struct ObservationModel {
    enum class Kind { fixed, uniform };
    Kind kind = Kind::fixed;
    /// fixed: one entry for all sensors or one per sensor. 0 means noiseless.
    std::vector<double> noise_variances{0.01};
    /// uniform: sigma_k^2 drawn i.i.d. from [low, high].
    double low = 0.0;
    double high = 0.0;

    void validate() const;
    /// True when gamma is the same deterministic value for every sensor.
    bool homogeneous() const noexcept { return kind == Kind::fixed && noise_variances.size() == 1; }
};

struct ChannelConfig {
    SignalPrior prior{1.0};
    PropagationModel propagation;
    FadingModel fading;
    ObservationModel observation;

    void validate() const;
};

/// Stream positions used by the sampler for sensor k.
constexpr std::uint64_t fading_position(std::size_t sensor) noexcept { return 2 * static_cast<std::uint64_t>(sensor); }
constexpr std::uint64_t observation_position(std::size_t sensor) noexcept {
    return 2 * static_cast<std::uint64_t>(sensor) + 1;
}

/// G0 |r|^2 / (xi^2 d^n) for one sensor.
double sample_channel_snr(const PropagationModel& prop, const FadingModel& fading, std::size_t sensor, const RngStream& rng);

/// 1/gamma_k = sigma_k^2 / sigma_theta^2 for one sensor.
double sample_gamma_inv(const ChannelConfig& config, std::size_t sensor, const RngStream& rng);

Snapshot sample_snapshot(const ChannelConfig& config, std::size_t sensor_count, const RngStream& rng);

/// E[eta] of sensor k, in closed form where the model allows it.
/// Returns NaN when the observation model is random (use an empirical mean).
double analytic_mean_merit(const ChannelConfig& config, std::size_t sensor);

/// Reference scenario: G0 = -30 dB, xi^2 = -90 dBm, d = 100 m,
/// sigma_k^2 = 0.01, sigma_theta^2 = 1, Rayleigh fading with unit mean power.
ChannelConfig reference_setup();

}  // namespace fadefuse
