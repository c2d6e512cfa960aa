#include "fadefuse/channel.hpp"

#include "fadefuse/errors.hpp"
#include "fadefuse/units.hpp"

#include <cmath>
#include <limits>

namespace fadefuse {

double PropagationModel::distance(std::size_t sensor) const {
    return distances.size() == 1 ? distances.front() : distances.at(sensor);
}

double PropagationModel::mean_free_snr(std::size_t sensor) const {
    return nominal_gain / (channel_noise_variance * std::pow(distance(sensor), path_loss_exponent));
}

void PropagationModel::validate() const {
    if (!(nominal_gain > 0.0) || !std::isfinite(nominal_gain)) throw ConfigError("nominal gain must be positive");
    if (distances.empty()) throw ConfigError("at least one sensor distance is required");
    for (double d : distances) {
        if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("sensor distances must be positive");
    }
    if (!(channel_noise_variance > 0.0) || !std::isfinite(channel_noise_variance)) {
        throw ConfigError("channel noise variance must be positive");
    }
    if (!(path_loss_exponent > 0.0) || !std::isfinite(path_loss_exponent)) {
        throw ConfigError("path loss exponent must be positive");
    }
}

void FadingModel::validate() const {
    if (!(mean_power > 0.0) || !std::isfinite(mean_power)) throw ConfigError("fading mean power must be positive");
}

void ObservationModel::validate() const {
    if (kind == Kind::fixed) {
        if (noise_variances.empty()) throw ConfigError("observation noise variance missing");
        for (double v : noise_variances) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("observation noise variances must be nonnegative");
        }
    } else if (!(low > 0.0) || !(high >= low) || !std::isfinite(high)) {
        throw ConfigError("uniform observation noise needs 0 < low <= high");
    }
}

void ChannelConfig::validate() const {
    propagation.validate();
    fading.validate();
    observation.validate();
}

double sample_channel_snr(const PropagationModel& prop, const FadingModel& fading, std::size_t sensor, const RngStream& rng) {
    double power_gain = fading.mean_power;
    if (fading.kind == FadingModel::Kind::rayleigh) power_gain *= rng.exponential(fading_position(sensor));
    return prop.mean_free_snr(sensor) * power_gain;
}

double sample_gamma_inv(const ChannelConfig& config, std::size_t sensor, const RngStream& rng) {
    const auto& obs = config.observation;
    double variance = 0.0;
    if (obs.kind == ObservationModel::Kind::fixed) {
        variance = obs.noise_variances.size() == 1 ? obs.noise_variances.front() : obs.noise_variances.at(sensor);
    } else {
        variance = obs.low + (obs.high - obs.low) * (1.0 - rng.uniform(observation_position(sensor)));
    }
    return variance / config.prior.variance_theta();
}

Snapshot sample_snapshot(const ChannelConfig& config, std::size_t sensor_count, const RngStream& rng) {
    if (sensor_count == 0) throw ConfigError("a snapshot needs at least one sensor");
    std::vector<double> gamma_inv(sensor_count), s(sensor_count);
    for (std::size_t k = 0; k < sensor_count; ++k) {
        s[k] = sample_channel_snr(config.propagation, config.fading, k, rng);
        gamma_inv[k] = sample_gamma_inv(config, k, rng);
    }
    return Snapshot(config.prior, std::move(gamma_inv), std::move(s));
}

double analytic_mean_merit(const ChannelConfig& config, std::size_t sensor) {
    if (config.observation.kind != ObservationModel::Kind::fixed) return std::numeric_limits<double>::quiet_NaN();
    const RngStream unused(0, 0);
    const double gamma_inv = sample_gamma_inv(config, sensor, unused);
    return config.propagation.mean_free_snr(sensor) * config.fading.mean_power / (1.0 + gamma_inv);
}

ChannelConfig reference_setup() {
    ChannelConfig config;
    config.prior = SignalPrior(1.0);
    config.propagation.nominal_gain = db_to_linear(-30.0);
    config.propagation.distances = {100.0};
    config.propagation.channel_noise_variance = dbm_to_watts(-90.0);
    config.propagation.path_loss_exponent = 2.0;
    config.fading = {FadingModel::Kind::rayleigh, 1.0};
    config.observation.kind = ObservationModel::Kind::fixed;
    config.observation.noise_variances = {0.01};
    return config;
}

}  // namespace fadefuse
