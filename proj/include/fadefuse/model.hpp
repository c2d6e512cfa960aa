#pragma once

// Signal, sensor and channel data model plus the BLUE fusion distortion.
//
// Conventions used throughout the library:
//   gamma  observation SNR sigma_theta^2 / sigma_k^2 (dimensionless)
//   s      channel SNR g_k / xi_k^2 (1/W)
//   eta    merit s / (1 + 1/gamma)
//   alpha' per-sensor amplification budget (W); transmit power is
//          alpha' (1 + 1/gamma).
// A noiseless sensor is stored with 1/gamma == 0 exactly.

#include <cstddef>
#include <span>
#include <vector>

namespace fadefuse {

class SignalPrior {
public:
    explicit SignalPrior(double variance_theta);

    double variance_theta() const noexcept { return variance_theta_; }

private:
    double variance_theta_;
};

class SensorSite {
public:
    /// Sensor with finite observation SNR gamma > 0.
    static SensorSite noisy(double gamma, double channel_snr);
    /// Sensor whose observation is exact (1/gamma = 0).
    static SensorSite noiseless(double channel_snr);
    /// Builds from the stored inverse SNR; 0 means noiseless.
    static SensorSite from_inverse(double gamma_inv, double channel_snr);

    bool is_noiseless() const noexcept { return gamma_inv_ == 0.0; }
    /// +infinity for a noiseless sensor.
    double gamma() const noexcept;
    double gamma_inv() const noexcept { return gamma_inv_; }
    double channel_snr() const noexcept { return s_; }

private:
    SensorSite(double gamma_inv, double s) : gamma_inv_(gamma_inv), s_(s) {}

    double gamma_inv_;
    double s_;
};

/// One realization of the network. Sensors are stored column-wise so the
/// fusion kernels can stream over them.
class Snapshot {
public:
    Snapshot(SignalPrior prior, std::span<const SensorSite> sensors);
    Snapshot(SignalPrior prior, std::vector<double> gamma_inv, std::vector<double> channel_snr);

    const SignalPrior& prior() const noexcept { return prior_; }
    double variance_theta() const noexcept { return prior_.variance_theta(); }
    std::size_t size() const noexcept { return s_.size(); }
    SensorSite sensor(std::size_t k) const { return SensorSite::from_inverse(gamma_inv_.at(k), s_.at(k)); }

    std::span<const double> gamma_inv() const noexcept { return gamma_inv_; }
    std::span<const double> channel_snr() const noexcept { return s_; }

    /// Merits of all sensors, in sensor order.
    std::vector<double> merits() const;
    /// sigma_theta^2 / sum(gamma_k): the distortion no finite power can beat.
    /// Zero when any sensor with a usable channel is noiseless.
    double distortion_floor() const;

private:
    void validate() const;

    SignalPrior prior_;
    std::vector<double> gamma_inv_;
    std::vector<double> s_;
};

class Allocation {
public:
    Allocation() = default;
    explicit Allocation(std::vector<double> alpha_prime);

    std::size_t size() const noexcept { return alpha_prime_.size(); }
    std::span<const double> alpha_prime() const noexcept { return alpha_prime_; }
    double operator[](std::size_t k) const { return alpha_prime_.at(k); }

    std::vector<double> transmit_powers(const Snapshot& snapshot) const;
    double total_power(const Snapshot& snapshot) const;
    std::size_t active_count() const noexcept;

private:
    std::vector<double> alpha_prime_;
};

double merit(const SensorSite& sensor) noexcept;

/// alpha' (1 + 1/gamma). Pass gamma = +infinity for a noiseless sensor.
double transmit_power(double alpha_prime, double gamma);

/// sum_k alpha'_k s_k / (alpha'_k s_k / gamma_k + 1); zero when nothing
/// reaches the fusion center.
double fusion_information(const Snapshot& snapshot, const Allocation& allocation);

/// BLUE variance sigma_theta^2 / fusion_information. Throws AllPowerZero when
/// the information sum vanishes.
double blue_mse(const Snapshot& snapshot, const Allocation& allocation);

/// Same quantity as blue_mse, computed by assembling the gain vector h and the
/// diagonal noise covariance R of the received signal and evaluating
/// [h^T R^-1 h]^-1 directly. Kept as an independent route for testing.
double blue_mse_matrix_oracle(const Snapshot& snapshot, const Allocation& allocation);

/// Every sensor transmits total_power / K.
Allocation equal_allocation(const Snapshot& snapshot, double total_power);

/// Equal-power distortion. Per sensor the information term reduces to
/// P s / (P s / gamma + K (1 + 1/gamma)).
double equal_power_mse(const Snapshot& snapshot, double total_power);

/// Information sum under equal power; zero when every channel is dead.
double equal_power_information(const Snapshot& snapshot, double total_power);

}  // namespace fadefuse
