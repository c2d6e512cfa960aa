#include "kernels_impl.hpp"

namespace fadefuse::kernels::detail {

double information_sum_scalar(std::span<const double> alpha_prime,
                              std::span<const double> s,
                              std::span<const double> gamma_inv) {
    double total = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double x = alpha_prime[k] * s[k];
        total += x / (gamma_inv[k] * x + 1.0);
    }
    return total;
}

double equal_power_information_sum_scalar(std::span<const double> s,
                                          std::span<const double> gamma_inv,
                                          double per_sensor_power) {
    double total = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double x = per_sensor_power * s[k] / (1.0 + gamma_inv[k]);
        total += x / (gamma_inv[k] * x + 1.0);
    }
    return total;
}

void merits_scalar(std::span<const double> s, std::span<const double> gamma_inv, std::span<double> out) {
    for (std::size_t k = 0; k < s.size(); ++k) out[k] = s[k] / (1.0 + gamma_inv[k]);
}

double transmit_power_sum_scalar(std::span<const double> alpha_prime, std::span<const double> gamma_inv) {
    double total = 0.0;
    for (std::size_t k = 0; k < alpha_prime.size(); ++k) total += alpha_prime[k] * (1.0 + gamma_inv[k]);
    return total;
}

SandwichSums sandwich_sums_scalar(std::span<const double> s,
                                  std::span<const double> gamma_inv,
                                  double per_sensor_power) {
    SandwichSums out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double ps = per_sensor_power * s[k];
        out.upper += ps / (1.0 + gamma_inv[k]);
        out.correction += gamma_inv[k] * ps * ps;
    }
    return out;
}

}  // namespace fadefuse::kernels::detail
