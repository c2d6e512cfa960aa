// AArch64 only; NEON is baseline there so no runtime check is needed.
#include "kernels_impl.hpp"

#if defined(FADEFUSE_HAVE_NEON)

#include <arm_neon.h>

namespace fadefuse::kernels::detail {

double information_sum_neon(std::span<const double> alpha_prime,
                            std::span<const double> s,
                            std::span<const double> gamma_inv) {
    const std::size_t n = s.size();
    const float64x2_t one = vdupq_n_f64(1.0);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const float64x2_t x = vmulq_f64(vld1q_f64(alpha_prime.data() + k), vld1q_f64(s.data() + k));
        const float64x2_t den = vfmaq_f64(one, vld1q_f64(gamma_inv.data() + k), x);
        acc = vaddq_f64(acc, vdivq_f64(x, den));
    }
    double total = vaddvq_f64(acc);
    for (; k < n; ++k) {
        const double x = alpha_prime[k] * s[k];
        total += x / (gamma_inv[k] * x + 1.0);
    }
    return total;
}

double equal_power_information_sum_neon(std::span<const double> s,
                                        std::span<const double> gamma_inv,
                                        double per_sensor_power) {
    const std::size_t n = s.size();
    const float64x2_t one = vdupq_n_f64(1.0);
    const float64x2_t p = vdupq_n_f64(per_sensor_power);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const float64x2_t gi = vld1q_f64(gamma_inv.data() + k);
        const float64x2_t x = vdivq_f64(vmulq_f64(p, vld1q_f64(s.data() + k)), vaddq_f64(one, gi));
        acc = vaddq_f64(acc, vdivq_f64(x, vfmaq_f64(one, gi, x)));
    }
    double total = vaddvq_f64(acc);
    for (; k < n; ++k) {
        const double x = per_sensor_power * s[k] / (1.0 + gamma_inv[k]);
        total += x / (gamma_inv[k] * x + 1.0);
    }
    return total;
}

void merits_neon(std::span<const double> s, std::span<const double> gamma_inv, std::span<double> out) {
    const std::size_t n = s.size();
    const float64x2_t one = vdupq_n_f64(1.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        vst1q_f64(out.data() + k, vdivq_f64(vld1q_f64(s.data() + k), vaddq_f64(one, vld1q_f64(gamma_inv.data() + k))));
    }
    for (; k < n; ++k) out[k] = s[k] / (1.0 + gamma_inv[k]);
}

double transmit_power_sum_neon(std::span<const double> alpha_prime, std::span<const double> gamma_inv) {
    const std::size_t n = alpha_prime.size();
    const float64x2_t one = vdupq_n_f64(1.0);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(alpha_prime.data() + k), vaddq_f64(one, vld1q_f64(gamma_inv.data() + k)));
    }
    double total = vaddvq_f64(acc);
    for (; k < n; ++k) total += alpha_prime[k] * (1.0 + gamma_inv[k]);
    return total;
}

SandwichSums sandwich_sums_neon(std::span<const double> s,
                                std::span<const double> gamma_inv,
                                double per_sensor_power) {
    const std::size_t n = s.size();
    const float64x2_t one = vdupq_n_f64(1.0);
    const float64x2_t p = vdupq_n_f64(per_sensor_power);
    float64x2_t upper = vdupq_n_f64(0.0);
    float64x2_t corr = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const float64x2_t gi = vld1q_f64(gamma_inv.data() + k);
        const float64x2_t ps = vmulq_f64(p, vld1q_f64(s.data() + k));
        upper = vaddq_f64(upper, vdivq_f64(ps, vaddq_f64(one, gi)));
        corr = vfmaq_f64(corr, vmulq_f64(gi, ps), ps);
    }
    SandwichSums out{vaddvq_f64(upper), vaddvq_f64(corr)};
    for (; k < n; ++k) {
        const double ps = per_sensor_power * s[k];
        out.upper += ps / (1.0 + gamma_inv[k]);
        out.correction += gamma_inv[k] * ps * ps;
    }
    return out;
}

}  // namespace fadefuse::kernels::detail

#endif
