// Compiled with -mavx2 -mfma; only called after a runtime CPU check.
#include "kernels_impl.hpp"

#include <immintrin.h>

namespace fadefuse::kernels::detail {

namespace {

inline double horizontal_sum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double information_sum_avx2(std::span<const double> alpha_prime,
                            std::span<const double> s,
                            std::span<const double> gamma_inv) {
    const std::size_t n = s.size();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d x = _mm256_mul_pd(_mm256_loadu_pd(alpha_prime.data() + k), _mm256_loadu_pd(s.data() + k));
        const __m256d den = _mm256_fmadd_pd(_mm256_loadu_pd(gamma_inv.data() + k), x, one);
        acc = _mm256_add_pd(acc, _mm256_div_pd(x, den));
    }
    double total = horizontal_sum(acc);
    for (; k < n; ++k) {
        const double x = alpha_prime[k] * s[k];
        total += x / (gamma_inv[k] * x + 1.0);
    }
    return total;
}

double equal_power_information_sum_avx2(std::span<const double> s,
                                        std::span<const double> gamma_inv,
                                        double per_sensor_power) {
    const std::size_t n = s.size();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d p = _mm256_set1_pd(per_sensor_power);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d gi = _mm256_loadu_pd(gamma_inv.data() + k);
        const __m256d x = _mm256_div_pd(_mm256_mul_pd(p, _mm256_loadu_pd(s.data() + k)), _mm256_add_pd(one, gi));
        acc = _mm256_add_pd(acc, _mm256_div_pd(x, _mm256_fmadd_pd(gi, x, one)));
    }
    double total = horizontal_sum(acc);
    for (; k < n; ++k) {
        const double x = per_sensor_power * s[k] / (1.0 + gamma_inv[k]);
        total += x / (gamma_inv[k] * x + 1.0);
    }
    return total;
}

void merits_avx2(std::span<const double> s, std::span<const double> gamma_inv, std::span<double> out) {
    const std::size_t n = s.size();
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d den = _mm256_add_pd(one, _mm256_loadu_pd(gamma_inv.data() + k));
        _mm256_storeu_pd(out.data() + k, _mm256_div_pd(_mm256_loadu_pd(s.data() + k), den));
    }
    for (; k < n; ++k) out[k] = s[k] / (1.0 + gamma_inv[k]);
}

double transmit_power_sum_avx2(std::span<const double> alpha_prime, std::span<const double> gamma_inv) {
    const std::size_t n = alpha_prime.size();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d a = _mm256_loadu_pd(alpha_prime.data() + k);
        acc = _mm256_fmadd_pd(a, _mm256_add_pd(one, _mm256_loadu_pd(gamma_inv.data() + k)), acc);
    }
    double total = horizontal_sum(acc);
    for (; k < n; ++k) total += alpha_prime[k] * (1.0 + gamma_inv[k]);
    return total;
}

SandwichSums sandwich_sums_avx2(std::span<const double> s,
                                std::span<const double> gamma_inv,
                                double per_sensor_power) {
    const std::size_t n = s.size();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d p = _mm256_set1_pd(per_sensor_power);
    __m256d upper = _mm256_setzero_pd();
    __m256d corr = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d gi = _mm256_loadu_pd(gamma_inv.data() + k);
        const __m256d ps = _mm256_mul_pd(p, _mm256_loadu_pd(s.data() + k));
        upper = _mm256_add_pd(upper, _mm256_div_pd(ps, _mm256_add_pd(one, gi)));
        corr = _mm256_fmadd_pd(_mm256_mul_pd(gi, ps), ps, corr);
    }
    SandwichSums out{horizontal_sum(upper), horizontal_sum(corr)};
    for (; k < n; ++k) {
        const double ps = per_sensor_power * s[k];
        out.upper += ps / (1.0 + gamma_inv[k]);
        out.correction += gamma_inv[k] * ps * ps;
    }
    return out;
}

}  // namespace fadefuse::kernels::detail
