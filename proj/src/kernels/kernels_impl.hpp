#pragma once

#include "fadefuse/kernels.hpp"

#include <cstddef>

namespace fadefuse::kernels::detail {

double information_sum_scalar(std::span<const double>, std::span<const double>, std::span<const double>);
double equal_power_information_sum_scalar(std::span<const double>, std::span<const double>, double);
void merits_scalar(std::span<const double>, std::span<const double>, std::span<double>);
double transmit_power_sum_scalar(std::span<const double>, std::span<const double>);
SandwichSums sandwich_sums_scalar(std::span<const double>, std::span<const double>, double);

#if defined(FADEFUSE_HAVE_AVX2)
double information_sum_avx2(std::span<const double>, std::span<const double>, std::span<const double>);
double equal_power_information_sum_avx2(std::span<const double>, std::span<const double>, double);
void merits_avx2(std::span<const double>, std::span<const double>, std::span<double>);
double transmit_power_sum_avx2(std::span<const double>, std::span<const double>);
SandwichSums sandwich_sums_avx2(std::span<const double>, std::span<const double>, double);
#endif

#if defined(FADEFUSE_HAVE_NEON)
double information_sum_neon(std::span<const double>, std::span<const double>, std::span<const double>);
double equal_power_information_sum_neon(std::span<const double>, std::span<const double>, double);
void merits_neon(std::span<const double>, std::span<const double>, std::span<double>);
double transmit_power_sum_neon(std::span<const double>, std::span<const double>);
SandwichSums sandwich_sums_neon(std::span<const double>, std::span<const double>, double);
#endif

}  // namespace fadefuse::kernels::detail
