#pragma once

// Data-parallel inner loops of the fusion model.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, a vector implementation (AVX2+FMA on x86-64, NEON on AArch64).
// The active table is chosen once at runtime from CPU features; setting
// FADEFUSE_KERNELS=scalar in the environment forces the reference path.
// Vector variants may reassociate sums, so they agree with the reference to
// rounding, not bit-for-bit. A given process always uses one table, which
// keeps Monte Carlo output reproducible run to run on the same machine.

#include <span>
#include <string_view>

namespace fadefuse::kernels {

struct SandwichSums {
    double upper = 0.0;       ///< sum p s / (1 + 1/gamma)
    double correction = 0.0;  ///< sum p^2 s^2 / gamma
};

struct KernelTable {
    std::string_view name;

    /// sum alpha s / (alpha s / gamma + 1)
    double (*information_sum)(std::span<const double> alpha_prime,
                              std::span<const double> s,
                              std::span<const double> gamma_inv);

    /// Information sum when every sensor transmits `per_sensor_power`:
    /// with x = p s / (1 + 1/gamma), sum x / (x / gamma + 1).
    double (*equal_power_information_sum)(std::span<const double> s,
                                          std::span<const double> gamma_inv,
                                          double per_sensor_power);

    /// out[k] = s[k] / (1 + gamma_inv[k])
    void (*merits)(std::span<const double> s, std::span<const double> gamma_inv, std::span<double> out);

    /// sum alpha (1 + 1/gamma)
    double (*transmit_power_sum)(std::span<const double> alpha_prime, std::span<const double> gamma_inv);

    SandwichSums (*sandwich_sums)(std::span<const double> s,
                                  std::span<const double> gamma_inv,
                                  double per_sensor_power);
};

const KernelTable& scalar_table() noexcept;

/// Vector table for this machine, or nullptr when the CPU (or the build)
/// lacks the instruction set.
const KernelTable* vector_table() noexcept;

/// The table every library routine uses.
const KernelTable& active() noexcept;

}  // namespace fadefuse::kernels
