#pragma once

// Power allocation across sensors.
//
// Closed-form solvers rank sensors by merit eta and activate a prefix of the
// ranking. In transmit-power terms an active sensor receives
//     P_k = (gamma_k / eta_k) (c sqrt(eta_k) - 1)
// where c is the water level: c0 under a sum-power budget, rho0 under a
// distortion target. Noiseless sensors (1/gamma = 0) have a constant marginal
// return, so at most one of them (the best) is ever active; it absorbs the
// budget or the information the noisy sensors leave over.

#include "fadefuse/model.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace fadefuse {

struct RankedView {
    /// Sensor indices by descending merit, ties by ascending index. Sensors
    /// with zero merit come last in index order.
    std::vector<std::size_t> permutation;
    /// Merits in permutation order.
    std::vector<double> merits;
    /// Number of leading entries with merit > 0.
    std::size_t usable = 0;
};

struct AllocationDiagnostics {
    std::size_t active_count = 0;
    /// c0 (sum-power problems) or rho0 (distortion-target problems).
    double threshold_constant = 0.0;
    /// c0^-2 or rho0^2. Zero when the sum constraint is slack.
    double dual_value = 0.0;
    /// KKT slack mu_k per sensor for the uncapped sum-power solver; empty otherwise.
    std::vector<double> kkt_slack;
    /// Solver passes; the clipping loop reports how many times it re-solved.
    std::size_t passes = 1;
};

struct AllocationResult {
    Allocation allocation;
    AllocationDiagnostics diagnostics;
};

/// Per-sensor transmit power ceilings; +infinity means unbounded.
class CapVector {
public:
    explicit CapVector(std::vector<double> caps);
    static CapVector unbounded(std::size_t count);
    static CapVector uniform(std::size_t count, double cap);

    std::size_t size() const noexcept { return caps_.size(); }
    double operator[](std::size_t k) const { return caps_.at(k); }
    const std::vector<double>& values() const noexcept { return caps_; }
    double sum() const noexcept;

private:
    std::vector<double> caps_;
};

RankedView rank_sensors(const Snapshot& snapshot);

/// Minimizes BLUE distortion subject to sum_k P_k <= total_power.
AllocationResult max_performance_allocation(const Snapshot& snapshot, double total_power);

/// Sum budget plus per-sensor caps. Repeatedly solves the uncapped problem,
/// pins every sensor that reaches its cap, and re-solves the rest with what
/// is left of the budget.
AllocationResult max_performance_with_caps(const Snapshot& snapshot, double total_power, const CapVector& caps);

/// Smallest total transmit power whose BLUE distortion equals target.
AllocationResult min_power_allocation(const Snapshot& snapshot, double distortion_target);

/// Meets the distortion target while minimizing sum_k P_k^2. No closed form;
/// solved by bisection on the dual multiplier.
AllocationResult l2_min_power_allocation(const Snapshot& snapshot, double distortion_target);

/// Generic projected-gradient solve of the sum-power problem (with optional
/// caps). Slow; used to cross-check the closed forms.
Allocation numeric_reference_allocation(const Snapshot& snapshot,
                                        double total_power,
                                        const std::optional<CapVector>& caps = std::nullopt);

}  // namespace fadefuse
