#pragma once

// Monte Carlo and large-deviation tools for estimation outage and diversity.

#include "fadefuse/allocation.hpp"
#include "fadefuse/channel.hpp"
#include "fadefuse/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace fadefuse {

/// How a trial's power budget is split across sensors.
struct Policy {
    enum class Kind { equal, max_performance, capped };

    Kind kind = Kind::equal;
    /// Explicit per-sensor caps for Kind::capped.
    std::optional<CapVector> caps;
    /// When `caps` is empty, each sensor is capped at cap_share * P_tot / K.
    double cap_share = 1.5;

    static Policy equal() { return {}; }
    static Policy max_performance() { return {Kind::max_performance, std::nullopt, 0.0}; }
    static Policy capped(CapVector caps) { return {Kind::capped, std::move(caps), 0.0}; }
    static Policy capped_share(double share) { return {Kind::capped, std::nullopt, share}; }

    CapVector caps_for(std::size_t sensors, double total_power) const;
};

struct MonteCarloOptions {
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    std::size_t workers = 0;  ///< 0 = hardware concurrency
};

struct OutageEstimate {
    double probability = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t outages = 0;
    double half_width_95 = 0.0;  ///< normal-approximation binomial half-width
    /// D0 was at or below the deterministic floor sigma_theta^2 / sum(gamma);
    /// no trials were run and the probability is 1.
    bool below_floor = false;

    double standard_error() const noexcept;
};

/// Distortion of one trial under a policy; +infinity when no information
/// reaches the fusion center.
double trial_distortion(const Snapshot& snapshot, const Policy& policy, double total_power);

/// Fraction of trials whose BLUE distortion exceeds d0.
OutageEstimate outage_probability(const ChannelConfig& config,
                                  std::size_t sensors,
                                  const Policy& policy,
                                  double d0,
                                  double total_power,
                                  const MonteCarloOptions& options);

struct DistortionAverage {
    double mean = 0.0;
    std::uint64_t used_trials = 0;
    std::uint64_t all_zero_trials = 0;  ///< excluded from the mean
};

DistortionAverage average_distortion(const ChannelConfig& config,
                                     std::size_t sensors,
                                     const Policy& policy,
                                     double total_power,
                                     const MonteCarloOptions& options);

/// Large-K equal-power distortion sigma_theta^2 / (P_tot E[eta]). E[eta] is
/// analytic when the observation model is fixed and every sensor shares one
/// distance; otherwise it is the mean of `empirical_samples` sampled merits.
double d_infinity(const ChannelConfig& config, double total_power, std::uint64_t empirical_samples = 1'000'000,
                  std::uint64_t seed = 1);

/// Rate function of an exponential law with mean b: a/b - ln(a/b) - 1.
double rate_function_exponential(double a, double mean_b);

struct ExponentialLaw {
    double mean = 1.0;
};

struct RateFunctionQuery {
    double a = 1.0;
    std::variant<ExponentialLaw, std::vector<double>> distribution = ExponentialLaw{};
};

struct RateFunctionValue {
    double value = 0.0;
    double theta_star = 0.0;  ///< maximizer of theta a - log M(theta)
};

/// sup_theta (theta a - log M(theta)) by root-finding on the derivative.
/// Empirical sample sets use a log-sum-exp MGF; theta is confined to where at
/// least a few dozen samples carry the weight.
RateFunctionValue rate_function_numeric(const RateFunctionQuery& query);

/// exp(-K I).
double chernoff_bound(std::size_t sensors, double rate_value);

struct SandwichResult {
    double lower = 0.0;  ///< U - sum P^2 s^2 / (K^2 gamma)
    double value = 0.0;  ///< sigma_theta^2 / Var under equal power
    double upper = 0.0;  ///< sum P s / (K (1 + 1/gamma))
    bool holds = false;

    double lower_margin() const noexcept { return value - lower; }
    double upper_margin() const noexcept { return upper - value; }
};

SandwichResult sandwich_check(const Snapshot& snapshot, double total_power);

struct OutagePoint {
    double total_power = 0.0;
    double probability = 0.0;
};

struct SlopeFit {
    std::vector<std::pair<double, double>> points;  ///< (log10 P_tot, -log10 outage)
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< RMS of the fit residuals
};

/// Least-squares line through (log10 P, -log10 p) for every point.
SlopeFit fit_log_log(std::span<const OutagePoint> curve);

/// Diversity slope using only points with outage in [30 / trials, 0.3].
/// Throws InsufficientData when fewer than two points qualify.
SlopeFit diversity_slope(std::span<const OutagePoint> curve, std::uint64_t trials);

/// Mean of K1 / K under the sum-power optimum.
double active_fraction(const ChannelConfig& config, std::size_t sensors, double total_power, const MonteCarloOptions& options);

/// Smallest equal-power budget reaching distortion d0 on this snapshot.
/// Throws InfeasibleTarget when no budget suffices.
double equal_power_min_budget(const Snapshot& snapshot, double d0);

struct MinPowerAverage {
    double mean_optimal = 0.0;
    double mean_equal = 0.0;
    std::uint64_t feasible_trials = 0;
    std::uint64_t infeasible_trials = 0;

    double savings_ratio() const noexcept { return mean_equal / mean_optimal; }
};

MinPowerAverage average_min_power(const ChannelConfig& config,
                                  std::size_t sensors,
                                  double d0,
                                  const MonteCarloOptions& options);

}  // namespace fadefuse
