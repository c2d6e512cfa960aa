#include "fadefuse/diversity.hpp"

#include "fadefuse/errors.hpp"
#include "fadefuse/kernels.hpp"
#include "fadefuse/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <type_traits>

namespace fadefuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_trials(const MonteCarloOptions& options) {
    if (options.trials == 0) throw ConfigError("at least one trial is required");
}

void require_sensors(std::size_t sensors) {
    if (sensors == 0) throw ConfigError("at least one sensor is required");
}

/// sigma_theta^2 / sum(gamma) when gamma is deterministic, else 0.
double deterministic_floor(const ChannelConfig& config, std::size_t sensors) {
    const auto& obs = config.observation;
    if (obs.kind != ObservationModel::Kind::fixed) return 0.0;
    double inverse_sum = 0.0;
    for (std::size_t k = 0; k < sensors; ++k) {
        const double v = obs.noise_variances.size() == 1 ? obs.noise_variances.front() : obs.noise_variances.at(k);
        if (v == 0.0) return 0.0;
        inverse_sum += 1.0 / v;
    }
    return 1.0 / inverse_sum;
}

struct SumCount {
    double sum = 0.0;
    std::uint64_t count = 0;
    std::uint64_t skipped = 0;
};

}  // namespace

CapVector Policy::caps_for(std::size_t sensors, double total_power) const {
    if (caps) {
        if (caps->size() != sensors) throw ConfigError("cap vector length does not match the sensor count");
        return *caps;
    }
    return CapVector::uniform(sensors, cap_share * total_power / static_cast<double>(sensors));
}

double OutageEstimate::standard_error() const noexcept {
    if (trials == 0) return 0.0;
    return std::sqrt(probability * (1.0 - probability) / static_cast<double>(trials));
}

double trial_distortion(const Snapshot& snapshot, const Policy& policy, double total_power) {
    double info = 0.0;
    try {
        switch (policy.kind) {
            case Policy::Kind::equal:
                info = equal_power_information(snapshot, total_power);
                break;
            case Policy::Kind::max_performance:
                info = fusion_information(snapshot, max_performance_allocation(snapshot, total_power).allocation);
                break;
            case Policy::Kind::capped: {
                const auto caps = policy.caps_for(snapshot.size(), total_power);
                info = fusion_information(snapshot, max_performance_with_caps(snapshot, total_power, caps).allocation);
                break;
            }
        }
    } catch (const NoUsableSensor&) {
        return kInf;
    }
    return info > 0.0 ? snapshot.variance_theta() / info : kInf;
}

OutageEstimate outage_probability(const ChannelConfig& config,
                                  std::size_t sensors,
                                  const Policy& policy,
                                  double d0,
                                  double total_power,
                                  const MonteCarloOptions& options) {
    require_trials(options);
    require_sensors(sensors);
    if (!(d0 > 0.0)) throw ConfigError("outage threshold must be positive");
    if (!(total_power > 0.0)) throw ConfigError("total power must be positive");

    OutageEstimate est;
    est.trials = options.trials;
    if (d0 <= deterministic_floor(config, sensors)) {
        std::cerr << "warning: D0 = " << d0 << " is not above the distortion floor; outage is certain\n";
        est.outages = options.trials;
        est.probability = 1.0;
        est.below_floor = true;
        return est;
    }

    const auto partials = parallel::map_chunks<std::uint64_t>(
        options.trials, options.workers, [&](std::uint64_t first, std::uint64_t last) {
            std::uint64_t outages = 0;
            for (std::uint64_t t = first; t < last; ++t) {
                const auto snapshot = sample_snapshot(config, sensors, RngStream(options.seed, t));
                outages += trial_distortion(snapshot, policy, total_power) > d0 ? 1 : 0;
            }
            return outages;
        });
    est.outages = std::accumulate(partials.begin(), partials.end(), std::uint64_t{0});
    est.probability = static_cast<double>(est.outages) / static_cast<double>(est.trials);
    est.half_width_95 = 1.959963984540054 * est.standard_error();
    return est;
}

DistortionAverage average_distortion(const ChannelConfig& config,
                                     std::size_t sensors,
                                     const Policy& policy,
                                     double total_power,
                                     const MonteCarloOptions& options) {
    require_trials(options);
    require_sensors(sensors);
    const auto partials = parallel::map_chunks<SumCount>(
        options.trials, options.workers, [&](std::uint64_t first, std::uint64_t last) {
            SumCount acc;
            for (std::uint64_t t = first; t < last; ++t) {
                const auto snapshot = sample_snapshot(config, sensors, RngStream(options.seed, t));
                const double d = trial_distortion(snapshot, policy, total_power);
                if (std::isinf(d)) {
                    ++acc.skipped;
                } else {
                    acc.sum += d;
                    ++acc.count;
                }
            }
            return acc;
        });
    DistortionAverage out;
    double sum = 0.0;
    for (const auto& p : partials) {
        sum += p.sum;
        out.used_trials += p.count;
        out.all_zero_trials += p.skipped;
    }
    out.mean = out.used_trials > 0 ? sum / static_cast<double>(out.used_trials) : kInf;
    return out;
}

double d_infinity(const ChannelConfig& config, double total_power, std::uint64_t empirical_samples, std::uint64_t seed) {
    if (!(total_power > 0.0)) throw ConfigError("total power must be positive");
    double mean_merit = std::numeric_limits<double>::quiet_NaN();
    if (config.observation.homogeneous() && config.propagation.distances.size() == 1) {
        mean_merit = analytic_mean_merit(config, 0);
    } else {
        if (empirical_samples == 0) throw ConfigError("empirical E[eta] needs at least one sample");
        const std::size_t span = std::max(config.propagation.distances.size(),
                                          config.observation.kind == ObservationModel::Kind::fixed
                                              ? config.observation.noise_variances.size()
                                              : std::size_t{1});
        const auto partials = parallel::map_chunks<double>(empirical_samples, 0, [&](std::uint64_t first, std::uint64_t last) {
            double sum = 0.0;
            for (std::uint64_t i = first; i < last; ++i) {
                const RngStream rng(seed, i);
                const std::size_t k = static_cast<std::size_t>(i % span);
                const double s = sample_channel_snr(config.propagation, config.fading, k, rng);
                sum += s / (1.0 + sample_gamma_inv(config, k, rng));
            }
            return sum;
        });
        mean_merit = std::accumulate(partials.begin(), partials.end(), 0.0) / static_cast<double>(empirical_samples);
    }
    return config.prior.variance_theta() / (total_power * mean_merit);
}

double rate_function_exponential(double a, double mean_b) {
    if (!(a > 0.0) || !(mean_b > 0.0)) throw ConfigError("rate function needs a > 0 and b > 0");
    const double ratio = a / mean_b;
    return ratio - std::log(ratio) - 1.0;
}

namespace {

/// log M(theta) and its derivative for one of the supported laws.
struct LogMgf {
    double value;
    double slope;
    double effective_samples;  // +inf for analytic laws
};

LogMgf log_mgf(const ExponentialLaw& law, double theta) {
    const double x = 1.0 - law.mean * theta;
    return {-std::log(x), law.mean / x, kInf};
}

LogMgf log_mgf(const std::vector<double>& samples, double theta) {
    double peak = -kInf;
    for (double x : samples) peak = std::max(peak, theta * x);
    double w_sum = 0.0, wx_sum = 0.0, w2_sum = 0.0;
    for (double x : samples) {
        const double w = std::exp(theta * x - peak);
        w_sum += w;
        wx_sum += w * x;
        w2_sum += w * w;
    }
    const double n = static_cast<double>(samples.size());
    return {peak + std::log(w_sum / n), wx_sum / w_sum, w_sum * w_sum / w2_sum};
}

}  // namespace

RateFunctionValue rate_function_numeric(const RateFunctionQuery& query) {
    const double a = query.a;
    if (!(a > 0.0)) throw ConfigError("rate function needs a > 0");

    return std::visit(
        [&](const auto& law) -> RateFunctionValue {
            using Law = std::decay_t<decltype(law)>;
            double scale = 1.0;  // typical magnitude of the variable
            double theta_max = kInf;
            double min_effective = 0.0;
            if constexpr (std::is_same_v<Law, ExponentialLaw>) {
                if (!(law.mean > 0.0)) throw ConfigError("exponential mean must be positive");
                scale = law.mean;
                theta_max = 1.0 / law.mean;
            } else {
                if (law.size() < 2) throw ConfigError("empirical rate function needs at least two samples");
                const auto [lo, hi] = std::minmax_element(law.begin(), law.end());
                if (!(a > *lo && a < *hi)) {
                    throw DivergentMGF("threshold lies outside the sample range; the supremum is unbounded");
                }
                scale = std::max(std::abs(*hi), std::abs(*lo));
                min_effective = std::min(30.0, 0.5 * static_cast<double>(law.size()));
            }

            // d/dtheta [theta a - log M] = a - (log M)' is decreasing in theta.
            auto derivative = [&](double theta) { return a - log_mgf(law, theta).slope; };
            auto objective = [&](double theta) { return theta * a - log_mgf(law, theta).value; };

            const double d0 = derivative(0.0);
            if (d0 == 0.0) return {0.0, 0.0};

            double lo = 0.0, hi = 0.0;
            if (d0 > 0.0) {
                // Root at theta > 0, below theta_max.
                double step = 1.0 / scale;
                hi = std::isinf(theta_max) ? step : 0.5 * theta_max;
                while (derivative(hi) > 0.0) {
                    lo = hi;
                    hi = std::isinf(theta_max) ? hi + step : 0.5 * (hi + theta_max);
                    step *= 2.0;
                    if (!(hi < theta_max) || hi - lo == 0.0 || std::isinf(hi)) {
                        throw DivergentMGF("supremum attained at the boundary of the MGF domain");
                    }
                }
            } else {
                double step = 1.0 / scale;
                lo = -step;
                while (derivative(lo) < 0.0) {
                    hi = lo;
                    step *= 2.0;
                    lo -= step;
                    if (std::isinf(lo)) throw DivergentMGF("supremum not attained for finite theta");
                }
            }
            for (int it = 0; it < 300 && hi - lo > 1e-13 * std::max(1.0 / scale, std::abs(lo) + std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (derivative(mid) > 0.0 ? lo : hi) = mid;
            }
            const double theta = 0.5 * (lo + hi);
            if constexpr (!std::is_same_v<Law, ExponentialLaw>) {
                if (log_mgf(law, theta).effective_samples < min_effective) {
                    throw DivergentMGF("maximizer lies where too few samples carry the MGF estimate");
                }
            }
            return {std::max(objective(theta), 0.0), theta};
        },
        query.distribution);
}

double chernoff_bound(std::size_t sensors, double rate_value) {
    if (sensors == 0) throw ConfigError("at least one sensor is required");
    if (!(rate_value >= 0.0)) throw ConfigError("rate value must be nonnegative");
    return std::exp(-static_cast<double>(sensors) * rate_value);
}

SandwichResult sandwich_check(const Snapshot& snapshot, double total_power) {
    if (!(total_power > 0.0)) throw ConfigError("total power must be positive");
    const double k = static_cast<double>(snapshot.size());
    const double share = total_power / k;
    const auto sums = kernels::active().sandwich_sums(snapshot.channel_snr(), snapshot.gamma_inv(), share);
    SandwichResult out;
    out.upper = sums.upper;
    out.lower = sums.upper - sums.correction;
    out.value = equal_power_information(snapshot, total_power);
    // Rounding slack: the three sums are evaluated independently.
    const double slack = 1e-12 * std::max(std::abs(out.upper), 1e-300);
    out.holds = out.lower <= out.value + slack && out.value <= out.upper + slack;
    return out;
}

SlopeFit fit_log_log(std::span<const OutagePoint> curve) {
    SlopeFit fit;
    for (const auto& p : curve) {
        if (!(p.total_power > 0.0) || !(p.probability > 0.0)) continue;
        fit.points.emplace_back(std::log10(p.total_power), -std::log10(p.probability));
    }
    if (fit.points.size() < 2) throw InsufficientData("a slope needs at least two points with positive outage");
    const double n = static_cast<double>(fit.points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : fit.points) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : fit.points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (!(sxx > 0.0)) throw InsufficientData("slope points share one power value");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : fit.points) {
        const double r = y - (fit.intercept + fit.slope * x);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

SlopeFit diversity_slope(std::span<const OutagePoint> curve, std::uint64_t trials) {
    if (trials == 0) throw ConfigError("trial count must be positive");
    const double lowest = 30.0 / static_cast<double>(trials);
    std::vector<OutagePoint> window;
    for (const auto& p : curve) {
        if (p.probability >= lowest && p.probability <= 0.3) window.push_back(p);
    }
    if (window.size() < 2) throw InsufficientData("fewer than two points inside the slope-fit window");
    return fit_log_log(window);
}

double active_fraction(const ChannelConfig& config, std::size_t sensors, double total_power, const MonteCarloOptions& options) {
    require_trials(options);
    require_sensors(sensors);
    const auto partials = parallel::map_chunks<SumCount>(
        options.trials, options.workers, [&](std::uint64_t first, std::uint64_t last) {
            SumCount acc;
            for (std::uint64_t t = first; t < last; ++t) {
                const auto snapshot = sample_snapshot(config, sensors, RngStream(options.seed, t));
                try {
                    const auto result = max_performance_allocation(snapshot, total_power);
                    acc.sum += static_cast<double>(result.diagnostics.active_count) / static_cast<double>(sensors);
                } catch (const NoUsableSensor&) {
                }
                ++acc.count;
            }
            return acc;
        });
    double sum = 0.0;
    for (const auto& p : partials) sum += p.sum;
    return sum / static_cast<double>(options.trials);
}

double equal_power_min_budget(const Snapshot& snapshot, double d0) {
    const double floor = snapshot.distortion_floor();
    if (!(d0 > floor)) throw InfeasibleTarget(d0, floor);
    const double required = snapshot.variance_theta() / d0;

    // The sum-power optimum needs no more than equal power for the same target,
    // so its total is a valid lower bracket.
    double lo = min_power_allocation(snapshot, d0).allocation.total_power(snapshot);
    double hi = 2.0 * lo;
    while (equal_power_information(snapshot, hi) < required) {
        lo = hi;
        hi *= 2.0;
        if (std::isinf(hi)) throw ConvergenceFailure("equal-power budget search diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (equal_power_information(snapshot, mid) >= required ? hi : lo) = mid;
    }
    return hi;
}

MinPowerAverage average_min_power(const ChannelConfig& config,
                                  std::size_t sensors,
                                  double d0,
                                  const MonteCarloOptions& options) {
    require_trials(options);
    require_sensors(sensors);
    struct Partial {
        double optimal = 0.0;
        double equal = 0.0;
        std::uint64_t feasible = 0;
        std::uint64_t infeasible = 0;
    };
    const auto partials = parallel::map_chunks<Partial>(
        options.trials, options.workers, [&](std::uint64_t first, std::uint64_t last) {
            Partial acc;
            for (std::uint64_t t = first; t < last; ++t) {
                const auto snapshot = sample_snapshot(config, sensors, RngStream(options.seed, t));
                try {
                    const double optimal = min_power_allocation(snapshot, d0).allocation.total_power(snapshot);
                    const double equal = equal_power_min_budget(snapshot, d0);
                    acc.optimal += optimal;
                    acc.equal += equal;
                    ++acc.feasible;
                } catch (const InfeasibleTarget&) {
                    ++acc.infeasible;
                }
            }
            return acc;
        });
    MinPowerAverage out;
    double optimal = 0.0, equal = 0.0;
    for (const auto& p : partials) {
        optimal += p.optimal;
        equal += p.equal;
        out.feasible_trials += p.feasible;
        out.infeasible_trials += p.infeasible;
    }
    if (out.feasible_trials > 0) {
        out.mean_optimal = optimal / static_cast<double>(out.feasible_trials);
        out.mean_equal = equal / static_cast<double>(out.feasible_trials);
    }
    return out;
}

}  // namespace fadefuse
