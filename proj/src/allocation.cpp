#include "fadefuse/allocation.hpp"

#include "fadefuse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fadefuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RankedSensor {
    std::size_t index;
    double gamma;  // +inf when noiseless
    double gamma_inv;
    double s;
    double eta;
};

/// Usable sensors (eta > 0) among `eligible`, in ranking order.
std::vector<RankedSensor> ranked_usable(const Snapshot& snapshot, const std::vector<char>& eligible) {
    const auto merits = snapshot.merits();
    std::vector<RankedSensor> out;
    for (std::size_t k = 0; k < snapshot.size(); ++k) {
        if (!eligible[k] || !(merits[k] > 0.0)) continue;
        const double gi = snapshot.gamma_inv()[k];
        out.push_back({k, gi == 0.0 ? kInf : 1.0 / gi, gi, snapshot.channel_snr()[k], merits[k]});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedSensor& a, const RankedSensor& b) { return a.eta > b.eta; });
    return out;
}

/// Counts the leading strictly positive values of the threshold function and
/// checks that no later value turns positive again.
template <typename Fn>
std::size_t leading_positive(std::size_t n, Fn&& value) {
    std::size_t count = 0;
    bool crossed = false;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = value(k);
        if (!crossed && v > 0.0) {
            ++count;
        } else {
            crossed = true;
            if (v > 1e-9) {
                throw InternalConsistency("threshold function changes sign more than once (position " +
                                          std::to_string(k + 1) + ")");
            }
        }
    }
    return count;
}

struct Level {
    double constant = 0.0;  // c0 or rho0
    std::size_t active = 0;
};

/// Water level under a sum-power budget over ranked noisy sensors:
/// A(k) = sum gamma/sqrt(eta), B(k) = sum gamma/eta + budget,
/// f(k) = sqrt(eta_k) B(k) / A(k) - 1, c0 = B(K1) / A(K1).
Level sum_power_level(const std::vector<RankedSensor>& noisy, double budget) {
    std::vector<double> a(noisy.size()), b(noisy.size());
    double a_sum = 0.0, b_sum = budget;
    for (std::size_t k = 0; k < noisy.size(); ++k) {
        a_sum += noisy[k].gamma / std::sqrt(noisy[k].eta);
        b_sum += noisy[k].gamma / noisy[k].eta;
        a[k] = a_sum;
        b[k] = b_sum;
    }
    // f(1) = budget eta_1 / gamma_1 > 0, so the best sensor is always active;
    // a budget too small to register in floating point must not say otherwise.
    const std::size_t k1 = std::max<std::size_t>(
        1, leading_positive(noisy.size(), [&](std::size_t k) { return std::sqrt(noisy[k].eta) * b[k] / a[k] - 1.0; }));
    return {b[k1 - 1] / a[k1 - 1], k1};
}

/// Water level for a required information sum over ranked noisy sensors:
/// C(k) = sum gamma/sqrt(eta), D(k) = sum gamma - required,
/// g(k) = 1 - D(k) / (sqrt(eta_k) C(k)), rho0 = C(K1) / D(K1).
/// Empty when the noisy sensors cannot reach `required` at any power.
std::optional<Level> distortion_level(const std::vector<RankedSensor>& noisy, double required) {
    double gamma_total = 0.0;
    for (const auto& x : noisy) gamma_total += x.gamma;
    if (noisy.empty() || !(gamma_total > required)) return std::nullopt;

    std::vector<double> c(noisy.size()), d(noisy.size());
    double c_sum = 0.0, d_sum = -required;
    for (std::size_t k = 0; k < noisy.size(); ++k) {
        c_sum += noisy[k].gamma / std::sqrt(noisy[k].eta);
        d_sum += noisy[k].gamma;
        c[k] = c_sum;
        d[k] = d_sum;
    }
    const std::size_t k1 =
        leading_positive(noisy.size(), [&](std::size_t k) { return 1.0 - d[k] / (std::sqrt(noisy[k].eta) * c[k]); });
    if (k1 == 0 || !(d[k1 - 1] > 0.0)) throw InternalConsistency("distortion threshold search found no valid prefix");
    return Level{c[k1 - 1] / d[k1 - 1], k1};
}

/// c0 sqrt(eta_k) - 1 for the active prefix, written without the cancellation
/// of the direct form: (budget sqrt(eta_k) + sum_j gamma_j (sqrt(eta_k) -
/// sqrt(eta_j)) / eta_j) / A(K1).
std::vector<double> sum_power_excess(const std::vector<RankedSensor>& noisy, std::size_t active, double budget) {
    double a_sum = 0.0;
    for (std::size_t j = 0; j < active; ++j) a_sum += noisy[j].gamma / std::sqrt(noisy[j].eta);
    std::vector<double> out(active);
    for (std::size_t k = 0; k < active; ++k) {
        const double root = std::sqrt(noisy[k].eta);
        double num = budget * root;
        for (std::size_t j = 0; j < active; ++j) num += noisy[j].gamma * (root - std::sqrt(noisy[j].eta)) / noisy[j].eta;
        out[k] = std::max(num, 0.0) / a_sum;
    }
    return out;
}

/// rho0 sqrt(eta_k) - 1 for the active prefix:
/// (required + sum_j gamma_j (sqrt(eta_k) - sqrt(eta_j)) / sqrt(eta_j)) / D(K1).
std::vector<double> distortion_excess(const std::vector<RankedSensor>& noisy, std::size_t active, double required) {
    double d_sum = -required;
    for (std::size_t j = 0; j < active; ++j) d_sum += noisy[j].gamma;
    std::vector<double> out(active);
    for (std::size_t k = 0; k < active; ++k) {
        const double root = std::sqrt(noisy[k].eta);
        double num = required;
        for (std::size_t j = 0; j < active; ++j) {
            const double rj = std::sqrt(noisy[j].eta);
            num += noisy[j].gamma * (root - rj) / rj;
        }
        out[k] = std::max(num, 0.0) / d_sum;
    }
    return out;
}

/// alpha' = (gamma/s)(c sqrt(eta) - 1)^+ for a noisy sensor at level c.
double noisy_alpha(const RankedSensor& x, double level) {
    const double excess = level * std::sqrt(x.eta) - 1.0;
    return excess > 0.0 ? x.gamma / x.s * excess : 0.0;
}

void split(const std::vector<RankedSensor>& ranked,
           std::vector<RankedSensor>& noisy,
           const RankedSensor*& best_noiseless) {
    best_noiseless = nullptr;
    for (const auto& x : ranked) {
        if (std::isinf(x.gamma)) {
            if (best_noiseless == nullptr) best_noiseless = &x;
        } else {
            noisy.push_back(x);
        }
    }
}

struct SumPowerSolution {
    std::vector<double> alpha;  // full length K
    double level = 0.0;
};

/// Sum-power optimum restricted to `eligible` sensors.
SumPowerSolution solve_sum_power(const Snapshot& snapshot, const std::vector<char>& eligible, double budget) {
    const auto ranked = ranked_usable(snapshot, eligible);
    if (ranked.empty()) throw NoUsableSensor();

    std::vector<RankedSensor> noisy;
    const RankedSensor* noiseless = nullptr;
    split(ranked, noisy, noiseless);

    SumPowerSolution out{std::vector<double>(snapshot.size(), 0.0), 0.0};
    Level level;
    if (!noisy.empty()) {
        level = sum_power_level(noisy, budget);
        out.level = level.constant;
    }

    // A noiseless sensor returns eta_n per watt at every budget; it caps the
    // water level at 1/sqrt(eta_n) and takes whatever the noisy sensors leave.
    const bool use_noiseless = noiseless != nullptr && (noisy.empty() || out.level * out.level * noiseless->eta > 1.0);
    if (use_noiseless) {
        out.level = 1.0 / std::sqrt(noiseless->eta);
        double spent = 0.0;
        for (const auto& x : noisy) {
            const double a = noisy_alpha(x, out.level);
            out.alpha[x.index] = a;
            spent += a * (1.0 + x.gamma_inv);
        }
        out.alpha[noiseless->index] = std::max(budget - spent, 0.0);
        return out;
    }

    const auto excess = sum_power_excess(noisy, level.active, budget);
    for (std::size_t k = 0; k < level.active; ++k) out.alpha[noisy[k].index] = noisy[k].gamma / noisy[k].s * excess[k];
    return out;
}

void require_budget(double total_power) {
    if (!(total_power > 0.0) || !std::isfinite(total_power)) throw ConfigError("total power must be positive and finite");
}

void require_target(double distortion_target) {
    if (!(distortion_target > 0.0) || std::isnan(distortion_target)) throw ConfigError("distortion target must be positive");
}

}  // namespace

CapVector::CapVector(std::vector<double> caps) : caps_(std::move(caps)) {
    for (double c : caps_) {
        if (!(c > 0.0)) throw ConfigError("power caps must be positive");
    }
}

CapVector CapVector::unbounded(std::size_t count) { return CapVector(std::vector<double>(count, kInf)); }

CapVector CapVector::uniform(std::size_t count, double cap) { return CapVector(std::vector<double>(count, cap)); }

double CapVector::sum() const noexcept { return std::accumulate(caps_.begin(), caps_.end(), 0.0); }

RankedView rank_sensors(const Snapshot& snapshot) {
    RankedView view;
    const auto merits = snapshot.merits();
    view.permutation.resize(snapshot.size());
    std::iota(view.permutation.begin(), view.permutation.end(), std::size_t{0});
    std::stable_sort(view.permutation.begin(), view.permutation.end(), [&](std::size_t a, std::size_t b) {
        const bool ua = merits[a] > 0.0, ub = merits[b] > 0.0;
        if (ua != ub) return ua;
        return ua && merits[a] > merits[b];
    });
    view.merits.reserve(snapshot.size());
    for (std::size_t k : view.permutation) {
        view.merits.push_back(merits[k]);
        if (merits[k] > 0.0) ++view.usable;
    }
    return view;
}

AllocationResult max_performance_allocation(const Snapshot& snapshot, double total_power) {
    require_budget(total_power);
    const std::vector<char> all(snapshot.size(), 1);
    auto solution = solve_sum_power(snapshot, all, total_power);

    AllocationResult result{Allocation(std::move(solution.alpha)), {}};
    auto& diag = result.diagnostics;
    diag.active_count = result.allocation.active_count();
    diag.threshold_constant = solution.level;
    diag.dual_value = 1.0 / (solution.level * solution.level);
    diag.kkt_slack.assign(snapshot.size(), 0.0);
    for (std::size_t k = 0; k < snapshot.size(); ++k) {
        if (result.allocation[k] > 0.0) continue;
        // Stationarity at alpha' = 0 reads s_k <= lambda0 (1 + 1/gamma_k).
        diag.kkt_slack[k] = diag.dual_value * (1.0 + snapshot.gamma_inv()[k]) - snapshot.channel_snr()[k];
    }
    return result;
}

AllocationResult max_performance_with_caps(const Snapshot& snapshot, double total_power, const CapVector& caps) {
    require_budget(total_power);
    if (caps.size() != snapshot.size()) throw ConfigError("cap vector length does not match the snapshot");

    const std::size_t n = snapshot.size();
    const auto gi = snapshot.gamma_inv();
    std::vector<double> alpha(n, 0.0);
    std::vector<char> free(n, 1);
    {
        const auto merits = snapshot.merits();
        bool any = false;
        for (std::size_t k = 0; k < n; ++k) any = any || merits[k] > 0.0;
        if (!any) throw NoUsableSensor();
        for (std::size_t k = 0; k < n; ++k) free[k] = merits[k] > 0.0 ? 1 : 0;
    }

    double budget = total_power;
    double level = kInf;
    std::size_t passes = 0;
    // Budget left over from subtracting caps can be pure rounding residue.
    const double exhausted = 1e-13 * total_power;
    while (std::any_of(free.begin(), free.end(), [](char f) { return f != 0; }) && budget > exhausted) {
        ++passes;
        if (passes > n) throw InternalConsistency("clipping loop exceeded one pass per sensor");
        const auto solution = solve_sum_power(snapshot, free, budget);
        level = solution.level;

        std::vector<std::size_t> clipped;
        for (std::size_t k = 0; k < n; ++k) {
            if (free[k] && solution.alpha[k] * (1.0 + gi[k]) >= caps[k]) clipped.push_back(k);
        }
        if (clipped.empty()) {
            for (std::size_t k = 0; k < n; ++k) {
                if (free[k]) alpha[k] = solution.alpha[k];
            }
            break;
        }
        for (std::size_t k : clipped) {
            alpha[k] = caps[k] / (1.0 + gi[k]);
            budget -= caps[k];
            free[k] = 0;
        }
        level = kInf;  // everything left might be pinned
    }

    AllocationResult result{Allocation(std::move(alpha)), {}};
    auto& diag = result.diagnostics;
    diag.active_count = result.allocation.active_count();
    diag.threshold_constant = level;
    diag.dual_value = std::isinf(level) ? 0.0 : 1.0 / (level * level);
    diag.passes = passes;
    return result;
}

AllocationResult min_power_allocation(const Snapshot& snapshot, double distortion_target) {
    require_target(distortion_target);
    const double floor = snapshot.distortion_floor();
    if (!(distortion_target > floor)) throw InfeasibleTarget(distortion_target, floor);

    const double required = snapshot.variance_theta() / distortion_target;
    const std::vector<char> all(snapshot.size(), 1);
    const auto ranked = ranked_usable(snapshot, all);
    std::vector<RankedSensor> noisy;
    const RankedSensor* noiseless = nullptr;
    split(ranked, noisy, noiseless);

    const auto noisy_level = distortion_level(noisy, required);
    double level = noisy_level ? noisy_level->constant : 0.0;
    // Same argument as the sum-power case: a noiseless sensor buys information
    // at the constant price 1/eta_n and caps rho at 1/sqrt(eta_n).
    const bool use_noiseless = noiseless != nullptr && (!noisy_level || level * level * noiseless->eta > 1.0);
    if (use_noiseless) level = 1.0 / std::sqrt(noiseless->eta);
    if (!noisy_level && !use_noiseless) throw InfeasibleTarget(distortion_target, floor);

    std::vector<double> alpha(snapshot.size(), 0.0);
    if (use_noiseless) {
        double delivered = 0.0;
        for (const auto& x : noisy) {
            const double excess = level * std::sqrt(x.eta) - 1.0;
            if (!(excess > 0.0)) continue;
            alpha[x.index] = x.gamma / x.s * excess;
            delivered += x.gamma * excess / (1.0 + excess);
        }
        alpha[noiseless->index] = std::max(required - delivered, 0.0) / noiseless->s;
    } else {
        const auto excess = distortion_excess(noisy, noisy_level->active, required);
        for (std::size_t k = 0; k < noisy_level->active; ++k) {
            alpha[noisy[k].index] = noisy[k].gamma / noisy[k].s * excess[k];
        }
    }

    AllocationResult result{Allocation(std::move(alpha)), {}};
    result.diagnostics.active_count = result.allocation.active_count();
    result.diagnostics.threshold_constant = level;
    result.diagnostics.dual_value = level * level;
    return result;
}

namespace {

/// Information r delivered by a sensor when the marginal cost of r in the
/// squared-power objective equals `multiplier`.
///
/// Noisy: with w = P eta / gamma, the condition is w (1 + w)^2 = multiplier
/// eta^2 / (2 gamma) and r = gamma w / (1 + w). Noiseless: r = multiplier
/// eta^2 / 2.
struct L2Response {
    double information;
    double power;
};

L2Response l2_response(const RankedSensor& x, double multiplier) {
    if (std::isinf(x.gamma)) {
        const double r = 0.5 * multiplier * x.eta * x.eta;
        return {r, r / x.eta};
    }
    const double rhs = 0.5 * multiplier * x.eta * x.eta / x.gamma;
    if (!(rhs > 0.0)) return {0.0, 0.0};
    // Newton on the increasing convex cubic, started above the root, descends
    // monotonically; stop once rounding halts the descent.
    double w = std::min(rhs, std::cbrt(rhs));
    for (int it = 0; it < 200; ++it) {
        const double next = w - (w * (1.0 + w) * (1.0 + w) - rhs) / ((1.0 + w) * (1.0 + 3.0 * w));
        if (!(next < w)) break;
        w = next;
    }
    return {x.gamma * w / (1.0 + w), x.gamma * w / x.eta};
}

}  // namespace

AllocationResult l2_min_power_allocation(const Snapshot& snapshot, double distortion_target) {
    require_target(distortion_target);
    const double floor = snapshot.distortion_floor();
    if (!(distortion_target > floor)) throw InfeasibleTarget(distortion_target, floor);

    const double required = snapshot.variance_theta() / distortion_target;
    const std::vector<char> all(snapshot.size(), 1);
    const auto ranked = ranked_usable(snapshot, all);

    auto delivered = [&](double multiplier) {
        double total = 0.0;
        for (const auto& x : ranked) total += l2_response(x, multiplier).information;
        return total;
    };

    constexpr int kMaxBracketSteps = 4000;
    double hi = 1.0;
    int steps = 0;
    while (delivered(hi) < required) {
        hi *= 2.0;
        if (++steps > kMaxBracketSteps || std::isinf(hi)) throw ConvergenceFailure("could not bracket the L2 dual multiplier");
    }
    double lo = hi;
    while (lo > 0.0 && delivered(lo) >= required) {
        lo *= 0.5;
        if (++steps > kMaxBracketSteps) throw ConvergenceFailure("could not bracket the L2 dual multiplier");
    }

    const double tolerance = 1e-12 * required;
    double multiplier = hi;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double residual = delivered(mid) - required;
        multiplier = mid;
        if (std::abs(residual) <= tolerance) break;
        (residual < 0.0 ? lo : hi) = mid;
        multiplier = hi;
    }
    if (std::abs(delivered(multiplier) - required) > 1e-9 * required) {
        throw ConvergenceFailure("L2 dual search did not meet the distortion constraint");
    }

    std::vector<double> alpha(snapshot.size(), 0.0);
    for (const auto& x : ranked) alpha[x.index] = l2_response(x, multiplier).power / (1.0 + x.gamma_inv);

    AllocationResult result{Allocation(std::move(alpha)), {}};
    result.diagnostics.active_count = result.allocation.active_count();
    result.diagnostics.threshold_constant = std::sqrt(multiplier);
    result.diagnostics.dual_value = multiplier;
    return result;
}

namespace {

/// Euclidean projection onto {0 <= x <= upper, sum x <= 1}.
std::vector<double> project_capped_simplex(const std::vector<double>& x, const std::vector<double>& upper) {
    const std::size_t n = x.size();
    std::vector<double> y(n);
    auto clipped_sum = [&](double shift) {
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            y[k] = std::clamp(x[k] - shift, 0.0, upper[k]);
            total += y[k];
        }
        return total;
    };
    if (clipped_sum(0.0) <= 1.0) return y;
    double lo = 0.0;
    double hi = *std::max_element(x.begin(), x.end());
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (clipped_sum(mid) > 1.0 ? lo : hi) = mid;
    }
    clipped_sum(hi);
    return y;
}

}  // namespace

Allocation numeric_reference_allocation(const Snapshot& snapshot, double total_power, const std::optional<CapVector>& caps) {
    require_budget(total_power);
    const std::size_t n = snapshot.size();
    if (caps && caps->size() != n) throw ConfigError("cap vector length does not match the snapshot");
    const auto merits = snapshot.merits();
    if (std::none_of(merits.begin(), merits.end(), [](double e) { return e > 0.0; })) throw NoUsableSensor();

    const auto gi = snapshot.gamma_inv();
    // Variables are budget fractions x_k = P_k / total_power. Per sensor the
    // information is r(P) = P eta / (P eta / gamma + 1).
    std::vector<double> upper(n, 1.0);
    if (caps) {
        for (std::size_t k = 0; k < n; ++k) upper[k] = std::min(1.0, (*caps)[k] / total_power);
    }
    auto objective = [&](const std::vector<double>& x) {
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double pe = total_power * x[k] * merits[k];
            total += pe / (gi[k] * pe + 1.0);
        }
        return total;
    };
    auto gradient = [&](const std::vector<double>& x) {
        std::vector<double> g(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double den = gi[k] * total_power * x[k] * merits[k] + 1.0;
            g[k] = total_power * merits[k] / (den * den);
        }
        return g;
    };

    std::vector<double> start(n);
    for (std::size_t k = 0; k < n; ++k) start[k] = 1.0 / static_cast<double>(n);
    std::vector<double> x = project_capped_simplex(start, upper);
    double value = objective(x);
    double step = 1.0 / (total_power * *std::max_element(merits.begin(), merits.end()));

    constexpr int kMaxIterations = 2'000'000;
    constexpr int kQuietIterations = 50;
    int quiet = 0;
    for (int it = 0; it < kMaxIterations; ++it) {
        const auto g = gradient(x);
        // Backtracking: halve the step until the objective does not drop.
        bool accepted = false;
        std::vector<double> candidate;
        double candidate_value = 0.0;
        for (int bt = 0; bt < 80; ++bt) {
            std::vector<double> trial(n);
            for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] + step * g[k];
            candidate = project_capped_simplex(trial, upper);
            candidate_value = objective(candidate);
            if (candidate_value >= value) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) quiet = kQuietIterations;  // no ascent left at machine precision
        else {
            const double gain = candidate_value - value;
            x = std::move(candidate);
            value = candidate_value;
            step *= 2.0;
            quiet = gain <= 1e-12 * value ? quiet + 1 : 0;
        }
        if (quiet >= kQuietIterations) {
            std::vector<double> alpha(n);
            for (std::size_t k = 0; k < n; ++k) alpha[k] = total_power * x[k] / (1.0 + gi[k]);
            return Allocation(std::move(alpha));
        }
    }
    throw ConvergenceFailure("projected gradient reference solver did not converge");
}

}  // namespace fadefuse
