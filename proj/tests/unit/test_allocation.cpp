#include "fadefuse/allocation.hpp"
#include "fadefuse/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>

using namespace fadefuse;
using testing::make_snapshot;
using testing::power_for_info;
using testing::rel_diff;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double total(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

/// Min total power for a distortion target by bisection on the multiplier in
/// r_k(lambda) = gamma_k (1 - (lambda eta_k)^(-1/2))^+ (noisy sensors only).
double min_power_by_dual_bisection(const Snapshot& snap, double d0) {
    const double required = snap.variance_theta() / d0;
    const auto eta = snap.merits();
    auto info = [&](double lambda, std::vector<double>* r) {
        double sum = 0.0;
        for (std::size_t k = 0; k < snap.size(); ++k) {
            const double gamma = 1.0 / snap.gamma_inv()[k];
            const double rk = eta[k] > 0.0 ? gamma * std::max(0.0, 1.0 - 1.0 / std::sqrt(lambda * eta[k])) : 0.0;
            if (r) (*r)[k] = rk;
            sum += rk;
        }
        return sum;
    };
    double lo = 1e-30, hi = 1.0;
    while (info(hi, nullptr) < required) hi *= 2.0;
    for (int i = 0; i < 400; ++i) {
        const double mid = std::sqrt(lo * hi);
        (info(mid, nullptr) < required ? lo : hi) = mid;
    }
    std::vector<double> r(snap.size());
    info(hi, &r);
    double p = 0.0;
    for (std::size_t k = 0; k < snap.size(); ++k) {
        if (r[k] > 0.0) p += power_for_info(r[k], snap.gamma_inv()[k], snap.channel_snr()[k]);
    }
    return p;
}

double ternary_min(double lo, double hi, const std::function<double(double)>& f) {
    for (int i = 0; i < 200; ++i) {
        const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
        if (f(a) < f(b)) {
            hi = b;
        } else {
            lo = a;
        }
    }
    return f(0.5 * (lo + hi));
}

/// min sum P_k^2 subject to sum r_k = required, by nested ternary search over
/// the information split (the objective is convex in r).
double l2_by_search(const Snapshot& snap, double required) {
    const auto gi = snap.gamma_inv();
    const auto s = snap.channel_snr();
    auto sq = [&](std::size_t k, double r) {
        if (r <= 0.0) return 0.0;
        if (r * gi[k] >= 1.0) return kInf;
        const double p = power_for_info(r, gi[k], s[k]);
        return p * p;
    };
    auto cap = [&](std::size_t k) { return std::min(required, 1.0 / gi[k]) * (1.0 - 1e-12); };
    if (snap.size() == 2) {
        return ternary_min(std::max(0.0, required - cap(1)), cap(0),
                           [&](double r0) { return sq(0, r0) + sq(1, required - r0); });
    }
    REQUIRE(snap.size() == 3);
    return ternary_min(0.0, cap(0), [&](double r0) {
        const double rest = required - r0;
        if (rest >= cap(1) + cap(2)) return kInf;
        return sq(0, r0) + ternary_min(std::max(0.0, rest - cap(2)), std::min(rest, cap(1)),
                                       [&](double r1) { return sq(1, r1) + sq(2, rest - r1); });
    });
}

double sum_sq(const std::vector<double>& v) {
    double t = 0.0;
    for (double x : v) t += x * x;
    return t;
}

}  // namespace

TEST_CASE("ranking by merit") {
    SUBCASE("distinct merits") {
        const auto view = rank_sensors(make_snapshot(1.0, {kInf, kInf, kInf}, {3.0, 1.0, 2.0}));
        CHECK(view.permutation == std::vector<std::size_t>{0, 2, 1});
        CHECK(view.usable == 3);
    }
    SUBCASE("ties keep index order") {
        const auto view = rank_sensors(make_snapshot(1.0, {kInf, kInf, kInf}, {2.0, 2.0, 2.0}));
        CHECK(view.permutation == std::vector<std::size_t>{0, 1, 2});
    }
    SUBCASE("zero-merit sensors go last") {
        const auto view = rank_sensors(make_snapshot(1.0, {1.0, 1.0, 1.0}, {0.0, 1.0, 0.0}));
        CHECK(view.permutation == std::vector<std::size_t>{1, 0, 2});
        CHECK(view.usable == 1);
    }
    SUBCASE("random merits come out nonincreasing") {
        std::mt19937_64 gen(21);
        for (int i = 0; i < 100; ++i) {
            const auto snap = testing::random_snapshot(gen, 9);
            const auto view = rank_sensors(snap);
            auto sorted = snap.merits();
            std::sort(sorted.begin(), sorted.end(), std::greater<>());
            CHECK(view.merits == sorted);
        }
    }
}

TEST_CASE("sum-power optimum basic cases") {
    SUBCASE("single sensor takes the whole budget") {
        const auto res = max_performance_allocation(make_snapshot(1.0, {100.0}, {1.0}), 101.0);
        CHECK(res.allocation[0] == doctest::Approx(100.0).epsilon(1e-13));
        CHECK(res.diagnostics.active_count == 1);
    }
    SUBCASE("identical sensors split evenly") {
        const auto snap = make_snapshot(1.0, {50.0, 50.0, 50.0}, {2.0, 2.0, 2.0});
        const auto res = max_performance_allocation(snap, 3.0);
        const auto eq = equal_allocation(snap, 3.0);
        for (std::size_t k = 0; k < 3; ++k) CHECK(rel_diff(res.allocation[k], eq[k]) <= 1e-13);
        CHECK(res.diagnostics.active_count == 3);
    }
    SUBCASE("a poor sensor is switched off at small budgets") {
        const auto snap = make_snapshot(1.0, {10.0, 8.0, 12.0, 10.0}, {2.0, 1.5, 1.8, 1e-3});
        const auto res = max_performance_allocation(snap, 5.0);
        CHECK(res.allocation[3] == 0.0);
        CHECK(res.diagnostics.active_count == 3);
        const auto ref = numeric_reference_allocation(snap, 5.0);
        CHECK(rel_diff(blue_mse(snap, res.allocation), blue_mse(snap, ref)) <= 1e-6);
    }
    SUBCASE("no usable channel") {
        CHECK_THROWS_AS(max_performance_allocation(make_snapshot(1.0, {1.0, 2.0}, {0.0, 0.0}), 1.0), NoUsableSensor);
    }
    SUBCASE("nonpositive budget") {
        CHECK_THROWS_AS(max_performance_allocation(make_snapshot(1.0, {1.0}, {1.0}), 0.0), ConfigError);
    }
}

TEST_CASE("sum-power optimum properties on random snapshots") {
    std::mt19937_64 gen(22);
    std::uniform_int_distribution<std::size_t> count(1, 12);
    for (int i = 0; i < 300; ++i) {
        const auto snap = testing::random_snapshot(gen, count(gen), {0.5, 500.0, 0.05, 20.0, i % 3 == 0 ? 0.15 : 0.0});
        const double p = testing::log_uniform(gen, 1e-3, 1e3);
        const auto res = max_performance_allocation(snap, p);
        const auto& a = res.allocation;
        const auto eta = snap.merits();
        const auto view = rank_sensors(snap);

        CHECK(rel_diff(a.total_power(snap), p) <= 1e-10);

        const double opt = blue_mse(snap, a);
        const double eq = equal_power_mse(snap, p);
        INFO("K=", snap.size(), " P=", p, " opt=", opt, " eq=", eq, " K1=", res.diagnostics.active_count);
        CHECK(opt <= eq * (1.0 + 1e-12));
        if (res.diagnostics.active_count < snap.size()) CHECK(opt < eq);

        // Active set is a prefix of the ranking.
        for (std::size_t j = 0; j < snap.size(); ++j) {
            CHECK((a[view.permutation[j]] > 0.0) == (j < res.diagnostics.active_count));
        }

        // Stationarity for active sensors, and no incentive to switch on inactive ones.
        const double lambda = res.diagnostics.dual_value;
        for (std::size_t k = 0; k < snap.size(); ++k) {
            const double gi = snap.gamma_inv()[k], s = snap.channel_snr()[k];
            const double marginal = s / ((gi * a[k] * s + 1.0) * (gi * a[k] * s + 1.0));
            if (a[k] > 0.0) {
                CHECK(rel_diff(marginal, lambda * (1.0 + gi)) <= 1e-8);
            } else {
                CHECK(marginal <= lambda * (1.0 + gi) * (1.0 + 1e-12));
                CHECK(res.diagnostics.kkt_slack[k] >= -1e-12 * s);
                // Threshold rule in merit terms.
                CHECK(eta[k] <= 1.0 / (res.diagnostics.threshold_constant * res.diagnostics.threshold_constant) *
                                    (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("closed form matches the numeric reference, with and without noiseless sensors") {
    std::mt19937_64 gen(23);
    for (int i = 0; i < 20; ++i) {
        const auto snap = testing::random_snapshot(gen, 1 + i % 6, {0.5, 500.0, 0.05, 20.0, i % 2 ? 0.3 : 0.0});
        const double p = testing::log_uniform(gen, 1e-2, 1e2);
        const auto res = max_performance_allocation(snap, p);
        const auto ref = numeric_reference_allocation(snap, p);
        CHECK(rel_diff(blue_mse(snap, res.allocation), blue_mse(snap, ref)) <= 1e-6);
        CHECK(blue_mse(snap, res.allocation) <= blue_mse(snap, ref) * (1.0 + 1e-12));
    }
}

TEST_CASE("numeric reference basic cases") {
    SUBCASE("single sensor") {
        const auto snap = make_snapshot(1.0, {10.0}, {3.0});
        CHECK(numeric_reference_allocation(snap, 2.0).total_power(snap) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("identical sensors") {
        const auto snap = make_snapshot(1.0, {10.0, 10.0, 10.0, 10.0}, {3.0, 3.0, 3.0, 3.0});
        const auto powers = numeric_reference_allocation(snap, 2.0).transmit_powers(snap);
        for (double pk : powers) CHECK(std::abs(pk - 0.5) <= 1e-8);
    }
}

TEST_CASE("capped optimum") {
    std::mt19937_64 gen(24);
    SUBCASE("unbounded caps reproduce the uncapped optimum") {
        for (int i = 0; i < 50; ++i) {
            const auto snap = testing::random_snapshot(gen, 6);
            const auto capped = max_performance_with_caps(snap, 1.0, CapVector::unbounded(6));
            const auto free = max_performance_allocation(snap, 1.0);
            for (std::size_t k = 0; k < 6; ++k) CHECK(capped.allocation[k] == free.allocation[k]);
            CHECK(capped.diagnostics.passes == 1);
        }
    }
    SUBCASE("caps at the equal share force the equal allocation") {
        for (int i = 0; i < 50; ++i) {
            const auto snap = testing::random_snapshot(gen, 5);
            const auto res = max_performance_with_caps(snap, 2.0, CapVector::uniform(5, 0.4));
            const auto eq = equal_allocation(snap, 2.0);
            for (std::size_t k = 0; k < 5; ++k) CHECK(rel_diff(res.allocation[k], eq[k]) <= 1e-12);
        }
    }
    SUBCASE("caps of 1.5 times the equal share at six sensors") {
        for (int i = 0; i < 50; ++i) {
            const auto snap = testing::random_snapshot(gen, 6, {0.5, 500.0, 0.05, 20.0, i % 4 == 0 ? 0.3 : 0.0});
            const double p = testing::log_uniform(gen, 1e-2, 1e2);
            const auto caps = CapVector::uniform(6, 1.5 * p / 6.0);
            const auto res = max_performance_with_caps(snap, p, caps);
            const double d = blue_mse(snap, res.allocation);
            CHECK(d >= blue_mse(snap, max_performance_allocation(snap, p).allocation) * (1.0 - 1e-12));
            CHECK(d <= equal_power_mse(snap, p) * (1.0 + 1e-12));
            CHECK(res.diagnostics.passes <= 6);
            CHECK(rel_diff(res.allocation.total_power(snap), p) <= 1e-10);
            const auto powers = res.allocation.transmit_powers(snap);
            for (std::size_t k = 0; k < 6; ++k) CHECK(powers[k] <= caps[k] * (1.0 + 1e-12));
            const auto ref = numeric_reference_allocation(snap, p, caps);
            CHECK(rel_diff(d, blue_mse(snap, ref)) <= 1e-6);
        }
    }
    SUBCASE("caps below the budget spend exactly the caps") {
        const auto snap = make_snapshot(1.0, {10.0, 20.0, 30.0}, {1.0, 2.0, 3.0});
        const CapVector caps({0.1, 0.2, 0.3});
        const auto res = max_performance_with_caps(snap, 5.0, caps);
        CHECK(rel_diff(res.allocation.total_power(snap), 0.6) <= 1e-12);
        CHECK(res.diagnostics.dual_value == 0.0);
    }
    SUBCASE("mismatched cap vector") {
        CHECK_THROWS_AS(max_performance_with_caps(make_snapshot(1.0, {1.0}, {1.0}), 1.0, CapVector::uniform(2, 1.0)),
                        ConfigError);
    }
}

TEST_CASE("minimum-power allocation") {
    SUBCASE("single sensor") {
        const auto snap = make_snapshot(1.0, {100.0}, {1.0});
        const auto res = min_power_allocation(snap, 0.02);
        CHECK(res.allocation[0] == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(res.allocation.total_power(snap) == doctest::Approx(101.0).epsilon(1e-12));
        CHECK(blue_mse(snap, res.allocation) == doctest::Approx(0.02).epsilon(1e-12));
    }
    SUBCASE("target at or below the floor") {
        const auto snap = make_snapshot(1.0, {0.25, 0.75}, {1.0, 1.0});
        try {
            min_power_allocation(snap, 0.5);
            FAIL("expected InfeasibleTarget");
        } catch (const InfeasibleTarget& e) {
            CHECK(e.floor() == doctest::Approx(1.0));
        }
        CHECK_THROWS_AS(min_power_allocation(snap, 1.0), InfeasibleTarget);
    }
    SUBCASE("matches dual bisection on heterogeneous snapshots") {
        std::mt19937_64 gen(25);
        for (int i = 0; i < 100; ++i) {
            const auto snap = testing::random_snapshot(gen, 5);
            const double d0 = snap.distortion_floor() * testing::log_uniform(gen, 1.05, 50.0);
            const auto res = min_power_allocation(snap, d0);
            CHECK(rel_diff(res.allocation.total_power(snap), min_power_by_dual_bisection(snap, d0)) <= 1e-6);
            CHECK(rel_diff(blue_mse(snap, res.allocation), d0) <= 1e-9);
        }
    }
    SUBCASE("noiseless sensors still meet the target exactly") {
        std::mt19937_64 gen(26);
        for (int i = 0; i < 100; ++i) {
            const auto snap = testing::random_snapshot(gen, 4, {0.5, 500.0, 0.05, 20.0, 0.4});
            const double floor = snap.distortion_floor();
            const double d0 = floor > 0.0 ? floor * 3.0 : snap.variance_theta() * testing::log_uniform(gen, 1e-3, 1.0);
            const auto res = min_power_allocation(snap, d0);
            CHECK(rel_diff(blue_mse(snap, res.allocation), d0) <= 1e-9);
        }
    }
    SUBCASE("round trip through the sum-power optimum") {
        std::mt19937_64 gen(27);
        for (int i = 0; i < 100; ++i) {
            const auto snap = testing::random_snapshot(gen, 1 + i % 8);
            const double p = testing::log_uniform(gen, 1e-2, 1e2);
            const auto forward = max_performance_allocation(snap, p);
            const double d_star = blue_mse(snap, forward.allocation);
            const auto back = min_power_allocation(snap, d_star);
            CHECK(rel_diff(back.allocation.total_power(snap), p) <= 1e-8);
            for (std::size_t k = 0; k < snap.size(); ++k) {
                CHECK((back.allocation[k] > 0.0) == (forward.allocation[k] > 0.0));
            }
        }
    }
    SUBCASE("scaling prior variance and target together") {
        std::mt19937_64 gen(28);
        for (int i = 0; i < 50; ++i) {
            const auto snap = testing::random_snapshot(gen, 6);
            const double d0 = snap.distortion_floor() * 4.0;
            const Snapshot scaled(SignalPrior(snap.variance_theta() * 7.0),
                                  std::vector<double>(snap.gamma_inv().begin(), snap.gamma_inv().end()),
                                  std::vector<double>(snap.channel_snr().begin(), snap.channel_snr().end()));
            const auto a = min_power_allocation(snap, d0).allocation;
            const auto b = min_power_allocation(scaled, d0 * 7.0).allocation;
            for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12 * std::max(1.0, a[k]));
        }
    }
}

TEST_CASE("squared-power allocation") {
    SUBCASE("identical sensors agree with the sum-power solution") {
        const auto snap = make_snapshot(1.0, {40.0, 40.0, 40.0}, {2.0, 2.0, 2.0});
        const auto a = l2_min_power_allocation(snap, 0.05).allocation;
        const auto b = min_power_allocation(snap, 0.05).allocation;
        for (std::size_t k = 0; k < 3; ++k) CHECK(rel_diff(a[k], b[k]) <= 1e-9);
    }
    SUBCASE("single sensor agrees with the sum-power solution") {
        const auto snap = make_snapshot(1.0, {100.0}, {1.0});
        CHECK(rel_diff(l2_min_power_allocation(snap, 0.02).allocation[0], 100.0) <= 1e-9);
    }
    SUBCASE("two and three sensors match constrained search") {
        std::mt19937_64 gen(29);
        for (int i = 0; i < 30; ++i) {
            const auto snap = testing::random_snapshot(gen, 2 + i % 2, {1.0, 50.0, 0.2, 5.0, 0.0});
            const double d0 = snap.distortion_floor() * testing::log_uniform(gen, 1.2, 10.0);
            const auto res = l2_min_power_allocation(snap, d0);
            CHECK(rel_diff(blue_mse(snap, res.allocation), d0) <= 1e-9);
            const double found = sum_sq(res.allocation.transmit_powers(snap));
            CHECK(rel_diff(found, l2_by_search(snap, snap.variance_theta() / d0)) <= 1e-6);
        }
    }
    SUBCASE("trades total power for a smaller squared norm") {
        std::mt19937_64 gen(30);
        for (int i = 0; i < 100; ++i) {
            const auto snap = testing::random_snapshot(gen, 4, {0.5, 500.0, 0.05, 20.0, i % 5 == 0 ? 0.25 : 0.0});
            const double floor = snap.distortion_floor();
            const double d0 = floor > 0.0 ? floor * testing::log_uniform(gen, 1.1, 20.0) : 0.1 * snap.variance_theta();
            const auto l2 = l2_min_power_allocation(snap, d0).allocation.transmit_powers(snap);
            const auto l1 = min_power_allocation(snap, d0).allocation.transmit_powers(snap);
            CHECK(sum_sq(l2) <= sum_sq(l1) * (1.0 + 1e-9));
            CHECK(total(l2) >= total(l1) * (1.0 - 1e-9));
        }
    }
    SUBCASE("infeasible target") {
        CHECK_THROWS_AS(l2_min_power_allocation(make_snapshot(1.0, {1.0}, {1.0}), 0.5), InfeasibleTarget);
    }
}
