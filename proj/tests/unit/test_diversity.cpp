#include "fadefuse/diversity.hpp"
#include "fadefuse/errors.hpp"
#include "fadefuse/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace fadefuse;
using testing::rel_diff;

namespace {

/// Single-sensor equal-power outage under Rayleigh fading:
/// D > D0 iff s < s* = (1 + 1/gamma) / (P (D0/sigma^2 - 1/gamma)).
double single_sensor_outage(const ChannelConfig& cfg, double p, double d0) {
    const double gi = cfg.observation.noise_variances.front() / cfg.prior.variance_theta();
    const double s_star = (1.0 + gi) / (p * (d0 / cfg.prior.variance_theta() - gi));
    const double mean_s = cfg.propagation.mean_free_snr(0) * cfg.fading.mean_power;
    return 1.0 - std::exp(-s_star / mean_s);
}

MonteCarloOptions mc(std::uint64_t trials, std::uint64_t seed = 1, std::size_t workers = 1) {
    MonteCarloOptions o;
    o.trials = trials;
    o.seed = seed;
    o.workers = workers;
    return o;
}

}  // namespace

TEST_CASE("single-sensor outage matches the closed form") {
    const auto cfg = reference_setup();
    for (auto [p, d0] : {std::pair{1e-3, 0.02}, {1e-2, 0.02}, {1e-4, 0.05}, {3e-3, 0.015}}) {
        const auto est = outage_probability(cfg, 1, Policy::equal(), d0, p, mc(40000, 3, 0));
        const double expected = single_sensor_outage(cfg, p, d0);
        const double se = std::sqrt(expected * (1.0 - expected) / 40000.0);
        CHECK(std::abs(est.probability - expected) <= 3.0 * se);
        CHECK(est.half_width_95 == doctest::Approx(1.959963984540054 * est.standard_error()));
    }
}

TEST_CASE("outage limits") {
    const auto cfg = reference_setup();
    SUBCASE("threshold above any achievable distortion") {
        CHECK(outage_probability(cfg, 3, Policy::equal(), 1e12, 1.0, mc(5000)).probability == 0.0);
    }
    SUBCASE("threshold below the deterministic floor") {
        const auto est = outage_probability(cfg, 3, Policy::equal(), 0.01 / 3.0 * 0.9, 1.0, mc(5000));
        CHECK(est.probability == 1.0);
        CHECK(est.below_floor);
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(outage_probability(cfg, 0, Policy::equal(), 0.02, 1.0, mc(10)), ConfigError);
        CHECK_THROWS_AS(outage_probability(cfg, 2, Policy::equal(), 0.02, 1.0, mc(0)), ConfigError);
    }
}

TEST_CASE("outage dominance holds trial by trial") {
    const auto cfg = reference_setup();
    for (double p : {1e-4, 1e-3, 1e-2}) {
        const auto eq = outage_probability(cfg, 6, Policy::equal(), 0.02, p, mc(20000, 8, 0));
        const auto opt = outage_probability(cfg, 6, Policy::max_performance(), 0.02, p, mc(20000, 8, 0));
        const auto cap = outage_probability(cfg, 6, Policy::capped_share(1.5), 0.02, p, mc(20000, 8, 0));
        CHECK(opt.outages <= cap.outages);
        CHECK(cap.outages <= eq.outages);
    }
    std::mt19937_64 gen(41);
    for (int i = 0; i < 200; ++i) {
        const auto snap = testing::random_snapshot(gen, 6);
        const double p = testing::log_uniform(gen, 1e-2, 1e2);
        const double opt = trial_distortion(snap, Policy::max_performance(), p);
        const double cap = trial_distortion(snap, Policy::capped_share(1.5), p);
        const double eq = trial_distortion(snap, Policy::equal(), p);
        CHECK(opt <= cap * (1.0 + 1e-12));
        CHECK(cap <= eq * (1.0 + 1e-12));
    }
}

TEST_CASE("Monte Carlo results do not depend on the worker count") {
    const auto cfg = reference_setup();
    const auto a = outage_probability(cfg, 4, Policy::max_performance(), 0.02, 1e-3, mc(30000, 5, 1));
    const auto b = outage_probability(cfg, 4, Policy::max_performance(), 0.02, 1e-3, mc(30000, 5, 4));
    CHECK(a.outages == b.outages);
    const auto da = average_distortion(cfg, 4, Policy::equal(), 1e-3, mc(30000, 5, 1));
    const auto db = average_distortion(cfg, 4, Policy::equal(), 1e-3, mc(30000, 5, 3));
    CHECK(da.mean == db.mean);
    CHECK(active_fraction(cfg, 10, 1e-4, mc(20000, 5, 1)) == active_fraction(cfg, 10, 1e-4, mc(20000, 5, 4)));
}

TEST_CASE("average distortion") {
    auto cfg = reference_setup();
    SUBCASE("without fading it is the single-snapshot value") {
        cfg.fading.kind = FadingModel::Kind::none;
        const auto snap = sample_snapshot(cfg, 5, RngStream(1, 0));
        const auto avg = average_distortion(cfg, 5, Policy::equal(), 1e-3, mc(100));
        CHECK(rel_diff(avg.mean, equal_power_mse(snap, 1e-3)) <= 1e-14);
    }
    SUBCASE("decreases with power") {
        double last = std::numeric_limits<double>::infinity();
        for (double p = 1e-5; p <= 1.0; p *= 10.0) {
            const double mean = average_distortion(cfg, 3, Policy::equal(), p, mc(5000)).mean;
            CHECK(mean < last);
            last = mean;
        }
    }
    SUBCASE("low-power mean follows the gamma-sum inverse moment") {
        // With P eta / K << gamma the information is (P/K) sum eta, and for K
        // exponential merits E[1 / sum eta] = 1 / ((K - 1) E[eta]).
        const double p = 1e-7;
        const double mean_eta = analytic_mean_merit(cfg, 0);
        for (std::size_t k : {3, 30}) {
            const double expected = double(k) / ((double(k) - 1.0) * p * mean_eta);
            const double got = average_distortion(cfg, k, Policy::equal(), p, mc(100000, 2, 0)).mean;
            CHECK(rel_diff(got, expected) <= 0.02);
        }
    }
}

TEST_CASE("large-population distortion floor") {
    ChannelConfig cfg;
    cfg.propagation.nominal_gain = 1.0;
    cfg.propagation.distances = {1.0};
    cfg.propagation.channel_noise_variance = 1.0;
    cfg.observation.noise_variances = {0.0};
    CHECK(d_infinity(cfg, 10.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(d_infinity(cfg, 20.0) == doctest::Approx(0.05).epsilon(1e-14));

    const auto ref = reference_setup();
    CHECK(d_infinity(ref, 1e-3) == doctest::Approx(1.0 / (1e-3 * 1e5 * 100.0 / 101.0)).epsilon(1e-12));

    auto mixed = ref;
    mixed.propagation.distances = {100.0, 100.0};
    CHECK(rel_diff(d_infinity(mixed, 1e-3, 400000), d_infinity(ref, 1e-3)) <= 0.01);
}

TEST_CASE("exponential rate function") {
    CHECK(rate_function_exponential(2.0, 2.0) == 0.0);
    CHECK(rate_function_exponential(std::exp(1.0), 1.0) == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
    CHECK(rate_function_exponential(0.1, 1.0) == doctest::Approx(0.1 + std::log(10.0) - 1.0).epsilon(1e-14));
    CHECK(rate_function_exponential(0.1, 1.0) == doctest::Approx(1.402585).epsilon(1e-6));
    CHECK_THROWS_AS(rate_function_exponential(0.0, 1.0), ConfigError);
}

TEST_CASE("numeric rate function") {
    SUBCASE("zero at the mean") {
        const auto v = rate_function_numeric({3.0, ExponentialLaw{3.0}});
        CHECK(v.value == 0.0);
        CHECK(v.theta_star == 0.0);
    }
    SUBCASE("matches the closed form on both tails") {
        for (double mean : {0.01, 1.0, 1e5}) {
            for (double ratio = 0.05; ratio <= 5.0; ratio *= 1.37) {
                const double a = ratio * mean;
                const auto v = rate_function_numeric({a, ExponentialLaw{mean}});
                CHECK(std::abs(v.value - rate_function_exponential(a, mean)) <= 1e-8);
                CHECK(v.value > 0.0);
                CHECK(std::abs(v.theta_star - (1.0 / mean - 1.0 / a)) <= 1e-9 / mean);
            }
        }
    }
    SUBCASE("decreasing in a below the mean") {
        double last = std::numeric_limits<double>::infinity();
        for (double a = 0.05; a < 1.0; a += 0.05) {
            const double v = rate_function_numeric({a, ExponentialLaw{1.0}}).value;
            CHECK(v < last);
            last = v;
        }
    }
    SUBCASE("empirical samples approach the exponential law") {
        const RngStream rng(9, 0);
        std::vector<double> x(200000);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.0 * rng.exponential(i);
        for (double a : {0.8, 1.4, 3.0}) {
            const auto v = rate_function_numeric({a, x});
            CHECK(std::abs(v.value - rate_function_exponential(a, 2.0)) <= 0.01);
        }
    }
    SUBCASE("threshold outside the sample range") {
        CHECK_THROWS_AS(rate_function_numeric({10.0, std::vector<double>{1.0, 2.0, 3.0}}), DivergentMGF);
    }
}

TEST_CASE("Chernoff bound") {
    CHECK(chernoff_bound(7, 0.0) == 1.0);
    CHECK(chernoff_bound(10, 0.5) == doctest::Approx(6.7379e-3).epsilon(1e-4));
    // Empirical lower-tail probability of a K-sample mean of exponentials.
    const RngStream rng(12, 0);
    constexpr std::uint64_t trials = 100000;
    constexpr std::size_t k = 10;
    const double a = 0.6;
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += rng.exponential(t * k + i);
        hits += sum / k < a ? 1 : 0;
    }
    const double p = double(hits) / trials;
    const double bound = chernoff_bound(k, rate_function_exponential(a, 1.0));
    CHECK(p <= bound + 3.0 * std::sqrt(p * (1.0 - p) / trials));
}

TEST_CASE("sandwich bounds on the equal-power information") {
    const double inf = std::numeric_limits<double>::infinity();
    SUBCASE("noiseless sensors close the gap") {
        const auto snap = testing::make_snapshot(1.0, {inf, inf, inf}, {1.0, 2.0, 5.0});
        const auto r = sandwich_check(snap, 3.0);
        CHECK(r.lower == r.upper);
        CHECK(rel_diff(r.value, r.upper) <= 1e-15);
        CHECK(r.holds);
    }
    SUBCASE("random snapshots") {
        std::mt19937_64 gen(43);
        for (int i = 0; i < 2000; ++i) {
            const auto snap = testing::random_snapshot(gen, 1 + i % 20, {0.5, 500.0, 0.05, 20.0, 0.1});
            const auto r = sandwich_check(snap, testing::log_uniform(gen, 1e-3, 1e3));
            CHECK(r.holds);
            CHECK(r.lower_margin() >= -1e-12 * r.upper);
            CHECK(r.upper_margin() >= -1e-12 * r.upper);
        }
    }
    SUBCASE("upper bound tightens as the population grows") {
        const auto cfg = reference_setup();
        // The relative gap is about 2 P E[eta] / (K gamma), so it shrinks like 1/K.
        std::vector<double> excess;
        for (std::size_t k : {100, 1000, 10000}) {
            const auto r = sandwich_check(sample_snapshot(cfg, k, RngStream(4, k)), 1e-2);
            excess.push_back(r.upper / r.value - 1.0);
            CHECK(excess.back() >= 0.0);
        }
        CHECK(excess[1] < 0.3 * excess[0]);
        CHECK(excess[2] < 0.3 * excess[1]);
        CHECK(excess[2] < 0.005);
    }
}

TEST_CASE("correction term does not change the large-deviation exponent") {
    // Normalized channel: s exponential with unit mean, gamma = 100, P = 10.
    constexpr std::size_t k = 50;
    constexpr std::uint64_t trials = 1000000;
    const double p = 10.0, gi = 0.01;
    const double mean_beta = p / (1.0 + gi);
    const double a = 0.6 * mean_beta;
    std::uint64_t upper_hits = 0, lower_hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        const RngStream rng(21, t);
        double u = 0.0, corr = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double s = rng.exponential(i);
            u += p * s / (1.0 + gi);
            corr += gi * p * p * s * s;
        }
        u /= k;
        upper_hits += u < a ? 1 : 0;
        lower_hits += u - corr / (k * k) < a ? 1 : 0;
    }
    REQUIRE(upper_hits > 100);
    const double e_upper = -std::log(double(upper_hits) / trials) / k;
    const double e_lower = -std::log(double(lower_hits) / trials) / k;
    CHECK(rel_diff(e_upper, e_lower) < 0.05);
}

TEST_CASE("log-log slope fitting") {
    SUBCASE("exact power law") {
        for (int order = 1; order <= 4; ++order) {
            std::vector<OutagePoint> curve;
            for (double p = 1.0; p <= 1e3; p *= 2.0) curve.push_back({p, 0.05 * std::pow(p, -order)});
            const auto fit = fit_log_log(curve);
            CHECK(std::abs(fit.slope - order) <= 1e-12);
            CHECK(fit.residual <= 1e-12);
        }
    }
    SUBCASE("single-sensor analytic curve has unit slope at high power") {
        const auto cfg = reference_setup();
        std::vector<OutagePoint> curve;
        for (double p = 1.0; p <= 100.0; p *= 1.5) curve.push_back({p, single_sensor_outage(cfg, p, 0.02)});
        CHECK(std::abs(fit_log_log(curve).slope - 1.0) <= 1e-3);
    }
    SUBCASE("window keeps only well-estimated points") {
        std::vector<OutagePoint> curve{{1.0, 0.9}, {10.0, 0.1}, {100.0, 0.01}, {1000.0, 1e-6}};
        const auto fit = diversity_slope(curve, 100000);
        CHECK(fit.points.size() == 2);
        CHECK(fit.slope == doctest::Approx(1.0));
        CHECK_THROWS_AS(diversity_slope(curve, 1000), InsufficientData);
    }
}

TEST_CASE("active fraction") {
    auto cfg = reference_setup();
    SUBCASE("identical deterministic sensors are all active") {
        cfg.fading.kind = FadingModel::Kind::none;
        CHECK(active_fraction(cfg, 8, 1e-6, mc(200)) == 1.0);
    }
    SUBCASE("grows with power and drops below one at small budgets") {
        double last = 0.0;
        for (double p = 1e-7; p <= 1e-1; p *= 10.0) {
            const double f = active_fraction(cfg, 20, p, mc(2000));
            CHECK(f >= last);
            CHECK(f <= 1.0);
            last = f;
        }
        CHECK(active_fraction(cfg, 20, 1e-7, mc(2000)) < 1.0);
    }
    SUBCASE("per-snapshot active count never falls as the budget grows") {
        std::mt19937_64 gen(44);
        for (int i = 0; i < 100; ++i) {
            const auto snap = testing::random_snapshot(gen, 10);
            std::size_t last = 0;
            for (double p = 1e-3; p <= 1e3; p *= 3.0) {
                const auto n = max_performance_allocation(snap, p).diagnostics.active_count;
                CHECK(n >= last);
                last = n;
            }
        }
    }
}

TEST_CASE("equal-power budget for a target") {
    std::mt19937_64 gen(45);
    for (int i = 0; i < 100; ++i) {
        const auto snap = testing::random_snapshot(gen, 6);
        const double d0 = snap.distortion_floor() * testing::log_uniform(gen, 1.1, 20.0);
        const double budget = equal_power_min_budget(snap, d0);
        CHECK(rel_diff(equal_power_mse(snap, budget), d0) <= 1e-10);
        CHECK(budget >= min_power_allocation(snap, d0).allocation.total_power(snap) * (1.0 - 1e-12));
    }
    CHECK_THROWS_AS(equal_power_min_budget(testing::make_snapshot(1.0, {1.0}, {1.0}), 1.0), InfeasibleTarget);
}

TEST_CASE("minimum-power averages") {
    auto cfg = reference_setup();
    SUBCASE("identical deterministic sensors need the same power either way") {
        cfg.fading.kind = FadingModel::Kind::none;
        const auto avg = average_min_power(cfg, 10, 0.005, mc(50));
        CHECK(rel_diff(avg.mean_optimal, avg.mean_equal) <= 1e-9);
    }
    SUBCASE("optimal never needs more and saves more power at strict targets") {
        double last_saving = std::numeric_limits<double>::infinity();
        for (double d0 : {1e-3, 3e-3, 1e-2}) {
            const auto avg = average_min_power(cfg, 20, d0, mc(2000, 6, 0));
            CHECK(avg.feasible_trials == 2000);
            CHECK(avg.mean_optimal <= avg.mean_equal);
            CHECK(avg.mean_equal - avg.mean_optimal < last_saving);
            last_saving = avg.mean_equal - avg.mean_optimal;
        }
    }
    SUBCASE("at loose targets the ratio approaches the best-sensor limit") {
        // Low power: optimal feeds the best sensor only, equal power needs
        // K / sum(eta) per unit information, so the ratio tends to
        // E[K eta_max / sum eta] (about 2.7 at K = 8).
        const auto loose = average_min_power(cfg, 8, 0.5, mc(4000, 6, 0));
        const auto tight = average_min_power(cfg, 8, 0.01, mc(4000, 6, 0));
        CHECK(loose.savings_ratio() > tight.savings_ratio());
    }
    SUBCASE("targets below the floor are counted as infeasible") {
        const auto avg = average_min_power(cfg, 5, 1e-3, mc(100));
        CHECK(avg.infeasible_trials == 100);
        CHECK(avg.feasible_trials == 0);
    }
}
