#include "fadefuse/diversity.hpp"
#include "fadefuse/experiment.hpp"
#include "fadefuse/rng.hpp"
#include "fadefuse/units.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kConfig = 2, kInfeasible = 3, kInternal = 4 };

struct ConfigSource {
    std::string path;
    std::vector<std::string> overrides;
};

fadefuse::IniValues load_values(const ConfigSource& source) {
    fadefuse::IniValues values;
    if (!source.path.empty()) {
        std::ifstream in(source.path);
        if (!in) throw fadefuse::ConfigError("cannot open config file '" + source.path + "'");
        values = fadefuse::parse_ini(in);
    }
    if (!values.count("experiment.seed")) {
        if (const char* env = std::getenv("FADEFUSE_SEED"); env && *env) values["experiment.seed"] = env;
    }
    fadefuse::apply_overrides(values, source.overrides);
    return values;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int cmd_run(const ConfigSource& source, const std::optional<std::string>& scenario, const std::optional<std::uint64_t>& seed,
            const std::optional<std::uint64_t>& trials, const std::optional<std::size_t>& workers,
            const std::optional<std::string>& output) {
    auto values = load_values(source);
    if (scenario) values["experiment.scenario"] = *scenario;
    if (seed) values["experiment.seed"] = std::to_string(*seed);
    if (trials) values["experiment.trials"] = std::to_string(*trials);
    if (workers) values["experiment.workers"] = std::to_string(*workers);
    if (output) values["experiment.output"] = *output;
    const auto config = fadefuse::build_experiment(values);
    config.validate();

    fadefuse::RunSummary summary;
    if (config.output == "-") {
        summary = fadefuse::run_experiment(config, std::cout);
    } else {
        std::ofstream out(config.output, std::ios::binary);
        if (!out) throw fadefuse::ConfigError("cannot open output file '" + config.output + "'");
        summary = fadefuse::run_experiment(config, out);
    }
    std::cerr << "scenario=" << config.scenario << " seed=" << config.monte_carlo.seed
              << " trials=" << config.monte_carlo.trials << " rows=" << summary.rows
              << " wall_seconds=" << fmt(summary.wall_seconds) << '\n';
    return kOk;
}

int cmd_alloc(const std::string& file, const std::string& policy, const std::string& budget,
              const std::optional<double>& target, const std::vector<double>& caps, double cap_share,
              const std::string& format) {
    std::ifstream in(file);
    if (!in) throw fadefuse::ConfigError("cannot open snapshot file '" + file + "'");
    const auto snapshot = fadefuse::parse_snapshot(in);

    fadefuse::AllocRequest request;
    if (policy == "equal") request.policy = fadefuse::AllocPolicy::equal;
    else if (policy == "optimal" || policy == "max-performance") request.policy = fadefuse::AllocPolicy::max_performance;
    else if (policy == "capped") request.policy = fadefuse::AllocPolicy::capped;
    else if (policy == "min-power") request.policy = fadefuse::AllocPolicy::min_power;
    else if (policy == "l2") request.policy = fadefuse::AllocPolicy::l2_min_power;
    else throw fadefuse::ConfigError("unknown policy '" + policy + "'");
    if (!budget.empty()) request.budget = fadefuse::parse_quantity(budget, fadefuse::Quantity::power);
    if (target) request.target = *target;
    request.caps = caps;
    request.cap_share = cap_share;
    request.key_value = format == "kv";
    if (!caps.empty() && caps.size() != snapshot.size())
        throw fadefuse::ConfigError("--caps needs one value per sensor");

    fadefuse::allocate_once(snapshot, request, std::cout);
    return kOk;
}

int cmd_rate(double a, double mean, std::uint64_t samples, std::uint64_t seed, std::size_t sensors) {
    if (!(a > 0.0) || !(mean > 0.0)) throw fadefuse::ConfigError("--a and --mean must be positive");
    const double closed = fadefuse::rate_function_exponential(a, mean);
    const auto numeric = fadefuse::rate_function_numeric({a, fadefuse::ExponentialLaw{mean}});
    std::cout << "a=" << fmt(a) << '\n';
    std::cout << "mean=" << fmt(mean) << '\n';
    std::cout << "rate_closed_form=" << fmt(closed) << '\n';
    std::cout << "rate_numeric=" << fmt(numeric.value) << '\n';
    std::cout << "theta_star=" << fmt(numeric.theta_star) << '\n';
    if (samples > 0) {
        const fadefuse::RngStream rng(seed, 0);
        std::vector<double> draws(samples);
        for (std::uint64_t i = 0; i < samples; ++i) draws[i] = mean * rng.exponential(i);
        const auto empirical = fadefuse::rate_function_numeric({a, std::move(draws)});
        std::cout << "rate_empirical=" << fmt(empirical.value) << '\n';
    }
    if (sensors > 0) std::cout << "chernoff_bound=" << fmt(fadefuse::chernoff_bound(sensors, closed)) << '\n';
    return kOk;
}

int cmd_dinf(const ConfigSource& source, const std::string& p_tot) {
    auto values = load_values(source);
    if (!values.count("experiment.scenario")) values["experiment.scenario"] = fadefuse::scenario::kDistortion;
    const auto config = fadefuse::build_experiment(values);
    const double p = fadefuse::parse_quantity(p_tot, fadefuse::Quantity::power);
    if (!(p > 0.0)) throw fadefuse::ConfigError("--p-tot must be positive");
    std::cout << "p_tot[W]=" << fmt(p) << '\n';
    std::cout << "d_inf[theta^2]=" << fmt(fadefuse::d_infinity(config.channel, p, 1'000'000, config.monte_carlo.seed))
              << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power allocation and outage experiments for sensor fusion over fading channels"};
    app.require_subcommand(1);

    ConfigSource run_source;
    std::optional<std::string> scenario, output;
    std::optional<std::uint64_t> seed, trials;
    std::optional<std::size_t> workers;
    auto* run = app.add_subcommand("run", "Run an experiment sweep and write CSV");
    run->add_option("-c,--config", run_source.path, "INI-style config file")->check(CLI::ExistingFile);
    run->add_option("--set", run_source.overrides, "Override section.key=value (repeatable)");
    run->add_option("--scenario", scenario, "Scenario preset");
    run->add_option("--seed", seed, "Base seed (overrides FADEFUSE_SEED and the config)");
    run->add_option("--trials", trials, "Monte Carlo trials per point");
    run->add_option("--workers", workers, "Worker threads (0 = all cores)");
    run->add_option("-o,--output", output, "CSV path, or - for stdout");

    std::string snapshot_file, policy = "optimal", budget, format = "table";
    std::optional<double> target;
    std::vector<double> caps;
    double cap_share = 1.5;
    auto* alloc = app.add_subcommand("alloc", "Solve one snapshot and print the allocation");
    alloc->add_option("file", snapshot_file, "Snapshot file")->required()->check(CLI::ExistingFile);
    alloc->add_option("--policy", policy, "equal, optimal, capped, min-power or l2")->capture_default_str();
    alloc->add_option("--budget", budget, "Total power (W, mW, dBm or dBW)");
    alloc->add_option("--target", target, "Distortion target");
    alloc->add_option("--caps", caps, "Per-sensor power caps in watts")->delimiter(',');
    alloc->add_option("--cap-share", cap_share, "Uniform cap as a multiple of budget / K")->capture_default_str();
    alloc->add_option("--format", format, "table or kv")->check(CLI::IsMember({"table", "kv"}))->capture_default_str();

    double rate_a = 1.0, rate_mean = 1.0;
    std::uint64_t rate_samples = 0, rate_seed = 1;
    std::size_t rate_sensors = 0;
    auto* rate = app.add_subcommand("rate", "Evaluate the rate function of an exponential law");
    rate->add_option("--a", rate_a, "Threshold a")->required();
    rate->add_option("--mean", rate_mean, "Mean of the exponential law")->capture_default_str();
    rate->add_option("--samples", rate_samples, "Also estimate from this many sampled values");
    rate->add_option("--seed", rate_seed, "Seed for --samples")->capture_default_str();
    rate->add_option("--sensors", rate_sensors, "Print the Chernoff bound for this many sensors");

    ConfigSource dinf_source;
    std::string p_tot;
    auto* dinf = app.add_subcommand("dinf", "Large-K equal-power distortion floor");
    dinf->add_option("-c,--config", dinf_source.path, "INI-style config file")->check(CLI::ExistingFile);
    dinf->add_option("--set", dinf_source.overrides, "Override section.key=value (repeatable)");
    dinf->add_option("--p-tot", p_tot, "Total power (W, mW, dBm or dBW)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return cmd_run(run_source, scenario, seed, trials, workers, output);
        if (*alloc) return cmd_alloc(snapshot_file, policy, budget, target, caps, cap_share, format);
        if (*rate) return cmd_rate(rate_a, rate_mean, rate_samples, rate_seed, rate_sensors);
        if (*dinf) return cmd_dinf(dinf_source, p_tot);
    } catch (const fadefuse::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const fadefuse::InfeasibleTarget& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        std::cerr << "feasibility_floor=" << fmt(e.floor()) << '\n';
        return kInfeasible;
    } catch (const fadefuse::InfeasibleSweep& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const fadefuse::InternalConsistency& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    } catch (const fadefuse::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
