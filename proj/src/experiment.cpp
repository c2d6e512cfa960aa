#include "fadefuse/experiment.hpp"

#include "fadefuse/units.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fadefuse {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string cell(const std::string& text, std::size_t width) {
    return text + std::string(text.size() < width ? width - text.size() : 1, ' ');
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& columns) { row_strings(columns); }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(num(v));
        row_strings(cells);
        ++rows_;
    }

    std::size_t rows() const noexcept { return rows_; }

private:
    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

    std::ostream& out_;
    std::size_t rows_ = 0;
};

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InternalConsistency("estimated probability outside [0, 1]");
}

void check_power(double p) {
    if (!(p >= 0.0)) throw InternalConsistency("negative power in output");
}

Policy policy_for(const ExperimentConfig& config, Policy::Kind kind) {
    switch (kind) {
        case Policy::Kind::equal: return Policy::equal();
        case Policy::Kind::max_performance: return Policy::max_performance();
        case Policy::Kind::capped: return Policy::capped_share(config.cap_share);
    }
    return Policy::equal();
}

std::string suffix(std::size_t k) { return "_K" + std::to_string(k); }

void run_power_sweep(const ExperimentConfig& config, CsvWriter& csv) {
    const auto& name = config.scenario;
    std::vector<std::string> cols{"p_tot[W]", "p_tot[dBm]"};
    for (auto k : config.sensor_counts) {
        if (name == scenario::kDistortion) {
            cols.push_back("mean_distortion" + suffix(k) + "[theta^2]");
        } else if (name == scenario::kOutage) {
            cols.push_back("outage" + suffix(k) + "[prob]");
            cols.push_back("halfwidth95" + suffix(k) + "[prob]");
        } else if (name == scenario::kActive) {
            cols.push_back("active_fraction" + suffix(k) + "[frac]");
        } else if (name == scenario::kCompare) {
            cols.push_back("outage_equal" + suffix(k) + "[prob]");
            cols.push_back("outage_optimal" + suffix(k) + "[prob]");
        } else if (name == scenario::kCapped) {
            cols.push_back("outage_equal" + suffix(k) + "[prob]");
            cols.push_back("outage_optimal" + suffix(k) + "[prob]");
            cols.push_back("outage_capped" + suffix(k) + "[prob]");
        }
    }
    if (name == scenario::kDistortion) cols.push_back("d_inf[theta^2]");
    csv.header(cols);

    const auto& mc = config.monte_carlo;
    for (double p : config.sweep.values()) {
        std::vector<double> row{p, watts_to_dbm(p)};
        for (auto k : config.sensor_counts) {
            if (name == scenario::kDistortion) {
                const auto avg = average_distortion(config.channel, k, policy_for(config, config.policy), p, mc);
                row.push_back(avg.mean);
            } else if (name == scenario::kOutage) {
                const auto est = outage_probability(config.channel, k, policy_for(config, config.policy), config.d0, p, mc);
                check_probability(est.probability);
                row.push_back(est.probability);
                row.push_back(est.half_width_95);
            } else if (name == scenario::kActive) {
                const double fraction = active_fraction(config.channel, k, p, mc);
                check_probability(fraction);
                row.push_back(fraction);
            } else {
                const auto equal = outage_probability(config.channel, k, Policy::equal(), config.d0, p, mc);
                const auto optimal = outage_probability(config.channel, k, Policy::max_performance(), config.d0, p, mc);
                check_probability(equal.probability);
                check_probability(optimal.probability);
                // Same trials, and the optimum never does worse on any of them.
                if (optimal.outages > equal.outages) throw InternalConsistency("optimal allocation had more outages than equal power");
                row.push_back(equal.probability);
                row.push_back(optimal.probability);
                if (name == scenario::kCapped) {
                    const auto capped = outage_probability(config.channel, k, Policy::capped_share(config.cap_share), config.d0, p, mc);
                    check_probability(capped.probability);
                    if (capped.outages < optimal.outages) throw InternalConsistency("capped allocation beat the uncapped optimum");
                    row.push_back(capped.probability);
                }
            }
        }
        if (name == scenario::kDistortion) row.push_back(d_infinity(config.channel, p));
        csv.row(row);
    }
}

void run_min_power_sweep(const ExperimentConfig& config, CsvWriter& csv) {
    std::vector<std::string> cols{"d0[theta^2]"};
    for (auto k : config.sensor_counts) {
        cols.push_back("mean_power_optimal" + suffix(k) + "[W]");
        cols.push_back("mean_power_equal" + suffix(k) + "[W]");
        cols.push_back("savings_ratio" + suffix(k) + "[ratio]");
        cols.push_back("infeasible" + suffix(k) + "[count]");
    }
    csv.header(cols);

    bool any_feasible = false;
    for (double d0 : config.sweep.values()) {
        std::vector<double> row{d0};
        for (auto k : config.sensor_counts) {
            const auto avg = average_min_power(config.channel, k, d0, config.monte_carlo);
            if (avg.feasible_trials > 0) {
                any_feasible = true;
                check_power(avg.mean_optimal);
                check_power(avg.mean_equal);
                row.push_back(avg.mean_optimal);
                row.push_back(avg.mean_equal);
                row.push_back(avg.savings_ratio());
            } else {
                row.push_back(std::nan(""));
                row.push_back(std::nan(""));
                row.push_back(std::nan(""));
            }
            row.push_back(static_cast<double>(avg.infeasible_trials));
        }
        csv.row(row);
    }
    if (!any_feasible) throw InfeasibleSweep("every distortion target in the sweep is infeasible");
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, std::ostream& out) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();

    // Rows are buffered so a failed run leaves no partial CSV behind.
    std::ostringstream buffer;
    buffer << "# fadefuse experiment\n";
    buffer << "# scenario=" << config.scenario << '\n';
    buffer << "# seed=" << config.monte_carlo.seed << '\n';
    buffer << "# trials=" << config.monte_carlo.trials << '\n';
    {
        std::ostringstream hash;
        hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config.canonical());
        buffer << "# config_hash=" << hash.str() << '\n';
    }
    CsvWriter csv(buffer);
    if (config.scenario == scenario::kMinPower) {
        run_min_power_sweep(config, csv);
    } else {
        run_power_sweep(config, csv);
    }
    out << buffer.str();
    out.flush();

    RunSummary summary;
    summary.rows = csv.rows();
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return summary;
}

void allocate_once(const Snapshot& snapshot, const AllocRequest& request, std::ostream& out) {
    const bool sum_power = request.policy == AllocPolicy::equal || request.policy == AllocPolicy::max_performance ||
                           request.policy == AllocPolicy::capped;
    if (sum_power && !(request.budget > 0.0)) throw ConfigError("this policy needs a positive --budget");
    if (!sum_power && !(request.target > 0.0)) throw ConfigError("this policy needs a positive --target");

    AllocationResult result;
    const char* policy = "";
    switch (request.policy) {
        case AllocPolicy::equal:
            policy = "equal";
            result.allocation = equal_allocation(snapshot, request.budget);
            result.diagnostics.active_count = result.allocation.active_count();
            result.diagnostics.threshold_constant = std::nan("");
            result.diagnostics.dual_value = std::nan("");
            break;
        case AllocPolicy::max_performance:
            policy = "optimal";
            result = max_performance_allocation(snapshot, request.budget);
            break;
        case AllocPolicy::capped: {
            policy = "capped";
            const auto caps = request.caps.empty()
                                  ? CapVector::uniform(snapshot.size(), request.cap_share * request.budget /
                                                                            static_cast<double>(snapshot.size()))
                                  : CapVector(request.caps);
            result = max_performance_with_caps(snapshot, request.budget, caps);
            break;
        }
        case AllocPolicy::min_power:
            policy = "min-power";
            result = min_power_allocation(snapshot, request.target);
            break;
        case AllocPolicy::l2_min_power:
            policy = "l2";
            result = l2_min_power_allocation(snapshot, request.target);
            break;
    }

    const auto powers = result.allocation.transmit_powers(snapshot);
    const auto merits = snapshot.merits();
    const double info = fusion_information(snapshot, result.allocation);
    const double distortion = info > 0.0 ? snapshot.variance_theta() / info : std::numeric_limits<double>::infinity();
    const double total = result.allocation.total_power(snapshot);

    if (request.key_value) {
        out << "policy=" << policy << '\n';
        out << "sensors=" << snapshot.size() << '\n';
        for (std::size_t k = 0; k < snapshot.size(); ++k) {
            const std::string p = "sensor." + std::to_string(k) + ".";
            out << p << "alpha_prime=" << num(result.allocation[k]) << '\n';
            out << p << "power=" << num(powers[k]) << '\n';
            out << p << "active=" << (result.allocation[k] > 0.0 ? 1 : 0) << '\n';
        }
        out << "active_count=" << result.diagnostics.active_count << '\n';
        out << "threshold_constant=" << num(result.diagnostics.threshold_constant) << '\n';
        out << "dual_value=" << num(result.diagnostics.dual_value) << '\n';
        out << "total_power=" << num(total) << '\n';
        out << "distortion=" << num(distortion) << '\n';
        return;
    }

    out << "policy: " << policy << '\n';
    out << cell("sensor", 8) << cell("gamma", 20) << cell("s[1/W]", 20) << cell("eta[1/W]", 20)
        << cell("alpha_prime[W]", 20) << cell("power[W]", 20) << "active\n";
    for (std::size_t k = 0; k < snapshot.size(); ++k) {
        const auto site = snapshot.sensor(k);
        out << cell(std::to_string(k), 8) << cell(site.is_noiseless() ? "inf" : num(site.gamma()), 20)
            << cell(num(site.channel_snr()), 20) << cell(num(merits[k]), 20) << cell(num(result.allocation[k]), 20)
            << cell(num(powers[k]), 20) << (result.allocation[k] > 0.0 ? "yes" : "no") << '\n';
    }
    out << "active sensors (K1): " << result.diagnostics.active_count << '\n';
    out << "threshold constant:  " << num(result.diagnostics.threshold_constant) << '\n';
    out << "total power [W]:     " << num(total) << '\n';
    out << "distortion:          " << num(distortion) << '\n';
}

}  // namespace fadefuse
