#include "fadefuse/experiment.hpp"

#include "fadefuse/units.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>

namespace fadefuse {

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_number(const std::string& key, const std::string& text) {
    try {
        return parse_quantity(text, Quantity::ratio);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

double parse_power(const std::string& key, const std::string& text) {
    try {
        return parse_quantity(text, Quantity::power);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw ConfigError(key + ": expected a nonnegative integer, got '" + text + "'");
    }
    try {
        return std::stoull(t);
    } catch (const std::exception&) {
        throw ConfigError(key + ": integer out of range '" + text + "'");
    }
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Policy::Kind parse_policy(const std::string& text) {
    if (text == "equal") return Policy::Kind::equal;
    if (text == "optimal" || text == "max-performance") return Policy::Kind::max_performance;
    if (text == "capped") return Policy::Kind::capped;
    throw ConfigError("experiment.policy: expected equal, optimal or capped, got '" + text + "'");
}

const char* policy_name(Policy::Kind kind) {
    switch (kind) {
        case Policy::Kind::equal: return "equal";
        case Policy::Kind::max_performance: return "optimal";
        case Policy::Kind::capped: return "capped";
    }
    return "?";
}

}  // namespace

IniValues parse_ini(std::istream& in) {
    IniValues values;
    std::string section = "experiment";
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto cut = line.find_first_of("#;"); cut != std::string::npos) line.erase(cut);
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3) throw ConfigError("line " + std::to_string(number) + ": bad section header");
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(std::string_view(text).substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
        values[section + "." + key] = trim(std::string_view(text).substr(eq + 1));
    }
    return values;
}

void apply_overrides(IniValues& values, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + item + "' is not section.key=value");
        std::string key = trim(std::string_view(item).substr(0, eq));
        if (key.find('.') == std::string::npos) key = "experiment." + key;
        values[key] = trim(std::string_view(item).substr(eq + 1));
    }
}

std::vector<double> SweepAxis::values() const {
    std::vector<double> out;
    if (points == 0) return out;
    if (points == 1) return {start};
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(log_spaced ? start * std::pow(stop / start, t) : start + (stop - start) * t);
    }
    return out;
}

ExperimentConfig scenario_preset(const std::string& name) {
    ExperimentConfig c;
    c.scenario = name;
    c.channel = reference_setup();
    c.sweep.kind = SweepAxis::Kind::power;
    c.sweep.log_spaced = true;
    if (name == scenario::kDistortion) {
        c.sensor_counts = {3, 10, 30};
        c.sweep.start = dbm_to_watts(-10.0);
        c.sweep.stop = dbm_to_watts(20.0);
        c.sweep.points = 7;
        c.monte_carlo.trials = 1'000'000;
    } else if (name == scenario::kOutage) {
        c.sensor_counts = {1, 3, 9};
        c.sweep.start = dbm_to_watts(-10.0);
        c.sweep.stop = dbm_to_watts(30.0);
        c.sweep.points = 9;
        c.monte_carlo.trials = 1'000'000;
    } else if (name == scenario::kActive) {
        c.sensor_counts = {100};
        c.policy = Policy::Kind::max_performance;
        c.sweep.start = dbm_to_watts(-40.0);
        c.sweep.stop = dbm_to_watts(10.0);
        c.sweep.points = 11;
        c.monte_carlo.trials = 10'000;
    } else if (name == scenario::kCompare) {
        c.sensor_counts = {3, 9};
        c.sweep.start = dbm_to_watts(-10.0);
        c.sweep.stop = dbm_to_watts(30.0);
        c.sweep.points = 9;
        c.monte_carlo.trials = 100'000;
    } else if (name == scenario::kCapped) {
        c.sensor_counts = {6};
        c.cap_share = 1.5;
        c.sweep.start = dbm_to_watts(-10.0);
        c.sweep.stop = dbm_to_watts(30.0);
        c.sweep.points = 9;
        c.monte_carlo.trials = 100'000;
    } else if (name == scenario::kMinPower) {
        c.sensor_counts = {100};
        c.sweep.kind = SweepAxis::Kind::distortion;
        c.sweep.start = 2e-4;
        c.sweep.stop = 2e-2;
        c.sweep.points = 10;
        c.monte_carlo.trials = 10'000;
    } else {
        throw ConfigError("unknown scenario '" + name + "'");
    }
    return c;
}

ExperimentConfig build_experiment(const IniValues& values) {
    const auto scenario_it = values.find("experiment.scenario");
    ExperimentConfig c = scenario_preset(scenario_it == values.end() ? std::string(scenario::kOutage) : scenario_it->second);

    std::set<std::string> used{"experiment.scenario"};
    auto take = [&](const std::string& key) -> const std::string* {
        const auto it = values.find(key);
        if (it == values.end()) return nullptr;
        used.insert(key);
        return &it->second;
    };

    if (auto v = take("experiment.sensors")) {
        c.sensor_counts.clear();
        for (const auto& item : split_list(*v)) c.sensor_counts.push_back(parse_count("experiment.sensors", item));
    }
    if (auto v = take("experiment.policy")) c.policy = parse_policy(*v);
    if (auto v = take("experiment.trials")) c.monte_carlo.trials = parse_count("experiment.trials", *v);
    if (auto v = take("experiment.seed")) c.monte_carlo.seed = parse_count("experiment.seed", *v);
    if (auto v = take("experiment.workers")) c.monte_carlo.workers = parse_count("experiment.workers", *v);
    if (auto v = take("experiment.output")) c.output = *v;
    if (auto v = take("experiment.d0")) c.d0 = parse_number("experiment.d0", *v);
    if (auto v = take("experiment.cap_share")) c.cap_share = parse_number("experiment.cap_share", *v);

    if (auto v = take("signal.variance")) c.channel.prior = SignalPrior(parse_number("signal.variance", *v));

    auto& prop = c.channel.propagation;
    if (auto v = take("propagation.nominal_gain")) prop.nominal_gain = parse_number("propagation.nominal_gain", *v);
    if (auto v = take("propagation.distance")) {
        prop.distances.clear();
        for (const auto& item : split_list(*v)) prop.distances.push_back(parse_number("propagation.distance", item));
    }
    if (auto v = take("propagation.channel_noise")) prop.channel_noise_variance = parse_power("propagation.channel_noise", *v);
    if (auto v = take("propagation.path_loss_exponent")) {
        prop.path_loss_exponent = parse_number("propagation.path_loss_exponent", *v);
    }

    if (auto v = take("fading.model")) {
        if (*v == "rayleigh") c.channel.fading.kind = FadingModel::Kind::rayleigh;
        else if (*v == "none") c.channel.fading.kind = FadingModel::Kind::none;
        else throw ConfigError("fading.model: expected rayleigh or none, got '" + *v + "'");
    }
    if (auto v = take("fading.mean_power")) c.channel.fading.mean_power = parse_number("fading.mean_power", *v);

    auto& obs = c.channel.observation;
    if (auto v = take("observation.model")) {
        if (*v == "fixed") obs.kind = ObservationModel::Kind::fixed;
        else if (*v == "uniform") obs.kind = ObservationModel::Kind::uniform;
        else throw ConfigError("observation.model: expected fixed or uniform, got '" + *v + "'");
    }
    if (auto v = take("observation.noise_variance")) {
        obs.noise_variances.clear();
        for (const auto& item : split_list(*v)) obs.noise_variances.push_back(parse_number("observation.noise_variance", item));
    }
    if (auto v = take("observation.low")) obs.low = parse_number("observation.low", *v);
    if (auto v = take("observation.high")) obs.high = parse_number("observation.high", *v);

    auto sweep_value = [&](const std::string& key, const std::string& text) {
        return c.sweep.kind == SweepAxis::Kind::power ? parse_power(key, text) : parse_number(key, text);
    };
    if (auto v = take("sweep.start")) c.sweep.start = sweep_value("sweep.start", *v);
    if (auto v = take("sweep.stop")) c.sweep.stop = sweep_value("sweep.stop", *v);
    if (auto v = take("sweep.points")) c.sweep.points = parse_count("sweep.points", *v);
    if (auto v = take("sweep.spacing")) {
        if (*v == "log") c.sweep.log_spaced = true;
        else if (*v == "linear") c.sweep.log_spaced = false;
        else throw ConfigError("sweep.spacing: expected log or linear, got '" + *v + "'");
    }

    for (const auto& [key, value] : values) {
        if (!used.count(key)) throw ConfigError("unknown configuration key '" + key + "'");
    }
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    channel.validate();
    if (sensor_counts.empty()) throw ConfigError("experiment.sensors must list at least one sensor count");
    for (auto k : sensor_counts) {
        if (k == 0) throw ConfigError("experiment.sensors entries must be positive");
        const auto& obs = channel.observation;
        if (obs.kind == ObservationModel::Kind::fixed && obs.noise_variances.size() > 1 && obs.noise_variances.size() < k) {
            throw ConfigError("observation.noise_variance lists fewer entries than sensors");
        }
        if (channel.propagation.distances.size() > 1 && channel.propagation.distances.size() < k) {
            throw ConfigError("propagation.distance lists fewer entries than sensors");
        }
    }
    if (monte_carlo.trials == 0) throw ConfigError("experiment.trials must be at least 1");
    if (sweep.points == 0) throw ConfigError("sweep.points must be at least 1");
    if (!(sweep.start > 0.0) || !(sweep.stop > 0.0) || !std::isfinite(sweep.start) || !std::isfinite(sweep.stop)) {
        throw ConfigError("sweep range must be positive");
    }
    if (!(d0 > 0.0)) throw ConfigError("experiment.d0 must be positive");
    if (!(cap_share > 0.0)) throw ConfigError("experiment.cap_share must be positive");
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "scenario=" << scenario << '\n';
    os << "sensors=";
    for (std::size_t i = 0; i < sensor_counts.size(); ++i) os << (i ? "," : "") << sensor_counts[i];
    os << '\n';
    os << "policy=" << policy_name(policy) << '\n';
    os << "d0=" << format_number(d0) << '\n';
    os << "cap_share=" << format_number(cap_share) << '\n';
    os << "trials=" << monte_carlo.trials << '\n';
    os << "seed=" << monte_carlo.seed << '\n';
    os << "variance_theta=" << format_number(channel.prior.variance_theta()) << '\n';
    const auto& prop = channel.propagation;
    os << "nominal_gain=" << format_number(prop.nominal_gain) << '\n';
    os << "distances=";
    for (std::size_t i = 0; i < prop.distances.size(); ++i) os << (i ? "," : "") << format_number(prop.distances[i]);
    os << '\n';
    os << "channel_noise=" << format_number(prop.channel_noise_variance) << '\n';
    os << "path_loss_exponent=" << format_number(prop.path_loss_exponent) << '\n';
    os << "fading=" << (channel.fading.kind == FadingModel::Kind::rayleigh ? "rayleigh" : "none") << ','
       << format_number(channel.fading.mean_power) << '\n';
    const auto& obs = channel.observation;
    if (obs.kind == ObservationModel::Kind::fixed) {
        os << "observation=fixed:";
        for (std::size_t i = 0; i < obs.noise_variances.size(); ++i) {
            os << (i ? "," : "") << format_number(obs.noise_variances[i]);
        }
    } else {
        os << "observation=uniform:" << format_number(obs.low) << ',' << format_number(obs.high);
    }
    os << '\n';
    os << "sweep=" << (sweep.kind == SweepAxis::Kind::power ? "power" : "distortion") << ','
       << format_number(sweep.start) << ',' << format_number(sweep.stop) << ',' << sweep.points << ','
       << (sweep.log_spaced ? "log" : "linear") << '\n';
    return os.str();
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

Snapshot parse_snapshot(std::istream& in) {
    std::optional<double> variance;
    std::vector<SensorSite> sensors;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto cut = line.find('#'); cut != std::string::npos) line.erase(cut);
        std::istringstream fields(line);
        std::string first, second, extra;
        if (!(fields >> first)) continue;
        const std::string where = "snapshot line " + std::to_string(number);
        if (!(fields >> second) || (fields >> extra)) throw ConfigError(where + ": expected two fields");
        if (first == "sigma_theta_sq") {
            if (variance) throw ConfigError(where + ": duplicate sigma_theta_sq");
            variance = parse_number(where, second);
            continue;
        }
        if (!variance) throw ConfigError(where + ": sigma_theta_sq must come before the sensors");
        const double s = parse_number(where, second);
        if (first == "inf" || first == "noiseless") {
            sensors.push_back(SensorSite::noiseless(s));
        } else {
            sensors.push_back(SensorSite::noisy(parse_number(where, first), s));
        }
    }
    if (!variance) throw ConfigError("snapshot file has no sigma_theta_sq line");
    if (sensors.empty()) throw ConfigError("snapshot file lists no sensors");
    return Snapshot(SignalPrior(*variance), sensors);
}

}  // namespace fadefuse
