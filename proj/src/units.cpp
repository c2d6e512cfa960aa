#include "fadefuse/units.hpp"

#include "fadefuse/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

namespace fadefuse {

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) noexcept { return 10.0 * std::log10(watts) + 30.0; }

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

double parse_quantity(std::string_view text, Quantity kind) {
    const std::string_view body = trim(text);
    // strtod accepts the unicode-free forms we need ("1e-3", "-30", "inf").
    const std::string owned(body);
    char* end = nullptr;
    const double number = std::strtod(owned.c_str(), &end);
    if (end == owned.c_str()) throw ConfigError("not a number: '" + owned + "'");
    const std::string_view unit = trim(std::string_view(end));

    if (unit.empty()) return number;
    if (unit == "dB") {
        if (kind != Quantity::ratio) throw ConfigError("'dB' given for a power value: '" + owned + "' (use dBm or dBW)");
        return db_to_linear(number);
    }
    if (kind == Quantity::power) {
        if (unit == "dBm") return dbm_to_watts(number);
        if (unit == "dBW") return db_to_linear(number);
        if (unit == "W") return number;
        if (unit == "mW") return number * 1e-3;
    }
    throw ConfigError("unrecognized unit '" + std::string(unit) + "' in '" + owned + "'");
}

}  // namespace fadefuse
