#pragma once

#include <string_view>

namespace fadefuse {

/// Kind of quantity a textual value describes; decides how a dB suffix is read.
enum class Quantity {
    ratio,  ///< "dB" means 10 log10(x)
    power,  ///< watts; "dBm" means 10 log10(x / 1 mW), "dBW" 10 log10(x / 1 W)
};

/// Parses "-30 dB", "-90 dBm", "0.001", "1e-3 W" into a linear value.
/// Throws ConfigError on anything else, including a suffix that does not
/// match the quantity.
double parse_quantity(std::string_view text, Quantity kind);

double db_to_linear(double db) noexcept;
double dbm_to_watts(double dbm) noexcept;
double watts_to_dbm(double watts) noexcept;

}  // namespace fadefuse
