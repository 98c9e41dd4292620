#pragma once

#include <optional>
#include <string>

namespace oncovir {

/// Locale-independent scientific notation with 9 significant digits,
/// e.g. "5.71609800e-01". Non-finite values print as "nan", "inf", "-inf".
std::string format_number(double x);

/// Empty string for an absent value.
std::string format_optional(const std::optional<double>& x);

}  // namespace oncovir
