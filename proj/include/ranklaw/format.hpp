#pragma once

#include <string>

#include "json.hpp"

namespace ranklaw {

/// Number of significant digits used for every number written to disk.
inline constexpr int kOutputDigits = 12;

/// Formats a real with kOutputDigits significant digits ("%.12g"). Non-finite
/// values print as "nan", "inf", "-inf".
std::string fmt_real(double value);

/// Rounds to kOutputDigits significant digits and returns a JSON number, or
/// null for non-finite input. Keeps machine-readable output byte-stable.
nlohmann::json json_real(double value);

}  // namespace ranklaw
