#include "ranklaw/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ranklaw {

std::string fmt_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", kOutputDigits, value);
  return buf;
}

nlohmann::json json_real(double value) {
  if (!std::isfinite(value)) return nullptr;
  return std::strtod(fmt_real(value).c_str(), nullptr);
}

}  // namespace ranklaw
