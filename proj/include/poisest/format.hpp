#pragma once

#include <string>

namespace poisest {

/// Shortest round-trip decimal form, 17 significant digits ("%.17g").
[[nodiscard]] std::string format_double(double x);

/// "%.{digits}g".
[[nodiscard]] std::string format_sig(double x, int digits);

}  // namespace poisest
