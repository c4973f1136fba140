#include "poisest/format.hpp"

#include <cmath>
#include <cstdio>

namespace poisest {

std::string format_sig(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

std::string format_double(double x) { return format_sig(x, 17); }

}  // namespace poisest
