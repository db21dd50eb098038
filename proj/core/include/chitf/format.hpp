#pragma once

#include <string>

namespace chitf {

/// "%.17g": full precision, round-trips through strtod.
std::string format_double(double value);

}  // namespace chitf
