#pragma once

#include <string>

namespace krawtex {

/// Shortest decimal form that parses back to the same double.
std::string format_real(double v);

} // namespace krawtex
