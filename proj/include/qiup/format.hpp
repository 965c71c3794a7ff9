#pragma once

#include <string>

namespace qiup {

/// Shortest-safe round-trip rendering: 17 significant digits.
std::string format_g17(double value);

std::string format_fixed(double value, int decimals = 6);

}  // namespace qiup
