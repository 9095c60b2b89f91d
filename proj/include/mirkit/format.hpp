#pragma once

#include <string>
#include <vector>

namespace mirkit {

/// E-values print with 3 significant digits, scientific below 1e-2.
std::string format_evalue(double e);

/// Fixed decimals, e.g. format_fixed(82.0, 1) -> "82.0".
std::string format_fixed(double v, int decimals);

/// Shortest round-trippable decimal for parameter echoes (10 -> "10",
/// 0.1 -> "0.1").
std::string format_number(double v);

std::vector<std::string> split(const std::string& s, char sep);

}  // namespace mirkit
