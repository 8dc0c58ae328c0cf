#pragma once

#include <string>

namespace actol {

/// Shortest decimal text that round-trips to the same double ('.' separator,
/// no grouping). Non-finite values print as nan, inf or -inf.
std::string format_double(double value);

}  // namespace actol
