#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace softopt::text {

/// Shortest decimal form that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

/// Parses a double, rejecting trailing garbage. Throws ContractError.
[[nodiscard]] double parse_double(std::string_view s, std::string_view what);

[[nodiscard]] std::string trim(std::string_view s);

[[nodiscard]] std::vector<std::string> split_ws(std::string_view s);

} // namespace softopt::text
