#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace commutree {

/// Bit-exact text encoding of a double ("0x1.8p+1", "-0x0p+0", "inf", "nan").
std::string format_hex(double v);

/// Inverse of format_hex; also accepts plain decimal. Returns nullopt on junk.
std::optional<double> parse_double(std::string_view s);

}  // namespace commutree
