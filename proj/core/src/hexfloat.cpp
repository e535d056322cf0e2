#include "commutree/hexfloat.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace commutree {

std::string format_hex(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  const bool neg = std::signbit(v);
  auto res = std::to_chars(buf, buf + sizeof(buf), std::fabs(v), std::chars_format::hex);
  std::string out = neg ? "-0x" : "0x";
  out.append(buf, res.ptr);
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  if (s.front() == '-' || s.front() == '+') {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return neg ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
  auto fmt = std::chars_format::general;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    fmt = std::chars_format::hex;
  }
  if (s.empty() || s.front() == '-' || s.front() == '+') return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v, fmt);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return neg ? -v : v;
}

}  // namespace commutree
