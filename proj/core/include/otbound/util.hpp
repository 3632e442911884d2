#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace otb {

// Quantile convention used everywhere in this project: sort ascending and
// take index ceil(q*n) - 1 (lower interpolation). q = 1 is the maximum.
inline double lower_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("lower_quantile: empty input");
  if (q <= 0.0 || q > 1.0) throw std::invalid_argument("lower_quantile: q must be in (0, 1]");
  const std::size_t n = values.size();
  std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  if (idx == 0) idx = 1;
  if (idx > n) idx = n;
  std::nth_element(values.begin(), values.begin() + (idx - 1), values.end());
  return values[idx - 1];
}

// Shortest round-trip decimal formatting.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

}  // namespace otb
