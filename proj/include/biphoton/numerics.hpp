#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace biphoton {

inline constexpr double pi = std::numbers::pi;

/// sin(x)/x with a Taylor branch near the origin.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value))
      compensation_ += (sum_ - t) + value;
    else
      compensation_ += (value - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values)
    acc.add(v);
  return acc.value();
}

} // namespace biphoton
