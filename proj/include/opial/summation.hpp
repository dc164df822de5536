#pragma once

#include <cmath>

namespace opial {

/// Running sum with Neumaier's compensation term.
///
/// Unlike plain Kahan summation the correction stays valid when an addend is
/// larger in magnitude than the running total, which happens in the backward
/// prefix passes where the first terms are the smallest.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double initial) : sum_(initial) {}

  CompensatedSum& operator+=(double value) noexcept {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace opial
