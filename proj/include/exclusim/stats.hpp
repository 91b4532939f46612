#pragma once

#include <cstddef>
#include <span>

namespace exclusim {

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  //! 95% confidence half-width of the slope (Student t, residual-scaled).
  double half_width = 0;
  std::size_t points = 0;
  bool weighted = true;
};

/// Weighted least squares of log(value) on log(t) with weights (value/stderr)^2.
/// Falls back to equal weights when any stderr is zero. Needs at least 3 rows
/// and positive t and values.
SlopeFit fit_slope(std::span<const double> t, std::span<const double> value, std::span<const double> std_error);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t points = 0;
};

//! Ordinary least squares y = a + b x with the coefficient of determination.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Running mean and variance (Welford), merged in a fixed order.
class Accumulator {
 public:
  void add(double v) noexcept;
  void merge(const Accumulator& o) noexcept;
  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

}  // namespace exclusim
