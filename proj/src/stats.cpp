#include "exclusim/stats.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "exclusim/error.hpp"

namespace exclusim {

SlopeFit fit_slope(std::span<const double> t, std::span<const double> value, std::span<const double> se) {
  const std::size_t n = t.size();
  if (value.size() != n || se.size() != n) throw InvalidArgument("cli", "fit_slope columns differ in length");
  if (n < 3) throw InvalidArgument("cli", "fit_slope needs at least 3 rows");
  bool weighted = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t[i] > 0)) throw InvalidArgument("cli", "fit_slope needs positive times");
    if (!(value[i] > 0)) throw InvalidArgument("cli", "fit_slope needs positive values, row " + std::to_string(i));
    if (!(se[i] > 0)) weighted = false;
  }
  std::vector<double> x(n), y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(t[i]);
    y[i] = std::log(value[i]);
    w[i] = weighted ? (value[i] / se[i]) * (value[i] / se[i]) : 1.0;
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw InvalidArgument("cli", "fit_slope needs at least two distinct times");
  SlopeFit f;
  f.points = n;
  f.weighted = weighted;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += w[i] * r * r;
  }
  const double dof = static_cast<double>(n - 2);
  const double se_slope = std::sqrt(rss / dof / sxx);
  const boost::math::students_t dist(dof);
  f.half_width = boost::math::quantile(dist, 0.975) * se_slope;
  return f;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 2) throw InvalidArgument("montecarlo", "linear fit needs two equal columns of >= 2 rows");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.points = n;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return f;
}

void Accumulator::add(double v) noexcept {
  ++n_;
  const double d = v - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (v - mean_);
}

void Accumulator::merge(const Accumulator& o) noexcept {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double Accumulator::std_error() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

}  // namespace exclusim
