#include "exclusim/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "exclusim/error.hpp"

namespace exclusim {

std::vector<double> evolve(const SparseGenerator& gen, std::span<const double> f, double t, double tol,
                           EvolveReport* report) {
  if (!(t >= 0.0)) throw InvalidArgument("exact", "evolve needs t >= 0, got " + std::to_string(t));
  if (!(tol > 0.0)) throw InvalidArgument("exact", "evolve needs tol > 0");
  const std::uint64_t n = gen.rows();
  if (f.size() != n) throw InvalidArgument("exact", "function length does not match the space");
  std::vector<double> out(f.begin(), f.end());
  const double rate = gen.uniformization_rate();
  if (report) *report = {0, rate, 0};
  if (t == 0.0 || rate == 0.0) return out;

  double sup = 0;
  for (double v : f) sup = std::max(sup, std::abs(v));
  if (sup == 0.0) return out;

  const double mu = rate * t;
  const double tail_target = tol / (2.0 * sup);
  // Poisson(mu) weights in log space so that large mu does not underflow.
  auto weight = [&](std::uint64_t j) {
    const double jj = static_cast<double>(j);
    return std::exp(-mu + jj * std::log(mu) - std::lgamma(jj + 1.0));
  };

  std::vector<double> p(f.begin(), f.end()), lp(n);
  std::fill(out.begin(), out.end(), 0.0);
  double kept = 0;
  std::uint64_t j = 0;
  for (;;) {
    const double w = weight(j);
    if (w > 0)
      for (std::uint64_t i = 0; i < n; ++i) out[i] += w * p[i];
    kept += w;
    ++j;
    // Past the mode the remaining tail is bounded by a geometric series.
    const bool past_mode = static_cast<double>(j) > mu;
    if (past_mode) {
      const double next = weight(j);
      const double ratio = mu / static_cast<double>(j + 1);
      const double tail_bound = ratio < 1 ? next / (1 - ratio) : 1.0;
      if (tail_bound <= tail_target) break;
    }
    gen.apply(p, lp);
    for (std::uint64_t i = 0; i < n; ++i) p[i] += lp[i] / rate;
  }
  for (double& v : out) v /= kept;
  if (report) *report = {j, rate, std::max(0.0, 1.0 - kept)};
  return out;
}

std::vector<std::vector<double>> evolve_grid(const SparseGenerator& gen, std::span<const double> f,
                                             std::span<const double> times, double tol) {
  std::vector<std::vector<double>> r;
  std::vector<double> cur(f.begin(), f.end());
  double now = 0;
  for (double t : times) {
    if (t < now) throw InvalidArgument("exact", "time grid must be nondecreasing and start at >= 0");
    cur = evolve(gen, cur, t - now, tol / static_cast<double>(times.size()));
    now = t;
    r.push_back(cur);
  }
  return r;
}

}  // namespace exclusim
