#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exclusim/generator.hpp"

namespace exclusim {

struct EvolveReport {
  std::uint64_t terms = 0;
  double rate = 0;
  //! Poisson mass discarded by the truncation.
  double tail = 0;
};

/// u_t = e^{tL} f by uniformization. The truncation keeps Poisson mass until the
/// discarded tail is at most tol / (2 ||f||_inf) and renormalizes the kept
/// weights, which bounds the sup-norm error by tol, conserves stationary mass and
/// keeps the result inside [min f, max f].
std::vector<double> evolve(const SparseGenerator& gen, std::span<const double> f, double t, double tol = 1e-12,
                           EvolveReport* report = nullptr);

/// Evaluates u at every time of an increasing grid in a single pass per interval.
std::vector<std::vector<double>> evolve_grid(const SparseGenerator& gen, std::span<const double> f,
                                             std::span<const double> times, double tol = 1e-12);

}  // namespace exclusim
