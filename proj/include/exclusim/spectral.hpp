#pragma once

#include <cstdint>
#include <string>

#include "exclusim/generator.hpp"

namespace exclusim {

struct GapOptions {
  //! Spaces smaller than this are diagonalized densely.
  std::uint64_t dense_limit = 4000;
  //! Lanczos stops once the estimated Ritz residual drops below this.
  double tol = 1e-9;
  //! 0 means 10 * sqrt(state count).
  std::uint64_t max_iterations = 0;
  std::uint64_t seed = 0x5eed;
  //! Recompute the Ritz vector to report its true residual (doubles the cost).
  bool true_residual = true;
};

struct GapResult {
  double lambda1 = 0;
  std::string solver;
  //! ||(-L) v - lambda1 v|| for the unit eigenvector estimate.
  double residual = 0;
  std::uint64_t iterations = 0;
  std::uint64_t states = 0;
  bool converged = true;
};

/// Smallest nonzero eigenvalue of -L on a connected sector.
/// Throws Degenerate for a 1-state space and Disconnected when the flip graph
/// has several components.
GapResult spectral_gap(const SparseGenerator& gen, const GapOptions& opts = {});

}  // namespace exclusim
