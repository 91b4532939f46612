#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "exclusim/config.hpp"
#include "exclusim/generator.hpp"
#include "exclusim/lattice.hpp"
#include "exclusim/state_space.hpp"

namespace exclusim {

inline constexpr double p_infinity = std::numeric_limits<double>::infinity();

/// Values of a local function on every state of a tagged space.
std::vector<double> tabulate(const StateSpace& space, const LocalFunction& f);

/// D_e(h|x) = <a_e (h^e - h)^2 | x> for every tagged site x and edge e
/// (a single row for the Kawasaki modes).
struct DirichletTable {
  double total = 0;
  std::size_t rows = 0;
  std::size_t edges = 0;
  std::vector<double> values;
  double at(std::size_t x, EdgeId e) const { return values[x * edges + e]; }
};

DirichletTable dirichlet_form(const StateSpace& space, std::span<const double> h);

//! sum_x sum_e <((h^e)^{2p-1} - h^{2p-1}) a_e (h^e - h) | x>; for p=1 this is the Dirichlet form.
double power_pairing(const StateSpace& space, std::span<const double> h, double p);
//! sum_x sum_e <a_e ((h^e)^p - h^p)^2 | x>.
double power_dirichlet(const StateSpace& space, std::span<const double> h, double p);
//! d/dt ||u_t||_{2p}^{2p} = -p * power_pairing(u_t, p).
double norm_derivative(const StateSpace& space, std::span<const double> u, double p);

/// (sum_x <|h|^p | x>)^{1/p} on tagged spaces, <|h|^p>^{1/p} on Kawasaki spaces;
/// p = infinity gives max |h|.
double lp_norm(const StateSpace& space, std::span<const double> h, double p);
//! sum over states of pi * h.
double stationary_mean(const StateSpace& space, std::span<const double> h);

/// A_k h(x, eta) = <h(x, .) | F(B_k)> on a tagged product space over a torus,
/// computed by exact summation over the sites outside B_k.
std::vector<double> conditional_expectation_A(const StateSpace& space, std::span<const double> h, int k);

/// Particle counts of eta in each cell of the partition, the partition being
/// placed in the torus by `embedding` (see embed()).
std::vector<int> cell_counts(const BoxPartition& part, std::span<const Site> embedding, std::uint64_t eta);

//! 1 iff every M_i lies in [rho |B_l| / 2, (rho+1) |B_l| / 2].
int density_indicator(std::span<const int> M, double rho, std::size_t cell_size);

/// |B_l|^{-1} sum_{y in B_l(x)} <h(y, .) | M, y> for x in the embedded B_L.
double local_average_pi(const StateSpace& space, std::span<const double> h, const BoxPartition& part,
                        std::span<const int> M, Site x);

struct ConditionalDensity {
  //! h^M(x, eta) on the tagged product space; zero for x outside B_L.
  std::vector<double> tagged;
  //! h~^M(eta) indexed by the occupancy mask.
  std::vector<double> tilde;
  //! <1_M> under the product measure.
  double event_probability = 0;
};

/// Densities of the measures conditioned on the cell counts M, with respect to
/// <.|x> and to the product measure.
ConditionalDensity conditional_density(const StateSpace& space, const BoxPartition& part, std::span<const int> M);

struct ContractionReport {
  double mass_before = 0;
  double mass_after = 0;
  double l1_before = 0;
  double l1_after = 0;
};

/// Evolves a nonnegative density under the Kawasaki semigroup and reports
/// <density> and ||density||_{L^1} before and after.
ContractionReport kawasaki_contraction_check(const SparseGenerator& gen, std::span<const double> density, double t,
                                             double tol = 1e-13);

struct BoundaryTerms {
  double lhs = 0;
  //! sum_x sum_{e in boundary} <a_e (h^e - h)^2 | x>.
  double boundary_dirichlet = 0;
  //! sum_x <(A_{k+1} h)^2 | x> - <(A_k h)^2 | x>.
  double increment = 0;
  double beta = 2;
  double rhs() const { return beta * boundary_dirichlet + increment / beta; }
};

/// Terms of the boundary Dirichlet inequality on a tagged product space over a
/// torus. Needs 2k+1 < n (nonempty boundary) and 2k+3 <= n; at most 12 sites
/// outside B_k.
BoundaryTerms boundary_inequality_check(const StateSpace& space, std::span<const double> h, int k, double beta);

}  // namespace exclusim
