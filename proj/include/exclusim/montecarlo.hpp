#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "exclusim/config.hpp"
#include "exclusim/lattice.hpp"
#include "exclusim/rng.hpp"
#include "exclusim/stats.hpp"

namespace exclusim {

/// Rejection-free simulation of the tagged exclusion process on a torus.
/// Only discordant edges (a_e = 1) are kept; the next event is an Exp(A) wait
/// followed by a uniformly chosen active edge, where A is the active count.
class TrajectoryEngine {
 public:
  explicit TrajectoryEngine(const LatticeBox& torus);

  void reset(const TaggedConfig& cfg, Xoshiro256 rng);
  //! Advances to t_end (no-op if already there).
  void run_until(double t_end);

  double time() const noexcept { return time_; }
  std::uint64_t events() const noexcept { return events_; }
  Site tagged() const noexcept { return cfg_.X; }
  //! Unwrapped displacement of the tagged particle since reset.
  const std::vector<int>& displacement() const noexcept { return disp_; }
  const TaggedConfig& config() const noexcept { return cfg_; }
  std::size_t active_count() const noexcept { return n_active_; }
  const LatticeBox& lattice() const noexcept { return lattice_; }

  /// Tracks M_t = xi(X_t) - xi(X_0) - int_0^t L xi ds with xi(z) = |z - x0|,
  /// z being the unwrapped position and x0 given relative to the start.
  void enable_martingale(std::vector<double> x0);
  double martingale() const noexcept;

  //! Full rescan of the active set; true iff it matches the incremental one.
  bool active_set_consistent() const;
  //! Rescan every `interval` events and throw on mismatch (0 disables).
  void set_rescan_interval(std::uint64_t interval) noexcept { rescan_interval_ = interval; }

 private:
  void set_active(EdgeId e, bool on);
  void toggle(EdgeId e) noexcept;
  double xi(const std::vector<int>& z) const;
  double generator_of_xi() const;

  const LatticeBox& lattice_;
  int degree_;
  std::vector<Site> eu_, ev_;
  std::vector<int> axis_;
  std::vector<EdgeId> inc_;
  std::vector<EdgeId> active_;
  std::size_t n_active_ = 0;
  std::vector<std::int32_t> pos_;
  TaggedConfig cfg_;
  std::vector<int> disp_;
  Xoshiro256 rng_;
  double time_ = 0;
  std::uint64_t events_ = 0;
  std::uint64_t rescan_interval_ = 0;

  bool track_ = false;
  std::vector<double> x0_;
  double xi0_ = 0;
  double integral_ = 0;
  double lxi_ = 0;
};

//! Runs `engine` to t_end and returns the state.
TaggedConfig simulate(TrajectoryEngine& engine, double t_end);

struct ReplicaSpec {
  int d = 2;
  int n = 32;
  double rho = 0.5;
  std::vector<double> times;
  int p = 2;
  //! Maximum samples per time.
  std::uint64_t budget = 1000000;
  //! Sampling stops at a batch boundary once this many coincidences are seen; 0 spends the budget.
  std::uint64_t min_coincidences = 200;
  std::uint64_t batch = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
  //! Skips the n >= 4 sqrt(t) guard (the scaling run fixes n = 32 up to t = 128).
  bool allow_wraparound = false;
};

struct CoincidenceRow {
  double t = 0;
  double estimate = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
  std::uint64_t coincidences = 0;
  std::uint64_t events = 0;
};

/// Replica estimator of S_p(t) = sum_x <P[X_t = x]^p | 0>: p independent
/// trajectories from one shared initial configuration coincide at time t with
/// probability exactly S_p(t).
std::vector<CoincidenceRow> estimate_coincidence(const ReplicaSpec& spec);

struct KernelSpec {
  int d = 2;
  int n = 32;
  double rho = 0.5;
  double t = 1;
  std::uint64_t samples = 100000;
  std::uint64_t batch = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct KernelHistogram {
  int d = 2;
  double t = 0;
  std::uint64_t samples = 0;
  std::uint64_t events = 0;
  std::map<std::vector<int>, std::uint64_t> counts;
  double probability(const std::vector<int>& x) const;
};

/// Annealed kernel: histogram of unwrapped displacements at time t.
KernelHistogram estimate_kernel(const KernelSpec& spec);

struct CarneAnalysis {
  std::uint64_t min_hits = 100;
  //! Fit of -log p against |x|^2/t over bins with |x| <= t and >= min_hits.
  LinearFit gaussian;
  //! Pairs {x, -x} with |c_x - c_-x| > 3 sqrt(c_x + c_-x).
  std::size_t symmetry_pairs = 0;
  std::size_t symmetry_violations = 0;
  //! Mean violation count if the kernel were exactly symmetric.
  double symmetry_expected_violations = 0;
  //! sum (c_x - c_-x)^2 / (c_x + c_-x) and its chi-square upper tail.
  double symmetry_chi2 = 0;
  double symmetry_p_value = 1;
  //! Bins with |x| > t and >= min_hits, and how many satisfy -log p >= |x|/C.
  std::size_t far_bins = 0;
  std::size_t far_violations = 0;
  double fitted_c = 0;
};

CarneAnalysis analyse_kernel(const KernelHistogram& h, std::uint64_t min_hits = 100);

struct MartingaleSpec {
  int d = 2;
  int n = 16;
  double rho = 0.5;
  std::vector<double> times;
  std::vector<double> lambdas;
  std::vector<double> x0;
  std::uint64_t samples = 100000;
  std::uint64_t batch = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct MartingaleRow {
  double t = 0;
  double lambda = 0;
  double mean_exp = 0;
  double se_exp = 0;
  //! exp(2d (e^lambda - 1 - lambda) t).
  double bound = 0;
  double mean_m = 0;
  double se_m = 0;
  std::uint64_t samples = 0;
  std::uint64_t events = 0;
};

/// Monte Carlo estimates of E[exp(lambda M_t)] and E[M_t] over the grid.
std::vector<MartingaleRow> martingale_moments(const MartingaleSpec& spec);

//! n >= 4 sqrt(max t).
void check_wraparound(int n, std::span<const double> times);

}  // namespace exclusim
