#include "exclusim/checks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "exclusim/combinatorics.hpp"
#include "exclusim/config.hpp"
#include "exclusim/error.hpp"
#include "exclusim/functionals.hpp"
#include "exclusim/generator.hpp"
#include "exclusim/lattice.hpp"
#include "exclusim/montecarlo.hpp"
#include "exclusim/rng.hpp"
#include "exclusim/semigroup.hpp"
#include "exclusim/spectral.hpp"
#include "exclusim/state_space.hpp"
#include "exclusim/stats.hpp"

namespace exclusim {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

class Suite {
 public:
  void add(std::string name, bool passed, double value, std::string detail = {}) {
    out_.push_back({std::move(name), passed, value, std::move(detail)});
  }
  // Runs fn and records an exception as a failure of `name`.
  void guard(const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      add(name, false, nan, std::string("threw: ") + e.what());
    }
  }
  std::vector<CheckResult> take() { return std::move(out_); }

 private:
  std::vector<CheckResult> out_;
};

double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// exp(tL) f through the symmetric eigendecomposition of the dense generator.
std::vector<double> dense_expm(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es, std::span<const double> f,
                               double t) {
  const Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(f.size()));
  const Eigen::VectorXd c = es.eigenvectors().transpose() * fv;
  const Eigen::VectorXd r = es.eigenvectors() * (es.eigenvalues().array() * t).exp().matrix().cwiseProduct(c);
  return {r.data(), r.data() + r.size()};
}

std::vector<double> random_vector(std::size_t n, Xoshiro256& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

void lattice_checks(Suite& s) {
  s.guard("lattice.counts", [&] {
    const bool ok = build_box(2, 1).site_count() == 9 && build_box(2, 1).edge_count() == 12 &&
                    build_box(2, 2).site_count() == 25 && build_box(2, 2).edge_count() == 40 &&
                    build_box(1, 0).edge_count() == 0 && build_torus(2, 4).edge_count() == 32 &&
                    build_torus(2, 64).edge_count() == 8192 && build_torus(1, 3).edge_count() == 3;
    s.add("lattice.counts", ok, nan, "box and torus site/edge counts");
  });
  s.guard("lattice.edges_unit_length", [&] {
    bool ok = true;
    for (const LatticeBox& b : {build_box(3, 2), build_torus(2, 5)})
      for (const Edge& e : b.edges()) ok = ok && b.l1_distance(e.u, e.v) == 1;
    s.add("lattice.edges_unit_length", ok, nan);
  });
  s.guard("lattice.boundary", [&] {
    const auto b22 = build_box(2, 2);
    const bool ok = boundary_edges(b22, 1).size() == 12 && boundary_edges(b22, 0).size() == 4 &&
                    boundary_edges(build_box(1, 2), 1).size() == 2;
    // B_k and its boundary edges lie in B_{k+1}; the classes B_k, boundary of B_k
    // and "not in B_{k+1}" are disjoint.
    const auto b = build_box(2, 3);
    bool tiles = true;
    for (int k = 0; k + 1 < b.radius(); ++k) {
      const auto in_k = ball_mask(b, k), in_k1 = ball_mask(b, k + 1);
      for (const Edge& e : b.edges()) {
        const bool interior = in_k[e.u] && in_k[e.v];
        const bool boundary = in_k[e.u] != in_k[e.v];
        const bool inside_k1 = in_k1[e.u] && in_k1[e.v];
        tiles = tiles && (interior + boundary + !inside_k1) <= 1 && (!(interior || boundary) || inside_k1);
      }
    }
    s.add("lattice.boundary", ok && tiles, nan, "boundary counts and edge-class tiling");
  });
  s.guard("lattice.partition", [&] {
    bool ok = true;
    for (auto [L, l] : {std::pair{4, 1}, std::pair{7, 2}, std::pair{1, 1}}) {
      const auto p = partition(L, l, 2);
      const auto box = build_box(2, L);
      std::vector<int> seen(box.site_count(), 0);
      for (std::size_t c = 0; c < p.m; ++c)
        for (Site x : p.cells[c]) {
          ++seen[x];
          ok = ok && p.cell_of[x] == c;
        }
      ok = ok && std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; });
    }
    ok = ok && partition(4, 1, 2).m == 9 && partition(7, 2, 2).m == 9 && partition(1, 1, 2).m == 1;
    s.add("lattice.partition", ok, nan, "cells tile B_L");
  });
}

void config_checks(Suite& s, bool quick, std::uint64_t seed) {
  s.guard("config.flip_invariants", [&] {
    const auto t = build_torus(2, 5);
    auto rng = make_stream(seed, {stream_tag::checks, 1, 0, 0});
    bool ok = true;
    for (int rep = 0; rep < 50; ++rep) {
      auto cfg = sample_initial(t, 0.5, rng);
      for (EdgeId e = 0; e < t.edge_count(); ++e) {
        const auto f = apply_flip(t, cfg, e);
        ok = ok && f.eta.count() == cfg.eta.count() && f.eta[f.X] && apply_flip(t, f, e) == cfg;
        if (!conductance(t, cfg, e)) ok = ok && f.eta == cfg.eta;
      }
    }
    s.add("config.flip_invariants", ok, nan, "conservation, eta(X)=1, involution, a_e=0 leaves eta");
  });
  s.guard("config.sample_mean", [&] {
    const auto t = build_torus(2, 8);
    auto rng = make_stream(seed, {stream_tag::checks, 2, 0, 0});
    const int draws = quick ? 2000 : 20000;
    Accumulator acc;
    for (int i = 0; i < draws; ++i) {
      const auto c = sample_initial(t, 0.5, rng);
      for (Site x = 0; x < t.site_count(); ++x)
        if (x != t.origin()) acc.add(c.eta[x]);
    }
    const double z = std::abs(acc.mean() - 0.5) / std::sqrt(0.25 / static_cast<double>(acc.count()));
    s.add("config.sample_mean", z <= 3, z, "z-score of off-origin occupancy");
  });
}

void exact_checks(Suite& s, bool quick, std::uint64_t seed) {
  const auto box = build_box(2, 1);
  s.guard("exact.counts", [&] {
    const bool ok = enumerate(box, 1.0 / 3, Mode::tagged_sector).size() == 252 &&
                    enumerate(box, 1.0 / 3, Mode::kawasaki_sector).size() == 84 &&
                    enumerate_sector(box, 9, Mode::tagged_sector).size() == 9;
    s.add("exact.counts", ok, nan, "252 tagged, 84 Kawasaki, full box 9");
  });
  const auto space = enumerate(box, 1.0 / 3, Mode::tagged_sector);
  const auto gen = assemble_generator(space);
  s.guard("exact.generator", [&] {
    const Eigen::MatrixXd L = gen.dense();
    const double asym = (L - L.transpose()).cwiseAbs().maxCoeff();
    const double rowsum = (L.rowwise().sum()).cwiseAbs().maxCoeff();
    bool unit = true;
    for (Eigen::Index i = 0; i < L.rows(); ++i)
      for (Eigen::Index j = 0; j < L.cols(); ++j)
        if (i != j) unit = unit && (L(i, j) == 0 || L(i, j) == 1);
    const bool ok = asym == 0 && rowsum == 0 && unit && gen.uniformization_rate() <= 12;
    s.add("exact.generator", ok, gen.uniformization_rate(), "symmetric, zero row sums, unit entries, degree <= 12");
  });
  s.guard("exact.detailed_balance", [&] {
    const auto ps = enumerate(build_torus(1, 4), 0.3, Mode::tagged_product);
    const auto pg = assemble_generator(ps);
    double worst = 0;
    for (std::uint64_t i = 0; i < pg.rows(); ++i)
      for (auto j : pg.neighbors(i)) worst = std::max(worst, std::abs(ps.weight(i) - ps.weight(j)));
    s.add("exact.detailed_balance", worst <= 1e-14, worst, "pi_i L_ij = pi_j L_ji on a product space");
  });
  s.guard("exact.gap_path", [&] {
    const auto g = spectral_gap(assemble_generator(enumerate_sector(build_box(1, 1), 1, Mode::kawasaki_sector)));
    s.add("exact.gap_path", std::abs(g.lambda1 - 1.0) <= 1e-12, g.lambda1, "single walker on a 3-site path");
  });
  s.guard("exact.uniformization", [&] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gen.dense());
    auto rng = make_stream(seed, {stream_tag::checks, 3, 0, 0});
    const auto f = random_vector(space.size(), rng);
    double worst = 0, drift = 0;
    for (double t : {0.1, 1.0, 10.0}) {
      const auto u = evolve(gen, f, t, 1e-12);
      worst = std::max(worst, sup_diff(u, dense_expm(es, f, t)));
      drift = std::max(drift, std::abs(stationary_mean(space, u) - stationary_mean(space, f)));
    }
    s.add("exact.uniformization", worst <= 1e-10, worst, "sup difference to dense expm");
    s.add("exact.mass_conservation", drift <= 1e-12, drift, "stationary mass drift");
  });
  s.guard("exact.derivative_identity", [&] {
    const auto ps = enumerate(build_torus(1, 5), 0.5, Mode::tagged_product);
    const auto pg = assemble_generator(ps);
    const auto f = tabulate(ps, indicator_at_origin());
    const double t = 1.0, dt = 1e-4;
    const auto u0 = evolve(pg, f, t, 1e-14);
    const auto u1 = evolve(pg, f, t + dt, 1e-14);
    const double n0 = std::pow(lp_norm(ps, u0, 2), 2), n1 = std::pow(lp_norm(ps, u1, 2), 2);
    const double fd = (n1 - n0) / dt;
    const double exact = -dirichlet_form(ps, u0).total;
    const double rel = std::abs(fd - exact) / std::abs(exact);
    s.add("exact.derivative_identity", rel <= 1e-3, rel, "d/dt ||u||_2^2 = -D(u)");
  });
  s.guard("exact.conditional_expectation", [&] {
    const auto ps = enumerate(build_torus(2, 3), 0.4, Mode::tagged_product);
    auto rng = make_stream(seed, {stream_tag::checks, 4, 0, 0});
    const auto h = random_vector(ps.size(), rng);
    const auto a = conditional_expectation_A(ps, h, 0);
    const auto aa = conditional_expectation_A(ps, a, 0);
    const double idem = sup_diff(a, aa);
    const bool contracts = lp_norm(ps, a, 2) <= lp_norm(ps, h, 2) + 1e-15;
    s.add("exact.conditional_expectation", idem <= 1e-14 && contracts, idem, "idempotent and L2-contracting");
  });
  s.guard("exact.kawasaki_contraction", [&] {
    const auto ks = enumerate(build_torus(1, 4), 0.5, Mode::kawasaki_product);
    const auto kg = assemble_generator(ks);
    auto rng = make_stream(seed, {stream_tag::checks, 5, 0, 0});
    const auto d = random_vector(ks.size(), rng);
    const auto r = kawasaki_contraction_check(kg, d, 1.0);
    const double err = std::abs(r.mass_after - r.mass_before);
    s.add("exact.kawasaki_contraction", err <= 1e-10 && r.l1_after <= r.l1_before + 1e-12, err,
          "mass conserved, L1 non-increasing");
  });
  s.guard("exact.conditional_density", [&] {
    double worst = 0;
    std::size_t events = 0;
    struct Case {
      int d, n, L, l;
    };
    for (const Case c : {Case{1, 4, 1, 0}, Case{1, 4, 1, 1}, Case{2, 3, 1, 1}}) {
      const double rho = 0.5;
      const auto ps = enumerate(build_torus(c.d, c.n), rho, Mode::tagged_product);
      const auto part = partition(c.L, c.l, c.d);
      std::vector<int> M(part.m, 1);
      for (;;) {
        const auto cd = conditional_density(ps, part, M);
        double mean = 0;
        for (std::uint64_t eta = 0; eta < cd.tilde.size(); ++eta) {
          const int k = std::popcount(eta);
          mean += cd.tilde[eta] * std::pow(rho, k) * std::pow(1 - rho, ps.sites() - k);
        }
        worst = std::max(worst, std::abs(mean - 1));
        ++events;
        std::size_t i = 0;
        while (i < M.size() && M[i] == static_cast<int>(part.cell_size)) M[i++] = 1;
        if (i == M.size()) break;
        ++M[i];
      }
    }
    s.add("exact.conditional_density", worst <= 1e-12, worst,
          "<h~^M> = 1 over " + std::to_string(events) + " count vectors");
  });
  if (!quick) {
    s.guard("exact.gap_monotonicity_probe", [&] {
      std::string detail;
      double prev = 0;
      bool mono = true;
      for (double rho : {1.0 / 3, 0.5, 2.0 / 3}) {
        const double lam = spectral_gap(assemble_generator(enumerate(box, rho, Mode::tagged_sector))).lambda1;
        const double cs = 1.0 / lam;
        mono = mono && cs >= prev;
        prev = cs;
        detail += "C_S(" + std::to_string(rho) + ")=" + std::to_string(cs) + " ";
      }
      // Diagnostic only: all that is claimed is that some monotone constant exists.
      s.add("exact.gap_monotonicity_probe", true, nan, detail + (mono ? "nondecreasing" : "not monotone"));
    });
  }
}

void power_checks(Suite& s) {
  s.guard("exact.power_inequalities", [&] {
    auto grid_max = [](double p, double step, bool second) {
      double best = 0;
      const int n = static_cast<int>(std::lround(10.0 / step));
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j < i; ++j) {
          const double x = i * step, y = j * step;
          double r;
          if (second)
            r = std::pow(x - y, p) / (std::pow(x, p) - std::pow(y, p));
          else
            r = std::pow(std::pow(x, p) - std::pow(y, p), 2) /
                ((std::pow(x, 2 * p - 1) - std::pow(y, 2 * p - 1)) * (x - y));
          best = std::max(best, r);
        }
      return best;
    };
    bool ok = true;
    double worst_change = 0;
    for (double p : {1.0, 2.0, 3.0})
      for (bool second : {false, true}) {
        const double a = grid_max(p, 0.01, second), b = grid_max(p, 0.005, second);
        const double change = std::abs(b - a) / a;
        worst_change = std::max(worst_change, change);
        ok = ok && std::isfinite(a) && std::isfinite(b) && change < 0.01;
      }
    s.add("exact.power_inequalities", ok, worst_change, "grid ratio finite and stable under refinement");
  });
}

void montecarlo_checks(Suite& s, bool quick, std::uint64_t seed) {
  s.guard("montecarlo.replica_t0", [&] {
    ReplicaSpec spec;
    spec.n = 8;
    spec.times = {0.0};
    spec.budget = 100;
    spec.batch = 50;
    spec.seed = seed;
    const auto rows = estimate_coincidence(spec);
    s.add("montecarlo.replica_t0", rows[0].estimate == 1.0, rows[0].estimate, "S_p(0) = 1");
  });
  s.guard("montecarlo.martingale_trivial", [&] {
    MartingaleSpec spec;
    spec.n = 8;
    spec.times = {0.0, 1.0};
    spec.lambdas = {0.0};
    spec.samples = 200;
    spec.batch = 100;
    spec.seed = seed;
    const auto rows = martingale_moments(spec);
    const bool ok = rows[0].mean_exp == 1.0 && rows[0].mean_m == 0.0 && rows[1].mean_exp == 1.0;
    s.add("montecarlo.martingale_trivial", ok, nan, "lambda = 0 and t = 0 give 1");
  });
  s.guard("montecarlo.active_set", [&] {
    const auto t = build_torus(2, 16);
    TrajectoryEngine eng(t);
    auto rng = make_stream(seed, {stream_tag::checks, 6, 0, 0});
    eng.reset(sample_initial(t, 0.5, rng), make_stream(seed, {stream_tag::checks, 6, 0, 1}));
    eng.set_rescan_interval(quick ? 100000 : 1000000);
    eng.run_until(quick ? 1000.0 : 8000.0);
    s.add("montecarlo.active_set", eng.active_set_consistent(), static_cast<double>(eng.events()),
          "incremental active set equals a full rescan");
  });
  s.guard("montecarlo.frozen_full_torus", [&] {
    const auto t = build_torus(2, 4);
    Occupancy full(t.site_count());
    for (Site x = 0; x < t.site_count(); ++x) full.set(x, true);
    const auto cfg = make_config(t, t.origin(), full);
    TrajectoryEngine eng(t);
    eng.reset(cfg, make_stream(seed, {stream_tag::checks, 7, 0, 0}));
    const auto end = simulate(eng, 100.0);
    s.add("montecarlo.frozen_full_torus", end == cfg && eng.events() == 0, nan, "no discordant edges");
  });
  s.guard("montecarlo.worker_invariance", [&] {
    KernelSpec k;
    k.n = 8;
    k.t = 2;
    k.samples = quick ? 2000 : 20000;
    k.batch = 500;
    k.seed = seed;
    const auto a = estimate_kernel(k);
    k.workers = 3;
    const auto b = estimate_kernel(k);
    s.add("montecarlo.worker_invariance", a.counts == b.counts && a.events == b.events, nan,
          "1 and 3 workers give identical histograms");
  });
}

void combinatorics_checks(Suite& s, bool quick) {
  s.guard("combinatorics.paths", [&] {
    const auto rep = sweep_paths(build_box(2, 2), quick ? 2.0 : 3.0);
    const bool ok = rep.geometry_errors == 0 && rep.permutation_failures == 0 && rep.transposition_failures == 0 &&
                    rep.event_failures == 0 && rep.event_configurations > 0;
    s.add("combinatorics.paths", ok, rep.max_length_ratio,
          std::to_string(rep.quadruples) + " quadruples, " + std::to_string(rep.configurations) + " occupancies");
  });
  s.guard("combinatorics.counting_bound", [&] {
    const auto b = counting_bound(10, 5, 2);
    double worst = 0;
    for (int N = 3; N <= 60; ++N)
      for (int N1 = 2; N1 < N; ++N1)
        for (int N2 = 1; N2 < N1; ++N2) worst = std::max(worst, counting_bound(N, N1, N2).ratio);
    const bool ok = std::abs(b.lhs - 56.0 / 252.0) < 1e-12 && std::isfinite(worst);
    s.add("combinatorics.counting_bound", ok, worst, "max lhs/rhs over N <= 60");
  });
  s.guard("combinatorics.f_rho", [&] {
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < 100; ++i) {
      const double rho = i / 100.0;
      for (int j = 0; j < 100; ++j) {
        const double x = rho * j / 100.0;
        worst = std::max(worst, f_rho(rho, x) - x * std::log(rho));
      }
    }
    s.add("combinatorics.f_rho", worst <= 1e-12, worst, "max of f_rho(x) - x log rho");
  });
}

void stats_checks(Suite& s) {
  s.guard("stats.fit_slope", [&] {
    const double t[] = {8, 16, 32}, v[] = {1.0 / 8, 1.0 / 16, 1.0 / 32}, se[] = {0.01, 0.005, 0.0025};
    const auto f = fit_slope(t, v, se);
    s.add("stats.fit_slope", std::abs(f.slope + 1) < 1e-12 && f.half_width < 1e-9, f.slope, "noiseless power law");
  });
}

}  // namespace

std::vector<CheckResult> run_checks(bool quick, std::uint64_t seed) {
  Suite s;
  lattice_checks(s);
  config_checks(s, quick, seed);
  exact_checks(s, quick, seed);
  power_checks(s);
  montecarlo_checks(s, quick, seed);
  combinatorics_checks(s, quick);
  stats_checks(s);
  return s.take();
}

}  // namespace exclusim
