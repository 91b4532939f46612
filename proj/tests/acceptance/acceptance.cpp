// Acceptance driver: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N] [--profile quick|full] [--seed S] [--workers W]
//
// Exit status is 0 only if every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"

#include "exclusim/combinatorics.hpp"
#include "exclusim/error.hpp"
#include "exclusim/experiment.hpp"
#include "exclusim/functionals.hpp"
#include "exclusim/generator.hpp"
#include "exclusim/io.hpp"
#include "exclusim/montecarlo.hpp"
#include "exclusim/rng.hpp"
#include "exclusim/semigroup.hpp"
#include "exclusim/spectral.hpp"
#include "exclusim/state_space.hpp"
#include "exclusim/stats.hpp"

using namespace exclusim;
namespace fs = std::filesystem;

namespace {

struct Context {
  bool full = false;
  std::uint64_t seed = 2024;
  int workers = 1;
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> uniform_vector(std::size_t n, std::uint64_t seed, std::uint32_t which) {
  auto g = make_stream(seed, {stream_tag::user, which, 0, 0});
  std::vector<double> v(n);
  for (double& x : v) x = g.uniform();
  return v;
}

// Gap scaling for Kawasaki and tagged sectors at d=2, rho=1/3, ell in {1,2}.
Verdict c1(const Context&) {
  Verdict v{true, ""};
  const double rho = 1.0 / 3;
  for (Mode mode : {Mode::kawasaki_sector, Mode::tagged_sector}) {
    double lo = INFINITY, hi = 0;
    for (int ell : {1, 2}) {
      const auto g = spectral_gap(assemble_generator(enumerate(build_box(2, ell), rho, mode)));
      const double scaled = g.lambda1 * ell * ell;
      v.pass = v.pass && g.lambda1 > 0 && g.converged;
      lo = std::min(lo, scaled);
      hi = std::max(hi, scaled);
      v.detail += to_string(mode) + " l=" + std::to_string(ell) + " lambda1=" + num(g.lambda1) + " (" + g.solver +
                  ", " + std::to_string(g.states) + " states); ";
    }
    v.pass = v.pass && hi / lo <= 4;
    v.detail += "band " + num(hi / lo) + "; ";
  }
  double worst = 0;
  for (int ell : {1, 2}) {
    const auto g = spectral_gap(assemble_generator(enumerate_sector(build_box(2, ell), 1, Mode::kawasaki_sector)));
    worst = std::max(worst, std::abs(g.lambda1 - (2 - 2 * std::cos(std::numbers::pi / (2 * ell + 1)))));
  }
  v.pass = v.pass && worst <= 1e-10;
  v.detail += "single particle vs Laplacian " + num(worst);
  return v;
}

// Diffusive exponent of S_2 on the 32^2 torus.
Verdict c2(const Context& ctx) {
  ReplicaSpec s;
  s.d = 2;
  s.n = 32;
  s.rho = 0.5;
  s.p = 2;
  s.times = ctx.full ? std::vector<double>{8, 16, 32, 64, 128} : std::vector<double>{8, 16, 32};
  s.budget = 20000000;
  s.min_coincidences = 200;
  s.batch = 2000;
  s.seed = ctx.seed;
  s.workers = ctx.workers;
  s.allow_wraparound = true;
  const double tol = ctx.full ? 0.15 : 0.25;
  const auto rows = estimate_coincidence(s);
  std::vector<double> t, e, se;
  std::string d;
  bool enough = true;
  for (const auto& r : rows) {
    t.push_back(r.t);
    e.push_back(r.estimate);
    se.push_back(r.std_error);
    enough = enough && r.coincidences >= 200;
    d += "t=" + num(r.t) + " S2=" + num(r.estimate) + "+-" + num(r.std_error) + " (" + std::to_string(r.samples) +
         " samples); ";
  }
  const auto fit = fit_slope(t, e, se);
  d += "slope " + num(fit.slope) + " +- " + num(fit.half_width) + ", tolerance " + num(tol) +
       (ctx.full ? " (full)" : " (quick)");
  return {enough && std::abs(fit.slope + 1) <= tol, d};
}

// Replica estimate against the exact product-space value on the 4x4 torus.
Verdict c3(const Context& ctx) {
  const auto torus = build_torus(2, 4);
  const auto ps = enumerate(torus, 0.5, Mode::tagged_product);
  const auto gen = assemble_generator(ps);
  const auto u = evolve(gen, tabulate(ps, indicator_at_origin()), 1.0, 1e-13);
  const double exact = std::pow(lp_norm(ps, u, 2), 2);
  ReplicaSpec s;
  s.d = 2;
  s.n = 4;
  s.rho = 0.5;
  s.p = 2;
  s.times = {1.0};
  s.budget = 100000;
  s.batch = 10000;
  s.min_coincidences = 0;
  s.seed = ctx.seed;
  s.workers = ctx.workers;
  const auto r = estimate_coincidence(s).front();
  const double z = std::abs(r.estimate - exact) / r.std_error;
  return {z <= 3, "exact " + num(exact) + ", replica " + num(r.estimate) + " +- " + num(r.std_error) + " (" +
                      std::to_string(r.samples) + " samples), |z| = " + num(z)};
}

// Gaussian shape and symmetry of the annealed kernel at t = 32.
Verdict c4(const Context& ctx) {
  KernelSpec k;
  k.d = 2;
  k.n = 32;
  k.rho = 0.5;
  k.t = 32;
  k.samples = 1000000;
  k.batch = 20000;
  k.seed = ctx.seed;
  k.workers = ctx.workers;
  const auto h = estimate_kernel(k);
  const auto a = analyse_kernel(h, 100);
  const bool pass = a.gaussian.points >= 3 && a.gaussian.r2 >= 0.9 && a.gaussian.slope > 0 && a.symmetry_violations == 0;
  return {pass, "R2 " + num(a.gaussian.r2) + ", slope " + num(a.gaussian.slope) + " over " +
                    std::to_string(a.gaussian.points) + " bins; symmetry violations " +
                    std::to_string(a.symmetry_violations) + " / " + std::to_string(a.symmetry_pairs) +
                    " pairs (expected under exact symmetry " + num(a.symmetry_expected_violations) +
                    ", chi2 " + num(a.symmetry_chi2) + ", p = " + num(a.symmetry_p_value) + "); " +
                    std::to_string(h.counts.size()) + " occupied bins"};
}

// Exponential martingale bound and centring.
Verdict c5(const Context& ctx) {
  MartingaleSpec m;
  m.d = 2;
  m.n = 16;
  m.rho = 0.5;
  m.times = {4, 8};
  m.lambdas = {0.25, 0.5};
  m.samples = 100000;
  m.batch = 10000;
  m.seed = ctx.seed;
  m.workers = ctx.workers;
  Verdict v{true, ""};
  for (const auto& r : martingale_moments(m)) {
    const bool bound = r.mean_exp <= r.bound * (1 + 3 * r.se_exp / r.mean_exp);
    const bool centred = std::abs(r.mean_m) <= 3 * r.se_m;
    v.pass = v.pass && bound && centred;
    v.detail += "t=" + num(r.t) + " lambda=" + num(r.lambda) + ": E e^(lM)=" + num(r.mean_exp) + " bound " +
                num(r.bound) + ", E M=" + num(r.mean_m) + "+-" + num(r.se_m) + "; ";
  }
  return v;
}

// Exhaustive flip-path replay on the 5x5 box.
Verdict c6(const Context&) {
  const auto s = sweep_paths(build_box(2, 2), 3.0);
  const bool sg6a = s.geometry_errors == 0 && s.permutation_failures == 0 && s.transposition_failures == 0;
  const bool sg6b = s.admissibility_failures == 0;
  const bool event = s.event_failures == 0 && s.event_configurations > 0;
  std::string d = std::to_string(s.quadruples) + " quadruples, " + std::to_string(s.configurations) +
                  " occupancies; transposition failures " + std::to_string(s.transposition_failures) +
                  ", admissibility failures " + std::to_string(s.admissibility_failures) +
                  "; on the hole-search event (" + std::to_string(s.event_configurations) +
                  " occupancies) failures " + std::to_string(s.event_failures) + "; max n/(dist+1) " +
                  num(s.max_length_ratio);
  if (!sg6b)
    d += ". Admissibility for every eta with eta(z1)=eta(z2)=0 cannot hold for any eta-independent sequence: "
         "the first flip is concordant for some such eta";
  // The criterion asks for zero failures of both properties.
  return {sg6a && sg6b && event, d};
}

// Uniformization against dense expm, mass conservation and Kawasaki L1 contraction.
Verdict c7(const Context& ctx) {
  const auto sp = enumerate(build_box(2, 1), 1.0 / 3, Mode::tagged_sector);
  const auto gen = assemble_generator(sp);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gen.dense());
  const auto f = uniform_vector(sp.size(), ctx.seed, 1);
  const Eigen::VectorXd c =
      es.eigenvectors().transpose() * Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  double sup = 0, drift = 0;
  for (double t : {0.1, 1.0, 10.0}) {
    const auto u = evolve(gen, f, t, 1e-12);
    const Eigen::VectorXd ref = es.eigenvectors() * (es.eigenvalues().array() * t).exp().matrix().cwiseProduct(c);
    for (std::size_t i = 0; i < u.size(); ++i) sup = std::max(sup, std::abs(u[i] - ref(static_cast<Eigen::Index>(i))));
    drift = std::max(drift, std::abs(stationary_mean(sp, u) - stationary_mean(sp, f)));
  }
  const auto ks = enumerate(build_torus(1, 4), 0.5, Mode::kawasaki_product);
  const auto kg = assemble_generator(ks);
  double l1 = 0;
  for (std::uint32_t rep = 0; rep < 20; ++rep) {
    const auto dens = uniform_vector(ks.size(), ctx.seed, 100 + rep);
    for (double t : {0.5, 2.0}) {
      const auto r = kawasaki_contraction_check(kg, dens, t);
      // For nonnegative densities the L1 norm is the mass, so contraction is equality.
      l1 = std::max({l1, std::abs(r.l1_after - r.l1_before), std::abs(r.mass_after - r.mass_before)});
    }
  }
  return {sup <= 1e-10 && drift <= 1e-12 && l1 <= 1e-10,
          "sup |uniformization - expm| " + num(sup) + ", mass drift " + num(drift) + ", L1 defect " + num(l1)};
}

double grid_ratio(double p, double step, bool second) {
  double best = 0;
  const int n = static_cast<int>(std::lround(10.0 / step));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j < i; ++j) {
      const double x = i * step, y = j * step;
      const double r = second ? std::pow(x - y, p) / (std::pow(x, p) - std::pow(y, p))
                              : std::pow(std::pow(x, p) - std::pow(y, p), 2) /
                                    ((std::pow(x, 2 * p - 1) - std::pow(y, 2 * p - 1)) * (x - y));
      best = std::max(best, r);
    }
  return best;
}

// Derivative identity, power inequalities and the moment inequality.
Verdict c8(const Context& ctx) {
  Verdict v{true, ""};
  const auto ps = enumerate(build_torus(1, 5), 0.5, Mode::tagged_product);
  const auto gen = assemble_generator(ps);
  const auto f = tabulate(ps, indicator_at_origin());
  const double t = 1.0, dt = 1e-4;
  const auto u0 = evolve(gen, f, t, 1e-14);
  const auto u1 = evolve(gen, f, t + dt, 1e-14);
  double worst_fd = 0;
  for (double p : {1.0, 2.0, 3.0}) {
    const double a = std::pow(lp_norm(ps, u0, 2 * p), 2 * p), b = std::pow(lp_norm(ps, u1, 2 * p), 2 * p);
    const double fd = (b - a) / dt;
    const double exact = -p * power_pairing(ps, u0, p);
    worst_fd = std::max(worst_fd, std::abs(fd - exact) / std::abs(exact));
  }
  const double d1 = dirichlet_form(ps, u0).total;
  const double fd1 = (std::pow(lp_norm(ps, u1, 2), 2) - std::pow(lp_norm(ps, u0, 2), 2)) / dt;
  const double rel1 = std::abs(fd1 + d1) / d1;
  v.pass = worst_fd <= 1e-3 && rel1 <= 1e-3;
  v.detail = "finite difference rel. error " + num(worst_fd) + " (p=1: " + num(rel1) + " against -D); ";

  double c2max = 0, worst_change = 0;
  for (double p : {1.0, 2.0, 3.0})
    for (bool second : {false, true}) {
      const double a = grid_ratio(p, 0.01, second), b = grid_ratio(p, 0.005, second);
      const double change = std::abs(b - a) / a;
      v.pass = v.pass && std::isfinite(a) && std::isfinite(b) && change < 0.01;
      worst_change = std::max(worst_change, change);
      if (second) c2max = std::max(c2max, b);
      v.detail += "C" + std::string(second ? "2" : "1") + "(" + num(p) + ")=" + num(b) + " ";
    }
  v.detail += "; refinement change " + num(worst_change) + "; ";

  // E|X-EX|^{2p} <= 2 C2^2 Var(X^p) by the independent-copy argument.
  auto rng = make_stream(ctx.seed, {stream_tag::user, 8, 0, 0});
  double worst_moment = 0;
  for (int rep = 0; rep < 20000; ++rep) {
    const int atoms = 2 + static_cast<int>(rng.below(5));
    std::vector<double> x(static_cast<std::size_t>(atoms)), w(static_cast<std::size_t>(atoms));
    double wsum = 0;
    for (int i = 0; i < atoms; ++i) {
      x[static_cast<std::size_t>(i)] = 10 * rng.uniform();
      w[static_cast<std::size_t>(i)] = rng.uniform() + 1e-3;
      wsum += w[static_cast<std::size_t>(i)];
    }
    for (double& wi : w) wi /= wsum;
    for (double p : {1.0, 2.0, 3.0}) {
      double m = 0, mp = 0;
      for (int i = 0; i < atoms; ++i) {
        m += w[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        mp += w[static_cast<std::size_t>(i)] * std::pow(x[static_cast<std::size_t>(i)], p);
      }
      double lhs = 0, var = 0;
      for (int i = 0; i < atoms; ++i) {
        const double xi = x[static_cast<std::size_t>(i)], wi = w[static_cast<std::size_t>(i)];
        lhs += wi * std::pow(std::abs(xi - m), 2 * p);
        var += wi * std::pow(std::pow(xi, p) - mp, 2);
      }
      if (var > 1e-12) worst_moment = std::max(worst_moment, lhs / var);
    }
  }
  v.pass = v.pass && worst_moment <= 2 * c2max * c2max;
  v.detail += "moment ratio " + num(worst_moment) + " <= " + num(2 * c2max * c2max);
  return v;
}

// Conditional-measure identity h^M(x, eta) = (rho |B_l| / M_i(x)) h~^M(eta) and <h~^M> = 1.
Verdict c9(const Context&) {
  struct Case {
    int d, n, L, l;
  };
  double worst_id = 0, worst_norm = 0;
  std::size_t vectors = 0, skipped = 0;
  for (const Case c : {Case{1, 4, 1, 0}, Case{1, 4, 1, 1}, Case{2, 3, 1, 1}, Case{1, 9, 4, 1}}) {
    const double rho = 0.5;
    const auto torus = build_torus(c.d, c.n);
    const auto ps = enumerate(torus, rho, Mode::tagged_product);
    const auto part = partition(c.L, c.l, c.d);
    const auto box = build_box(c.d, c.L);
    const auto emb = embed(box, torus);
    std::vector<int> M(part.m, 1);
    for (;;) {
      try {
        const auto cd = conditional_density(ps, part, M);
        double mean = 0;
        for (std::uint64_t eta = 0; eta < cd.tilde.size(); ++eta) {
          const int k = std::popcount(eta);
          mean += cd.tilde[eta] * std::pow(rho, k) * std::pow(1 - rho, ps.sites() - k);
        }
        worst_norm = std::max(worst_norm, std::abs(mean - 1));
        for (Site b = 0; b < box.site_count(); ++b) {
          const Site x = emb[b];
          const double factor = rho * static_cast<double>(part.cell_size) / M[part.cell_of[b]];
          for (std::uint64_t r = 0; r < ps.per_site(); ++r) {
            const std::uint64_t i = x * ps.per_site() + r;
            const double want = factor * cd.tilde[ps.state(i).eta];
            worst_id = std::max(worst_id, std::abs(cd.tagged[i] - want) / std::max(1.0, want));
          }
        }
        ++vectors;
      } catch (const ZeroProbabilityEvent&) {
        ++skipped;
      }
      std::size_t i = 0;
      while (i < M.size() && M[i] == static_cast<int>(part.cell_size)) M[i++] = 1;
      if (i == M.size()) break;
      ++M[i];
    }
  }
  return {worst_id <= 1e-12 && worst_norm <= 1e-12 && vectors > 0,
          "identity " + num(worst_id) + ", normalization " + num(worst_norm) + " over " + std::to_string(vectors) +
              " count vectors (" + std::to_string(skipped) + " of probability zero)"};
}

// Counting bound ratio over N <= 60 and the f_rho inequality.
Verdict c10(const Context&) {
  constexpr double pinned = 0.999856352796691;
  double worst = 0;
  std::size_t triples = 0;
  for (int N = 3; N <= 60; ++N)
    for (int N1 = 2; N1 < N; ++N1)
      for (int N2 = 1; N2 < N1; ++N2) {
        worst = std::max(worst, counting_bound(N, N1, N2).ratio);
        ++triples;
      }
  double frho = -INFINITY;
  for (int i = 1; i < 200; ++i) {
    const double rho = i / 200.0;
    for (int j = 0; j < 200; ++j) {
      const double x = rho * j / 200.0;
      frho = std::max(frho, f_rho(rho, x) - x * std::log(rho));
    }
  }
  const bool pass = std::abs(worst - pinned) <= 1e-12 && worst <= 1 && frho <= 1e-12;
  return {pass, "max ratio " + num(worst) + " over " + std::to_string(triples) + " triples (pinned " + num(pinned) +
                    "), max f_rho(x) - x log rho = " + num(frho)};
}

// Re-running any experiment from its sidecar reproduces the bytes.
Verdict c11(const Context& ctx) {
  const auto root = fs::temp_directory_path() / ("exclusim_acceptance_" + std::to_string(ctx.seed));
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"gap", R"({"kind": "gap", "d": 2, "ells": [1], "rho": "1/3"})"},
      {"evolve", R"({"kind": "evolve", "geometry": "torus", "d": 1, "n": 5, "mode": "tagged_product", "rho": 0.5,
                    "times": [0.5, 1, 2], "compare_dense": true})"},
      {"replica", R"({"kind": "replica", "n": 8, "times": [0.5, 1, 2, 4], "budget": 20000, "batch": 2500, "seed": 5})"},
      {"kernel", R"({"kind": "kernel", "n": 12, "t": 4, "samples": 20000, "batch": 3000, "seed": 6})"},
      {"carne", R"({"kind": "carne", "n": 12, "t": 4, "samples": 20000, "batch": 3000, "seed": 6})"},
      {"martingale", R"({"kind": "martingale", "n": 12, "times": [1, 2], "lambdas": [0.25, 0.5], "samples": 8000,
                        "batch": 1000, "seed": 7})"},
      {"paths", R"({"kind": "paths", "ell": 2, "radius": 1.5})"},
  };
  bool pass = true;
  std::string d;
  for (const auto& [name, text] : experiments) {
    RunOptions a;
    a.out_dir = root / "first";
    fs::create_directories(*a.out_dir);
    const auto first = run_experiment(text, name, a);
    RunOptions b;
    b.out_dir = root / "second";
    fs::create_directories(*b.out_dir);
    const auto second = run_experiment_file(first.sidecar, b);
    const bool same = read_file(first.csv) == read_file(second.csv) &&
                      read_file(first.sidecar) == read_file(second.sidecar);
    pass = pass && same;
    d += name + (same ? " identical" : " DIFFERS") + "; ";
  }
  fs::remove_all(root);
  return {pass, d};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string profile = "quick";
  Context ctx;
  ctx.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--criterion", only, "Run a single criterion (1-11); 0 runs all")->check(CLI::Range(0, 11));
  app.add_option("--profile", profile, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  app.add_option("--seed", ctx.seed, "Master seed");
  app.add_option("--workers", ctx.workers, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  ctx.full = profile == "full";

  const std::vector<std::pair<std::string, std::function<Verdict(const Context&)>>> criteria = {
      {"gap scaling", c1},           {"diffusive exponent", c2},   {"replica vs exact", c3},
      {"kernel shape", c4},          {"exponential martingale", c5}, {"flip paths", c6},
      {"semigroup", c7},             {"derivative and powers", c8}, {"conditional measure", c9},
      {"counting bound", c10},       {"determinism", c11},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && v.pass;
    std::printf("C%zu %s %s [%.1fs]: %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), secs,
                v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
