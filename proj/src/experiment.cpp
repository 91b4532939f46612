#include "exclusim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

#include "exclusim/checks.hpp"
#include "exclusim/combinatorics.hpp"
#include "exclusim/error.hpp"
#include "exclusim/functionals.hpp"
#include "exclusim/generator.hpp"
#include "exclusim/io.hpp"
#include "exclusim/montecarlo.hpp"
#include "exclusim/rng.hpp"
#include "exclusim/semigroup.hpp"
#include "exclusim/spectral.hpp"
#include "exclusim/state_space.hpp"
#include "exclusim/stats.hpp"

namespace exclusim {

namespace {

using json = nlohmann::ordered_json;

std::size_t line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Reads typed fields out of one JSON object and remembers the resolved value
// of each, defaults included.
class Fields {
 public:
  Fields(const json& obj, const std::string& text) : obj_(obj), text_(text) {}

  ParseError error(const std::string& key, const std::string& what) const { return ParseError(key, line_of(key), what); }

  double number(const std::string& key, std::optional<double> def, double lo, double hi, bool open_lo = false,
                bool open_hi = false) {
    double v;
    const json* j = find(key);
    if (!j) {
      if (!def) throw error(key, "is required");
      v = *def;
    } else if (j->is_number()) {
      v = j->get<double>();
    } else if (j->is_string()) {
      v = fraction(key, j->get<std::string>());
    } else {
      throw error(key, "must be a number");
    }
    check_range(key, v, lo, hi, open_lo, open_hi);
    resolved_[key] = v;
    return v;
  }

  long long integer(const std::string& key, std::optional<long long> def, long long lo, long long hi) {
    long long v;
    const json* j = find(key);
    if (!j) {
      if (!def) throw error(key, "is required");
      v = *def;
    } else if (j->is_number_integer() || j->is_number_unsigned()) {
      v = j->get<long long>();
    } else if (j->is_number_float() && std::floor(j->get<double>()) == j->get<double>() &&
               std::abs(j->get<double>()) < 9e15) {
      v = static_cast<long long>(j->get<double>());
    } else {
      throw error(key, "must be an integer");
    }
    if (v < lo || v > hi)
      throw error(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(v));
    resolved_[key] = v;
    return v;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t def) {
    const json* j = find(key);
    std::uint64_t v = def;
    if (j) {
      if (j->is_number_unsigned() || (j->is_number_integer() && j->get<long long>() >= 0))
        v = j->get<std::uint64_t>();
      else
        throw error(key, "must be a nonnegative 64-bit integer");
    }
    resolved_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def, double lo, double hi) {
    std::vector<double> v;
    const json* j = find(key);
    if (!j) {
      if (!def) throw error(key, "is required");
      v = *def;
    } else {
      if (!j->is_array()) throw error(key, "must be an array of numbers");
      for (const auto& e : *j) {
        if (e.is_number())
          v.push_back(e.get<double>());
        else if (e.is_string())
          v.push_back(fraction(key, e.get<std::string>()));
        else
          throw error(key, "must be an array of numbers");
      }
    }
    if (v.empty()) throw error(key, "must not be empty");
    for (double x : v) check_range(key, x, lo, hi, false, false);
    resolved_[key] = v;
    return v;
  }

  std::vector<long long> integers(const std::string& key, std::optional<std::vector<long long>> def, long long lo,
                                  long long hi) {
    std::vector<long long> v;
    const json* j = find(key);
    if (!j) {
      if (!def) throw error(key, "is required");
      v = *def;
    } else {
      if (!j->is_array()) throw error(key, "must be an array of integers");
      for (const auto& e : *j) {
        if (!e.is_number_integer() && !e.is_number_unsigned()) throw error(key, "must be an array of integers");
        v.push_back(e.get<long long>());
      }
    }
    if (v.empty()) throw error(key, "must not be empty");
    for (long long x : v)
      if (x < lo || x > hi) throw error(key, "entries must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    resolved_[key] = v;
    return v;
  }

  std::string choice(const std::string& key, std::optional<std::string> def, const std::set<std::string>& allowed) {
    std::string v;
    const json* j = find(key);
    if (!j) {
      if (!def) throw error(key, "is required");
      v = *def;
    } else {
      if (!j->is_string()) throw error(key, "must be a string");
      v = j->get<std::string>();
    }
    if (!allowed.empty() && !allowed.count(v)) throw error(key, "unknown value '" + v + "'");
    resolved_[key] = v;
    return v;
  }

  std::vector<std::string> choices(const std::string& key, std::vector<std::string> def,
                                   const std::set<std::string>& allowed) {
    std::vector<std::string> v;
    const json* j = find(key);
    if (!j) {
      v = std::move(def);
    } else {
      if (!j->is_array()) throw error(key, "must be an array of strings");
      for (const auto& e : *j) {
        if (!e.is_string()) throw error(key, "must be an array of strings");
        v.push_back(e.get<std::string>());
      }
    }
    if (v.empty()) throw error(key, "must not be empty");
    for (const auto& x : v)
      if (!allowed.count(x)) throw error(key, "unknown value '" + x + "'");
    resolved_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool def) {
    const json* j = find(key);
    bool v = def;
    if (j) {
      if (!j->is_boolean()) throw error(key, "must be true or false");
      v = j->get<bool>();
    }
    resolved_[key] = v;
    return v;
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  //! Rejects keys that no reader consumed.
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!resolved_.contains(it.key())) throw error(it.key(), "unknown field for this experiment kind");
  }

  json& resolved() { return resolved_; }

 private:
  const json* find(const std::string& key) const {
    auto it = obj_.find(key);
    return it == obj_.end() || it->is_null() ? nullptr : &*it;
  }

  std::size_t line_of(const std::string& key) const {
    const std::regex re("\"" + std::regex_replace(key, std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)") + "\"\\s*:");
    std::smatch m;
    if (std::regex_search(text_, m, re)) return line_at(text_, static_cast<std::size_t>(m.position(0)));
    return 0;
  }

  double fraction(const std::string& key, const std::string& s) const {
    const auto slash = s.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      }
      const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
      const double num = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument(s);
      const double den = std::stod(b, &used);
      if (used != b.size() || den == 0) throw std::invalid_argument(s);
      return num / den;
    } catch (const std::exception&) {
      throw error(key, "cannot read '" + s + "' as a number");
    }
  }

  void check_range(const std::string& key, double v, double lo, double hi, bool open_lo, bool open_hi) const {
    const bool ok = std::isfinite(v) && (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
    if (!ok) {
      std::ostringstream os;
      os << "must lie in " << (open_lo ? "(" : "[") << lo << ", " << hi << (open_hi ? ")" : "]") << ", got "
         << format_double(v);
      throw error(key, os.str());
    }
  }

  const json& obj_;
  const std::string& text_;
  json resolved_ = json::object();
};

struct Outcome {
  CsvTable table{{}};
  json summary = json::object();
  bool passed = true;
  std::string message;
};

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr long long big = 1LL << 40;

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

// Each kind reads its parameters (filling `f.resolved()`), then runs.
using Runner = std::function<Outcome()>;

Runner gap_kind(Fields& f) {
  const int d = static_cast<int>(f.integer("d", 2, 1, 6));
  const auto ells = f.integers("ells", std::vector<long long>{1, 2}, 0, 20);
  const double rho = f.number("rho", 1.0 / 3, 0, 1, true, false);
  const auto modes = f.choices("modes", {"kawasaki", "tagged"}, {"kawasaki", "tagged"});
  GapOptions go;
  go.dense_limit = static_cast<std::uint64_t>(f.integer("dense_limit", 4000, 1, big));
  go.tol = f.number("tol", 1e-9, 0, 1, true, false);
  const auto capacity = static_cast<std::uint64_t>(f.integer("capacity", static_cast<long long>(default_capacity), 1, big));
  const double band = f.number("band", 4.0, 1, inf);
  return [=] {
    Outcome o;
    o.table = CsvTable({"ell", "rho", "mode", "lambda1", "lambda1_ell2", "states", "solver", "residual", "iterations"});
    bool positive = true;
    json families = json::object();
    for (const auto& m : modes) {
      double lo = inf, hi = 0;
      for (long long ell : ells) {
        const auto space = enumerate(build_box(d, static_cast<int>(ell)), rho,
                                     m == "tagged" ? Mode::tagged_sector : Mode::kawasaki_sector, capacity);
        const auto g = spectral_gap(assemble_generator(space), go);
        const double scaled = g.lambda1 * static_cast<double>(ell * ell);
        positive = positive && g.lambda1 > 0 && g.converged;
        lo = std::min(lo, scaled);
        hi = std::max(hi, scaled);
        o.table.add_row({std::to_string(ell), fmt(rho), m, fmt(g.lambda1), fmt(scaled), fmt(g.states), g.solver,
                         fmt(g.residual), fmt(g.iterations)});
      }
      families[m] = {{"min_lambda1_ell2", lo}, {"max_lambda1_ell2", hi}, {"ratio", hi / lo}};
      if (hi / lo > band) o.passed = false;
    }
    o.passed = o.passed && positive;
    o.summary = {{"families", families}, {"band", band}, {"all_positive", positive}};
    o.message = "gap: " + std::to_string(o.table.rows()) + " spectra";
    return o;
  };
}

Runner evolve_kind(Fields& f) {
  const int d = static_cast<int>(f.integer("d", 2, 1, 6));
  const auto geometry = f.choice("geometry", "box", {"box", "torus"});
  const int size = geometry == "box" ? static_cast<int>(f.integer("ell", 1, 0, 20))
                                     : static_cast<int>(f.integer("n", 4, 3, 64));
  const auto mode_name = f.choice("mode", "tagged", {"tagged", "kawasaki", "tagged_product", "kawasaki_product"});
  const Mode mode = mode_from_string(mode_name);
  const double rho = f.number("rho", 1.0 / 3, 0, 1, true, false);
  const auto times = f.numbers("times", std::nullopt, 0, 1e6);
  const auto fn = f.choice("function", mode == Mode::tagged_sector || mode == Mode::tagged_product ? "indicator_origin"
                                                                                                    : "occupied_origin",
                           {"indicator_origin", "occupied_origin", "random", "constant"});
  const double tol = f.number("tol", 1e-12, 0, 1, true, false);
  const bool compare = f.boolean("compare_dense", false);
  const std::uint64_t seed = f.seed("seed", 1);
  if (!std::is_sorted(times.begin(), times.end())) throw f.error("times", "must be nondecreasing");
  if (fn == "indicator_origin" && !(mode == Mode::tagged_sector || mode == Mode::tagged_product))
    throw f.error("function", "indicator_origin needs a tagged mode");
  if (mode == Mode::tagged_product || mode == Mode::kawasaki_product) {
    if (rho >= 1) throw f.error("rho", "product spaces need rho < 1");
  }
  return [=] {
    const LatticeBox lat = geometry == "box" ? build_box(d, size) : build_torus(d, size);
    const auto space = enumerate(lat, rho, mode);
    const auto gen = assemble_generator(space);
    std::vector<double> h(space.size());
    if (fn == "indicator_origin") {
      h = tabulate(space, indicator_at_origin());
    } else if (fn == "occupied_origin") {
      for_each_state(space, [&](std::uint64_t i, const State& s) { h[i] = static_cast<double>((s.eta >> lat.origin()) & 1u); });
    } else if (fn == "random") {
      auto rng = make_stream(seed, {stream_tag::user, 0, 0, 0});
      for (double& v : h) v = rng.uniform();
    } else {
      std::fill(h.begin(), h.end(), 1.0);
    }
    std::optional<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> es;
    if (compare) {
      if (space.size() > 4000) throw InvalidArgument("cli", "compare_dense needs at most 4000 states");
      es.emplace(gen.dense());
    }
    Outcome o;
    o.table = CsvTable({"t", "mass", "l1", "l2", "linf", "dirichlet", "terms", "dense_error"});
    const double mass0 = stationary_mean(space, h);
    double drift = 0, worst = 0;
    for (double t : times) {
      EvolveReport rep;
      const auto u = evolve(gen, h, t, tol, &rep);
      double err = std::numeric_limits<double>::quiet_NaN();
      if (es) {
        const Eigen::Map<const Eigen::VectorXd> hv(h.data(), static_cast<Eigen::Index>(h.size()));
        const Eigen::VectorXd c = es->eigenvectors().transpose() * hv;
        const Eigen::VectorXd r = es->eigenvectors() * (es->eigenvalues().array() * t).exp().matrix().cwiseProduct(c);
        err = 0;
        for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(u[i] - r[static_cast<Eigen::Index>(i)]));
        worst = std::max(worst, err);
      }
      const double mass = stationary_mean(space, u);
      drift = std::max(drift, std::abs(mass - mass0));
      o.table.add_row({fmt(t), fmt(mass), fmt(lp_norm(space, u, 1)), fmt(lp_norm(space, u, 2)),
                       fmt(lp_norm(space, u, p_infinity)), fmt(dirichlet_form(space, u).total), fmt(rep.terms),
                       fmt(err)});
    }
    o.passed = drift <= 1e-12 && (!compare || worst <= 1e-10);
    o.summary = {{"states", space.size()}, {"mass_drift", drift}};
    if (compare) o.summary["max_dense_error"] = worst;
    o.message = "evolve: " + std::to_string(space.size()) + " states, mass drift " + fmt(drift);
    return o;
  };
}

Runner replica_kind(Fields& f) {
  ReplicaSpec s;
  s.d = static_cast<int>(f.integer("d", 2, 1, 6));
  s.n = static_cast<int>(f.integer("n", 32, 3, 1 << 16));
  s.rho = f.number("rho", 0.5, 0, 1, true, true);
  s.times = f.numbers("times", std::nullopt, 0, 1e9);
  s.p = static_cast<int>(f.integer("p", 2, 2, 64));
  s.budget = static_cast<std::uint64_t>(f.integer("budget", 1000000, 1, 1LL << 32));
  s.min_coincidences = static_cast<std::uint64_t>(f.integer("min_coincidences", 200, 0, 1LL << 32));
  s.batch = static_cast<std::uint64_t>(f.integer("batch", 1000, 1, 1LL << 32));
  s.seed = f.seed("seed", 1);
  s.workers = static_cast<int>(f.integer("workers", 1, 1, 1024));
  std::optional<std::pair<double, double>> expect;
  if (f.has("expect_slope")) {
    const auto e = f.numbers("expect_slope", std::nullopt, -1e3, 1e3);
    if (e.size() != 2 || e[1] < 0) throw f.error("expect_slope", "must be [center, tolerance]");
    expect = std::make_pair(e[0], e[1]);
  }
  s.allow_wraparound = f.boolean("allow_wraparound", false);
  double sqrt_tmax = 0;
  for (double t : s.times) sqrt_tmax = std::max(sqrt_tmax, std::sqrt(t));
  if (!s.allow_wraparound && s.n < 4 * sqrt_tmax) throw f.error("n", "violates n >= 4 sqrt(max t)");
  return [s, expect] {
    Outcome o;
    const auto rows = estimate_coincidence(s);
    o.table = CsvTable({"t", "estimate", "stderr", "n_samples", "n_events", "coincidences"});
    std::vector<double> ts, vs, ses;
    for (const auto& r : rows) {
      o.table.add_row({fmt(r.t), fmt(r.estimate), fmt(r.std_error), fmt(r.samples), fmt(r.events), fmt(r.coincidences)});
      if (r.t > 0 && r.estimate > 0) {
        ts.push_back(r.t);
        vs.push_back(r.estimate);
        ses.push_back(r.std_error);
      }
    }
    o.message = "replica: " + std::to_string(rows.size()) + " times";
    if (ts.size() >= 3) {
      const auto fit = fit_slope(ts, vs, ses);
      o.summary["slope"] = fit.slope;
      o.summary["intercept"] = fit.intercept;
      o.summary["half_width"] = fit.half_width;
      o.summary["weighted"] = fit.weighted;
      o.message += ", slope " + fmt(fit.slope) + " +- " + fmt(fit.half_width);
      if (expect) o.passed = std::abs(fit.slope - expect->first) <= expect->second;
    } else if (expect) {
      o.passed = false;
      o.message += ", too few positive rows to fit";
    }
    if (expect) o.summary["expect_slope"] = {expect->first, expect->second};
    return o;
  };
}

KernelSpec read_kernel(Fields& f) {
  KernelSpec k;
  k.d = static_cast<int>(f.integer("d", 2, 1, 6));
  k.n = static_cast<int>(f.integer("n", 32, 3, 1 << 16));
  k.rho = f.number("rho", 0.5, 0, 1, true, true);
  k.t = f.number("t", std::nullopt, 0, 1e9);
  k.samples = static_cast<std::uint64_t>(f.integer("samples", 100000, 1, 1LL << 32));
  k.batch = static_cast<std::uint64_t>(f.integer("batch", 10000, 1, 1LL << 32));
  k.seed = f.seed("seed", 1);
  k.workers = static_cast<int>(f.integer("workers", 1, 1, 1024));
  if (k.n < 4 * std::sqrt(k.t)) throw f.error("n", "violates n >= 4 sqrt(t)");
  return k;
}

std::vector<std::string> kernel_header(int d, std::vector<std::string> extra) {
  std::vector<std::string> h;
  for (int i = 0; i < d; ++i) h.push_back("x" + std::to_string(i));
  h.insert(h.end(), extra.begin(), extra.end());
  return h;
}

Runner kernel_kind(Fields& f) {
  const KernelSpec k = read_kernel(f);
  return [k] {
    Outcome o;
    const auto h = estimate_kernel(k);
    o.table = CsvTable(kernel_header(k.d, {"count", "probability"}));
    double total = 0;
    for (const auto& [x, c] : h.counts) {
      std::vector<std::string> row;
      for (int v : x) row.push_back(std::to_string(v));
      row.push_back(fmt(c));
      row.push_back(fmt(h.probability(x)));
      total += static_cast<double>(c);
      o.table.add_row(std::move(row));
    }
    o.summary = {{"samples", h.samples}, {"events", h.events}, {"bins", h.counts.size()}};
    o.passed = total == static_cast<double>(h.samples);
    o.message = "kernel: " + std::to_string(h.counts.size()) + " bins";
    return o;
  };
}

Runner carne_kind(Fields& f) {
  const KernelSpec k = read_kernel(f);
  const auto min_hits = static_cast<std::uint64_t>(f.integer("min_hits", 100, 1, 1LL << 32));
  const double min_r2 = f.number("min_r2", 0.9, 0, 1);
  return [k, min_hits, min_r2] {
    Outcome o;
    const auto h = estimate_kernel(k);
    const auto a = analyse_kernel(h, min_hits);
    o.table = CsvTable(kernel_header(k.d, {"count", "probability", "r2_over_t", "neg_log_p", "regime"}));
    for (const auto& [x, c] : h.counts) {
      std::vector<std::string> row;
      double r2 = 0;
      for (int v : x) {
        row.push_back(std::to_string(v));
        r2 += static_cast<double>(v) * v;
      }
      const double p = h.probability(x);
      row.push_back(fmt(c));
      row.push_back(fmt(p));
      row.push_back(fmt(r2 / k.t));
      row.push_back(fmt(-std::log(p)));
      row.push_back(std::sqrt(r2) <= k.t ? "gaussian" : "far");
      o.table.add_row(std::move(row));
    }
    o.summary = {{"samples", h.samples},
                 {"events", h.events},
                 {"fit_points", a.gaussian.points},
                 {"slope", a.gaussian.slope},
                 {"intercept", a.gaussian.intercept},
                 {"r2", a.gaussian.r2},
                 {"fitted_c", a.fitted_c},
                 {"symmetry_pairs", a.symmetry_pairs},
                 {"symmetry_violations", a.symmetry_violations},
                 {"symmetry_expected_violations", a.symmetry_expected_violations},
                 {"symmetry_chi2", a.symmetry_chi2},
                 {"symmetry_p_value", a.symmetry_p_value},
                 {"far_bins", a.far_bins},
                 {"far_violations", a.far_violations}};
    o.passed = a.gaussian.points >= 2 && a.gaussian.r2 >= min_r2 && a.gaussian.slope > 0 && a.symmetry_violations == 0;
    o.message = "carne: R^2 " + fmt(a.gaussian.r2) + ", slope " + fmt(a.gaussian.slope) + ", symmetry violations " +
                std::to_string(a.symmetry_violations) + "/" + std::to_string(a.symmetry_pairs);
    return o;
  };
}

Runner martingale_kind(Fields& f) {
  MartingaleSpec s;
  s.d = static_cast<int>(f.integer("d", 2, 1, 6));
  s.n = static_cast<int>(f.integer("n", 16, 3, 1 << 16));
  s.rho = f.number("rho", 0.5, 0, 1, true, true);
  s.times = f.numbers("times", std::nullopt, 0, 1e9);
  s.lambdas = f.numbers("lambdas", std::nullopt, 0, 100);
  s.x0 = f.numbers("x0", std::vector<double>(static_cast<std::size_t>(s.d), 0.0), -1e9, 1e9);
  s.samples = static_cast<std::uint64_t>(f.integer("samples", 100000, 1, 1LL << 32));
  s.batch = static_cast<std::uint64_t>(f.integer("batch", 10000, 1, 1LL << 32));
  s.seed = f.seed("seed", 1);
  s.workers = static_cast<int>(f.integer("workers", 1, 1, 1024));
  if (s.x0.size() != static_cast<std::size_t>(s.d)) throw f.error("x0", "needs d entries");
  if (!std::is_sorted(s.times.begin(), s.times.end())) throw f.error("times", "must be nondecreasing");
  double sqrt_tmax = 0;
  for (double t : s.times) sqrt_tmax = std::max(sqrt_tmax, std::sqrt(t));
  if (s.n < 4 * sqrt_tmax) throw f.error("n", "violates n >= 4 sqrt(max t)");
  return [s] {
    Outcome o;
    const auto rows = martingale_moments(s);
    o.table = CsvTable({"t", "lambda", "mean_exp", "se_exp", "bound", "mean_m", "se_m", "n_samples", "n_events"});
    std::size_t bound_fail = 0, mean_fail = 0;
    for (const auto& r : rows) {
      o.table.add_row({fmt(r.t), fmt(r.lambda), fmt(r.mean_exp), fmt(r.se_exp), fmt(r.bound), fmt(r.mean_m),
                       fmt(r.se_m), fmt(r.samples), fmt(r.events)});
      const double rel = r.mean_exp > 0 ? r.se_exp / r.mean_exp : 0;
      if (r.mean_exp > r.bound * (1 + 3 * rel)) ++bound_fail;
      if (std::abs(r.mean_m) > 3 * r.se_m && r.se_m > 0) ++mean_fail;
      if (r.se_m == 0 && r.mean_m != 0) ++mean_fail;
    }
    o.summary = {{"bound_failures", bound_fail}, {"mean_failures", mean_fail}};
    o.passed = bound_fail == 0 && mean_fail == 0;
    o.message = "martingale: " + std::to_string(bound_fail) + " bound failures, " + std::to_string(mean_fail) +
                " mean failures";
    return o;
  };
}

Runner paths_kind(Fields& f) {
  const int d = static_cast<int>(f.integer("d", 2, 2, 3));
  const int ell = static_cast<int>(f.integer("ell", 2, 1, 3));
  const double radius = f.number("radius", 3, 0, 100);
  return [=] {
    Outcome o;
    const auto box = build_box(d, ell);
    if (box.site_count() > 64) throw CapacityExceeded("combinatorics", box.site_count(), 64);
    const auto r = sweep_paths(box, radius);
    o.table = CsvTable({"metric", "value"});
    const std::pair<const char*, double> rows[] = {
        {"quadruples", static_cast<double>(r.quadruples)},
        {"geometry_errors", static_cast<double>(r.geometry_errors)},
        {"configurations", static_cast<double>(r.configurations)},
        {"permutation_failures", static_cast<double>(r.permutation_failures)},
        {"transposition_failures", static_cast<double>(r.transposition_failures)},
        {"admissibility_failures", static_cast<double>(r.admissibility_failures)},
        {"event_configurations", static_cast<double>(r.event_configurations)},
        {"event_failures", static_cast<double>(r.event_failures)},
        {"max_length", static_cast<double>(r.max_length)},
        {"max_length_ratio", r.max_length_ratio},
        {"max_length_ratio_strict", r.max_length_ratio_strict}};
    for (const auto& [k, v] : rows) {
      o.table.add_row({k, fmt(v)});
      o.summary[k] = v;
    }
    o.passed = r.geometry_errors == 0 && r.permutation_failures == 0 && r.transposition_failures == 0 &&
               r.event_failures == 0;
    o.message = "paths: " + std::to_string(r.quadruples) + " quadruples, " + std::to_string(r.event_failures) +
                " failures on the hole-search event, " + std::to_string(r.admissibility_failures) +
                " occupancies with a blocked flip";
    return o;
  };
}

Runner checks_kind(Fields& f) {
  const bool quick = f.boolean("quick", true);
  const std::uint64_t seed = f.seed("seed", 1);
  return [=] {
    Outcome o;
    o.table = CsvTable({"check", "passed", "value", "detail"});
    std::size_t failed = 0;
    for (const auto& c : run_checks(quick, seed)) {
      o.table.add_row({c.name, c.passed ? "1" : "0", fmt(c.value), c.detail});
      if (!c.passed) ++failed;
    }
    o.summary = {{"checks", o.table.rows()}, {"failed", failed}};
    o.passed = failed == 0;
    o.message = "checks: " + std::to_string(o.table.rows() - failed) + "/" + std::to_string(o.table.rows()) + " passed";
    return o;
  };
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", line_at(text, e.byte > 0 ? e.byte - 1 : 0), "invalid JSON");
  }
}

}  // namespace

RunResult run_experiment(const std::string& text, const std::string& default_name, const RunOptions& opts) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("", 1, "the experiment must be a JSON object");
  const json* spec = &doc;
  std::string source = text;
  if (doc.contains("schema")) {
    if (doc["schema"] != sidecar_schema) throw ParseError("schema", 0, "unsupported sidecar schema");
    if (!doc.contains("experiment") || !doc["experiment"].is_object())
      throw ParseError("experiment", 0, "sidecar lacks the experiment object");
    if (!doc.contains("source") || !doc["source"].is_string())
      throw ParseError("source", 0, "sidecar lacks the source text");
    spec = &doc["experiment"];
    source = doc["source"].get<std::string>();
  }

  json effective = *spec;
  if (opts.workers) {
    if (*opts.workers < 1) throw ParseError("workers", 0, "must be at least 1");
    const std::set<std::string> parallel{"replica", "kernel", "carne", "martingale"};
    if (effective.contains("kind") && effective["kind"].is_string() && parallel.count(effective["kind"].get<std::string>()))
      effective["workers"] = *opts.workers;
  }
  Fields f(effective, text);
  const std::string kind =
      f.choice("kind", std::nullopt, {"gap", "evolve", "replica", "kernel", "carne", "martingale", "paths", "checks"});
  const std::string name = f.choice("name", default_name, {});
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) throw f.error("name", "must be a plain file stem");
  const std::string out = f.choice("out", ".", {});
  Runner run;
  if (kind == "gap") run = gap_kind(f);
  else if (kind == "evolve") run = evolve_kind(f);
  else if (kind == "replica") run = replica_kind(f);
  else if (kind == "kernel") run = kernel_kind(f);
  else if (kind == "carne") run = carne_kind(f);
  else if (kind == "martingale") run = martingale_kind(f);
  else if (kind == "paths") run = paths_kind(f);
  else run = checks_kind(f);
  f.finish();
  const json resolved = f.resolved();

  Outcome o = run();
  const std::filesystem::path dir = opts.out_dir ? *opts.out_dir : std::filesystem::path(out);
  RunResult r;
  r.kind = kind;
  r.csv = dir / (name + ".csv");
  r.sidecar = dir / (name + ".sidecar.json");
  const std::string csv = o.table.str();

  json side = json::object();
  side["schema"] = sidecar_schema;
  side["kind"] = kind;
  side["seed"] = resolved.contains("seed") ? resolved["seed"] : json(nullptr);
  side["workers"] = resolved.contains("workers") ? resolved["workers"] : json(1);
  side["config_hash"] = git_blob_hash(resolved.dump());
  side["experiment"] = resolved;
  side["source"] = source;
  side["outputs"] = json::array({{{"file", r.csv.filename().string()}, {"git_blob", git_blob_hash(csv)}}});
  side["summary"] = o.summary;
  side["passed"] = o.passed;

  write_atomic(r.csv, csv);
  write_atomic(r.sidecar, side.dump(2) + "\n");
  r.exit_code = o.passed ? 0 : 1;
  r.message = o.message;
  return r;
}

RunResult run_experiment_file(const std::filesystem::path& file, const RunOptions& opts) {
  std::string name = file.stem().string();
  return run_experiment(read_file(file), name, opts);
}

}  // namespace exclusim
