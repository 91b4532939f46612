#include "exclusim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/random/exponential_distribution.hpp>

#include "exclusim/error.hpp"

namespace exclusim {

namespace {

// Runs fn(worker, i) for i in [begin, end) with a static interleaved schedule.
// Callers store per-index results and reduce them in index order, so the
// outcome does not depend on the worker count.
template <class Fn>
void parallel_for(int workers, std::uint64_t begin, std::uint64_t end, Fn&& fn) {
  if (workers <= 1 || end - begin < 2) {
    for (std::uint64_t i = begin; i < end; ++i) fn(0, i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::uint64_t i = begin + static_cast<std::uint64_t>(w); i < end; i += static_cast<std::uint64_t>(workers))
          fn(w, i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void check_common(int d, int n, double rho, int workers) {
  if (d < 1) throw InvalidArgument("montecarlo", "d must be >= 1");
  if (n < 3) throw InvalidArgument("montecarlo", "torus side must be >= 3");
  if (!(rho > 0 && rho < 1)) throw InvalidArgument("montecarlo", "rho must lie in (0,1)");
  if (workers < 1) throw InvalidArgument("montecarlo", "workers must be >= 1");
}

std::uint32_t as_u32(std::uint64_t v, const char* what) {
  if (v > 0xFFFFFFFFull) throw InvalidArgument("montecarlo", std::string(what) + " exceeds 2^32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void check_wraparound(int n, std::span<const double> times) {
  double tmax = 0;
  for (double t : times) {
    if (!(t >= 0)) throw InvalidArgument("montecarlo", "times must be >= 0");
    tmax = std::max(tmax, t);
  }
  if (static_cast<double>(n) < 4.0 * std::sqrt(tmax))
    throw InvalidArgument("montecarlo", "torus side " + std::to_string(n) + " violates n >= 4 sqrt(t) at t = " +
                                            std::to_string(tmax));
}

TrajectoryEngine::TrajectoryEngine(const LatticeBox& torus) : lattice_(torus), degree_(2 * torus.dim()) {
  if (!torus.is_torus()) throw InvalidArgument("montecarlo", "the trajectory engine runs on a torus");
  const std::size_t m = torus.edge_count();
  eu_.resize(m);
  ev_.resize(m);
  axis_.resize(m);
  for (EdgeId e = 0; e < m; ++e) {
    eu_[e] = torus.edge(e).u;
    ev_[e] = torus.edge(e).v;
    axis_[e] = torus.edge(e).axis;
  }
  inc_.resize(torus.site_count() * static_cast<std::size_t>(degree_));
  for (Site s = 0; s < torus.site_count(); ++s) {
    auto in = torus.incident(s);
    std::copy(in.begin(), in.end(), inc_.begin() + static_cast<std::ptrdiff_t>(s) * degree_);
  }
  pos_.assign(m, -1);
  active_.assign(m, 0);
  disp_.assign(static_cast<std::size_t>(torus.dim()), 0);
#ifndef NDEBUG
  rescan_interval_ = 1000000;
#endif
}

void TrajectoryEngine::set_active(EdgeId e, bool on) {
  if (on != (pos_[e] >= 0)) toggle(e);
}

inline void TrajectoryEngine::toggle(EdgeId e) noexcept {
  const std::int32_t p = pos_[e];
  if (p < 0) {
    pos_[e] = static_cast<std::int32_t>(n_active_);
    active_[n_active_++] = e;
  } else {
    const EdgeId last = active_[--n_active_];
    active_[static_cast<std::size_t>(p)] = last;
    pos_[last] = p;
    pos_[e] = -1;
  }
}

void TrajectoryEngine::reset(const TaggedConfig& cfg, Xoshiro256 rng) {
  if (cfg.eta.size() != lattice_.site_count()) throw InvalidArgument("montecarlo", "configuration size mismatch");
  if (!cfg.eta[cfg.X]) throw InvalidArgument("montecarlo", "tagged site must be occupied");
  cfg_ = cfg;
  rng_ = rng;
  time_ = 0;
  events_ = 0;
  std::fill(disp_.begin(), disp_.end(), 0);
  n_active_ = 0;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (EdgeId e = 0; e < eu_.size(); ++e)
    if (cfg_.eta[eu_[e]] != cfg_.eta[ev_[e]]) set_active(e, true);
  track_ = false;
  integral_ = 0;
}

void TrajectoryEngine::enable_martingale(std::vector<double> x0) {
  if (x0.empty()) x0.assign(disp_.size(), 0.0);
  if (x0.size() != disp_.size()) throw InvalidArgument("montecarlo", "x0 has the wrong dimension");
  x0_ = std::move(x0);
  track_ = true;
  integral_ = 0;
  xi0_ = xi(disp_);
  lxi_ = generator_of_xi();
}

double TrajectoryEngine::xi(const std::vector<int>& z) const {
  double s = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double v = z[i] - x0_[i];
    s += v * v;
  }
  return std::sqrt(s);
}

// L xi(x, eta) = sum over neighbours y of x with eta(y) = 0 of xi(y) - xi(x).
double TrajectoryEngine::generator_of_xi() const {
  double sq = 0;
  for (std::size_t i = 0; i < disp_.size(); ++i) {
    const double v = disp_[i] - x0_[i];
    sq += v * v;
  }
  const double here = std::sqrt(sq);
  double s = 0;
  const Site x = cfg_.X;
  for (int k = 0; k < degree_; ++k) {
    const EdgeId e = inc_[static_cast<std::size_t>(x) * static_cast<std::size_t>(degree_) + static_cast<std::size_t>(k)];
    const bool forward = eu_[e] == x;
    const Site y = forward ? ev_[e] : eu_[e];
    if (cfg_.eta[y]) continue;
    const auto a = static_cast<std::size_t>(axis_[e]);
    const double old = disp_[a] - x0_[a];
    const double moved = old + (forward ? 1 : -1);
    s += std::sqrt(std::max(0.0, sq - old * old + moved * moved)) - here;
  }
  return s;
}

double TrajectoryEngine::martingale() const noexcept { return track_ ? xi(disp_) - xi0_ - integral_ : 0.0; }

bool TrajectoryEngine::active_set_consistent() const {
  std::size_t count = 0;
  for (EdgeId e = 0; e < eu_.size(); ++e) {
    const bool on = cfg_.eta[eu_[e]] != cfg_.eta[ev_[e]];
    if (on != (pos_[e] >= 0)) return false;
    if (on) {
      ++count;
      if (active_[static_cast<std::size_t>(pos_[e])] != e) return false;
    }
  }
  return count == n_active_;
}

void TrajectoryEngine::run_until(double t_end) {
  boost::random::exponential_distribution<double> unit_exp(1.0);
  while (time_ < t_end) {
    const std::size_t a = n_active_;
    if (a == 0) {
      if (track_) integral_ += lxi_ * (t_end - time_);
      time_ = t_end;
      return;
    }
    const double dt = unit_exp(rng_) / static_cast<double>(a);
    if (time_ + dt >= t_end) {
      // Memoryless clocks: the overshoot is discarded without bias.
      if (track_) integral_ += lxi_ * (t_end - time_);
      time_ = t_end;
      return;
    }
    if (track_) integral_ += lxi_ * dt;
    time_ += dt;
    const EdgeId e = active_[rng_.below(a)];
    const Site u = eu_[e], v = ev_[e];
    cfg_.eta.swap_bits(u, v);
    if (cfg_.X == u) {
      cfg_.X = v;
      ++disp_[static_cast<std::size_t>(axis_[e])];
    } else if (cfg_.X == v) {
      cfg_.X = u;
      --disp_[static_cast<std::size_t>(axis_[e])];
    }
    // Both endpoints changed value, so every other edge touching them toggles.
    for (Site s : {u, v}) {
      const EdgeId* in = inc_.data() + static_cast<std::size_t>(s) * static_cast<std::size_t>(degree_);
      for (int k = 0; k < degree_; ++k)
        if (in[k] != e) toggle(in[k]);
    }
    ++events_;
    if (track_) lxi_ = generator_of_xi();
    if (rescan_interval_ && events_ % rescan_interval_ == 0 && !active_set_consistent())
      throw Error("montecarlo", "active edge set diverged from a full rescan");
  }
}

TaggedConfig simulate(TrajectoryEngine& engine, double t_end) {
  if (t_end < engine.time()) throw InvalidArgument("montecarlo", "t_end is before the current time");
  engine.run_until(t_end);
  return engine.config();
}

std::vector<CoincidenceRow> estimate_coincidence(const ReplicaSpec& spec) {
  check_common(spec.d, spec.n, spec.rho, spec.workers);
  if (spec.p < 2) throw InvalidArgument("montecarlo", "p must be >= 2");
  if (spec.budget == 0 || spec.batch == 0) throw InvalidArgument("montecarlo", "budgets must be positive");
  if (spec.times.empty()) throw InvalidArgument("montecarlo", "empty time grid");
  if (spec.allow_wraparound) {
    for (double t : spec.times)
      if (!(t >= 0)) throw InvalidArgument("montecarlo", "times must be >= 0");
  } else {
    check_wraparound(spec.n, spec.times);
  }
  const LatticeBox torus = build_torus(spec.d, spec.n);
  std::vector<TrajectoryEngine> engines;
  for (int w = 0; w < spec.workers; ++w) engines.emplace_back(torus);

  std::vector<CoincidenceRow> rows;
  for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
    const double t = spec.times[ti];
    const auto t_index = as_u32(ti, "time index");
    CoincidenceRow row;
    row.t = t;
    std::vector<std::uint8_t> hit;
    std::vector<std::uint64_t> ev;
    // min_coincidences = 0 spends the whole budget.
    while (row.samples < spec.budget && (spec.min_coincidences == 0 || row.coincidences < spec.min_coincidences)) {
      const std::uint64_t begin = row.samples;
      const std::uint64_t end = std::min(spec.budget, begin + spec.batch);
      as_u32(end, "sample index");
      hit.assign(end - begin, 0);
      ev.assign(end - begin, 0);
      parallel_for(spec.workers, begin, end, [&](int w, std::uint64_t s) {
        auto& eng = engines[static_cast<std::size_t>(w)];
        const auto sample = static_cast<std::uint32_t>(s);
        auto init_rng = make_stream(spec.seed, {stream_tag::initial, t_index, sample, 0});
        const TaggedConfig start = sample_initial(torus, spec.rho, init_rng);
        Site first = 0;
        bool all = true;
        std::uint64_t events = 0;
        for (int r = 0; r < spec.p; ++r) {
          eng.reset(start, make_stream(spec.seed, {stream_tag::replica, t_index, sample, static_cast<std::uint32_t>(r)}));
          eng.run_until(t);
          events += eng.events();
          if (r == 0)
            first = eng.tagged();
          else if (eng.tagged() != first)
            all = false;
        }
        hit[s - begin] = all ? 1 : 0;
        ev[s - begin] = events;
      });
      for (std::uint64_t i = 0; i < end - begin; ++i) {
        row.coincidences += hit[i];
        row.events += ev[i];
      }
      row.samples = end;
    }
    const double ns = static_cast<double>(row.samples);
    row.estimate = static_cast<double>(row.coincidences) / ns;
    row.std_error = std::sqrt(row.estimate * (1 - row.estimate) / ns);
    rows.push_back(row);
  }
  return rows;
}

double KernelHistogram::probability(const std::vector<int>& x) const {
  auto it = counts.find(x);
  return it == counts.end() || samples == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(samples);
}

KernelHistogram estimate_kernel(const KernelSpec& spec) {
  check_common(spec.d, spec.n, spec.rho, spec.workers);
  if (spec.samples == 0 || spec.batch == 0) throw InvalidArgument("montecarlo", "budgets must be positive");
  const double times[] = {spec.t};
  check_wraparound(spec.n, times);
  as_u32(spec.samples, "sample count");
  const LatticeBox torus = build_torus(spec.d, spec.n);
  std::vector<TrajectoryEngine> engines;
  for (int w = 0; w < spec.workers; ++w) engines.emplace_back(torus);
  KernelHistogram h;
  h.d = spec.d;
  h.t = spec.t;
  std::vector<std::vector<int>> disp;
  std::vector<std::uint64_t> ev;
  for (std::uint64_t begin = 0; begin < spec.samples; begin += spec.batch) {
    const std::uint64_t end = std::min(spec.samples, begin + spec.batch);
    disp.assign(end - begin, {});
    ev.assign(end - begin, 0);
    parallel_for(spec.workers, begin, end, [&](int w, std::uint64_t s) {
      auto& eng = engines[static_cast<std::size_t>(w)];
      const auto sample = static_cast<std::uint32_t>(s);
      auto init_rng = make_stream(spec.seed, {stream_tag::initial, 0, sample, 0});
      eng.reset(sample_initial(torus, spec.rho, init_rng), make_stream(spec.seed, {stream_tag::kernel, 0, sample, 0}));
      eng.run_until(spec.t);
      disp[s - begin] = eng.displacement();
      ev[s - begin] = eng.events();
    });
    for (std::uint64_t i = 0; i < end - begin; ++i) {
      ++h.counts[disp[i]];
      h.events += ev[i];
    }
    h.samples = end;
  }
  return h;
}

CarneAnalysis analyse_kernel(const KernelHistogram& h, std::uint64_t min_hits) {
  CarneAnalysis a;
  a.min_hits = min_hits;
  std::vector<double> xs, ys;
  auto norm = [](const std::vector<int>& x) {
    double s = 0;
    for (int v : x) s += static_cast<double>(v) * v;
    return std::sqrt(s);
  };
  for (const auto& [x, c] : h.counts) {
    if (c < min_hits) continue;
    const double r = norm(x);
    if (r > h.t) continue;
    xs.push_back(r * r / h.t);
    ys.push_back(-std::log(static_cast<double>(c) / static_cast<double>(h.samples)));
  }
  if (xs.size() >= 2) a.gaussian = linear_fit(xs, ys);
  // Each unordered pair {x, -x} once; x = 0 has no partner.
  auto visit_pair = [&a](std::uint64_t cx, std::uint64_t cm) {
    const double n = static_cast<double>(cx + cm);
    const double diff = std::abs(static_cast<double>(cx) - static_cast<double>(cm));
    ++a.symmetry_pairs;
    if (diff > 3.0 * std::sqrt(n)) ++a.symmetry_violations;
    a.symmetry_chi2 += diff * diff / n;
    // Under symmetry cx ~ Binomial(n, 1/2) given n; the chance that the 3-sigma
    // rule fires is a two-sided binomial tail.
    const boost::math::binomial_distribution<double> b(n, 0.5);
    const double lo = std::ceil((n - 3.0 * std::sqrt(n)) / 2.0) - 1.0;
    a.symmetry_expected_violations += lo >= 0 ? 2.0 * boost::math::cdf(b, lo) : 0.0;
  };
  for (const auto& [x, c] : h.counts) {
    std::vector<int> mx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mx[i] = -x[i];
    auto it = h.counts.find(mx);
    if (it == h.counts.end())
      visit_pair(c, 0);
    else if (x < mx)
      visit_pair(c, it->second);
  }
  if (a.symmetry_pairs > 0) {
    const boost::math::chi_squared_distribution<double> chi(static_cast<double>(a.symmetry_pairs));
    a.symmetry_p_value = boost::math::cdf(boost::math::complement(chi, a.symmetry_chi2));
  }
  if (a.gaussian.slope > 0) {
    a.fitted_c = 1.0 / a.gaussian.slope;
    for (const auto& [x, c] : h.counts) {
      if (c < min_hits) continue;
      const double r = norm(x);
      if (r <= h.t) continue;
      ++a.far_bins;
      if (-std::log(static_cast<double>(c) / static_cast<double>(h.samples)) < r / a.fitted_c) ++a.far_violations;
    }
  }
  return a;
}

std::vector<MartingaleRow> martingale_moments(const MartingaleSpec& spec) {
  check_common(spec.d, spec.n, spec.rho, spec.workers);
  if (spec.samples == 0 || spec.batch == 0) throw InvalidArgument("montecarlo", "budgets must be positive");
  if (spec.times.empty()) throw InvalidArgument("montecarlo", "empty time grid");
  if (!std::is_sorted(spec.times.begin(), spec.times.end()))
    throw InvalidArgument("montecarlo", "martingale times must be nondecreasing");
  for (double l : spec.lambdas)
    if (!(l >= 0)) throw InvalidArgument("montecarlo", "lambda must be >= 0");
  check_wraparound(spec.n, spec.times);
  as_u32(spec.samples, "sample count");
  const LatticeBox torus = build_torus(spec.d, spec.n);
  std::vector<TrajectoryEngine> engines;
  for (int w = 0; w < spec.workers; ++w) engines.emplace_back(torus);
  const std::size_t nt = spec.times.size(), nl = spec.lambdas.size();
  std::vector<Accumulator> acc_exp(nt * nl), acc_m(nt);
  std::vector<std::uint64_t> events_at(nt, 0);
  std::vector<double> m_values;
  std::vector<std::uint64_t> ev;
  for (std::uint64_t begin = 0; begin < spec.samples; begin += spec.batch) {
    const std::uint64_t end = std::min(spec.samples, begin + spec.batch);
    m_values.assign((end - begin) * nt, 0.0);
    ev.assign((end - begin) * nt, 0);
    parallel_for(spec.workers, begin, end, [&](int w, std::uint64_t s) {
      auto& eng = engines[static_cast<std::size_t>(w)];
      const auto sample = static_cast<std::uint32_t>(s);
      auto init_rng = make_stream(spec.seed, {stream_tag::initial, 0, sample, 0});
      eng.reset(sample_initial(torus, spec.rho, init_rng),
                make_stream(spec.seed, {stream_tag::martingale, 0, sample, 0}));
      eng.enable_martingale(spec.x0);
      for (std::size_t k = 0; k < nt; ++k) {
        eng.run_until(spec.times[k]);
        m_values[(s - begin) * nt + k] = eng.martingale();
        ev[(s - begin) * nt + k] = eng.events();
      }
    });
    for (std::uint64_t i = 0; i < end - begin; ++i)
      for (std::size_t k = 0; k < nt; ++k) {
        const double m = m_values[i * nt + k];
        acc_m[k].add(m);
        events_at[k] += ev[i * nt + k];
        for (std::size_t l = 0; l < nl; ++l) acc_exp[k * nl + l].add(std::exp(spec.lambdas[l] * m));
      }
  }
  std::vector<MartingaleRow> rows;
  for (std::size_t k = 0; k < nt; ++k)
    for (std::size_t l = 0; l < nl; ++l) {
      MartingaleRow r;
      r.t = spec.times[k];
      r.lambda = spec.lambdas[l];
      r.mean_exp = acc_exp[k * nl + l].mean();
      r.se_exp = acc_exp[k * nl + l].std_error();
      const double e = std::exp(r.lambda) - 1 - r.lambda;
      r.bound = std::exp(2.0 * spec.d * e * r.t);
      r.mean_m = acc_m[k].mean();
      r.se_m = acc_m[k].std_error();
      r.samples = acc_m[k].count();
      r.events = events_at[k];
      rows.push_back(r);
    }
  return rows;
}

}  // namespace exclusim
