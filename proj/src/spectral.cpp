#include "exclusim/spectral.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "exclusim/error.hpp"
#include "exclusim/rng.hpp"

namespace exclusim {

namespace {

GapResult dense_gap(const SparseGenerator& gen) {
  const Eigen::MatrixXd A = -gen.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw Error("exact", "dense eigensolver failed");
  GapResult r;
  r.solver = "dense";
  r.states = gen.rows();
  r.lambda1 = es.eigenvalues()(1);
  const Eigen::VectorXd v = es.eigenvectors().col(1);
  r.residual = (A * v - r.lambda1 * v).norm();
  return r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Removes the component along the constant vector (the kernel of L on a
// connected uniform sector).
void deflate(std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

struct Ritz {
  double theta;
  double estimate;
  Eigen::VectorXd s;
};

Ritz smallest_ritz(const std::vector<double>& alpha, const std::vector<double>& beta, std::size_t m) {
  Eigen::VectorXd diag(static_cast<Eigen::Index>(m)), sub(static_cast<Eigen::Index>(m > 1 ? m - 1 : 1));
  for (std::size_t i = 0; i < m; ++i) diag(static_cast<Eigen::Index>(i)) = alpha[i];
  for (std::size_t i = 0; i + 1 < m; ++i) sub(static_cast<Eigen::Index>(i)) = beta[i + 1];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  if (m == 1) {
    return {alpha[0], std::abs(beta[1]), Eigen::VectorXd::Ones(1)};
  }
  es.computeFromTridiagonal(diag, sub.head(static_cast<Eigen::Index>(m - 1)));
  Ritz r{es.eigenvalues()(0), 0, es.eigenvectors().col(0)};
  r.estimate = std::abs(beta[m] * r.s(static_cast<Eigen::Index>(m - 1)));
  return r;
}

// Lanczos on A = -L restricted to the complement of the constants, without
// reorthogonalization. The run is deterministic, so the second pass
// regenerates the same basis to assemble the Ritz vector.
GapResult lanczos_gap(const SparseGenerator& gen, const GapOptions& opts) {
  const std::uint64_t n = gen.rows();
  const std::uint64_t cap =
      opts.max_iterations ? opts.max_iterations
                          : static_cast<std::uint64_t>(10.0 * std::sqrt(static_cast<double>(n)));

  auto start = [&] {
    std::vector<double> q(n);
    auto rng = make_stream(opts.seed, {stream_tag::lanczos, 0, 0, 0});
    for (auto& x : q) x = rng.uniform() - 0.5;
    deflate(q);
    const double nq = std::sqrt(dot(q, q));
    for (auto& x : q) x /= nq;
    return q;
  };

  // One Lanczos step: given q_prev, q, beta_j, produces alpha_j, beta_{j+1}, and
  // overwrites q_prev with q_{j+1}.
  std::vector<double> w(n);
  auto step = [&](std::vector<double>& q_prev, std::vector<double>& q, double beta_j, double& alpha,
                  double& beta_next) {
    gen.apply(q, w);
    for (std::uint64_t i = 0; i < n; ++i) w[i] = -w[i] - beta_j * q_prev[i];
    alpha = dot(w, q);
    for (std::uint64_t i = 0; i < n; ++i) w[i] -= alpha * q[i];
    deflate(w);
    beta_next = std::sqrt(dot(w, w));
    for (std::uint64_t i = 0; i < n; ++i) q_prev[i] = beta_next > 0 ? w[i] / beta_next : 0.0;
    std::swap(q_prev, q);
  };

  std::vector<double> alpha, beta{0.0};
  std::vector<double> q = start(), q_prev(n, 0.0);
  Ritz best{0, 0, {}};
  bool converged = false;
  std::uint64_t m = 0;
  while (m < cap) {
    double a = 0, b = 0;
    step(q_prev, q, beta.back(), a, b);
    alpha.push_back(a);
    beta.push_back(b);
    ++m;
    const bool check = m < 50 || m % 10 == 0 || b == 0.0 || m == cap;
    if (!check) continue;
    best = smallest_ritz(alpha, beta, m);
    if (best.estimate < opts.tol || b == 0.0) {
      converged = true;
      break;
    }
  }
  if (m == cap && !converged) best = smallest_ritz(alpha, beta, m);

  GapResult r;
  r.solver = "lanczos";
  r.states = n;
  r.iterations = m;
  r.lambda1 = best.theta;
  r.converged = converged;
  r.residual = best.estimate;
  if (opts.true_residual) {
    std::vector<double> y(n, 0.0);
    q = start();
    std::fill(q_prev.begin(), q_prev.end(), 0.0);
    double bj = 0.0;
    for (std::uint64_t j = 0; j < m; ++j) {
      const double sj = best.s(static_cast<Eigen::Index>(j));
      for (std::uint64_t i = 0; i < n; ++i) y[i] += sj * q[i];
      double a = 0, b = 0;
      step(q_prev, q, bj, a, b);
      bj = b;
    }
    const double ny = std::sqrt(dot(y, y));
    for (auto& v : y) v /= ny;
    gen.apply(y, w);
    double res = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const double d = -w[i] - r.lambda1 * y[i];
      res += d * d;
    }
    r.residual = std::sqrt(res);
  }
  return r;
}

}  // namespace

GapResult spectral_gap(const SparseGenerator& gen, const GapOptions& opts) {
  if (gen.rows() <= 1) throw Degenerate("exact", "spectral gap of a space with a single state is undefined");
  const std::uint64_t comps = gen.components();
  if (comps > 1) throw Disconnected("exact", comps);
  if (gen.space().product())
    throw InvalidArgument("exact", "product spaces mix particle numbers; use a sector");
  if (gen.rows() < opts.dense_limit) return dense_gap(gen);
  return lanczos_gap(gen, opts);
}

}  // namespace exclusim
