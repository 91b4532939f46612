#include "exclusim/generator.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "exclusim/error.hpp"

namespace exclusim {

State flip_state(const State& s, const Edge& e) {
  State t = s;
  t.eta ^= (std::uint64_t{1} << e.u) | (std::uint64_t{1} << e.v);
  if (s.x == e.u)
    t.x = e.v;
  else if (s.x == e.v)
    t.x = e.u;
  return t;
}

std::uint64_t flip_target(const StateSpace& space, const State& s, const Edge& e) {
  const State t = flip_state(s, e);
  switch (space.mode()) {
    case Mode::tagged_sector:
      return t.x * space.per_site() + colex_rank(compress_bit(t.eta, t.x));
    case Mode::kawasaki_sector:
      return colex_rank(t.eta);
    case Mode::tagged_product:
      return t.x * space.per_site() + compress_bit(t.eta, t.x);
    case Mode::kawasaki_product:
      return t.eta;
  }
  return 0;
}

namespace {

inline bool discordant(std::uint64_t eta, const Edge& e) { return ((eta >> e.u) ^ (eta >> e.v)) & 1u; }

}  // namespace

SparseGenerator assemble_generator(const StateSpace& space) {
  if (space.sites() > 64) throw InvalidArgument("exact", "exact spaces support at most 64 sites");
  if (space.size() > (std::uint64_t{1} << 32)) throw CapacityExceeded("exact", space.size(), std::uint64_t{1} << 32);
  SparseGenerator g;
  g.space_ = space;
  const auto& edges = space.lattice().edges();
  const std::uint64_t n = space.size();
  g.row_ptr_.assign(n + 1, 0);
  for_each_state(space, [&](std::uint64_t i, const State& s) {
    std::uint64_t deg = 0;
    for (const Edge& e : edges) deg += discordant(s.eta, e);
    g.row_ptr_[i + 1] = deg;
  });
  std::uint64_t max_deg = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    max_deg = std::max(max_deg, g.row_ptr_[i + 1]);
    g.row_ptr_[i + 1] += g.row_ptr_[i];
  }
  g.max_degree_ = static_cast<double>(max_deg);
  g.cols_.resize(g.row_ptr_[n]);
  for_each_state(space, [&](std::uint64_t i, const State& s) {
    std::uint64_t pos = g.row_ptr_[i];
    for (const Edge& e : edges)
      if (discordant(s.eta, e)) g.cols_[pos++] = static_cast<std::uint32_t>(flip_target(space, s, e));
  });
  return g;
}

void SparseGenerator::apply(std::span<const double> in, std::span<double> out) const {
  const std::uint64_t n = rows();
  if (in.size() != n || out.size() != n) throw InvalidArgument("exact", "vector length does not match the space");
  const std::uint32_t* c = cols_.data();
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t b = row_ptr_[i], e = row_ptr_[i + 1];
    double acc = 0;
    for (std::uint64_t k = b; k < e; ++k) acc += in[c[k]];
    out[i] = acc - static_cast<double>(e - b) * in[i];
  }
}

std::uint64_t SparseGenerator::components() const {
  const std::uint64_t n = rows();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  std::uint64_t count = n;
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint32_t j : neighbors(i)) {
      auto a = find(static_cast<std::uint32_t>(i)), b = find(j);
      if (a != b) {
        parent[std::max(a, b)] = std::min(a, b);
        --count;
      }
    }
  return count;
}

Eigen::MatrixXd SparseGenerator::dense() const {
  const auto n = static_cast<Eigen::Index>(rows());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::uint32_t j : neighbors(static_cast<std::uint64_t>(i))) m(i, j) += 1.0;
    m(i, i) -= degree(static_cast<std::uint64_t>(i));
  }
  return m;
}

void SparseGenerator::write_matrix_market(std::ostream& os) const {
  const std::uint64_t n = rows();
  std::uint64_t entries = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    ++entries;
    for (std::uint32_t j : neighbors(i))
      if (j < i) ++entries;
  }
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << "% flip generator, mode " << to_string(space_.mode()) << ", " << space_.sites() << " sites\n";
  os << n << ' ' << n << ' ' << entries << '\n';
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> lower;
    for (std::uint32_t j : neighbors(i))
      if (j < i) lower.push_back(j);
    std::sort(lower.begin(), lower.end());
    for (std::uint32_t j : lower) os << i + 1 << ' ' << j + 1 << " 1\n";
    os << i + 1 << ' ' << i + 1 << ' ' << -static_cast<double>(degree(i)) << '\n';
  }
}

}  // namespace exclusim
