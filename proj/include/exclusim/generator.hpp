#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "exclusim/state_space.hpp"

namespace exclusim {

/// The flip generator L f = sum_e a_e (f^e - f) on a StateSpace, stored as a
/// value-free CSR pattern: every off-diagonal entry is 1 and the diagonal is
/// minus the row length.
class SparseGenerator {
 public:
  const StateSpace& space() const noexcept { return space_; }
  std::uint64_t rows() const noexcept { return row_ptr_.size() - 1; }
  std::uint64_t nnz() const noexcept { return cols_.size(); }
  std::uint32_t degree(std::uint64_t i) const {
    return static_cast<std::uint32_t>(row_ptr_[i + 1] - row_ptr_[i]);
  }
  std::span<const std::uint32_t> neighbors(std::uint64_t i) const {
    return {cols_.data() + row_ptr_[i], cols_.data() + row_ptr_[i + 1]};
  }
  //! Uniformization constant: the largest exit rate.
  double uniformization_rate() const noexcept { return max_degree_; }

  //! out = L in.
  void apply(std::span<const double> in, std::span<double> out) const;
  //! Number of communicating classes.
  std::uint64_t components() const;
  Eigen::MatrixXd dense() const;
  //! Coordinate-format export (lower triangle, symmetric, 1-based).
  void write_matrix_market(std::ostream& os) const;

 private:
  friend SparseGenerator assemble_generator(const StateSpace& space);
  StateSpace space_;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> cols_;
  double max_degree_ = 0;
};

SparseGenerator assemble_generator(const StateSpace& space);

//! Index of the state reached from `s` by flipping edge `e` (assumes a_e = 1).
std::uint64_t flip_target(const StateSpace& space, const State& s, const Edge& e);
State flip_state(const State& s, const Edge& e);

}  // namespace exclusim
