#pragma once

#include "tgw/common.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace tgw {

struct CouplingEntry {
  Index row = 0;
  Index col = 0;
  double mass = 0.0;
};

using SparsePlan = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Bi-marginal transport plan stored as a row-major sparse matrix of positive masses.
// Entries within a row are sorted by column.
class Coupling {
 public:
  Coupling() = default;
  explicit Coupling(SparsePlan plan);

  // Duplicate (row, col) entries are summed; nonpositive masses are dropped.
  static Coupling from_entries(Index rows, Index cols, const std::vector<CouplingEntry>& entries);
  // Entries <= `drop_below` are omitted.
  static Coupling from_dense(const Matrix& dense, double drop_below = 0.0);
  static Coupling product(const Vector& row_weights, const Vector& col_weights);
  // (id, id)_# weights.
  static Coupling identity(const Vector& weights);

  Index rows() const { return plan_.rows(); }
  Index cols() const { return plan_.cols(); }
  Index nnz() const { return plan_.nonZeros(); }

  const SparsePlan& sparse() const { return plan_; }
  Matrix dense() const { return Matrix(plan_); }
  std::vector<CouplingEntry> entries() const;

  Vector row_marginal() const;
  Vector col_marginal() const;
  double total_mass() const { return plan_.sum(); }
  Coupling transpose() const;

  // <cost, plan>
  double dot(const Matrix& cost) const;

  template <typename F>
  void for_each(F&& f) const {
    for (Index r = 0; r < plan_.outerSize(); ++r) {
      for (SparsePlan::InnerIterator it(plan_, r); it; ++it) f(r, it.col(), it.value());
    }
  }

 private:
  SparsePlan plan_;
};

// Largest absolute deviation of the plan marginals from (xi, upsilon).
double marginal_violation(const Coupling& plan, const Vector& xi, const Vector& upsilon);

// Throws PreconditionError when marginals, mass or sign are off by more than `tol`.
void check_coupling(const Coupling& plan, const Vector& xi, const Vector& upsilon,
                    double tol = 1e-10);

}  // namespace tgw
