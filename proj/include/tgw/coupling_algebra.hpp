#pragma once

#include "tgw/coupling.hpp"

#include <string>
#include <vector>

namespace tgw {

// Sparse multi-marginal plan: support tuples stored row-wise (support x N)
// with positive masses. Tuples are unique and sorted lexicographically.
class MultiCoupling {
 public:
  MultiCoupling() = default;

  // Duplicate tuples are merged by summing; nonpositive masses are dropped.
  static MultiCoupling from_tuples(std::vector<Index> sizes, const std::vector<Index>& tuples,
                                   const std::vector<double>& masses);
  // (id, ..., id)_# weights over N copies of one space.
  static MultiCoupling diagonal(const Vector& weights, Index arity);
  // N = 2 plan from a coupling.
  static MultiCoupling from_coupling(const Coupling& plan);

  Index arity() const { return static_cast<Index>(sizes_.size()); }
  Index support_size() const { return static_cast<Index>(masses_.size()); }
  const std::vector<Index>& sizes() const { return sizes_; }
  const std::vector<Index>& tuples() const { return tuples_; }
  const std::vector<double>& masses() const { return masses_; }

  Index at(Index s, Index axis) const {
    return tuples_[static_cast<std::size_t>(s * arity() + axis)];
  }
  double mass(Index s) const { return masses_[static_cast<std::size_t>(s)]; }
  Vector mass_vector() const;

  // Pushforward onto one axis.
  Vector marginal(Index axis) const;
  double total_mass() const;

  bool operator==(const MultiCoupling& other) const = default;

 private:
  std::vector<Index> sizes_;
  std::vector<Index> tuples_;
  std::vector<double> masses_;
};

// Largest deviation of the axis marginals from the given weights.
double marginal_violation(const MultiCoupling& plan, const std::vector<Vector>& weights);

// Deterministic north-west corner plan.
Coupling nw_corner_coupling(const Vector& xi, const Vector& upsilon);

// Gluing of plans pi_i over Y x X_i along the shared reference Y, built by a
// simultaneous north-west corner sweep. Axis 0 of the result is Y.
MultiCoupling glue_nw(const std::vector<Coupling>& couplings);

// Drops the reference axis of a gluing and merges equal tuples.
MultiCoupling melt(const MultiCoupling& gluing);

struct MaxRuleResult {
  std::vector<std::vector<Index>> maps;  // maps[i][x] = T_i(x), a point of the reference
  MultiCoupling melting;                 // tuple for y is (T_1^-1(y), ..., T_N^-1(y))
  std::vector<std::string> warnings;
};

// Greedy bijective rounding of plans over Y x X_i; uniform weights and equal sizes.
// Ties go to the lowest reference index.
MaxRuleResult max_rule_without_replacement(const std::vector<Coupling>& couplings,
                                           const Vector& reference_weights);

// Projection onto axes (i, j).
Coupling bimarginal(const MultiCoupling& plan, Index i, Index j);

}  // namespace tgw
