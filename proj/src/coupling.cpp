#include "tgw/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace tgw {

Coupling::Coupling(SparsePlan plan) : plan_(std::move(plan)) {
  plan_.prune(0.0);
  plan_.makeCompressed();
}

Coupling Coupling::from_entries(Index rows, Index cols, const std::vector<CouplingEntry>& entries) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) {
    require(e.row >= 0 && e.row < rows && e.col >= 0 && e.col < cols,
            "coupling entry index out of range");
    require(std::isfinite(e.mass), "non-finite coupling mass");
    if (e.mass > 0.0) triplets.emplace_back(e.row, e.col, e.mass);
  }
  SparsePlan plan(rows, cols);
  plan.setFromTriplets(triplets.begin(), triplets.end());
  return Coupling(std::move(plan));
}

Coupling Coupling::from_dense(const Matrix& dense, double drop_below) {
  require(dense.allFinite(), "non-finite coupling mass");
  SparsePlan plan(dense.rows(), dense.cols());
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = 0; j < dense.cols(); ++j) {
      const double m = dense(i, j);
      if (m > drop_below && m > 0.0) triplets.emplace_back(i, j, m);
    }
  }
  plan.setFromTriplets(triplets.begin(), triplets.end());
  return Coupling(std::move(plan));
}

Coupling Coupling::product(const Vector& row_weights, const Vector& col_weights) {
  return from_dense(row_weights * col_weights.transpose());
}

Coupling Coupling::identity(const Vector& weights) {
  std::vector<CouplingEntry> entries;
  for (Index i = 0; i < weights.size(); ++i) entries.push_back({i, i, weights(i)});
  return from_entries(weights.size(), weights.size(), entries);
}

std::vector<CouplingEntry> Coupling::entries() const {
  std::vector<CouplingEntry> out;
  out.reserve(static_cast<std::size_t>(nnz()));
  for_each([&](Index r, Index c, double m) { out.push_back({r, c, m}); });
  return out;
}

Vector Coupling::row_marginal() const {
  Vector out = Vector::Zero(rows());
  for_each([&](Index r, Index, double m) { out(r) += m; });
  return out;
}

Vector Coupling::col_marginal() const {
  Vector out = Vector::Zero(cols());
  for_each([&](Index, Index c, double m) { out(c) += m; });
  return out;
}

Coupling Coupling::transpose() const {
  SparsePlan t = plan_.transpose();
  return Coupling(std::move(t));
}

double Coupling::dot(const Matrix& cost) const {
  require(cost.rows() == rows() && cost.cols() == cols(), "cost shape does not match plan");
  double total = 0.0;
  for_each([&](Index r, Index c, double m) { total += m * cost(r, c); });
  return total;
}

double marginal_violation(const Coupling& plan, const Vector& xi, const Vector& upsilon) {
  require(plan.rows() == xi.size() && plan.cols() == upsilon.size(),
          "plan shape does not match marginals");
  const double rows = (plan.row_marginal() - xi).cwiseAbs().maxCoeff();
  const double cols = (plan.col_marginal() - upsilon).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

void check_coupling(const Coupling& plan, const Vector& xi, const Vector& upsilon, double tol) {
  const double violation = marginal_violation(plan, xi, upsilon);
  if (violation > tol) {
    throw PreconditionError("plan marginals deviate by " + std::to_string(violation));
  }
  bool negative = false;
  plan.for_each([&](Index, Index, double m) { negative = negative || m < 0.0; });
  require(!negative, "plan has negative mass");
}

}  // namespace tgw
