#pragma once

#include "tgw/common.hpp"

#include <vector>

namespace tgw {

// Centered Gaussian on R^d with the inner-product gauge.
// covariance = eigenvectors * diag(eigenvalues) * eigenvectors^T, eigenvalues decreasing.
struct GaussianSpace {
  Matrix covariance;
  Vector eigenvalues;
  Matrix eigenvectors;

  Index dim() const { return covariance.rows(); }
};

// Symmetric positive semidefinite covariance; the decomposition is sorted decreasingly.
GaussianSpace make_gaussian(const Matrix& covariance);

struct GaussianPlan {
  std::vector<Matrix> a;  // A_i, d_i x d_1
  std::vector<Matrix> t;  // T_i = P_i A_i P_1^T
  double residual = 0.0;  // max over i <= j of |B A_i - A_j|
};

// Closed-form multi-marginal plan (T_1, ..., T_N)_# xi_1. `signs[i]` holds the
// diagonal of the sign matrix for input i (length d_i); empty means all +1.
GaussianPlan gaussian_multi_plan(const std::vector<GaussianSpace>& gaussians,
                                 const std::vector<Vector>& signs = {});

// The composition matrix B mapping input i to input j (i <= j).
Matrix composition_matrix(const GaussianSpace& gi, const GaussianSpace& gj, const Vector& si,
                          const Vector& sj);

// Barycenter covariance sum_i rho_i blockdiag(D_i, 0) in the first input's eigenbasis.
GaussianSpace gaussian_barycenter(const std::vector<GaussianSpace>& gaussians, const Vector& rho);

}  // namespace tgw
