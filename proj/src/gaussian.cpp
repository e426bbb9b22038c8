#include "tgw/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace tgw {

GaussianSpace make_gaussian(const Matrix& covariance) {
  require(covariance.rows() == covariance.cols() && covariance.rows() >= 1,
          "covariance must be square and nonempty");
  require(covariance.allFinite(), "non-finite covariance");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  require((covariance - covariance.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
  require(solver.info() == Eigen::Success, "eigendecomposition failed");
  const Index d = covariance.rows();
  GaussianSpace g;
  g.covariance = covariance;
  g.eigenvalues.resize(d);
  g.eigenvectors.resize(d, d);
  for (Index k = 0; k < d; ++k) {
    // Eigen sorts increasingly.
    double lambda = solver.eigenvalues()(d - 1 - k);
    require(lambda >= -1e-12 * scale, "covariance is not positive semidefinite");
    g.eigenvalues(k) = std::max(lambda, 0.0);
    g.eigenvectors.col(k) = solver.eigenvectors().col(d - 1 - k);
  }
  return g;
}

namespace {

void check_battery(const std::vector<GaussianSpace>& gaussians) {
  require(!gaussians.empty(), "at least one Gaussian is required");
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const auto& g = gaussians[i];
    require(g.eigenvalues.size() == g.dim() && g.eigenvectors.rows() == g.dim(),
            "inconsistent Gaussian decomposition");
    require((g.eigenvalues.array() > 0.0).all(), "covariance must be positive definite");
    for (Index k = 1; k < g.dim(); ++k) {
      require(g.eigenvalues(k) <= g.eigenvalues(k - 1), "eigenvalues must be sorted decreasingly");
    }
    if (i > 0) require(g.dim() <= gaussians[i - 1].dim(), "dimensions must be non-increasing");
  }
}

Vector sign_vector(const std::vector<Vector>& signs, std::size_t i, Index d) {
  if (signs.empty()) return Vector::Ones(d);
  const Vector& s = signs[i];
  require(s.size() == d, "sign vector length does not match the dimension");
  for (Index k = 0; k < d; ++k) require(s(k) == 1.0 || s(k) == -1.0, "signs must be +1 or -1");
  return s;
}

}  // namespace

Matrix composition_matrix(const GaussianSpace& gi, const GaussianSpace& gj, const Vector& si,
                          const Vector& sj) {
  const Index di = gi.dim();
  const Index dj = gj.dim();
  require(dj <= di, "composition needs d_j <= d_i");
  Matrix b = Matrix::Zero(dj, di);
  for (Index k = 0; k < dj; ++k) {
    b(k, k) = sj(k) * si(k) * std::sqrt(gj.eigenvalues(k)) / std::sqrt(gi.eigenvalues(k));
  }
  return b;
}

GaussianPlan gaussian_multi_plan(const std::vector<GaussianSpace>& gaussians,
                                 const std::vector<Vector>& signs) {
  check_battery(gaussians);
  require(signs.empty() || signs.size() == gaussians.size(), "one sign vector per input");
  const GaussianSpace& g1 = gaussians.front();
  const Index d1 = g1.dim();
  GaussianPlan plan;
  std::vector<Vector> s;
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const GaussianSpace& g = gaussians[i];
    const Index di = g.dim();
    s.push_back(sign_vector(signs, i, di));
    Matrix a = Matrix::Zero(di, d1);
    for (Index k = 0; k < di; ++k) {
      a(k, k) = s[i](k) * std::sqrt(g.eigenvalues(k)) / std::sqrt(g1.eigenvalues(k));
    }
    plan.t.push_back(g.eigenvectors * a * g1.eigenvectors.transpose());
    plan.a.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    for (std::size_t j = i; j < gaussians.size(); ++j) {
      const Matrix b = composition_matrix(gaussians[i], gaussians[j], s[i], s[j]);
      plan.residual = std::max(plan.residual, (b * plan.a[i] - plan.a[j]).cwiseAbs().maxCoeff());
    }
  }
  return plan;
}

GaussianSpace gaussian_barycenter(const std::vector<GaussianSpace>& gaussians, const Vector& rho) {
  check_battery(gaussians);
  require(rho.size() == static_cast<Index>(gaussians.size()), "rho length does not match inputs");
  require_probability(as_span(rho), "rho", 1e-12);
  const Index d1 = gaussians.front().dim();
  Vector diag = Vector::Zero(d1);
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const auto& g = gaussians[i];
    diag.head(g.dim()) += rho(static_cast<Index>(i)) * g.eigenvalues;
  }
  return make_gaussian(diag.asDiagonal());
}

}  // namespace tgw
