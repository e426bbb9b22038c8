#include "tgw/embed.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tgw {

Matrix point_gauge(const Matrix& points, GaugeKind kind) {
  return from_points(points, kind).gauge;
}

EmbeddedBarycenter euclid_embed(const BarycenterState& state, const Vector& rho, GaugeKind kind,
                                bool check_kind) {
  require(kind == GaugeKind::OneNorm || kind == GaugeKind::SqEuclid ||
              kind == GaugeKind::InnerProduct,
          "embedding needs a one_norm, sq_euclid or inner_product gauge");
  require(rho.size() == static_cast<Index>(state.inputs.size()), "rho length does not match inputs");
  require_probability(as_span(rho), "rho", 1e-12);
  Index total_dim = 0;
  for (const auto& x : state.inputs) {
    require(x->coords.has_value(), "embedding needs coordinates for every input");
    if (check_kind) require(x->kind == kind, "input gauge kind does not match the embedding");
    total_dim += x->coords->cols();
  }
  const MultiCoupling& mu = state.melting;
  EmbeddedBarycenter out;
  out.points = Matrix::Zero(mu.support_size(), total_dim);
  out.masses = mu.mass_vector();
  Index offset = 0;
  for (std::size_t i = 0; i < state.inputs.size(); ++i) {
    const Matrix& coords = *state.inputs[i]->coords;
    const double r = rho(static_cast<Index>(i));
    const double factor = kind == GaugeKind::OneNorm ? r : std::sqrt(r);
    for (Index s = 0; s < mu.support_size(); ++s) {
      out.points.block(s, offset, 1, coords.cols()) =
          factor * coords.row(mu.at(s, static_cast<Index>(i)));
    }
    offset += coords.cols();
  }
  out.diameter = diameter(out.points);
  return out;
}

double embedding_gauge_error(const BarycenterState& state, const Vector& rho,
                             const EmbeddedBarycenter& embedded, GaugeKind kind) {
  const Matrix mean = reweigh(state, rho).gauge;
  const Matrix g = point_gauge(embedded.points, kind);
  return (mean - g).cwiseAbs().maxCoeff();
}

PcaProjection pca_project(const Matrix& points, Index target_dim) {
  require(points.rows() >= 1, "PCA needs at least one point");
  require(points.allFinite(), "non-finite points");
  require(target_dim >= 1, "target dimension must be positive");
  const Index k = points.rows();
  const Index d = points.cols();
  const Eigen::RowVectorXd center = points.colwise().mean();
  const Matrix centered = points.rowwise() - center;
  const Matrix cov = centered.transpose() * centered / static_cast<double>(k);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  require(solver.info() == Eigen::Success, "PCA eigendecomposition failed");
  const Index keep = std::min(target_dim, d);
  // Eigen sorts increasingly; the leading directions are the last columns.
  Matrix basis(d, keep);
  for (Index c = 0; c < keep; ++c) basis.col(c) = solver.eigenvectors().col(d - 1 - c);
  PcaProjection out;
  out.points = Matrix::Zero(k, target_dim);
  out.points.leftCols(keep) = centered * basis;
  const Matrix reconstructed = out.points.leftCols(keep) * basis.transpose();
  out.residual = (centered - reconstructed).rowwise().norm().mean();
  return out;
}

std::vector<Face> transfer_faces(const MultiCoupling& melting, Index anchor,
                                 const std::vector<Face>& faces) {
  require(anchor >= 0 && anchor < melting.arity(), "anchor index out of range");
  const Index n = melting.sizes()[static_cast<std::size_t>(anchor)];
  std::vector<std::vector<Index>> support_of(static_cast<std::size_t>(n));
  for (Index s = 0; s < melting.support_size(); ++s) {
    support_of[static_cast<std::size_t>(melting.at(s, anchor))].push_back(s);
  }
  std::vector<Face> out;
  for (const auto& f : faces) {
    for (Index v : f) require(v >= 0 && v < n, "face references a missing vertex");
    for (Index a : support_of[static_cast<std::size_t>(f[0])]) {
      for (Index b : support_of[static_cast<std::size_t>(f[1])]) {
        for (Index c : support_of[static_cast<std::size_t>(f[2])]) out.push_back({a, b, c});
      }
    }
  }
  return out;
}

double diameter(const Matrix& points) {
  double best = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = i + 1; j < points.rows(); ++j) {
      best = std::max(best, (points.row(i) - points.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

std::string interpolation_name(const Vector& rho, const std::string& extension) {
  std::string name = "interp";
  char buf[32];
  for (Index i = 0; i < rho.size(); ++i) {
    std::snprintf(buf, sizeof buf, "_%.4g", rho(i));
    name += buf;
  }
  return name + "." + extension;
}

}  // namespace tgw
