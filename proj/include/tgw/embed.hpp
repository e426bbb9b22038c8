#pragma once

#include "tgw/barycenter.hpp"
#include "tgw/gmspace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tgw {

struct EmbeddedBarycenter {
  Matrix points;  // support x d_sum
  Vector masses;
  std::vector<Face> faces;
  double pca_residual = 0.0;
  double diameter = 0.0;
};

// Concatenated, rescaled input coordinates along the melting support:
// block i is rho_i x_i for OneNorm and sqrt(rho_i) x_i for SqEuclid / InnerProduct.
// With `check_kind` the inputs' gauge kind must equal `kind`.
EmbeddedBarycenter euclid_embed(const BarycenterState& state, const Vector& rho, GaugeKind kind,
                                bool check_kind = true);

// Largest deviation between the gauge of the embedded points and m_rho.
double embedding_gauge_error(const BarycenterState& state, const Vector& rho,
                             const EmbeddedBarycenter& embedded, GaugeKind kind);

// Pairwise gauge of a point cloud for a point-based kind.
Matrix point_gauge(const Matrix& points, GaugeKind kind);

struct PcaProjection {
  Matrix points;          // k x target_dim, centered
  double residual = 0.0;  // mean distance between points and their reconstruction
};

PcaProjection pca_project(const Matrix& points, Index target_dim = 3);

// Faces on the support: a triple of support points forms a face whenever their
// anchor components form a face of the anchor input.
std::vector<Face> transfer_faces(const MultiCoupling& melting, Index anchor,
                                 const std::vector<Face>& faces);

// Largest pairwise Euclidean distance.
double diameter(const Matrix& points);

// "interp_0.5_0.5.off" style names.
std::string interpolation_name(const Vector& rho, const std::string& extension);

}  // namespace tgw
