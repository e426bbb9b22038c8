#pragma once

#include "tgw/common.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tgw {

enum class GaugeKind { SqEuclid, Euclid, OneNorm, InnerProduct, DijkstraSq, Dijkstra, Custom };

std::string to_string(GaugeKind kind);
GaugeKind parse_gauge_kind(const std::string& name);

// Finite gauged measure space: n atoms, a symmetric gauge and probability weights.
// Values are immutable after construction.
struct GmSpace {
  Matrix gauge;
  Vector weights;
  std::optional<Matrix> coords;  // n x d ambient coordinates, when known
  GaugeKind kind = GaugeKind::Custom;
  std::string label;

  Index size() const { return weights.size(); }
};

struct WeightedEdge {
  Index u = 0;
  Index v = 0;
  double weight = 1.0;
};

using Face = std::array<Index, 3>;

// Gauge from coordinates. Only point-based kinds are accepted.
GmSpace from_points(const Matrix& coords, GaugeKind kind,
                    const std::optional<Vector>& weights = std::nullopt,
                    std::string label = {});

// Graph gauges: all-pairs shortest paths (Dijkstra, DijkstraSq) over the undirected
// edges, or the symmetrized weighted adjacency (M + M^T)/2 for Custom, where each
// edge (u, v, w) sets M[u][v] = w.
GmSpace from_graph(Index nodes, const std::vector<WeightedEdge>& edges, GaugeKind kind,
                   const std::optional<Vector>& weights = std::nullopt,
                   std::string label = {});

// Symmetrized adjacency gauge (M + M^T)/2 from a dense, possibly directed matrix.
GmSpace from_adjacency(const Matrix& adjacency,
                       const std::optional<Vector>& weights = std::nullopt,
                       std::string label = {});

// Edge set of a triangle mesh; each face edge is weighted by its Euclidean length.
std::vector<WeightedEdge> mesh_edges(const Matrix& vertices, const std::vector<Face>& faces);

// Geodesic (Dijkstra) gm-space from a triangle mesh; coords are the vertices.
GmSpace from_mesh(const Matrix& vertices, const std::vector<Face>& faces,
                  GaugeKind kind = GaugeKind::Dijkstra, std::string label = {});

// Single-source shortest paths; unreachable nodes are +inf.
Vector dijkstra(Index nodes, const std::vector<WeightedEdge>& edges, Index source);

GmSpace normalize_diameter(const GmSpace& space);

// Empty iff the space satisfies every invariant.
std::vector<std::string> validate(const GmSpace& space);

}  // namespace tgw
