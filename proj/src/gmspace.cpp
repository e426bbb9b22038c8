#include "tgw/gmspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <utility>

namespace tgw {

void require_probability(std::span<const double> weights, const std::string& what, double tol) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw PreconditionError(what + ": non-finite weight");
    if (w < 0.0) throw PreconditionError(what + ": negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > tol) {
    throw PreconditionError(what + ": weights sum to " + std::to_string(total) + ", expected 1");
  }
}

bool is_uniform(std::span<const double> weights, double tol) {
  if (weights.empty()) return true;
  const double first = weights.front();
  return std::all_of(weights.begin(), weights.end(),
                     [&](double w) { return std::abs(w - first) <= tol; });
}

std::string to_string(GaugeKind kind) {
  switch (kind) {
    case GaugeKind::SqEuclid: return "sq_euclid";
    case GaugeKind::Euclid: return "euclid";
    case GaugeKind::OneNorm: return "one_norm";
    case GaugeKind::InnerProduct: return "inner_product";
    case GaugeKind::DijkstraSq: return "dijkstra_sq";
    case GaugeKind::Dijkstra: return "dijkstra";
    case GaugeKind::Custom: return "custom";
  }
  return "custom";
}

GaugeKind parse_gauge_kind(const std::string& name) {
  static const std::pair<const char*, GaugeKind> table[] = {
      {"sq_euclid", GaugeKind::SqEuclid},       {"euclid", GaugeKind::Euclid},
      {"one_norm", GaugeKind::OneNorm},         {"inner_product", GaugeKind::InnerProduct},
      {"dijkstra_sq", GaugeKind::DijkstraSq},   {"dijkstra", GaugeKind::Dijkstra},
      {"custom", GaugeKind::Custom},            {"adjacency", GaugeKind::Custom},
  };
  std::string key = name;
  std::replace(key.begin(), key.end(), '-', '_');
  for (const auto& [text, kind] : table) {
    if (key == text) return kind;
  }
  throw PreconditionError("unknown gauge kind '" + name + "'");
}

namespace {

Vector resolve_weights(Index n, const std::optional<Vector>& weights) {
  if (!weights) return Vector::Constant(n, 1.0 / static_cast<double>(n));
  require(weights->size() == n, "weights length does not match the number of atoms");
  require_probability(as_span(*weights), "weights");
  return *weights;
}

struct Adjacency {
  std::vector<std::vector<std::pair<Index, double>>> out;
};

Adjacency build_adjacency(Index nodes, const std::vector<WeightedEdge>& edges) {
  Adjacency adj;
  adj.out.resize(static_cast<std::size_t>(nodes));
  for (const auto& e : edges) {
    require(e.u >= 0 && e.u < nodes && e.v >= 0 && e.v < nodes, "edge endpoint out of range");
    require(std::isfinite(e.weight), "non-finite edge weight");
    require(e.weight >= 0.0, "negative edge weight");
    adj.out[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.weight);
    adj.out[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.weight);
  }
  return adj;
}

void shortest_paths(const Adjacency& adj, Index source, double* dist) {
  const auto n = static_cast<Index>(adj.out.size());
  std::fill(dist, dist + n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : adj.out[static_cast<std::size_t>(u)]) {
      const double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        heap.emplace(nd, v);
      }
    }
  }
}

}  // namespace

GmSpace from_points(const Matrix& coords, GaugeKind kind, const std::optional<Vector>& weights,
                    std::string label) {
  const Index n = coords.rows();
  require(n >= 1, "from_points needs at least one point");
  require(coords.allFinite(), "non-finite coordinates");
  GmSpace space;
  space.weights = resolve_weights(n, weights);
  space.gauge.resize(n, n);
  switch (kind) {
    case GaugeKind::SqEuclid:
    case GaugeKind::Euclid: {
      for (Index i = 0; i < n; ++i) {
        space.gauge(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
          double d2 = (coords.row(i) - coords.row(j)).squaredNorm();
          double value = kind == GaugeKind::SqEuclid ? d2 : std::sqrt(d2);
          space.gauge(i, j) = value;
          space.gauge(j, i) = value;
        }
      }
      break;
    }
    case GaugeKind::OneNorm: {
      for (Index i = 0; i < n; ++i) {
        space.gauge(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
          double value = (coords.row(i) - coords.row(j)).lpNorm<1>();
          space.gauge(i, j) = value;
          space.gauge(j, i) = value;
        }
      }
      break;
    }
    case GaugeKind::InnerProduct: {
      space.gauge = coords * coords.transpose();
      // The product is symmetric up to rounding; store it exactly symmetric.
      space.gauge = (0.5 * (space.gauge + space.gauge.transpose())).eval();
      break;
    }
    default:
      throw PreconditionError("gauge kind '" + to_string(kind) +
                              "' cannot be computed from point coordinates");
  }
  space.coords = coords;
  space.kind = kind;
  space.label = std::move(label);
  return space;
}

GmSpace from_graph(Index nodes, const std::vector<WeightedEdge>& edges, GaugeKind kind,
                   const std::optional<Vector>& weights, std::string label) {
  require(nodes >= 1, "graph needs at least one node");
  if (kind == GaugeKind::Custom) {
    Matrix adjacency = Matrix::Zero(nodes, nodes);
    for (const auto& e : edges) {
      require(e.u >= 0 && e.u < nodes && e.v >= 0 && e.v < nodes, "edge endpoint out of range");
      require(std::isfinite(e.weight), "non-finite edge weight");
      adjacency(e.u, e.v) = e.weight;
    }
    return from_adjacency(adjacency, weights, std::move(label));
  }
  require(kind == GaugeKind::Dijkstra || kind == GaugeKind::DijkstraSq,
          "graph gauge must be dijkstra, dijkstra_sq or custom (adjacency)");

  const Adjacency adj = build_adjacency(nodes, edges);
  GmSpace space;
  space.weights = resolve_weights(nodes, weights);
  // Column-major storage: column s holds the distances from source s.
  space.gauge.resize(nodes, nodes);
  for (Index s = 0; s < nodes; ++s) {
    shortest_paths(adj, s, space.gauge.col(s).data());
  }
  if (!space.gauge.allFinite()) {
    throw PreconditionError("graph is disconnected: some node pair is unreachable");
  }
  // Shortest paths on an undirected graph are symmetric; remove rounding asymmetry.
  for (Index i = 0; i < nodes; ++i) {
    for (Index j = i + 1; j < nodes; ++j) {
      double d = std::min(space.gauge(i, j), space.gauge(j, i));
      if (kind == GaugeKind::DijkstraSq) d *= d;
      space.gauge(i, j) = d;
      space.gauge(j, i) = d;
    }
  }
  space.kind = kind;
  space.label = std::move(label);
  return space;
}

GmSpace from_adjacency(const Matrix& adjacency, const std::optional<Vector>& weights,
                       std::string label) {
  require(adjacency.rows() == adjacency.cols() && adjacency.rows() >= 1,
          "adjacency matrix must be square and nonempty");
  require(adjacency.allFinite(), "non-finite adjacency entry");
  GmSpace space;
  space.weights = resolve_weights(adjacency.rows(), weights);
  space.gauge = 0.5 * (adjacency + adjacency.transpose());
  space.kind = GaugeKind::Custom;
  space.label = std::move(label);
  return space;
}

std::vector<WeightedEdge> mesh_edges(const Matrix& vertices, const std::vector<Face>& faces) {
  const Index n = vertices.rows();
  std::set<std::pair<Index, Index>> seen;
  std::vector<WeightedEdge> edges;
  for (const auto& face : faces) {
    for (int k = 0; k < 3; ++k) {
      Index a = face[static_cast<std::size_t>(k)];
      Index b = face[static_cast<std::size_t>((k + 1) % 3)];
      require(a >= 0 && a < n && b >= 0 && b < n, "face references a missing vertex");
      if (a == b) continue;
      auto key = std::minmax(a, b);
      if (!seen.insert(key).second) continue;
      edges.push_back({key.first, key.second, (vertices.row(a) - vertices.row(b)).norm()});
    }
  }
  return edges;
}

GmSpace from_mesh(const Matrix& vertices, const std::vector<Face>& faces, GaugeKind kind,
                  std::string label) {
  require(vertices.allFinite(), "non-finite vertex coordinates");
  if (kind == GaugeKind::Dijkstra || kind == GaugeKind::DijkstraSq) {
    GmSpace space =
        from_graph(vertices.rows(), mesh_edges(vertices, faces), kind, std::nullopt, std::move(label));
    space.coords = vertices;
    return space;
  }
  return from_points(vertices, kind, std::nullopt, std::move(label));
}

Vector dijkstra(Index nodes, const std::vector<WeightedEdge>& edges, Index source) {
  require(source >= 0 && source < nodes, "source out of range");
  const Adjacency adj = build_adjacency(nodes, edges);
  Vector dist(nodes);
  shortest_paths(adj, source, dist.data());
  return dist;
}

GmSpace normalize_diameter(const GmSpace& space) {
  const double scale = space.gauge.cwiseAbs().maxCoeff();
  require(scale > 0.0, "cannot normalize an all-zero gauge");
  GmSpace out = space;
  out.gauge /= scale;
  return out;
}

std::vector<std::string> validate(const GmSpace& space) {
  std::vector<std::string> report;
  const Index n = space.weights.size();
  if (space.gauge.rows() != n || space.gauge.cols() != n) {
    report.emplace_back("gauge shape does not match weights");
    return report;
  }
  if (n == 0) {
    report.emplace_back("empty space");
    return report;
  }
  if (space.coords && space.coords->rows() != n) report.emplace_back("coords row count mismatch");
  if (!space.gauge.allFinite()) report.emplace_back("gauge not finite");
  if ((space.gauge - space.gauge.transpose()).cwiseAbs().maxCoeff() > 0.0) {
    report.emplace_back("gauge asymmetric");
  }
  if (!space.weights.allFinite() || (space.weights.array() < 0.0).any()) {
    report.emplace_back("weights negative or non-finite");
  }
  if (std::abs(space.weights.sum() - 1.0) > 1e-12) report.emplace_back("weights not normalized");
  return report;
}

}  // namespace tgw
