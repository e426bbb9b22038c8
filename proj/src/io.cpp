#include "tgw/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tgw {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::ifstream open_input(const std::string& path) {
  if (!fs::exists(path)) throw IoError("input not found: " + path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::string lower_extension(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Next non-empty line with comments stripped.
bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

double parse_double(const std::string& token, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ": cannot parse number '" + token + "'");
  }
}

Index parse_index(const std::string& token, const std::string& path) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return static_cast<Index>(v);
  } catch (const std::exception&) {
    throw IoError(path + ": cannot parse index '" + token + "'");
  }
}

std::vector<std::string> split(const std::string& line, const char* delims = " \t\r") {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto start = line.find_first_not_of(delims, pos);
    if (start == std::string::npos) break;
    const auto end = line.find_first_of(delims, start);
    out.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    pos = end;
  }
  return out;
}

Matrix matrix_from_json(const Json& doc, const std::string& what) {
  if (!doc.is_array() || doc.empty()) throw IoError(what + " must be a nonempty array");
  const auto rows = static_cast<Index>(doc.size());
  const auto cols = static_cast<Index>(doc.front().size());
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = doc[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw IoError(what + " rows have inconsistent lengths");
    }
    for (Index j = 0; j < cols; ++j) out(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

bool point_kind(GaugeKind kind) {
  return kind == GaugeKind::SqEuclid || kind == GaugeKind::Euclid ||
         kind == GaugeKind::OneNorm || kind == GaugeKind::InnerProduct;
}

}  // namespace

Json gmspace_to_json(const GmSpace& space) {
  Json doc;
  doc["n"] = space.size();
  doc["weights"] = std::vector<double>(space.weights.data(), space.weights.data() + space.size());
  doc["gauge"] = matrix_to_json(space.gauge);
  doc["gauge_kind"] = to_string(space.kind);
  if (space.coords) doc["coords"] = matrix_to_json(*space.coords);
  doc["label"] = space.label;
  return doc;
}

GmSpace gmspace_from_json(const Json& doc) {
  try {
    std::optional<Vector> weights;
    if (doc.contains("weights")) {
      const auto w = doc.at("weights").get<std::vector<double>>();
      weights = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
    }
    const std::string label = doc.value("label", std::string{});
    const GaugeKind kind = parse_gauge_kind(doc.value("gauge_kind", std::string("custom")));
    std::optional<Matrix> coords;
    if (doc.contains("coords")) coords = matrix_from_json(doc.at("coords"), "coords");

    GmSpace space;
    if (coords && point_kind(kind)) {
      space = from_points(*coords, kind, weights, label);
    } else {
      if (!doc.contains("gauge")) throw IoError("gmspace-json needs a gauge or coords");
      const Json& g = doc.at("gauge");
      Matrix gauge;
      if (!g.empty() && g.front().is_array()) {
        gauge = matrix_from_json(g, "gauge");
      } else {
        const auto flat = g.get<std::vector<double>>();
        const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
        if (n * n != static_cast<Index>(flat.size())) throw IoError("flat gauge is not square");
        gauge = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(flat.data(), n, n);
      }
      require(gauge.rows() == gauge.cols(), "gauge must be square");
      space.gauge = gauge;
      space.weights = weights ? *weights
                              : Vector::Constant(gauge.rows(), 1.0 / static_cast<double>(gauge.rows()));
      space.kind = kind;
      space.label = label;
      space.coords = coords;
    }
    if (doc.contains("n")) {
      require(doc.at("n").get<Index>() == space.size(), "gmspace-json: n does not match the data");
    }
    const auto report = validate(space);
    if (!report.empty()) throw PreconditionError("invalid gm-space: " + report.front());
    return space;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed gmspace-json: ") + e.what());
  }
}

GmSpace read_gmspace_json(const std::string& path) {
  auto in = open_input(path);
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return gmspace_from_json(doc);
}

void write_gmspace_json(const std::string& path, const GmSpace& space) {
  auto out = open_output(path);
  out << gmspace_to_json(space).dump() << '\n';
}

Mesh read_off(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!next_line(in, line)) throw IoError(path + ": empty OFF file");
  auto tokens = split(line);
  if (tokens.empty() || tokens.front() != "OFF") throw IoError(path + ": missing OFF header");
  tokens.erase(tokens.begin());
  if (tokens.empty()) {
    if (!next_line(in, line)) throw IoError(path + ": missing OFF counts");
    tokens = split(line);
  }
  if (tokens.size() < 2) throw IoError(path + ": malformed OFF counts");
  const Index nv = parse_index(tokens[0], path);
  const Index nf = parse_index(tokens[1], path);
  Mesh mesh;
  mesh.vertices.resize(nv, 3);
  for (Index v = 0; v < nv; ++v) {
    if (!next_line(in, line)) throw IoError(path + ": truncated vertex list");
    const auto t = split(line);
    if (t.size() < 3) throw IoError(path + ": vertex needs three coordinates");
    for (int k = 0; k < 3; ++k) mesh.vertices(v, k) = parse_double(t[static_cast<std::size_t>(k)], path);
  }
  for (Index f = 0; f < nf; ++f) {
    if (!next_line(in, line)) throw IoError(path + ": truncated face list");
    const auto t = split(line);
    if (t.empty()) throw IoError(path + ": empty face");
    const Index k = parse_index(t[0], path);
    if (k != 3) throw PreconditionError(path + ": only triangular faces are supported");
    if (t.size() < 4) throw IoError(path + ": face has too few indices");
    Face face{};
    for (std::size_t c = 0; c < 3; ++c) {
      face[c] = parse_index(t[c + 1], path);
      if (face[c] < 0 || face[c] >= nv) throw IoError(path + ": face index out of range");
    }
    mesh.faces.push_back(face);
  }
  return mesh;
}

Mesh read_obj(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  std::vector<std::array<double, 3>> verts;
  std::vector<Face> faces;
  auto resolve = [&](const std::string& token) {
    const Index raw = parse_index(token.substr(0, token.find('/')), path);
    const Index idx = raw < 0 ? static_cast<Index>(verts.size()) + raw : raw - 1;
    if (idx < 0 || idx >= static_cast<Index>(verts.size())) throw IoError(path + ": face index out of range");
    return idx;
  };
  while (next_line(in, line)) {
    const auto t = split(line);
    if (t.front() == "v") {
      if (t.size() < 4) throw IoError(path + ": vertex needs three coordinates");
      verts.push_back({parse_double(t[1], path), parse_double(t[2], path), parse_double(t[3], path)});
    } else if (t.front() == "f") {
      if (t.size() != 4) throw PreconditionError(path + ": only triangular faces are supported");
      faces.push_back({resolve(t[1]), resolve(t[2]), resolve(t[3])});
    }
  }
  Mesh mesh;
  mesh.vertices.resize(static_cast<Index>(verts.size()), 3);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    for (int k = 0; k < 3; ++k) mesh.vertices(static_cast<Index>(v), k) = verts[v][static_cast<std::size_t>(k)];
  }
  mesh.faces = std::move(faces);
  return mesh;
}

Mesh read_mesh(const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".off") return read_off(path);
  if (ext == ".obj") return read_obj(path);
  throw IoError(path + ": unknown mesh format");
}

void write_off(const std::string& path, const Mesh& mesh) {
  auto out = open_output(path);
  out << "OFF\n" << mesh.vertices.rows() << ' ' << mesh.faces.size() << " 0\n";
  for (Index v = 0; v < mesh.vertices.rows(); ++v) {
    for (Index k = 0; k < mesh.vertices.cols(); ++k) {
      out << (k ? " " : "") << format_double(mesh.vertices(v, k));
    }
    for (Index k = mesh.vertices.cols(); k < 3; ++k) out << " 0";
    out << '\n';
  }
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

EdgeList read_edge_list(const std::string& path, Index min_nodes) {
  auto in = open_input(path);
  std::string line;
  EdgeList graph;
  graph.nodes = min_nodes;
  while (next_line(in, line)) {
    const auto t = split(line);
    if (t.size() < 2 || t.size() > 3) throw IoError(path + ": expected 'u v [w]'");
    WeightedEdge e;
    e.u = parse_index(t[0], path);
    e.v = parse_index(t[1], path);
    if (t.size() == 3) e.weight = parse_double(t[2], path);
    if (e.u < 0 || e.v < 0) throw IoError(path + ": negative node index");
    graph.nodes = std::max({graph.nodes, e.u + 1, e.v + 1});
    graph.edges.push_back(e);
  }
  return graph;
}

void write_edge_list(const std::string& path, const EdgeList& graph) {
  auto out = open_output(path);
  for (const auto& e : graph.edges) out << e.u << ' ' << e.v << ' ' << format_double(e.weight) << '\n';
}

Vector read_node_weights(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  std::vector<double> w;
  while (next_line(in, line)) {
    for (const auto& t : split(line)) w.push_back(parse_double(t, path));
  }
  if (w.empty()) throw IoError(path + ": no weights");
  Vector out = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
  require((out.array() >= 0.0).all() && out.sum() > 0.0, path + ": weights must be nonnegative");
  return out / out.sum();
}

void write_coo_tsv(const std::string& path, const Coupling& plan) {
  auto out = open_output(path);
  out << plan.rows() << ' ' << plan.cols() << '\n';
  plan.for_each([&](Index r, Index c, double m) {
    out << r << '\t' << c << '\t' << format_double(m) << '\n';
  });
}

Coupling read_coo_tsv(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!next_line(in, line)) throw IoError(path + ": empty coupling file");
  const auto header = split(line);
  if (header.size() != 2) throw IoError(path + ": header must be 'n m'");
  const Index n = parse_index(header[0], path);
  const Index m = parse_index(header[1], path);
  std::vector<CouplingEntry> entries;
  while (next_line(in, line)) {
    const auto t = split(line);
    if (t.size() != 3) throw IoError(path + ": expected 'i j mass'");
    entries.push_back({parse_index(t[0], path), parse_index(t[1], path), parse_double(t[2], path)});
  }
  return Coupling::from_entries(n, m, entries);
}

void write_mcoo_tsv(const std::string& path, const MultiCoupling& plan) {
  auto out = open_output(path);
  out << plan.arity();
  for (Index s : plan.sizes()) out << ' ' << s;
  out << '\n';
  for (Index s = 0; s < plan.support_size(); ++s) {
    for (Index a = 0; a < plan.arity(); ++a) out << plan.at(s, a) << '\t';
    out << format_double(plan.mass(s)) << '\n';
  }
}

MultiCoupling read_mcoo_tsv(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!next_line(in, line)) throw IoError(path + ": empty multi-coupling file");
  const auto header = split(line);
  if (header.empty()) throw IoError(path + ": missing header");
  const Index n = parse_index(header[0], path);
  if (n < 1 || static_cast<Index>(header.size()) != n + 1) throw IoError(path + ": header must be 'N s_1 ... s_N'");
  std::vector<Index> sizes;
  for (Index a = 0; a < n; ++a) sizes.push_back(parse_index(header[static_cast<std::size_t>(a + 1)], path));
  std::vector<Index> tuples;
  std::vector<double> masses;
  while (next_line(in, line)) {
    const auto t = split(line);
    if (static_cast<Index>(t.size()) != n + 1) throw IoError(path + ": tuple has the wrong length");
    for (Index a = 0; a < n; ++a) tuples.push_back(parse_index(t[static_cast<std::size_t>(a)], path));
    masses.push_back(parse_double(t.back(), path));
  }
  return MultiCoupling::from_tuples(std::move(sizes), tuples, masses);
}

void write_csv_matrix(const std::string& path, const Matrix& values,
                      const std::vector<std::string>& labels) {
  require(static_cast<Index>(labels.size()) == values.cols(), "one label per column");
  auto out = open_output(path);
  for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
  out << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_double(values(i, j));
    out << '\n';
  }
}

Matrix read_csv_matrix(const std::string& path, std::vector<std::string>* labels) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty CSV");
  const auto header = split(line, ",\r");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \r") == std::string::npos) continue;
    std::vector<double> row;
    for (const auto& t : split(line, ",\r")) row.push_back(parse_double(t, path));
    if (row.size() != header.size()) throw IoError(path + ": row length does not match header");
    rows.push_back(std::move(row));
  }
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < header.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  if (labels != nullptr) *labels = header;
  return out;
}

GroundTruth read_ground_truth(const std::string& path, const std::vector<Index>& sizes) {
  auto in = open_input(path);
  GroundTruth truth;
  const auto n = sizes.size();
  truth.canonical.resize(n);
  for (std::size_t i = 0; i < n; ++i) truth.canonical[i].assign(static_cast<std::size_t>(sizes[i]), -1);
  std::string line;
  Index row = 0;
  while (next_line(in, line)) {
    const auto t = split(line);
    if (t.size() != n) throw IoError(path + ": ground-truth row needs one index per space");
    for (std::size_t i = 0; i < n; ++i) {
      const Index x = parse_index(t[i], path);
      if (x < 0 || x >= sizes[i]) throw IoError(path + ": ground-truth index out of range");
      truth.canonical[i][static_cast<std::size_t>(x)] = row;
    }
    ++row;
  }
  // Unlisted nodes correspond to nothing: give each a fresh id.
  for (auto& ids : truth.canonical) {
    for (auto& id : ids) {
      if (id < 0) id = row++;
    }
  }
  return truth;
}

LoadedSpace load_space(const SpaceSource& source) {
  if (!fs::exists(source.path)) throw IoError("input not found: " + source.path);
  const std::string ext = lower_extension(source.path);
  LoadedSpace loaded;
  const std::string gauge = source.gauge;
  const std::string label = fs::path(source.path).stem().string();
  if (ext == ".json") {
    loaded.space = read_gmspace_json(source.path);
    if (loaded.space.label.empty()) loaded.space.label = label;
  } else if (ext == ".off" || ext == ".obj") {
    Mesh mesh = read_mesh(source.path);
    const GaugeKind kind = gauge == "auto" ? GaugeKind::Dijkstra : parse_gauge_kind(gauge);
    loaded.space = from_mesh(mesh.vertices, mesh.faces, kind, label);
    loaded.faces = std::move(mesh.faces);
  } else {
    const EdgeList graph = read_edge_list(source.path);
    const GaugeKind kind = gauge == "auto" ? GaugeKind::Dijkstra : parse_gauge_kind(gauge);
    std::optional<Vector> weights;
    if (!source.weights.empty()) weights = read_node_weights(source.weights);
    loaded.space = from_graph(graph.nodes, graph.edges, kind, weights, label);
    return loaded;
  }
  if (!source.weights.empty()) {
    const Vector w = read_node_weights(source.weights);
    require(w.size() == loaded.space.size(), source.weights + ": weight count mismatch");
    loaded.space.weights = w;
  }
  return loaded;
}

void write_state(const std::string& manifest_path, const BarycenterState& state,
                 const std::vector<SpaceSource>& sources) {
  require(sources.size() == state.inputs.size(), "one source per input");
  const fs::path manifest(manifest_path);
  const std::string melting_name = manifest.stem().string() + ".melting.mcoo.tsv";
  const fs::path melting_path = manifest.parent_path() / melting_name;
  write_mcoo_tsv(melting_path.string(), state.melting);
  Json doc;
  doc["inputs"] = Json::array();
  for (const auto& s : sources) {
    doc["inputs"].push_back({{"path", fs::absolute(s.path).string()}, {"gauge", s.gauge},
                             {"weights", s.weights}});
  }
  doc["rho"] = std::vector<double>(state.rho.data(), state.rho.data() + state.rho.size());
  doc["melting"] = melting_name;
  doc["loss_history"] = Json::array();
  for (const auto& [k, loss] : state.loss_history) doc["loss_history"].push_back({k, loss});
  doc["loss_increased"] = state.loss_increased;
  auto out = open_output(manifest_path);
  out << doc.dump(2) << '\n';
}

BarycenterState read_state(const std::string& manifest_path) {
  auto in = open_input(manifest_path);
  Json doc;
  try {
    in >> doc;
    BarycenterState state;
    std::vector<GmSpace> spaces;
    for (const auto& item : doc.at("inputs")) {
      SpaceSource s{item.at("path").get<std::string>(), item.value("gauge", std::string("auto")),
                    item.value("weights", std::string{})};
      spaces.push_back(load_space(s).space);
    }
    state.inputs = share(std::move(spaces));
    const auto rho = doc.at("rho").get<std::vector<double>>();
    state.rho = Eigen::Map<const Vector>(rho.data(), static_cast<Index>(rho.size()));
    const fs::path melting = fs::path(manifest_path).parent_path() / doc.at("melting").get<std::string>();
    state.melting = read_mcoo_tsv(melting.string());
    for (const auto& entry : doc.at("loss_history")) {
      state.loss_history.emplace_back(entry.at(0).get<int>(), entry.at(1).get<double>());
    }
    state.loss_increased = doc.value("loss_increased", false);
    return state;
  } catch (const Json::exception& e) {
    throw IoError(manifest_path + ": " + e.what());
  }
}

}  // namespace tgw
