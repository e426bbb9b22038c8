#pragma once

#include "tgw/barycenter.hpp"
#include "tgw/coupling.hpp"
#include "tgw/coupling_algebra.hpp"
#include "tgw/gmspace.hpp"
#include "tgw/metrics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace tgw {

using Json = nlohmann::json;

// gmspace-json: {"n", "weights", "gauge" (nested rows or flat row-major)
// or "coords" + "gauge_kind", "label"}.
Json gmspace_to_json(const GmSpace& space);
GmSpace gmspace_from_json(const Json& doc);
GmSpace read_gmspace_json(const std::string& path);
void write_gmspace_json(const std::string& path, const GmSpace& space);

struct Mesh {
  Matrix vertices;  // k x 3
  std::vector<Face> faces;
};

// ASCII OFF / OBJ with triangular faces.
Mesh read_off(const std::string& path);
Mesh read_obj(const std::string& path);
Mesh read_mesh(const std::string& path);
void write_off(const std::string& path, const Mesh& mesh);

struct EdgeList {
  Index nodes = 0;
  std::vector<WeightedEdge> edges;
};

// Lines "u v [w]"; '#' starts a comment; w defaults to 1.
EdgeList read_edge_list(const std::string& path, Index min_nodes = 0);
void write_edge_list(const std::string& path, const EdgeList& graph);
// One weight per line; normalized on read.
Vector read_node_weights(const std::string& path);

// coo-tsv: header "n m", then "i<TAB>j<TAB>mass".
void write_coo_tsv(const std::string& path, const Coupling& plan);
Coupling read_coo_tsv(const std::string& path);

// mcoo-tsv: header "N s_1 ... s_N", then "i_1<TAB>...<TAB>i_N<TAB>mass".
void write_mcoo_tsv(const std::string& path, const MultiCoupling& plan);
MultiCoupling read_mcoo_tsv(const std::string& path);

// CSV with a header row of labels.
void write_csv_matrix(const std::string& path, const Matrix& values,
                      const std::vector<std::string>& labels);
Matrix read_csv_matrix(const std::string& path, std::vector<std::string>* labels = nullptr);

// Rows are correspondence tuples "x_1 ... x_N"; a row's index is the canonical id.
GroundTruth read_ground_truth(const std::string& path, const std::vector<Index>& sizes);

// How an input file is turned into a gm-space.
struct SpaceSource {
  std::string path;
  std::string gauge = "auto";  // auto, dijkstra, dijkstra_sq, adjacency, or a point kind
  std::string weights;         // optional node-weight file
};

struct LoadedSpace {
  GmSpace space;
  std::vector<Face> faces;  // only for meshes
};

// Dispatch on extension: .json gmspace-json, .off/.obj meshes, anything else an edge list.
LoadedSpace load_space(const SpaceSource& source);

// Manifest JSON next to an mcoo-tsv melting.
void write_state(const std::string& manifest_path, const BarycenterState& state,
                 const std::vector<SpaceSource>& sources);
BarycenterState read_state(const std::string& manifest_path);

std::string format_double(double value);

}  // namespace tgw
