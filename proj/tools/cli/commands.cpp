#include "cli/cli.hpp"

#include "tgw/embed.hpp"
#include "tgw/gw.hpp"
#include "tgw/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace tgw::cli {

namespace fs = std::filesystem;

void log_event(const Json& event) { std::cerr << event.dump() << '\n'; }

GwOptions gw_options(const RunConfig& c) {
  GwOptions o;
  if (c.solver == "bcd-exact") {
    o.inner.method = OtMethod::ExactFlow;
  } else if (c.solver == "bcd-sinkhorn") {
    o.inner.method = OtMethod::Sinkhorn;
  } else if (c.solver == "proximal") {
    o.inner.method = OtMethod::KlProx;
  } else {
    throw PreconditionError("unknown solver '" + c.solver + "'");
  }
  o.inner.epsilon = c.epsilon;
  o.inner.tol = c.inner_tol;
  o.inner.max_iter = c.inner_max_iter;
  o.inner.strict = c.strict;
  o.outer_max_iter = c.gw_max_iter;
  o.outer_tol = c.gw_tol;
  o.restarts = c.restarts;
  o.init.seed = c.seed;
  return o;
}

BaryOptions bary_options(const RunConfig& c) {
  BaryOptions o;
  o.gw = gw_options(c);
  o.glue_rule = c.glue == "maxrule" ? GlueRule::MaxRule : GlueRule::NwCorner;
  o.max_outer = c.outer_max;
  if (c.stop == "fixed") {
    o.stop = StopRule::fixed_iters(c.outer_max);
  } else if (c.stop == "rel-tol") {
    o.stop = StopRule::rel_tol(c.outer_tol > 0.0 ? c.outer_tol : 1e-9);
  } else {
    o.stop = StopRule::loss_increase();
  }
  o.threads = c.threads;
  o.on_iteration = [](const IterationInfo& info) {
    log_event({{"event", "iteration"}, {"iteration", info.iteration}, {"loss", info.loss},
               {"support", info.melting != nullptr ? info.melting->support_size() : 0}});
  };
  return o;
}

Vector rho_of(const RunConfig& c, Index n) {
  if (c.rho.empty()) return Vector::Constant(n, 1.0 / static_cast<double>(n));
  require(static_cast<Index>(c.rho.size()) == n, "--rho needs one entry per input");
  const Vector rho = Eigen::Map<const Vector>(c.rho.data(), n);
  require_probability(as_span(rho), "rho", 1e-9);
  return rho;
}

std::vector<Vector> rho_grid(Index n, int resolution) {
  require(n >= 1, "grid needs at least one input");
  require(resolution >= 1, "grid resolution must be positive");
  std::vector<Vector> out;
  std::vector<int> parts(static_cast<std::size_t>(n), 0);
  // compositions of `resolution` into n parts, first coordinate descending
  auto rec = [&](auto&& self, Index i, int left) -> void {
    if (i == n - 1) {
      parts[static_cast<std::size_t>(i)] = left;
      Vector r(n);
      for (Index k = 0; k < n; ++k) r(k) = parts[static_cast<std::size_t>(k)] / static_cast<double>(resolution);
      out.push_back(r);
      return;
    }
    for (int v = left; v >= 0; --v) {
      parts[static_cast<std::size_t>(i)] = v;
      self(self, i + 1, left - v);
    }
  };
  rec(rec, 0, resolution);
  return out;
}

namespace {

std::vector<LoadedSpace> load_inputs(const RunConfig& c, std::size_t min_count, bool normalize) {
  if (c.inputs.size() < min_count) {
    throw PreconditionError(c.subcommand + " needs at least " + std::to_string(min_count) + " inputs");
  }
  require(c.weights.empty() || c.weights.size() == c.inputs.size(), "--weights needs one file per input");
  std::vector<LoadedSpace> out;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    SpaceSource src{c.inputs[i], c.gauge, c.weights.empty() ? std::string{} : c.weights[i]};
    LoadedSpace s = load_space(src);
    if (normalize) s.space = normalize_diameter(s.space);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SpaceSource> sources_of(const RunConfig& c) {
  std::vector<SpaceSource> out;
  for (std::size_t i = 0; i < c.inputs.size(); ++i) {
    out.push_back({c.inputs[i], c.gauge, c.weights.empty() ? std::string{} : c.weights[i]});
  }
  return out;
}

std::vector<GmSpace> spaces_of(const std::vector<LoadedSpace>& loaded) {
  std::vector<GmSpace> out;
  for (const auto& l : loaded) out.push_back(l.space);
  return out;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

void write_json(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

Index input_index(int one_based, std::size_t count, const char* what) {
  require(one_based >= 1 && static_cast<std::size_t>(one_based) <= count,
          std::string(what) + " must name an input between 1 and " + std::to_string(count));
  return one_based - 1;
}

Json history_json(const BarycenterState& s) {
  Json h = Json::array();
  for (const auto& [k, loss] : s.loss_history) h.push_back({{"iteration", k}, {"loss", loss}});
  return h;
}

std::vector<std::string> read_lines(const std::string& path) {
  if (!fs::exists(path)) throw IoError("input not found: " + path);
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

Matrix kernel(const Matrix& d) { return (-10.0 * d.array()).exp().matrix(); }

double accuracy(const Matrix& confusion) { return confusion.diagonal().mean(); }

}  // namespace

int cmd_gw(const RunConfig& c) {
  require(c.inputs.size() == 2, "gw needs exactly two inputs");
  const auto loaded = load_inputs(c, 2, c.normalize);
  const GmSpace& x = loaded[0].space;
  const GmSpace& y = loaded[1].space;
  const GwOptions opts = gw_options(c);
  GwResult best = solve_gw(x, y, opts);
  // equal measures admit the identity plan as a second starting point
  if (x.size() == y.size() && x.weights == y.weights) {
    GwOptions id = opts;
    id.init = GwInit::identity();
    id.restarts = 0;
    GwResult r = solve_gw(x, y, id);
    if (r.value < best.value) best = std::move(r);
  }
  for (std::size_t k = 0; k < best.history.size(); ++k) {
    log_event({{"event", "gw_iteration"}, {"iteration", k}, {"objective", best.history[k]}});
  }
  if (best.inexact_steps > 0) {
    log_event({{"event", "warning"}, {"message", "inner solves stopped short of tolerance"},
               {"count", best.inexact_steps}});
  }
  write_coo_tsv(out_path(c, "plan.coo.tsv"), best.plan);
  write_json(out_path(c, "gw.json"), {{"value", best.value},
                                      {"iterations", best.iterations},
                                      {"converged", best.converged},
                                      {"inexact_steps", best.inexact_steps},
                                      {"history", best.history}});
  std::printf("%.6f\n", best.value);
  return 0;
}

namespace {

BarycenterState run_iteration(const RunConfig& c, const std::vector<LoadedSpace>& loaded,
                              const Vector& rho) {
  const auto inputs = share(spaces_of(loaded));
  const Index init = input_index(c.init, loaded.size(), "--init");
  BarycenterState state = iterate(inputs, rho, init, bary_options(c));
  for (const auto& w : state.warnings) log_event({{"event", "warning"}, {"message", w}});
  if (state.loss_increased) log_event({{"event", "loss_increased"}});
  write_state(out_path(c, "state.json"), state, sources_of(c));
  return state;
}

}  // namespace

int cmd_barycenter(const RunConfig& c) {
  const auto loaded = load_inputs(c, 1, c.normalize);
  const Vector rho = rho_of(c, static_cast<Index>(loaded.size()));
  const BarycenterState state = run_iteration(c, loaded, rho);
  write_gmspace_json(out_path(c, "barycenter.json"), state.space());
  const double loss = state.loss_history.empty() ? 0.0 : state.loss_history.back().second;
  std::printf("%.6f\n", loss);
  return 0;
}

int cmd_interpolate(const RunConfig& c) {
  const auto loaded = load_inputs(c, 1, c.normalize);
  const auto n = static_cast<Index>(loaded.size());
  std::vector<Vector> grid;
  if (c.rho_grid > 0) {
    grid = rho_grid(n, c.rho_grid);
  } else if (!c.rho.empty()) {
    grid.push_back(rho_of(c, n));
  } else {
    grid = rho_grid(n, 4);
  }
  // one iteration serves every grid point
  const BarycenterState state = run_iteration(c, loaded, rho_of(c, n));
  bool embeddable = c.plot_gauge != "none";
  for (const auto& l : loaded) embeddable = embeddable && l.space.coords.has_value();
  const Index anchor = input_index(c.anchor, loaded.size(), "--anchor");
  const auto& anchor_faces = loaded[static_cast<std::size_t>(anchor)].faces;
  const std::vector<Face> faces =
      embeddable ? transfer_faces(state.melting, anchor, anchor_faces) : std::vector<Face>{};

  Json entries = Json::array();
  for (const Vector& rho : grid) {
    const std::string json_name = interpolation_name(rho, "json");
    write_gmspace_json(out_path(c, json_name), reweigh(state, rho));
    Json entry{{"rho", std::vector<double>(rho.data(), rho.data() + rho.size())}, {"space", json_name}};
    if (embeddable) {
      const EmbeddedBarycenter e = euclid_embed(state, rho, GaugeKind::SqEuclid, false);
      const PcaProjection p = pca_project(e.points, 3);
      const std::string mesh_name = interpolation_name(rho, faces.empty() ? "csv" : "off");
      if (faces.empty()) {
        write_csv_matrix(out_path(c, mesh_name), p.points, {"x", "y", "z"});
      } else {
        write_off(out_path(c, mesh_name), Mesh{p.points, faces});
      }
      entry["mesh"] = mesh_name;
      entry["diam"] = e.diameter;
      entry["pca"] = p.residual;
    }
    log_event({{"event", "interpolant"}, {"rho", entry["rho"]}, {"space", json_name}});
    entries.push_back(entry);
  }
  write_json(out_path(c, "report.json"),
             {{"loss_history", history_json(state)}, {"support", state.melting.support_size()},
              {"faces", faces.size()}, {"interpolants", entries}});
  return 0;
}

int cmd_classify(const RunConfig& c) {
  const auto loaded = load_inputs(c, 2, true);
  const auto spaces = spaces_of(loaded);
  std::vector<std::string> names;
  for (const auto& s : spaces) names.push_back(s.label);
  std::vector<std::string> label_text = c.labels.empty() ? names : read_lines(c.labels);
  require(label_text.size() == spaces.size(), "--labels needs one line per input");
  std::vector<std::string> classes;
  const std::vector<Index> labels = encode_labels(label_text, &classes);

  const GwOptions gw = gw_options(c);
  const PairwiseResult pw = pairwise_matrix(spaces, gw, 1, c.threads);
  for (Index i = 0; i < pw.values.rows(); ++i) {
    for (Index j = i + 1; j < pw.values.cols(); ++j) {
      log_event({{"event", "pair"}, {"i", i}, {"j", j}, {"gw", pw.values(i, j)}});
    }
  }
  write_csv_matrix(out_path(c, "gw.csv"), pw.values, names);
  const Matrix gw_conf = nn_confusion(pw.values, labels, c.nn_iterations, c.seed);
  write_csv_matrix(out_path(c, "confusion_gw.csv"), gw_conf, classes);
  write_csv_matrix(out_path(c, "kernel_gw.csv"), kernel(pw.values), names);

  BaryOptions bo = bary_options(c);
  const auto inputs = share(spaces);
  std::vector<Matrix> lgw;
  bo.on_iteration = [&](const IterationInfo& info) {
    log_event({{"event", "iteration"}, {"iteration", info.iteration}, {"loss", info.loss}});
    lgw.push_back(lgw_matrix(inputs, *info.melting));
  };
  const Index init = input_index(c.init, spaces.size(), "--init");
  const BarycenterState state = iterate(inputs, rho_of(c, static_cast<Index>(spaces.size())), init, bo);
  for (const auto& w : state.warnings) log_event({{"event", "warning"}, {"message", w}});
  // a fixpoint ends the loop early; the remaining iterations would repeat the last melting
  while (!lgw.empty() && lgw.size() < state.loss_history.size()) lgw.push_back(lgw.back());

  Json per_k = Json::array();
  for (std::size_t k = 0; k < lgw.size(); ++k) {
    const std::string tag = std::to_string(k + 1);
    write_csv_matrix(out_path(c, "lgw_" + tag + ".csv"), lgw[k], names);
    const Matrix conf = nn_confusion(lgw[k], labels, c.nn_iterations, c.seed);
    write_csv_matrix(out_path(c, "confusion_lgw_" + tag + ".csv"), conf, classes);
    write_csv_matrix(out_path(c, "kernel_lgw_" + tag + ".csv"), kernel(lgw[k]), names);
    Json entry{{"k", k + 1}, {"accuracy", accuracy(conf)}};
    if (pw.values.cwiseAbs().maxCoeff() > 0.0) {
      const MrePcc m = mre_pcc(pw.values, lgw[k]);
      entry["mre"] = m.mre;
      entry["pcc"] = std::isnan(m.pcc) ? Json(nullptr) : Json(m.pcc);
    }
    per_k.push_back(entry);
  }
  write_json(out_path(c, "summary.json"), {{"classes", classes},
                                           {"inputs", names},
                                           {"gw", {{"accuracy", accuracy(gw_conf)}}},
                                           {"lgw", per_k},
                                           {"loss_history", history_json(state)}});
  return 0;
}

int cmd_match(const RunConfig& c) {
  const auto loaded = load_inputs(c, 2, c.normalize);
  const Vector rho = rho_of(c, static_cast<Index>(loaded.size()));
  const BarycenterState state = run_iteration(c, loaded, rho);
  write_mcoo_tsv(out_path(c, "matching.mcoo.tsv"), state.melting);
  Json report{{"loss_history", history_json(state)}, {"support", state.melting.support_size()}};
  if (!c.truth.empty()) {
    const GroundTruth truth = read_ground_truth(c.truth, state.melting.sizes());
    const NodeCorrectness nc = node_correctness(state.melting, truth);
    report["nc1"] = nc.nc1;
    report["nc_all"] = nc.nc_all;
    std::printf("%.6f %.6f\n", nc.nc1, nc.nc_all);
  }
  write_json(out_path(c, "match.json"), report);
  return 0;
}

}  // namespace tgw::cli
