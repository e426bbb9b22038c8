#include "cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>

namespace tgw::cli {

namespace {

std::string normalize_key(std::string key) {
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

void add_options(CLI::App& app, RunConfig& c, std::string& config_file) {
  app.add_option("inputs", c.inputs, "input spaces (.json, .off, .obj or edge list)");
  app.add_option("--config", config_file, "JSON file with defaults for any flag");
  app.add_option("--gauge", c.gauge, "auto, dijkstra, dijkstra_sq, adjacency or a point gauge");
  app.add_option("--weights", c.weights, "node-weight file per input");
  app.add_option("--solver", c.solver, "bcd-exact, bcd-sinkhorn or proximal")
      ->check(CLI::IsMember({"bcd-exact", "bcd-sinkhorn", "proximal"}));
  app.add_option("--epsilon", c.epsilon, "entropic regularization");
  app.add_option("--inner-tol", c.inner_tol, "marginal tolerance of entropic solves");
  app.add_option("--inner-max-iter", c.inner_max_iter);
  app.add_option("--gw-max-iter", c.gw_max_iter, "block-coordinate descent steps");
  app.add_option("--gw-tol", c.gw_tol);
  app.add_option("--restarts", c.restarts, "random restarts per GW solve");
  app.add_flag("--strict", c.strict, "fail on entropic non-convergence");
  app.add_option("--glue", c.glue, "nw or maxrule")->check(CLI::IsMember({"nw", "maxrule"}));
  app.add_option("--outer-max", c.outer_max, "outer iterations of the barycenter loop");
  app.add_option("--outer-tol", c.outer_tol, "relative loss change that stops the loop");
  app.add_option("--stop", c.stop, "loss-increase, rel-tol or fixed")
      ->check(CLI::IsMember({"loss-increase", "rel-tol", "fixed"}));
  app.add_option("--rho", c.rho, "barycentric coordinates")->delimiter(',');
  app.add_option("--rho-grid", c.rho_grid, "simplex grid resolution");
  app.add_option("--anchor", c.anchor, "input whose faces are transferred (1-based)");
  app.add_option("--init", c.init, "input the iteration starts from (1-based)");
  app.add_flag("--normalize", c.normalize, "scale every gauge to diameter one");
  app.add_option("--plot-gauge", c.plot_gauge, "sq-euclid or none")
      ->check(CLI::IsMember({"sq-euclid", "none"}));
  app.add_option("--labels", c.labels, "one class label per input");
  app.add_option("--truth", c.truth, "ground-truth correspondences");
  app.add_option("--nn-iterations", c.nn_iterations);
  app.add_option("--seed", c.seed);
  app.add_option("--threads", c.threads, "worker threads, 0 for one per core");
  app.add_option("--out", c.out, "output directory");
}

}  // namespace

void apply_json(const Json& doc, RunConfig& c, const std::vector<std::string>& explicit_keys) {
  if (!doc.is_object()) throw IoError("config file must hold a JSON object");
  for (const auto& [raw, value] : doc.items()) {
    const std::string key = normalize_key(raw);
    if (std::find(explicit_keys.begin(), explicit_keys.end(), key) != explicit_keys.end()) continue;
    try {
      if (key == "inputs") c.inputs = value.get<std::vector<std::string>>();
      else if (key == "gauge") c.gauge = value.get<std::string>();
      else if (key == "weights") c.weights = value.get<std::vector<std::string>>();
      else if (key == "solver") c.solver = value.get<std::string>();
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "inner_tol") c.inner_tol = value.get<double>();
      else if (key == "inner_max_iter") c.inner_max_iter = value.get<int>();
      else if (key == "gw_max_iter") c.gw_max_iter = value.get<int>();
      else if (key == "gw_tol") c.gw_tol = value.get<double>();
      else if (key == "restarts") c.restarts = value.get<int>();
      else if (key == "strict") c.strict = value.get<bool>();
      else if (key == "glue") c.glue = value.get<std::string>();
      else if (key == "outer_max") c.outer_max = value.get<int>();
      else if (key == "outer_tol") c.outer_tol = value.get<double>();
      else if (key == "stop") c.stop = value.get<std::string>();
      else if (key == "rho") c.rho = value.get<std::vector<double>>();
      else if (key == "rho_grid") c.rho_grid = value.get<int>();
      else if (key == "anchor") c.anchor = value.get<int>();
      else if (key == "init") c.init = value.get<int>();
      else if (key == "normalize") c.normalize = value.get<bool>();
      else if (key == "plot_gauge") c.plot_gauge = value.get<std::string>();
      else if (key == "labels") c.labels = value.get<std::string>();
      else if (key == "truth") c.truth = value.get<std::string>();
      else if (key == "nn_iterations") c.nn_iterations = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "threads") c.threads = value.get<std::size_t>();
      else if (key == "out") c.out = value.get<std::string>();
      else throw PreconditionError("unknown config key '" + raw + "'");
    } catch (const Json::exception& e) {
      throw PreconditionError("config key '" + raw + "': " + e.what());
    }
  }
}

void resolve_defaults(RunConfig& c) {
  const bool match = c.subcommand == "match";
  if (c.solver.empty()) c.solver = match ? "proximal" : "bcd-exact";
  if (c.glue.empty()) c.glue = match ? "maxrule" : "nw";
  if (match && c.gauge == "auto") c.gauge = "adjacency";
  if (c.stop.empty()) {
    c.stop = c.subcommand == "interpolate" || c.subcommand == "classify" ? "fixed"
             : c.outer_tol > 0.0                                         ? "rel-tol"
                                                                         : "loss-increase";
  }
  if (c.outer_max <= 0) {
    c.outer_max = c.subcommand == "interpolate" ? 3
                  : c.subcommand == "classify"  ? 5
                  : match                       ? 20
                                                : 50;
  }
}

bool parse_args(int argc, char** argv, RunConfig& config) {
  CLI::App app{"Gromov-Wasserstein barycenters, interpolation, classification and matching"};
  app.require_subcommand(1);
  std::string config_file;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gw", "GW distance and plan between two spaces"},
      {"barycenter", "fixpoint iteration for a barycenter"},
      {"interpolate", "barycenters over a grid of barycentric coordinates"},
      {"classify", "pairwise GW, LGW approximations and nearest-neighbour confusion"},
      {"match", "multi-graph matching with the maximum rule"}};
  for (const auto& [name, help] : commands) add_options(*app.add_subcommand(name, help), config, config_file);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return false;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return false;
  } catch (const CLI::ParseError& e) {
    throw PreconditionError(e.what());
  }
  const CLI::App* sub = app.get_subcommands().front();
  config.subcommand = sub->get_name();

  if (!config_file.empty()) {
    std::vector<std::string> explicit_keys;
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->count() == 0) continue;
      const std::string name = opt->get_name(false, true);
      explicit_keys.push_back(normalize_key(opt->get_lnames().empty() ? name : opt->get_lnames().front()));
    }
    std::ifstream in(config_file);
    if (!in) throw IoError("input not found: " + config_file);
    Json doc;
    try {
      in >> doc;
    } catch (const Json::exception& e) {
      throw IoError(config_file + ": " + e.what());
    }
    apply_json(doc, config, explicit_keys);
  }
  resolve_defaults(config);
  return true;
}

}  // namespace tgw::cli
