#pragma once

#include "tgw/barycenter.hpp"
#include "tgw/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tgw::cli {

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  // Empty strings and zero counts mean "the subcommand's default".
  std::string gauge = "auto";
  std::vector<std::string> weights;  // one node-weight file per input, optional

  std::string solver;  // bcd-exact, bcd-sinkhorn, proximal
  double epsilon = 1e-2;
  double inner_tol = 1e-9;
  int inner_max_iter = 20000;
  int gw_max_iter = 200;
  double gw_tol = 1e-9;
  int restarts = 0;
  bool strict = false;

  std::string glue;  // nw, maxrule
  int outer_max = 0;
  double outer_tol = 0.0;   // > 0 switches the stop rule to a relative tolerance
  std::string stop;  // loss-increase, rel-tol, fixed
  std::vector<double> rho;
  int rho_grid = 0;
  int anchor = 1;  // 1-based
  int init = 1;    // 1-based input the iteration starts from
  bool normalize = false;
  std::string plot_gauge = "sq-euclid";  // or none

  std::string labels;
  std::string truth;
  int nn_iterations = 1000;

  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string out = "tgw_out";
};

// Parses argv, merging a --config JSON file underneath explicit flags.
// Returns false when only help was requested.
bool parse_args(int argc, char** argv, RunConfig& config);

// Fills the subcommand defaults left open by flags and config file.
void resolve_defaults(RunConfig& config);

void apply_json(const Json& doc, RunConfig& config, const std::vector<std::string>& explicit_keys);

GwOptions gw_options(const RunConfig& config);
BaryOptions bary_options(const RunConfig& config);
Vector rho_of(const RunConfig& config, Index n);
std::vector<Vector> rho_grid(Index n, int resolution);

// Line-oriented JSON events on stderr.
void log_event(const Json& event);

int cmd_gw(const RunConfig& config);
int cmd_barycenter(const RunConfig& config);
int cmd_interpolate(const RunConfig& config);
int cmd_classify(const RunConfig& config);
int cmd_match(const RunConfig& config);

// Exit codes: 0 ok, 2 I/O error, 3 precondition violation, 4 solver failure.
int run_cli(int argc, char** argv);

}  // namespace tgw::cli
