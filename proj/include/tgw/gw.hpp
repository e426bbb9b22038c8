#pragma once

#include "tgw/coupling.hpp"
#include "tgw/gmspace.hpp"
#include "tgw/ot.hpp"

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace tgw {

enum class InitKind { Product, Identity, Given, Random };

struct GwInit {
  InitKind kind = InitKind::Product;
  Coupling plan;           // used by Given
  std::uint64_t seed = 0;  // used by Random

  static GwInit product() { return {}; }
  static GwInit identity() { return {InitKind::Identity, {}, 0}; }
  static GwInit given(Coupling plan) { return {InitKind::Given, std::move(plan), 0}; }
  static GwInit random(std::uint64_t seed) { return {InitKind::Random, {}, seed}; }
};

struct GwOptions {
  OtOptions inner;
  int outer_max_iter = 200;
  double outer_tol = 1e-9;  // relative change of the squared functional
  GwInit init;
  int restarts = 0;  // extra runs from Random(init.seed + r), best kept
};

struct GwResult {
  Coupling plan;
  double value = 0.0;  // F_GW at plan, i.e. the square root of the quadratic objective
  int iterations = 0;
  bool converged = false;
  int inexact_steps = 0;  // non-strict inner solves that stopped short of tolerance
  std::vector<double> history;  // squared objective of the iterates, starting at the init
};

// (sum |g(x,x') - h(y,y')|^2 dpi dpi)^(1/2). Exactly symmetric under swapping
// the spaces and transposing the plan.
double gw_functional(const GmSpace& x, const GmSpace& y, const Coupling& plan);

// C[i][j] = sum_kl |g[i][k] - h[j][l]|^2 gamma[k][l].
Matrix local_cost(const GmSpace& x, const GmSpace& y, const Coupling& gamma);

// Block-coordinate descent on the bi-convex relaxation.
GwResult solve_gw(const GmSpace& x, const GmSpace& y, const GwOptions& opts = {});

// Exhaustive search over permutation plans; n = m <= 8, uniform weights.
GwResult brute_force_gw(const GmSpace& x, const GmSpace& y);

// Random vertex of Pi(xi, upsilon): north-west corner rule on shuffled marginals.
Coupling random_vertex(const Vector& xi, const Vector& upsilon, std::uint64_t seed);

// Composition of pi_ik (X_i x X_k) and pi_kj (X_k x X_j) by gluing along X_k.
Coupling compose_plans(const Coupling& pi_ik, const Coupling& pi_kj);

struct PairwiseResult {
  Matrix values;
  std::map<std::pair<Index, Index>, Coupling> plans;  // keys (i, j) with i < j
  int restarts_applied = 0;
};

// All pairwise GW values with triangle-inequality restarts.
PairwiseResult pairwise_matrix(const std::vector<GmSpace>& spaces, const GwOptions& opts,
                               int restart_rounds = 1, std::size_t threads = 0);

}  // namespace tgw
