#pragma once

#include "tgw/coupling_algebra.hpp"
#include "tgw/gmspace.hpp"
#include "tgw/gw.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace tgw {

using SpaceRef = std::shared_ptr<const GmSpace>;

// Wraps spaces into shared references.
std::vector<SpaceRef> share(std::vector<GmSpace> spaces);

// Gauge sum_i rho_i g_i(x_i, x_i') on the support tuples of mu, weighted by mu.
GmSpace mean_gauge(const std::vector<SpaceRef>& inputs, const MultiCoupling& mu,
                   const Vector& rho);

// 1/2 sum_ij rho_i rho_j sum |g_i - g_j|^2 dmu dmu.
double mgw_functional(const std::vector<SpaceRef>& inputs, const Vector& rho,
                      const MultiCoupling& mu);

// sum_i rho_i GW^2(X_i, Y) with approximate GW solves (an upper bound).
double gwb_loss(const std::vector<SpaceRef>& inputs, const Vector& rho, const GmSpace& y,
                const GwOptions& opts);

enum class GlueRule { NwCorner, MaxRule };

struct StopRule {
  enum class Kind { LossIncrease, RelTol, FixedIters };
  Kind kind = Kind::LossIncrease;
  double tol = 1e-9;
  int iters = 3;

  static StopRule loss_increase() { return {}; }
  static StopRule rel_tol(double tol) { return {Kind::RelTol, tol, 0}; }
  static StopRule fixed_iters(int iters) { return {Kind::FixedIters, 0.0, iters}; }
};

// Plan over Y x X_i for the i-th input. `warm` is the plan induced by the
// current melting when one exists.
using GwStep = std::function<GwResult(const GmSpace& y, const GmSpace& x, Index i,
                                      const std::optional<Coupling>& warm)>;

struct IterationInfo {
  int iteration = 0;
  double loss = 0.0;
  const MultiCoupling* melting = nullptr;
};

struct BaryOptions {
  GlueRule glue_rule = GlueRule::NwCorner;
  GwOptions gw;
  int max_outer = 50;
  StopRule stop;
  GwStep step;  // replaces solve_gw when set
  std::function<void(const IterationInfo&)> on_iteration;
  std::size_t threads = 1;
};

struct BarycenterState {
  std::vector<SpaceRef> inputs;
  MultiCoupling melting;
  Vector rho;
  std::vector<std::pair<int, double>> loss_history;
  std::vector<Coupling> plans;  // plans over Y x X_i from the last GW step at `space()`
  bool loss_increased = false;
  std::vector<std::string> warnings;

  // (X_x, m_rho, mu) for the state's own rho.
  GmSpace space() const;
};

// Tangential fixpoint iteration starting from the input with index `init`.
// The first GW step uses (id, id) for that input without solving.
BarycenterState iterate(const std::vector<SpaceRef>& inputs, const Vector& rho, Index init,
                        const BaryOptions& opts);

// Same, starting from an arbitrary reference space.
BarycenterState iterate(const std::vector<SpaceRef>& inputs, const Vector& rho,
                        const GmSpace& init, const BaryOptions& opts);

// The state's support and masses with the mean gauge for another rho.
GmSpace reweigh(const BarycenterState& state, const Vector& rho);

// LGW_ij = F_GW(X_i, X_j, (P_i, P_j)_# mu).
Matrix lgw_matrix(const std::vector<SpaceRef>& inputs, const MultiCoupling& mu);

// Plan over the mean space of mu and X_i induced by the melting.
Coupling induced_plan(const MultiCoupling& mu, Index axis);

}  // namespace tgw
