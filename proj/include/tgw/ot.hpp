#pragma once

#include "tgw/coupling.hpp"

#include <cstdint>
#include <vector>

namespace tgw {

// Linear OT solvers used as the inner step of the GW block-coordinate descent.
// KlProx regularizes towards the previous plan instead of the product measure.
enum class OtMethod { ExactFlow, Sinkhorn, KlProx };

struct OtOptions {
  OtMethod method = OtMethod::ExactFlow;
  double epsilon = 1e-2;
  int max_iter = 20000;
  double tol = 1e-10;  // l1 marginal violation
  // When false, an entropic solve that misses `tol` returns its last iterate
  // rounded onto the transport polytope instead of throwing.
  bool strict = true;
};

// Exact Kantorovich solve by network simplex. The result is a vertex of the
// transport polytope with at most n + m - 1 entries.
Coupling solve_exact(const Matrix& cost, const Vector& xi, const Vector& upsilon);

struct EntropicResult {
  Coupling plan;
  int iterations = 0;
  double violation = 0.0;         // final l1 row-marginal violation
  std::vector<double> violations;  // one entry per full iteration
  bool converged = false;
};

// Log-domain Sinkhorn for <C, pi> + eps KL(pi, xi (x) upsilon).
EntropicResult sinkhorn(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                        double epsilon, int max_iter = 20000, double tol = 1e-10,
                        bool strict = true);

// Log-domain scaling for <C, pi> + eps KL(pi, prior) over Pi(xi, upsilon).
EntropicResult kl_prox(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                       const Coupling& prior, double epsilon, int max_iter = 20000,
                       double tol = 1e-10, bool strict = true);

Coupling solve_sinkhorn(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                        double epsilon, int max_iter = 20000, double tol = 1e-10);

Coupling solve_kl_prox(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                       const Coupling& prior, double epsilon, int max_iter = 20000,
                       double tol = 1e-10);

// Dispatch on opts.method. `prior` is required for KlProx. `converged` is set to
// false when a non-strict entropic solve stopped short of its tolerance.
Coupling solve_ot(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                  const OtOptions& opts, const Coupling* prior = nullptr,
                  bool* converged = nullptr);

// Moves an approximate plan onto Pi(xi, upsilon): rows and columns are scaled down
// to their targets, then the deficit is added as a rank-one correction.
Matrix round_to_polytope(const Matrix& plan, const Vector& xi, const Vector& upsilon);

// Integer supplies summing to `total`, proportional to `weights`
// (largest-remainder rounding).
std::vector<std::int64_t> quantize(const Vector& weights, std::int64_t total);

}  // namespace tgw
