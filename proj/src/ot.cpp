#include "tgw/ot.hpp"

#include "tgw/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tgw {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kQuantum = 1'000'000'000'000;  // masses resolved to 1e-12

std::int64_t transport_total(Index n, Index m) {
  const std::int64_t l = std::lcm(static_cast<std::int64_t>(n), static_cast<std::int64_t>(m));
  if (l > kQuantum) return kQuantum;
  return l * (kQuantum / l);
}

void check_marginals(const Matrix& cost, const Vector& xi, const Vector& upsilon) {
  require(cost.rows() == xi.size() && cost.cols() == upsilon.size(),
          "cost shape does not match marginals");
  require(cost.allFinite(), "non-finite cost");
  require_probability(as_span(xi), "source marginal");
  require_probability(as_span(upsilon), "target marginal");
}

// The support of a vertex plan is a forest, so its masses are fixed by the
// marginals. Peeling leaves recovers them from the original doubles and removes
// the rounding introduced by the integer flow.
void repair_tree_masses(std::vector<CouplingEntry>& entries, const Vector& xi,
                        const Vector& upsilon) {
  const Index n = xi.size();
  const auto nodes = static_cast<std::size_t>(n + upsilon.size());
  std::vector<double> rem(nodes);
  for (Index i = 0; i < n; ++i) rem[static_cast<std::size_t>(i)] = xi(i);
  for (Index j = 0; j < upsilon.size(); ++j) rem[static_cast<std::size_t>(n + j)] = upsilon(j);
  std::vector<std::vector<std::size_t>> incident(nodes);
  for (std::size_t e = 0; e < entries.size(); ++e) {
    incident[static_cast<std::size_t>(entries[e].row)].push_back(e);
    incident[static_cast<std::size_t>(n + entries[e].col)].push_back(e);
  }
  std::vector<std::size_t> degree(nodes);
  std::vector<std::size_t> leaves;
  for (std::size_t v = 0; v < nodes; ++v) {
    degree[v] = incident[v].size();
    if (degree[v] == 1) leaves.push_back(v);
  }
  std::vector<bool> done(entries.size(), false);
  while (!leaves.empty()) {
    const std::size_t v = leaves.back();
    leaves.pop_back();
    if (degree[v] != 1) continue;
    std::size_t e = 0;
    for (std::size_t c : incident[v]) {
      if (!done[c]) e = c;
    }
    const double mass = std::max(rem[v], 0.0);
    entries[e].mass = mass;
    done[e] = true;
    const auto r = static_cast<std::size_t>(entries[e].row);
    const auto c = static_cast<std::size_t>(n + entries[e].col);
    const std::size_t other = v == r ? c : r;
    rem[v] = 0.0;
    rem[other] -= mass;
    --degree[v];
    if (--degree[other] == 1) leaves.push_back(other);
  }
  for (std::size_t e = 0; e < entries.size(); ++e) {
    if (!done[e]) throw SolverError("network simplex returned a plan with a cycle");
  }
}

}  // namespace

std::vector<std::int64_t> quantize(const Vector& weights, std::int64_t total) {
  const auto n = static_cast<std::size_t>(weights.size());
  const double sum = weights.sum();
  std::vector<std::int64_t> out(n);
  std::vector<double> remainder(n);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = weights(static_cast<Index>(i)) / sum * static_cast<double>(total);
    const double base = std::floor(x);
    out[i] = static_cast<std::int64_t>(base);
    remainder[i] = x - base;
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (assigned < total) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % n, ++assigned) ++out[order[k]];
  } else if (assigned > total) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] < remainder[b]; });
    for (std::size_t k = 0; assigned > total; k = (k + 1) % n) {
      if (out[order[k]] > 0) {
        --out[order[k]];
        --assigned;
      }
    }
  }
  return out;
}

Coupling solve_exact(const Matrix& cost, const Vector& xi, const Vector& upsilon) {
  check_marginals(cost, xi, upsilon);
  const Index n = cost.rows();
  const Index m = cost.cols();
  const std::int64_t total = transport_total(n, m);
  TransportSimplex simplex(cost, quantize(xi, total), quantize(upsilon, total));
  const auto result = simplex.run();
  if (!result.optimal) throw SolverError("network simplex did not reach optimality");

  std::vector<CouplingEntry> entries;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (result.flow[static_cast<std::size_t>(i * m + j)] > 0) entries.push_back({i, j, 0.0});
    }
  }
  repair_tree_masses(entries, xi, upsilon);
  return Coupling::from_entries(n, m, entries);
}

namespace {

// Shared scaling loop: pi_ij = exp(u_i + v_j + log_kernel_ij).
EntropicResult scaling(const Matrix& log_kernel, const Vector& xi, const Vector& upsilon,
                       int max_iter, double tol, bool strict) {
  const Index n = log_kernel.rows();
  const Index m = log_kernel.cols();
  Vector log_xi = xi.array().log();
  Vector log_up = upsilon.array().log();
  Vector u = Vector::Zero(n);
  Vector v = Vector::Zero(m);
  Vector lse_row(n);

  auto row_lse = [&](Index i) {
    double mx = kNegInf;
    for (Index j = 0; j < m; ++j) mx = std::max(mx, log_kernel(i, j) + v(j));
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (Index j = 0; j < m; ++j) s += std::exp(log_kernel(i, j) + v(j) - mx);
    return mx + std::log(s);
  };
  auto update_v = [&]() {
    // Column pass over the column-major kernel.
    for (Index j = 0; j < m; ++j) {
      if (upsilon(j) <= 0.0) {
        v(j) = kNegInf;
        continue;
      }
      double mx = kNegInf;
      for (Index i = 0; i < n; ++i) mx = std::max(mx, log_kernel(i, j) + u(i));
      if (mx == kNegInf) throw SolverError("entropic solve: target atom unreachable");
      double s = 0.0;
      for (Index i = 0; i < n; ++i) s += std::exp(log_kernel(i, j) + u(i) - mx);
      v(j) = log_up(j) - (mx + std::log(s));
    }
  };

  EntropicResult result;
  for (Index i = 0; i < n; ++i) {
    if (xi(i) <= 0.0) u(i) = kNegInf;
  }
  update_v();
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    double violation = 0.0;
    for (Index i = 0; i < n; ++i) {
      lse_row(i) = row_lse(i);
      if (xi(i) > 0.0) {
        if (lse_row(i) == kNegInf) throw SolverError("entropic solve: source atom unreachable");
        violation += std::abs(std::exp(u(i) + lse_row(i)) - xi(i));
      }
    }
    if (!std::isfinite(violation)) {
      throw SolverError("entropic solve: non-finite scaling (epsilon too small?)", violation);
    }
    result.violations.push_back(violation);
    result.violation = violation;
    result.iterations = it;
    if (violation <= tol) {
      converged = true;
      break;
    }
    for (Index i = 0; i < n; ++i) u(i) = xi(i) > 0.0 ? log_xi(i) - lse_row(i) : kNegInf;
    update_v();
  }
  result.converged = converged;
  if (!converged && strict) {
    throw SolverError("entropic solve did not converge in " + std::to_string(max_iter) +
                          " iterations; marginal violation " + std::to_string(result.violation),
                      result.violation);
  }

  Matrix plan(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) plan(i, j) = std::exp(u(i) + v(j) + log_kernel(i, j));
  }
  if (!plan.allFinite()) throw SolverError("entropic solve: non-finite plan");
  result.plan = Coupling::from_dense(converged ? plan : round_to_polytope(plan, xi, upsilon));
  return result;
}

}  // namespace

Matrix round_to_polytope(const Matrix& plan, const Vector& xi, const Vector& upsilon) {
  Matrix f = plan;
  const Vector rows = f.rowwise().sum();
  for (Index i = 0; i < f.rows(); ++i) {
    if (rows(i) > xi(i)) f.row(i) *= xi(i) / rows(i);
  }
  const Vector cols = f.colwise().sum().transpose();
  for (Index j = 0; j < f.cols(); ++j) {
    if (cols(j) > upsilon(j)) f.col(j) *= upsilon(j) / cols(j);
  }
  const Vector err_r = (xi - f.rowwise().sum()).cwiseMax(0.0);
  const Vector err_c = (upsilon - f.colwise().sum().transpose()).cwiseMax(0.0);
  const double total = err_r.sum();
  if (total > 0.0) f += err_r * err_c.transpose() / total;
  return f;
}

EntropicResult sinkhorn(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                        double epsilon, int max_iter, double tol, bool strict) {
  check_marginals(cost, xi, upsilon);
  require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive");
  // The product reference only shifts the potentials; it is folded into them.
  Matrix log_kernel = -cost / epsilon;
  return scaling(log_kernel, xi, upsilon, max_iter, tol, strict);
}

EntropicResult kl_prox(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                       const Coupling& prior, double epsilon, int max_iter, double tol,
                       bool strict) {
  check_marginals(cost, xi, upsilon);
  require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive");
  require(prior.rows() == cost.rows() && prior.cols() == cost.cols(),
          "prior shape does not match cost");
  bool negative = false;
  prior.for_each([&](Index, Index, double mass) { negative = negative || mass < 0.0; });
  require(!negative, "prior has negative mass");
  Matrix log_kernel = Matrix::Constant(cost.rows(), cost.cols(), kNegInf);
  prior.for_each([&](Index i, Index j, double mass) {
    log_kernel(i, j) = std::log(mass) - cost(i, j) / epsilon;
  });
  return scaling(log_kernel, xi, upsilon, max_iter, tol, strict);
}

Coupling solve_sinkhorn(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                        double epsilon, int max_iter, double tol) {
  return sinkhorn(cost, xi, upsilon, epsilon, max_iter, tol).plan;
}

Coupling solve_kl_prox(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                       const Coupling& prior, double epsilon, int max_iter, double tol) {
  return kl_prox(cost, xi, upsilon, prior, epsilon, max_iter, tol).plan;
}

Coupling solve_ot(const Matrix& cost, const Vector& xi, const Vector& upsilon,
                  const OtOptions& opts, const Coupling* prior, bool* converged) {
  if (converged) *converged = true;
  EntropicResult r;
  switch (opts.method) {
    case OtMethod::ExactFlow: return solve_exact(cost, xi, upsilon);
    case OtMethod::Sinkhorn:
      r = sinkhorn(cost, xi, upsilon, opts.epsilon, opts.max_iter, opts.tol, opts.strict);
      break;
    case OtMethod::KlProx:
      require(prior != nullptr, "proximal step needs a prior plan");
      r = kl_prox(cost, xi, upsilon, *prior, opts.epsilon, opts.max_iter, opts.tol, opts.strict);
      break;
    default: throw PreconditionError("unknown OT method");
  }
  if (converged) *converged = r.converged;
  return std::move(r.plan);
}

}  // namespace tgw
