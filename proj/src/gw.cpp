#include "tgw/gw.hpp"

#include "tgw/coupling_algebra.hpp"
#include "tgw/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tgw {

namespace {

constexpr double kPlanTol = 1e-8;

void check_space(const GmSpace& s, const char* what) {
  require(s.size() >= 1, std::string(what) + ": empty space");
  require(s.gauge.rows() == s.size() && s.gauge.cols() == s.size(),
          std::string(what) + ": gauge shape does not match weights");
  require_probability(as_span(s.weights), std::string(what) + " weights");
}

// sum over pairs of plan entries; no cancellation, so tiny values stay accurate.
double pair_sum(const Matrix& g, const Matrix& h, const std::vector<CouplingEntry>& entries) {
  double total = 0.0;
  for (const auto& a : entries) {
    double row = 0.0;
    for (const auto& b : entries) {
      const double d = g(a.row, b.row) - h(a.col, b.col);
      row += b.mass * d * d;
    }
    total += a.mass * row;
  }
  return total;
}

double expansion_sum(const GmSpace& x, const GmSpace& y, const Coupling& plan) {
  return plan.dot(local_cost(x, y, plan));
}

bool prefer_pair_sum(const Coupling& plan) {
  const double nnz = static_cast<double>(plan.nnz());
  const double n = static_cast<double>(plan.rows());
  const double m = static_cast<double>(plan.cols());
  return nnz * nnz <= 4.0 * (n * n * m + n * m * m);
}

double gauge_scale(const GmSpace& x, const GmSpace& y) {
  const double s = x.gauge.cwiseAbs().maxCoeff() + y.gauge.cwiseAbs().maxCoeff();
  return std::max(s * s, 1e-300);
}

Coupling initial_plan(const GmSpace& x, const GmSpace& y, const GwInit& init) {
  switch (init.kind) {
    case InitKind::Product: return Coupling::product(x.weights, y.weights);
    case InitKind::Identity:
      require(x.size() == y.size(), "identity init needs equal sizes");
      require((x.weights - y.weights).cwiseAbs().maxCoeff() <= 1e-12,
              "identity init needs equal weights");
      return Coupling::identity(x.weights);
    case InitKind::Given:
      require(init.plan.rows() == x.size() && init.plan.cols() == y.size(),
              "initial plan shape does not match the spaces");
      check_coupling(init.plan, x.weights, y.weights, kPlanTol);
      return init.plan;
    case InitKind::Random: return random_vertex(x.weights, y.weights, init.seed);
  }
  throw PreconditionError("unknown init kind");
}

GwResult run_bcd(const GmSpace& x, const GmSpace& y, const GwOptions& opts, Coupling plan) {
  const bool exact = opts.inner.method == OtMethod::ExactFlow;
  const double scale = gauge_scale(x, y);
  GwResult result;
  Matrix cost = local_cost(x, y, plan);
  double objective = plan.dot(cost);
  result.history.push_back(objective);
  for (int it = 1; it <= opts.outer_max_iter; ++it) {
    result.iterations = it;
    Coupling next;
    bool inner_ok = true;
    try {
      next = solve_ot(cost, x.weights, y.weights, opts.inner, &plan, &inner_ok);
    } catch (const SolverError& e) {
      throw SolverError("GW outer iteration " + std::to_string(it) + ": " + e.what(),
                        e.violation());
    }
    if (!inner_ok) ++result.inexact_steps;
    Matrix next_cost = local_cost(x, y, next);
    const double next_objective = next.dot(next_cost);
    if (exact && next_objective > objective + 1e-12 * scale) {
      // The exact step can only be trusted to descend on the bilinear form;
      // an increase of the quadratic objective means we are at a stationary plan.
      result.converged = true;
      break;
    }
    const double change = std::abs(objective - next_objective);
    plan = std::move(next);
    cost = std::move(next_cost);
    objective = next_objective;
    result.history.push_back(objective);
    if (change <= opts.outer_tol * std::abs(objective) + 1e-14 * scale) {
      result.converged = true;
      break;
    }
  }
  result.value = gw_functional(x, y, plan);
  result.plan = std::move(plan);
  return result;
}

}  // namespace

Matrix local_cost(const GmSpace& x, const GmSpace& y, const Coupling& gamma) {
  require(gamma.rows() == x.size() && gamma.cols() == y.size(),
          "plan shape does not match the spaces");
  const Vector a = gamma.row_marginal();
  const Vector b = gamma.col_marginal();
  const Vector ga = x.gauge.cwiseAbs2() * a;
  const Vector hb = y.gauge.cwiseAbs2() * b;
  // gamma * H^T as sparse x dense, then one dense product with G.
  const Matrix gamma_h = gamma.sparse() * y.gauge.transpose();
  Matrix cost = -2.0 * (x.gauge * gamma_h);
  cost.colwise() += ga;
  cost.rowwise() += hb.transpose();
  return cost;
}

double gw_functional(const GmSpace& x, const GmSpace& y, const Coupling& plan) {
  check_space(x, "first space");
  check_space(y, "second space");
  require(plan.rows() == x.size() && plan.cols() == y.size(),
          "plan shape does not match the spaces");
  check_coupling(plan, x.weights, y.weights, kPlanTol);
  const Coupling transposed = plan.transpose();
  double forward = 0.0;
  double backward = 0.0;
  if (prefer_pair_sum(plan)) {
    forward = pair_sum(x.gauge, y.gauge, plan.entries());
    backward = pair_sum(y.gauge, x.gauge, transposed.entries());
  } else {
    forward = expansion_sum(x, y, plan);
    backward = expansion_sum(y, x, transposed);
  }
  return std::sqrt(std::max(0.0, 0.5 * (forward + backward)));
}

Coupling random_vertex(const Vector& xi, const Vector& upsilon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Index> p(static_cast<std::size_t>(xi.size()));
  std::vector<Index> q(static_cast<std::size_t>(upsilon.size()));
  std::iota(p.begin(), p.end(), Index{0});
  std::iota(q.begin(), q.end(), Index{0});
  std::shuffle(p.begin(), p.end(), rng);
  std::shuffle(q.begin(), q.end(), rng);
  Vector xp(xi.size());
  Vector uq(upsilon.size());
  for (Index i = 0; i < xi.size(); ++i) xp(i) = xi(p[static_cast<std::size_t>(i)]);
  for (Index j = 0; j < upsilon.size(); ++j) uq(j) = upsilon(q[static_cast<std::size_t>(j)]);
  std::vector<CouplingEntry> entries;
  nw_corner_coupling(xp, uq).for_each([&](Index r, Index c, double m) {
    entries.push_back({p[static_cast<std::size_t>(r)], q[static_cast<std::size_t>(c)], m});
  });
  return Coupling::from_entries(xi.size(), upsilon.size(), entries);
}

GwResult solve_gw(const GmSpace& x, const GmSpace& y, const GwOptions& opts) {
  check_space(x, "first space");
  check_space(y, "second space");
  require(opts.outer_max_iter >= 1, "outer_max_iter must be at least 1");
  require(opts.restarts >= 0, "restarts must be nonnegative");
  GwResult best = run_bcd(x, y, opts, initial_plan(x, y, opts.init));
  for (int r = 1; r <= opts.restarts; ++r) {
    const auto seed = opts.init.seed + static_cast<std::uint64_t>(r);
    GwResult candidate = run_bcd(x, y, opts, random_vertex(x.weights, y.weights, seed));
    if (candidate.value < best.value) best = std::move(candidate);
  }
  return best;
}

GwResult brute_force_gw(const GmSpace& x, const GmSpace& y) {
  check_space(x, "first space");
  check_space(y, "second space");
  const Index n = x.size();
  require(n == y.size(), "brute force needs equal sizes");
  require(n <= 8, "brute force is limited to 8 points");
  require(is_uniform(as_span(x.weights), 1e-12) && is_uniform(as_span(y.weights), 1e-12),
          "brute force needs uniform weights");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::vector<Index> best = perm;
  double best_sum = std::numeric_limits<double>::infinity();
  long count = 0;
  do {
    double sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        const double d = x.gauge(i, j) -
                         y.gauge(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        sum += d * d;
      }
    }
    if (sum < best_sum) {
      best_sum = sum;
      best = perm;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<CouplingEntry> entries;
  for (Index i = 0; i < n; ++i) entries.push_back({i, best[static_cast<std::size_t>(i)], x.weights(i)});
  GwResult result;
  result.plan = Coupling::from_entries(n, n, entries);
  result.value = gw_functional(x, y, result.plan);
  result.iterations = static_cast<int>(count);
  result.converged = true;
  result.history.push_back(result.value * result.value);
  return result;
}

Coupling compose_plans(const Coupling& pi_ik, const Coupling& pi_kj) {
  require(pi_ik.cols() == pi_kj.rows(), "plans do not share the middle space");
  const MultiCoupling gluing = glue_nw({pi_ik.transpose(), pi_kj});
  return bimarginal(gluing, 1, 2);
}

PairwiseResult pairwise_matrix(const std::vector<GmSpace>& spaces, const GwOptions& opts,
                               int restart_rounds, std::size_t threads) {
  const auto n = static_cast<Index>(spaces.size());
  require(n >= 2, "pairwise matrix needs at least two spaces");
  PairwiseResult out;
  out.values = Matrix::Zero(n, n);
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  auto tagged_solve = [&](Index i, Index j, const GwOptions& o) {
    try {
      return solve_gw(spaces[static_cast<std::size_t>(i)], spaces[static_cast<std::size_t>(j)], o);
    } catch (const SolverError& e) {
      throw SolverError("pair (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what(),
                        e.violation());
    }
  };

  std::vector<GwResult> first(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    first[k] = tagged_solve(pairs[k].first, pairs[k].second, opts);
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    out.values(i, j) = out.values(j, i) = first[k].value;
    out.plans[pairs[k]] = std::move(first[k].plan);
  }

  auto plan_between = [&](Index i, Index j) {
    return i < j ? out.plans.at({i, j}) : out.plans.at({j, i}).transpose();
  };

  struct Task {
    Index i, j, k;
  };
  for (int round = 0; round < restart_rounds; ++round) {
    std::vector<Task> tasks;
    for (const auto& [i, j] : pairs) {
      for (Index k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (out.values(i, k) + out.values(k, j) < out.values(i, j)) tasks.push_back({i, j, k});
      }
    }
    if (tasks.empty()) break;
    std::vector<GwResult> results(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t t) {
      const Task& task = tasks[t];
      GwOptions o = opts;
      o.restarts = 0;
      o.init = GwInit::given(compose_plans(plan_between(task.i, task.k), plan_between(task.k, task.j)));
      results[t] = tagged_solve(task.i, task.j, o);
    });
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const Task& task = tasks[t];
      if (results[t].value < out.values(task.i, task.j)) {
        out.values(task.i, task.j) = out.values(task.j, task.i) = results[t].value;
        out.plans[{task.i, task.j}] = std::move(results[t].plan);
      }
    }
    out.restarts_applied += static_cast<int>(tasks.size());
  }
  return out;
}

}  // namespace tgw
