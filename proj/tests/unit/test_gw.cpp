#include <doctest.h>

#include "support/oracles.hpp"
#include "tgw/gw.hpp"

#include <cmath>
#include <random>

using namespace tgw;

namespace {

GmSpace custom(const Matrix& g) {
  GmSpace s;
  s.gauge = g;
  s.weights = oracle::uniform(g.rows());
  return s;
}

GmSpace line(std::initializer_list<double> xs, GaugeKind kind = GaugeKind::Euclid) {
  Matrix c(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) c(i++, 0) = x;
  return from_points(c, kind);
}

Matrix two(double d) {
  Matrix g(2, 2);
  g << 0, d, d, 0;
  return g;
}

GwOptions exact_from(const Coupling& plan) {
  GwOptions o;
  o.init = GwInit::given(plan);
  return o;
}

}  // namespace

TEST_CASE("gw_functional examples") {
  std::mt19937_64 rng(1);
  const GmSpace x = oracle::random_space(4, rng, false);
  CHECK(gw_functional(x, x, Coupling::identity(x.weights)) == 0.0);

  const GmSpace a = custom(two(1.0));
  const GmSpace b = custom(two(2.0));
  CHECK(gw_functional(a, b, Coupling::identity(a.weights)) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

  const GmSpace p = oracle::random_space(3, rng, false);
  const GmSpace q = oracle::random_space(3, rng, false);
  const Coupling prod = Coupling::product(p.weights, q.weights);
  CHECK(std::abs(gw_functional(p, q, prod) -
                 std::sqrt(oracle::gw_squared(p.gauge, q.gauge, prod.dense()))) <= 1e-9);
}

TEST_CASE("gw_functional matches the quadruple loop and is symmetric") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<Index> size(1, 5);
    const GmSpace x = oracle::random_space(size(rng), rng, t % 2 == 0);
    const GmSpace y = oracle::random_space(size(rng), rng, t % 3 == 0);
    const Coupling plan = t % 2 == 0 ? solve_exact(Matrix::Random(x.size(), y.size()), x.weights,
                                                   y.weights)
                                     : Coupling::product(x.weights, y.weights);
    const double value = gw_functional(x, y, plan);
    CHECK(std::abs(value * value - oracle::gw_squared(x.gauge, y.gauge, plan.dense())) <= 1e-9);
    CHECK(value == gw_functional(y, x, plan.transpose()));
  }
}

TEST_CASE("gw_functional rejects infeasible plans") {
  const GmSpace a = custom(two(1.0));
  Vector w(2);
  w << 0.9, 0.1;
  CHECK_THROWS_AS(gw_functional(a, a, Coupling::identity(w)), PreconditionError);
}

TEST_CASE("local_cost examples") {
  std::mt19937_64 rng(3);
  const GmSpace x = oracle::random_space(4, rng);
  const Matrix c = local_cost(x, x, Coupling::identity(x.weights));
  CHECK(c.diagonal().cwiseAbs().maxCoeff() <= 1e-12);

  const GmSpace a = custom(two(1.0));
  const GmSpace b = custom(two(2.0));
  // C[i][j] = sum_k 0.5 |g[i][k] - h[j][k]|^2; same index pattern gives 0.5, crossed 0.5 * (1 + 4)
  Matrix hand(2, 2);
  hand << 0.5, 2.5, 2.5, 0.5;
  CHECK((local_cost(a, b, Coupling::identity(a.weights)) - hand).cwiseAbs().maxCoeff() <= 1e-14);

  for (int t = 0; t < 20; ++t) {
    const GmSpace p = oracle::random_space(3, rng, false);
    const GmSpace q = oracle::random_space(3, rng, false);
    const Coupling prod = Coupling::product(p.weights, q.weights);
    CHECK((local_cost(p, q, prod) - oracle::local_cost(p.gauge, q.gauge, prod.dense()))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);
  }
}

TEST_CASE("solve_gw examples") {
  std::mt19937_64 rng(4);
  const GmSpace x = oracle::random_space(6, rng);
  GwOptions id;
  id.init = GwInit::identity();
  const GwResult self = solve_gw(x, x, id);
  CHECK(self.value == 0.0);
  CHECK(self.iterations == 1);

  const GwResult same = solve_gw(line({0, 1, 3}), line({0, 1, 3}));
  CHECK(same.value <= 1e-12);
  CHECK(brute_force_gw(line({0, 1, 3}), line({0, 1, 3})).value == 0.0);

  const GmSpace p = line({0, 1, 3});
  const GmSpace q = line({0, 2, 3});
  const auto best = oracle::best_permutation(p.gauge, q.gauge);
  const Coupling oracle_plan = Coupling::from_dense(oracle::permutation_plan(best.perm));
  const GwResult r = solve_gw(p, q, exact_from(oracle_plan));
  CHECK(std::abs(r.value - std::sqrt(best.squared)) <= 1e-9);
  CHECK(std::abs(brute_force_gw(p, q).value - std::sqrt(best.squared)) <= 1e-12);
}

TEST_CASE("brute_force_gw examples and limits") {
  const GwResult r = brute_force_gw(custom(two(1.0)), custom(two(2.0)));
  CHECK(r.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  std::mt19937_64 rng(5);
  const GmSpace x = oracle::random_space(5, rng);
  const GwResult self = brute_force_gw(x, x);
  CHECK(self.value == 0.0);
  CHECK(self.plan.dense().isApprox(Coupling::identity(x.weights).dense()));
  CHECK_THROWS_AS(brute_force_gw(oracle::random_space(9, rng), oracle::random_space(9, rng)),
                  PreconditionError);
  CHECK_THROWS_AS(brute_force_gw(oracle::random_space(3, rng, false), oracle::random_space(3, rng)),
                  PreconditionError);
}

TEST_CASE("solve_gw never beats the permutation oracle and descends monotonically") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 60; ++t) {
    std::uniform_int_distribution<Index> size(2, 6);
    const Index n = size(rng);
    const GmSpace x = oracle::random_space(n, rng);
    const GmSpace y = oracle::random_space(n, rng);
    GwOptions o;
    o.init = t % 2 == 0 ? GwInit::product() : GwInit::random(static_cast<std::uint64_t>(t));
    const GwResult r = solve_gw(x, y, o);
    const double oracle_value = std::sqrt(oracle::best_permutation(x.gauge, y.gauge).squared);
    CHECK(r.value >= oracle_value - 1e-9);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1] + 1e-12);
    CHECK(std::abs(r.value * r.value - r.history.back()) <= 1e-9);
  }
}

TEST_CASE("solve_gw with entropic and proximal inner steps") {
  std::mt19937_64 rng(7);
  const GmSpace x = normalize_diameter(oracle::random_space(5, rng));
  const GmSpace y = normalize_diameter(oracle::random_space(6, rng, false));
  GwOptions o;
  o.inner.method = OtMethod::Sinkhorn;
  o.inner.epsilon = 0.05;
  o.outer_max_iter = 50;
  const GwResult s = solve_gw(x, y, o);
  CHECK(marginal_violation(s.plan, x.weights, y.weights) <= 1e-9);
  CHECK(s.inexact_steps == 0);
  o.inner.method = OtMethod::KlProx;
  o.inner.epsilon = 0.5;
  const GwResult p = solve_gw(x, y, o);
  CHECK(marginal_violation(p.plan, x.weights, y.weights) <= 1e-9);
  CHECK(p.value >= 0.0);
}

TEST_CASE("non-strict proximal steps survive a degenerate self match") {
  // a 1-d cloud matched to itself has two optimal permutations; the proximal
  // plans sharpen onto both and the scaling slows down
  std::mt19937_64 rng(7);
  const GmSpace x = normalize_diameter(oracle::random_space(5, rng));
  GwOptions o;
  o.inner.method = OtMethod::KlProx;
  o.inner.epsilon = 0.5;
  o.inner.max_iter = 2000;
  o.outer_max_iter = 100;
  CHECK_THROWS_AS(solve_gw(x, x, o), SolverError);
  o.inner.strict = false;
  const GwResult r = solve_gw(x, x, o);
  CHECK(r.inexact_steps > 0);
  CHECK(marginal_violation(r.plan, x.weights, x.weights) <= 1e-12);
  CHECK(r.value * r.value <= r.history.front());
}

TEST_CASE("restarts keep the best run") {
  std::mt19937_64 rng(8);
  const GmSpace x = oracle::random_space(6, rng);
  const GmSpace y = oracle::random_space(6, rng);
  GwOptions o;
  const double single = solve_gw(x, y, o).value;
  o.restarts = 5;
  CHECK(solve_gw(x, y, o).value <= single);
}

TEST_CASE("random_vertex is a sparse feasible plan") {
  std::mt19937_64 rng(9);
  const Vector a = oracle::random_simplex(5, rng);
  const Vector b = oracle::random_simplex(4, rng);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Coupling p = random_vertex(a, b, seed);
    CHECK(p.nnz() <= 8);
    CHECK(marginal_violation(p, a, b) <= 1e-12);
  }
}

TEST_CASE("compose_plans is feasible") {
  std::mt19937_64 rng(10);
  const Vector a = oracle::random_simplex(4, rng);
  const Vector b = oracle::random_simplex(5, rng);
  const Vector c = oracle::random_simplex(3, rng);
  const Coupling p = compose_plans(random_vertex(a, b, 1), random_vertex(b, c, 2));
  CHECK(p.rows() == 4);
  CHECK(p.cols() == 3);
  CHECK(marginal_violation(p, a, c) <= 1e-10);
  // composing with the identity gives the plan back
  const Coupling q = random_vertex(a, c, 3);
  CHECK((compose_plans(Coupling::identity(a), q).dense() - q.dense()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("pairwise_matrix examples") {
  std::mt19937_64 rng(11);
  const GmSpace x = oracle::random_space(5, rng);
  const PairwiseResult same = pairwise_matrix({x, x, x}, GwOptions{}, 1, 1);
  CHECK(same.values.cwiseAbs().maxCoeff() <= 1e-12);

  std::vector<GmSpace> spaces;
  for (int k = 0; k < 5; ++k) spaces.push_back(oracle::random_space(5, rng));
  const PairwiseResult r = pairwise_matrix(spaces, GwOptions{}, 2, 2);
  CHECK(r.values == r.values.transpose());
  CHECK(r.values.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.plans.size() == 10);
}

TEST_CASE("triangle restarts never increase entries") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 40; ++t) {
    // perturbed permuted copies of one 4-point space invite poor local minima
    const GmSpace base = oracle::random_space(4, rng);
    std::vector<GmSpace> spaces{base};
    for (int k = 0; k < 2; ++k) {
      std::vector<Index> perm{0, 1, 2, 3};
      std::shuffle(perm.begin(), perm.end(), rng);
      Matrix g(4, 4);
      for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j)
          g(i, j) = base.gauge(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
      const Matrix noise = 0.05 * Matrix::Random(4, 4);
      g += noise + noise.transpose();
      g.diagonal().setZero();
      spaces.push_back(custom(g));
    }
    const PairwiseResult before = pairwise_matrix(spaces, GwOptions{}, 0, 1);
    const PairwiseResult after = pairwise_matrix(spaces, GwOptions{}, 1, 1);
    CHECK((after.values.array() <= before.values.array()).all());
    for (Index i = 0; i < 3; ++i)
      for (Index j = i + 1; j < 3; ++j)
        CHECK(after.values(i, j) >= std::sqrt(oracle::best_permutation(spaces[static_cast<std::size_t>(i)].gauge,
                                                                       spaces[static_cast<std::size_t>(j)].gauge)
                                                  .squared) -
                                        1e-9);
  }
}
