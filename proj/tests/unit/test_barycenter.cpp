#include <doctest.h>

#include "support/oracles.hpp"
#include "tgw/barycenter.hpp"

#include <cmath>
#include <random>

using namespace tgw;

namespace {

GmSpace custom(const Matrix& g, std::optional<Vector> w = std::nullopt) {
  GmSpace s;
  s.gauge = g;
  s.weights = w ? *w : oracle::uniform(g.rows());
  return s;
}

Matrix two(double d) {
  Matrix g(2, 2);
  g << 0, d, d, 0;
  return g;
}

Vector rho2(double a) {
  Vector r(2);
  r << a, 1.0 - a;
  return r;
}

std::vector<SpaceRef> random_inputs(std::size_t count, Index n, std::mt19937_64& rng,
                                    bool uniform = true) {
  std::vector<GmSpace> spaces;
  for (std::size_t i = 0; i < count; ++i) spaces.push_back(oracle::random_space(n, rng, uniform));
  return share(std::move(spaces));
}

std::vector<Matrix> gauges(const std::vector<SpaceRef>& inputs) {
  std::vector<Matrix> out;
  for (const auto& x : inputs) out.push_back(x->gauge);
  return out;
}

BaryOptions rel_tol() {
  BaryOptions o;
  o.stop = StopRule::rel_tol(1e-12);
  return o;
}

}  // namespace

TEST_CASE("mean_gauge examples") {
  const auto inputs = share({custom(two(1.0)), custom(two(3.0))});
  const MultiCoupling diag = MultiCoupling::diagonal(oracle::uniform(2), 2);
  CHECK(mean_gauge(inputs, diag, rho2(0.5)).gauge == two(2.0));
  CHECK(mean_gauge(inputs, diag, rho2(1.0)).gauge == two(1.0));

  std::mt19937_64 rng(1);
  const GmSpace x = oracle::random_space(4, rng, false);
  const auto same = share({x, x, x});
  const GmSpace m = mean_gauge(same, MultiCoupling::diagonal(x.weights, 3), oracle::uniform(3));
  CHECK((m.gauge - x.gauge).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(m.weights == x.weights);

  Vector bad(2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(mean_gauge(inputs, diag, bad), PreconditionError);
}

TEST_CASE("mgw_functional examples") {
  const auto inputs = share({custom(two(1.0)), custom(two(3.0))});
  const MultiCoupling diag = MultiCoupling::diagonal(oracle::uniform(2), 2);
  CHECK(mgw_functional(inputs, rho2(0.5), diag) == doctest::Approx(0.5).epsilon(1e-14));

  std::mt19937_64 rng(2);
  const GmSpace x = oracle::random_space(5, rng);
  CHECK(mgw_functional(share({x, x, x}), oracle::uniform(3), MultiCoupling::diagonal(x.weights, 3)) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-24));

  for (int t = 0; t < 20; ++t) {
    const auto in = random_inputs(2, 4, rng, false);
    const Coupling pi = solve_exact(Matrix::Random(4, 4), in[0]->weights, in[1]->weights);
    const MultiCoupling mu = MultiCoupling::from_coupling(pi);
    const Vector r = oracle::random_simplex(2, rng);
    const double f = gw_functional(*in[0], *in[1], pi);
    CHECK(std::abs(mgw_functional(in, r, mu) - r(0) * r(1) * f * f) <= 1e-9);
  }
}

TEST_CASE("mgw_functional matches the literal double sum") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<Index> size(1, 5);
    std::uniform_int_distribution<std::size_t> count(1, 4);
    const auto n = count(rng);
    std::vector<GmSpace> spaces;
    std::vector<Coupling> plans;
    const Vector ref = oracle::random_simplex(size(rng), rng);
    for (std::size_t i = 0; i < n; ++i) {
      spaces.push_back(oracle::random_space(size(rng), rng, false));
      plans.push_back(random_vertex(ref, spaces.back().weights, rng()));
    }
    // weights must match the plan marginals bit for bit
    for (std::size_t i = 0; i < n; ++i) spaces[i].weights = plans[i].col_marginal();
    const auto inputs = share(spaces);
    const MultiCoupling mu = melt(glue_nw(plans));
    const Vector r = oracle::random_simplex(static_cast<Index>(n), rng);
    CHECK(std::abs(mgw_functional(inputs, r, mu) - oracle::mgw(gauges(inputs), r, mu)) <= 1e-9);
  }
}

TEST_CASE("gwb_loss examples") {
  std::mt19937_64 rng(4);
  const GmSpace x = oracle::random_space(5, rng);
  Vector one(1);
  one << 1.0;
  GwOptions id;
  id.init = GwInit::identity();
  CHECK(gwb_loss(share({x}), one, x, id) == 0.0);
  CHECK(gwb_loss(share({x, x, x}), oracle::uniform(3), x, id) == 0.0);

  const auto inputs = share({custom(two(1.0)), custom(two(3.0))});
  const GwResult best = brute_force_gw(*inputs[0], *inputs[1]);
  const MultiCoupling mu = MultiCoupling::from_coupling(best.plan);
  const GmSpace y = mean_gauge(inputs, mu, rho2(0.5));
  CHECK(std::abs(gwb_loss(inputs, rho2(0.5), y, GwOptions{}) - mgw_functional(inputs, rho2(0.5), mu)) <=
        1e-12);
}

TEST_CASE("iterate with two inputs stops after one iteration") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const auto inputs = random_inputs(2, 5, rng);
    const Vector r = oracle::random_simplex(2, rng);
    const BarycenterState s = iterate(inputs, r, 0, BaryOptions{});
    REQUIRE(s.loss_history.size() == 1);
    // the melting is the single computed plan
    const Coupling pi = solve_gw(*inputs[0], *inputs[1], GwOptions{}).plan;
    CHECK((bimarginal(s.melting, 0, 1).dense() - pi.dense()).cwiseAbs().maxCoeff() <= 1e-11);
    const double f = gw_functional(*inputs[0], *inputs[1], pi);
    CHECK(std::abs(s.loss_history.back().second - r(0) * r(1) * f * f) <= 1e-9);
    CHECK(std::abs(mgw_functional(inputs, r, s.melting) - r(0) * r(1) * f * f) <= 1e-9);
  }
}

TEST_CASE("iterate with one input echoes it") {
  std::mt19937_64 rng(6);
  const auto inputs = random_inputs(1, 6, rng, false);
  Vector one(1);
  one << 1.0;
  const BarycenterState s = iterate(inputs, one, 0, BaryOptions{});
  CHECK(s.melting == MultiCoupling::diagonal(inputs[0]->weights, 1));
  REQUIRE(!s.loss_history.empty());
  CHECK(s.loss_history.back().second == 0.0);
  CHECK((s.space().gauge - inputs[0]->gauge).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("iterate on three inputs with exact steps does not increase the loss") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const auto inputs = random_inputs(3, 10, rng);
    const BarycenterState s = iterate(inputs, oracle::uniform(3), 0, rel_tol());
    for (std::size_t k = 1; k < s.loss_history.size(); ++k) {
      CHECK(s.loss_history[k].second <= s.loss_history[k - 1].second + 1e-9);
    }
    std::vector<Vector> w;
    for (const auto& x : inputs) w.push_back(x->weights);
    CHECK(marginal_violation(s.melting, w) <= 1e-10);
  }
}

TEST_CASE("iterate stop rules") {
  std::mt19937_64 rng(8);
  const auto inputs = random_inputs(4, 6, rng);
  BaryOptions o;
  o.stop = StopRule::fixed_iters(3);
  const BarycenterState s = iterate(inputs, oracle::uniform(4), 0, o);
  CHECK(s.loss_history.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(s.loss_history[k].first == static_cast<int>(k) + 1);

  int calls = 0;
  o.on_iteration = [&](const IterationInfo& info) {
    ++calls;
    CHECK(info.melting != nullptr);
  };
  (void)iterate(inputs, oracle::uniform(4), 0, o);
  CHECK(calls >= 1);

  // a step that gets worse every time triggers the increase rule; the state is the
  // pre-increase one
  BaryOptions worse;
  int round = 0;
  worse.step = [&](const GmSpace& y, const GmSpace& x, Index, const std::optional<Coupling>&) {
    GwResult r;
    r.plan = random_vertex(y.weights, x.weights, static_cast<std::uint64_t>(++round));
    r.value = static_cast<double>(round);
    return r;
  };
  const BarycenterState inc = iterate(inputs, oracle::uniform(4), 0, worse);
  CHECK(inc.loss_increased);
  REQUIRE(inc.loss_history.size() >= 2);
  CHECK(inc.loss_history.back().second > inc.loss_history[inc.loss_history.size() - 2].second);
}

TEST_CASE("iterate preconditions") {
  std::mt19937_64 rng(9);
  BaryOptions maxrule;
  maxrule.glue_rule = GlueRule::MaxRule;
  CHECK_THROWS_AS(iterate(random_inputs(2, 4, rng, false), rho2(0.5), 0, maxrule), PreconditionError);
  std::vector<GmSpace> uneven{oracle::random_space(4, rng), oracle::random_space(5, rng)};
  CHECK_THROWS_AS(iterate(share(uneven), rho2(0.5), 0, maxrule), PreconditionError);

  BaryOptions entropic;
  entropic.gw.inner.method = OtMethod::Sinkhorn;
  CHECK_THROWS_AS(iterate(random_inputs(3, 4, rng), oracle::uniform(3), 0, entropic),
                  PreconditionError);
  CHECK_THROWS_AS(iterate(random_inputs(2, 4, rng), rho2(0.5), 2, BaryOptions{}), PreconditionError);
}

TEST_CASE("iterate with the max rule and proximal steps yields a map-like melting") {
  std::mt19937_64 rng(10);
  const GmSpace base = normalize_diameter(oracle::random_space(8, rng));
  std::vector<GmSpace> spaces{base};
  for (int k = 0; k < 2; ++k) {
    std::vector<Index> perm(8);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix g(8, 8);
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 8; ++j)
        g(i, j) = base.gauge(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    spaces.push_back(custom(g));
  }
  BaryOptions o;
  o.glue_rule = GlueRule::MaxRule;
  o.gw.inner.method = OtMethod::KlProx;
  o.gw.inner.epsilon = 0.05;
  o.gw.inner.strict = false;
  o.max_outer = 5;
  const BarycenterState s = iterate(share(spaces), oracle::uniform(3), 0, o);
  CHECK(s.melting.support_size() == 8);
  for (double m : s.melting.masses()) CHECK(m == 0.125);
}

TEST_CASE("reweigh only changes the gauge") {
  std::mt19937_64 rng(11);
  const auto inputs = random_inputs(2, 5, rng);
  const BarycenterState s = iterate(inputs, rho2(0.5), 0, BaryOptions{});
  const GmSpace own = reweigh(s, s.rho);
  CHECK(own.gauge == s.space().gauge);
  CHECK(own.weights == s.space().weights);

  const GmSpace vertex = reweigh(s, rho2(1.0));
  for (Index a = 0; a < s.melting.support_size(); ++a)
    for (Index b = 0; b < s.melting.support_size(); ++b)
      CHECK(vertex.gauge(a, b) == inputs[0]->gauge(s.melting.at(a, 0), s.melting.at(b, 0)));

  int emitted = 0;
  for (int k = 5; k >= 1; --k) {
    const GmSpace y = reweigh(s, rho2(k / 6.0));
    CHECK(y.weights == own.weights);
    ++emitted;
  }
  CHECK(emitted == 5);
  Vector three = oracle::uniform(3);
  CHECK_THROWS_AS(reweigh(s, three), PreconditionError);
}

TEST_CASE("lgw_matrix examples and oracle bound") {
  std::mt19937_64 rng(12);
  const GmSpace x = oracle::random_space(5, rng);
  CHECK(lgw_matrix(share({x, x, x}), MultiCoupling::diagonal(x.weights, 3)).cwiseAbs().maxCoeff() == 0.0);

  for (int t = 0; t < 10; ++t) {
    const auto inputs = random_inputs(3, 5, rng);
    const BarycenterState s = iterate(inputs, oracle::uniform(3), 0, rel_tol());
    const Matrix l = lgw_matrix(inputs, s.melting);
    CHECK(l == l.transpose());
    for (Index i = 0; i < 3; ++i)
      for (Index j = i + 1; j < 3; ++j)
        CHECK(l(i, j) >= brute_force_gw(*inputs[static_cast<std::size_t>(i)],
                                        *inputs[static_cast<std::size_t>(j)]).value - 1e-9);
  }
  const auto pair = random_inputs(2, 4, rng);
  const Coupling pi = solve_gw(*pair[0], *pair[1]).plan;
  CHECK(lgw_matrix(pair, MultiCoupling::from_coupling(pi))(0, 1) == gw_functional(*pair[0], *pair[1], pi));
}

TEST_CASE("induced plans couple the mean space with each input") {
  std::mt19937_64 rng(13);
  const auto inputs = random_inputs(3, 4, rng, false);
  const Vector ref = oracle::random_simplex(3, rng);
  std::vector<Coupling> plans;
  for (const auto& x : inputs) plans.push_back(random_vertex(ref, x->weights, rng()));
  const MultiCoupling mu = melt(glue_nw(plans));
  for (Index i = 0; i < 3; ++i) {
    const Coupling p = induced_plan(mu, i);
    CHECK(marginal_violation(p, mu.mass_vector(), inputs[static_cast<std::size_t>(i)]->weights) <= 1e-10);
  }
}
