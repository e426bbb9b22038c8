#include <doctest.h>

#include "support/oracles.hpp"
#include "tgw/barycenter.hpp"
#include "tgw/gaussian.hpp"

#include <random>

using namespace tgw;

namespace {

Matrix random_spd(Index d, std::mt19937_64& rng) {
  const Matrix a = oracle::random_points(d, d, rng);
  return a * a.transpose() + 0.1 * Matrix::Identity(d, d);
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// B from the composition identity, assembled block by block.
Matrix oracle_b(const Vector& di, const Vector& dj, const Vector& si, const Vector& sj) {
  const Index ni = di.size();
  const Index nj = dj.size();
  Matrix b = Matrix::Zero(nj, ni);
  const Vector left = sj.array() * si.head(nj).array() * dj.array().sqrt() / di.head(nj).array().sqrt();
  b.leftCols(nj) = left.asDiagonal();
  return b;
}

std::vector<GaussianSpace> battery(const std::vector<Index>& dims, std::mt19937_64& rng) {
  std::vector<GaussianSpace> out;
  for (Index d : dims) out.push_back(make_gaussian(random_spd(d, rng)));
  return out;
}

}  // namespace

TEST_CASE("make_gaussian sorts the spectrum") {
  std::mt19937_64 rng(1);
  const Matrix s = random_spd(4, rng);
  const GaussianSpace g = make_gaussian(s);
  for (Index k = 1; k < 4; ++k) CHECK(g.eigenvalues(k) <= g.eigenvalues(k - 1));
  CHECK((g.eigenvectors * g.eigenvalues.asDiagonal() * g.eigenvectors.transpose() - s)
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  CHECK_THROWS_AS(make_gaussian(bad), PreconditionError);
  Matrix asym(2, 2);
  asym << 1, 1, 0, 1;
  CHECK_THROWS_AS(make_gaussian(asym), PreconditionError);
}

TEST_CASE("gaussian_multi_plan examples") {
  const GaussianSpace g1 = make_gaussian(vec({4, 1}).asDiagonal());
  const GaussianSpace g2 = make_gaussian(Matrix::Constant(1, 1, 9.0));
  const GaussianPlan p = gaussian_multi_plan({g1, g2});
  REQUIRE(p.a[1].rows() == 1);
  CHECK(p.a[1](0, 0) == 1.5);
  CHECK(p.a[1](0, 1) == 0.0);

  std::mt19937_64 rng(2);
  const Matrix s = random_spd(3, rng);
  const GaussianPlan same = gaussian_multi_plan({make_gaussian(s), make_gaussian(s), make_gaussian(s)});
  for (const auto& a : same.a) CHECK((a - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-15);

  const auto three = battery({3, 3, 2}, rng);
  CHECK(gaussian_multi_plan(three).residual <= 1e-12);
}

TEST_CASE("gaussian_multi_plan preconditions") {
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(gaussian_multi_plan(battery({2, 3}, rng)), PreconditionError);
  CHECK_THROWS_AS(gaussian_multi_plan({make_gaussian(vec({1, 0}).asDiagonal())}), PreconditionError);
  GaussianSpace unsorted = make_gaussian(vec({4, 1}).asDiagonal());
  std::swap(unsorted.eigenvalues(0), unsorted.eigenvalues(1));
  CHECK_THROWS_AS(gaussian_multi_plan({unsorted}), PreconditionError);
  CHECK_THROWS_AS(gaussian_multi_plan(battery({2, 2}, rng), {vec({1, 1}), vec({1, 0.5})}),
                  PreconditionError);
}

TEST_CASE("composition identity on random batteries") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Index> dim(1, 6);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 50; ++t) {
    std::vector<Index> dims{dim(rng), dim(rng), dim(rng)};
    std::sort(dims.rbegin(), dims.rend());
    const auto g = battery(dims, rng);
    std::vector<Vector> signs;
    for (Index d : dims) {
      Vector s(d);
      for (Index k = 0; k < d; ++k) s(k) = coin(rng) ? 1.0 : -1.0;
      signs.push_back(s);
    }
    const GaussianPlan p = gaussian_multi_plan(g, signs);
    CHECK(p.residual <= 1e-12);
    for (std::size_t i = 0; i < 3; ++i) {
      // T_i pushes N(0, S_1) forward to N(0, S_i)
      const Matrix pushed = p.t[i] * g[0].covariance * p.t[i].transpose();
      CHECK((pushed - g[i].covariance).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + g[i].covariance.norm()));
      for (std::size_t j = i; j < 3; ++j) {
        const Matrix b = oracle_b(g[i].eigenvalues, g[j].eigenvalues, signs[i], signs[j]);
        CHECK((b * p.a[i] - p.a[j]).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((composition_matrix(g[i], g[j], signs[i], signs[j]) - b).cwiseAbs().maxCoeff() <= 1e-15);
        // S o T_i = T_j with S = P_j B P_i^T
        const Matrix sm = g[j].eigenvectors * b * g[i].eigenvectors.transpose();
        CHECK((sm * p.t[i] - p.t[j]).cwiseAbs().maxCoeff() <= 1e-9);
      }
    }
  }
}

TEST_CASE("gaussian_barycenter examples") {
  const GaussianSpace a = make_gaussian(Matrix::Constant(1, 1, 4.0));
  const GaussianSpace b = make_gaussian(Matrix::Constant(1, 1, 1.0));
  CHECK(gaussian_barycenter({a, b}, vec({0.5, 0.5})).covariance(0, 0) == 2.5);

  const GaussianSpace g1 = make_gaussian(vec({4, 1}).asDiagonal());
  const GaussianSpace g2 = make_gaussian(Matrix::Constant(1, 1, 9.0));
  const GaussianSpace bary = gaussian_barycenter({g1, g2}, vec({0.5, 0.5}));
  CHECK((bary.covariance - Matrix(vec({6.5, 0.5}).asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(5);
  const auto g = battery({3, 2}, rng);
  const GaussianSpace vertex = gaussian_barycenter(g, vec({1, 0}));
  CHECK((vertex.covariance - Matrix(g[0].eigenvalues.asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

namespace {

double mgw_of_samples(const GaussianPlan& plan, const Matrix& z, const Vector& rho) {
  std::vector<GmSpace> spaces;
  for (const Matrix& t : plan.t) spaces.push_back(from_points(z * t.transpose(), GaugeKind::InnerProduct));
  const auto inputs = share(spaces);
  // one pass with plans induced by the maps: sample s goes to sample s
  BaryOptions o;
  o.max_outer = 1;
  o.step = [](const GmSpace& y, const GmSpace&, Index, const std::optional<Coupling>&) {
    GwResult r;
    r.plan = Coupling::identity(y.weights);
    return r;
  };
  const BarycenterState s = iterate(inputs, rho, 0, o);
  CHECK(s.melting == MultiCoupling::diagonal(oracle::uniform(z.rows()), static_cast<Index>(plan.t.size())));
  return mgw_functional(inputs, rho, s.melting);
}

Matrix gaussian_samples(const GaussianSpace& g, Index n, std::mt19937_64& rng) {
  return oracle::random_points(n, g.covariance.rows(), rng) *
         (g.eigenvectors * g.eigenvalues.cwiseSqrt().asDiagonal()).transpose();
}

std::vector<Matrix> pair_kernels(const GaussianPlan& plan) {
  std::vector<Matrix> out;
  for (const Matrix& ti : plan.t)
    for (const Matrix& tj : plan.t) out.push_back(ti.transpose() * ti - tj.transpose() * tj);
  return out;
}

}  // namespace

TEST_CASE("MGW of sampled Gaussians equals the empirical moment expression") {
  std::mt19937_64 rng(6);
  const auto g = battery({3, 2, 2}, rng);
  const GaussianPlan plan = gaussian_multi_plan(g);
  const Vector rho = vec({0.5, 0.3, 0.2});
  const Matrix z = gaussian_samples(g[0], 200, rng);
  const Matrix sh = z.transpose() * z / 200.0;
  const auto ks = pair_kernels(plan);
  double expected = 0.0;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    expected += 0.5 * rho(static_cast<Index>(q / 3)) * rho(static_cast<Index>(q % 3)) *
                (ks[q] * sh * ks[q] * sh).trace();
  }
  CHECK(std::abs(mgw_of_samples(plan, z, rho) - expected) <= 1e-9 * expected);
}

TEST_CASE("Monte-Carlo MGW is unbiased for the moment formula") {
  std::mt19937_64 rng(7);
  const auto g = battery({3, 2, 2}, rng);
  const GaussianPlan plan = gaussian_multi_plan(g);
  const Vector rho = vec({0.5, 0.3, 0.2});
  const Index n = 500;
  const auto ks = pair_kernels(plan);
  double analytic = 0.0;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    analytic += 0.5 * rho(static_cast<Index>(q / 3)) * rho(static_cast<Index>(q % 3)) *
                oracle::expected_quadratic_vstat(ks[q], g[0].covariance, n);
  }
  const int reps = 60;
  double sum = 0.0;
  double sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const double v = mgw_of_samples(plan, gaussian_samples(g[0], n, rng), rho) / analytic;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  CHECK(std::abs(mean - 1.0) <= 4.0 * se);
}
