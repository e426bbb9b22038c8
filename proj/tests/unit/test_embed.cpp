#include <doctest.h>

#include "support/oracles.hpp"
#include "tgw/coupling_algebra.hpp"
#include "tgw/embed.hpp"
#include "tgw/gw.hpp"

#include <Eigen/SVD>

#include <random>
#include <set>

using namespace tgw;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Matrix column(std::initializer_list<double> xs) { return vec(xs); }

BarycenterState state_of(std::vector<GmSpace> spaces, MultiCoupling mu, const Vector& rho) {
  BarycenterState s;
  s.inputs = share(std::move(spaces));
  s.melting = std::move(mu);
  s.rho = rho;
  return s;
}

// Residual of the best rank-k affine fit, computed from the SVD of the centered cloud.
double svd_residual(const Matrix& points, Index k) {
  const Matrix c = points.rowwise() - points.colwise().mean();
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinV);
  const Index keep = std::min<Index>(k, svd.matrixV().cols());
  const Matrix v = svd.matrixV().leftCols(keep);
  return (c - c * v * v.transpose()).rowwise().norm().mean();
}

}  // namespace

TEST_CASE("euclid_embed hand example") {
  const GmSpace x = from_points(column({0, 1}), GaugeKind::SqEuclid);
  const GmSpace y = from_points(column({0, 2}), GaugeKind::SqEuclid);
  const Vector rho = vec({0.5, 0.5});
  const BarycenterState s = state_of({x, y}, MultiCoupling::diagonal(oracle::uniform(2), 2), rho);
  const EmbeddedBarycenter e = euclid_embed(s, rho, GaugeKind::SqEuclid);
  Matrix expected(2, 2);
  expected << 0, 0, std::sqrt(0.5), std::sqrt(0.5) * 2;
  CHECK((e.points - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(point_gauge(e.points, GaugeKind::SqEuclid)(0, 1) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(embedding_gauge_error(s, rho, e, GaugeKind::SqEuclid) <= 1e-12);
  CHECK(e.masses == Vector::Constant(2, 0.5));
}

TEST_CASE("euclid_embed at a vertex of the simplex") {
  std::mt19937_64 rng(1);
  const GmSpace x = from_points(oracle::random_points(4, 2, rng), GaugeKind::SqEuclid);
  const GmSpace y = from_points(oracle::random_points(4, 3, rng), GaugeKind::SqEuclid);
  const MultiCoupling mu = melt(glue_nw({Coupling::identity(x.weights), random_vertex(x.weights, y.weights, 9)}));
  const Vector e1 = vec({1, 0});
  const BarycenterState s = state_of({x, y}, mu, e1);
  const EmbeddedBarycenter e = euclid_embed(s, e1, GaugeKind::SqEuclid);
  CHECK(e.points.rightCols(3).cwiseAbs().maxCoeff() == 0.0);
  const Matrix g = point_gauge(e.points, GaugeKind::SqEuclid);
  for (Index a = 0; a < mu.support_size(); ++a)
    for (Index b = 0; b < mu.support_size(); ++b)
      CHECK(std::abs(g(a, b) - x.gauge(mu.at(a, 0), mu.at(b, 0))) <= 1e-12);

  // one-norm blocks scale by rho itself
  const GmSpace xo = from_points(oracle::random_points(3, 2, rng), GaugeKind::OneNorm);
  const GmSpace yo = from_points(oracle::random_points(3, 2, rng), GaugeKind::OneNorm);
  const BarycenterState so = state_of({xo, yo}, MultiCoupling::diagonal(oracle::uniform(3), 2), e1);
  const EmbeddedBarycenter eo = euclid_embed(so, e1, GaugeKind::OneNorm);
  CHECK(eo.points.leftCols(2) == *xo.coords);
  CHECK(eo.points.rightCols(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("euclid_embed errors") {
  const GmSpace x = from_points(column({0, 1}), GaugeKind::SqEuclid);
  GmSpace bare = x;
  bare.coords.reset();
  const Vector rho = vec({0.5, 0.5});
  const MultiCoupling d = MultiCoupling::diagonal(oracle::uniform(2), 2);
  CHECK_THROWS_AS(euclid_embed(state_of({x, bare}, d, rho), rho, GaugeKind::SqEuclid), PreconditionError);
  CHECK_THROWS_AS(euclid_embed(state_of({x, x}, d, rho), rho, GaugeKind::OneNorm), PreconditionError);
  CHECK_THROWS_AS(euclid_embed(state_of({x, x}, d, rho), rho, GaugeKind::Euclid), PreconditionError);
  CHECK_NOTHROW(euclid_embed(state_of({x, x}, d, rho), rho, GaugeKind::OneNorm, false));
}

TEST_CASE("embedded gauge reproduces the mean gauge on random instances") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<Index> size(1, 6);
  std::uniform_int_distribution<Index> dim(1, 3);
  for (int t = 0; t < 50; ++t) {
    const GaugeKind kind = t % 3 == 0 ? GaugeKind::SqEuclid
                         : t % 3 == 1 ? GaugeKind::InnerProduct
                                      : GaugeKind::OneNorm;
    std::vector<GmSpace> spaces;
    std::vector<Coupling> plans;
    const Vector ref = oracle::random_simplex(size(rng), rng);
    for (int i = 0; i < 3; ++i) {
      const Index n = size(rng);
      spaces.push_back(from_points(oracle::random_points(n, dim(rng), rng), kind, oracle::random_simplex(n, rng)));
      plans.push_back(random_vertex(ref, spaces.back().weights, rng()));
    }
    const Vector rho = oracle::random_simplex(3, rng);
    const BarycenterState s = state_of(spaces, melt(glue_nw(plans)), rho / rho.sum());
    const EmbeddedBarycenter e = euclid_embed(s, s.rho, kind);
    CHECK(embedding_gauge_error(s, s.rho, e, kind) <= 1e-9);
  }
}

TEST_CASE("pca_project examples") {
  std::mt19937_64 rng(3);
  // a 3d affine subspace of R^6
  const Matrix basis = oracle::random_points(3, 6, rng);
  const Matrix flat = (oracle::random_points(40, 3, rng) * basis).rowwise() + Eigen::RowVectorXd::Constant(6, 2.0);
  CHECK(pca_project(flat).residual <= 1e-10);

  const PcaProjection one = pca_project(Matrix::Constant(1, 5, 3.0));
  CHECK(one.residual == 0.0);
  CHECK(one.points.cwiseAbs().maxCoeff() == 0.0);

  for (int t = 0; t < 10; ++t) {
    const Matrix cloud = oracle::random_points(60, 6, rng);
    CHECK(pca_project(cloud).residual == doctest::Approx(svd_residual(cloud, 3)).epsilon(1e-9));
  }
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(pca_project(bad), PreconditionError);
}

TEST_CASE("pca residual is non-increasing in the target dimension") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const Matrix cloud = oracle::random_points(30, 7, rng);
    double prev = std::numeric_limits<double>::infinity();
    for (Index k = 1; k <= 8; ++k) {
      const double r = pca_project(cloud, k).residual;
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
    CHECK(prev <= 1e-10);
  }
}

TEST_CASE("transfer_faces examples") {
  const std::vector<Face> faces{Face{0, 1, 2}, Face{0, 2, 3}};
  const MultiCoupling d = MultiCoupling::diagonal(oracle::uniform(4), 2);
  CHECK(transfer_faces(d, 1, faces) == faces);
  CHECK(transfer_faces(d, 0, {}).empty());
  CHECK_THROWS_AS(transfer_faces(d, 2, faces), PreconditionError);

  // anchor index 0 appears twice: both support points join every face through vertex 0
  const MultiCoupling m = MultiCoupling::from_tuples({4, 2}, {0, 0, 0, 1, 1, 0, 2, 1, 3, 0},
                                                     {0.125, 0.125, 0.25, 0.25, 0.25});
  const std::vector<Face> out = transfer_faces(m, 0, faces);
  CHECK(out.size() == 4);
  std::set<Index> used;
  for (const auto& f : out) {
    for (Index v : f) {
      CHECK(v >= 0);
      CHECK(v < m.support_size());
      used.insert(v);
    }
  }
  CHECK(used.size() == 5);
}

TEST_CASE("transfer_faces keeps the face count for map-like meltings") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Index n = 3 + t % 5;
    const Vector u = oracle::uniform(n);
    std::vector<Face> faces;
    for (Index k = 0; k + 2 < n; ++k) faces.push_back({k, k + 1, k + 2});
    const MultiCoupling mu = max_rule_without_replacement({random_vertex(u, u, rng())}, u).melting;
    const auto out = transfer_faces(mu, 0, faces);
    CHECK(out.size() == faces.size());
    for (const auto& f : out)
      for (Index v : f) CHECK(v < mu.support_size());
  }
}

TEST_CASE("helpers") {
  Matrix pts(3, 2);
  pts << 0, 0, 3, 4, 1, 1;
  CHECK(diameter(pts) == 5.0);
  CHECK(interpolation_name(vec({0.5, 0.5}), "off") == "interp_0.5_0.5.off");
  CHECK(interpolation_name(vec({1, 0, 0}), "csv") == "interp_1_0_0.csv");
}
