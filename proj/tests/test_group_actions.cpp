#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qlpairs/group_actions.hpp"
#include "qlpairs/lattice.hpp"

#include <algorithm>
#include <cmath>

using namespace qlpairs;

TEST_CASE("diagonal flow basics") {
  GroupElement a0 = diagonal_flow(0.0, 5, 3);
  CHECK((a0.matrix - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);

  GroupElement a1 = diagonal_flow(1.0, 5, 3);
  CHECK(a1.matrix(0, 0) == doctest::Approx(std::exp(-1.0)));
  CHECK(a1.matrix(1, 1) == doctest::Approx(std::exp(1.0)));
  CHECK(a1.preserves_q0);
  CHECK(a1.preserves_last_coord);
  Eigen::MatrixXd q0 = canonical_gram(5, 3);
  CHECK((a1.matrix.transpose() * q0 * a1.matrix - q0).cwiseAbs().maxCoeff() < 1e-12);

  // operator norm e^{|t|} via singular values
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diagonal_flow(-1.7, 4, 2).matrix);
  CHECK(svd.singularValues()(0) == doctest::Approx(std::exp(1.7)).epsilon(1e-12));
}

TEST_CASE("flow is a one-parameter group") {
  StreamRng rng(5, 0);
  for (int it = 0; it < 20; ++it) {
    double s = rng.uniform(-3.0, 3.0), t = rng.uniform(-3.0, 3.0);
    Eigen::MatrixXd lhs = diagonal_flow(s, 4, 2).matrix * diagonal_flow(t, 4, 2).matrix;
    CHECK((lhs - diagonal_flow(s + t, 4, 2).matrix).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("change of basis maps the hyperbolic gram to the diagonal one") {
  for (auto [p, q] : {std::pair{3, 2}, std::pair{2, 2}, std::pair{2, 3}, std::pair{4, 2}}) {
    int n = p + q;
    Eigen::MatrixXd c = hyperbolic_change_of_basis(n, p);
    CHECK((c * c.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <
          1e-12);
    Eigen::MatrixXd d = c.transpose() * canonical_gram(n, p) * c;
    Eigen::VectorXd want = Eigen::VectorXd::Ones(n);
    want[1] = -1.0;
    for (int i = p + 1; i < n; ++i) want[i] = -1.0;
    CHECK((d - Eigen::MatrixXd(want.asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sampled stabilizer elements preserve the three structures") {
  HaarSampler sampler(3, 2, 42);
  for (int it = 0; it < 200; ++it) {
    GroupElement k = sampler.sample();
    CHECK(k.preserves_q0);
    CHECK(k.preserves_last_coord);
    CHECK(k.preserves_euclidean);
    CHECK(k.matrix.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("trivial rotation block at q = 2 with p = 1") {
  // SO(1) x SO(1): the sampler can only return the identity
  HaarSampler sampler(1, 2, 7);
  for (int it = 0; it < 5; ++it) {
    GroupElement k = sampler.sample();
    CHECK((k.matrix - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("entry means vanish when both blocks rotate") {
  // (p, q) = (2, 3): the (1,1) entry mixes two independent rotation blocks
  HaarSampler sampler(2, 3, 123);
  const int N = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int it = 0; it < N; ++it) {
    double x = sampler.sample().matrix(0, 0);
    sum += x;
    sumsq += x * x;
  }
  double mean = sum / N;
  double se = std::sqrt(std::max(0.0, sumsq / N - mean * mean) / N);
  CHECK(std::abs(mean) <= 3.0 * se + 1e-12);
}

TEST_CASE("translation invariance of the sampler (two-sample KS)") {
  // tr(k k0) should match tr(k) in distribution for fixed k0
  const int N = 100000;
  HaarSampler s1(2, 3, 2024, 0);
  HaarSampler s2(2, 3, 4048, 1);
  GroupElement k0 = HaarSampler(2, 3, 999).sample();
  std::vector<double> a(N), b(N);
  for (int i = 0; i < N; ++i) a[i] = (s1.sample().matrix * k0.matrix).trace();
  for (int i = 0; i < N; ++i) b[i] = s2.sample().matrix.trace();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(double(i) / N - double(j) / N));
  }
  // critical value at the 1% level for the two-sample statistic
  double crit = 1.628 * std::sqrt(2.0 / N);
  CHECK(d < crit);
}

TEST_CASE("orbit lattices") {
  Lattice l0 = orbit_lattice(Eigen::MatrixXd::Identity(5, 5), 0.0,
                             diagonal_flow(0.0, 5, 3), 3);
  CHECK((l0.basis() - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);

  // height of the flow-displaced integer lattice with rank-1 witness
  for (double t : {1.0, 2.0}) {
    Lattice lt = orbit_lattice(Eigen::MatrixXd::Identity(5, 5), t,
                               diagonal_flow(0.0, 5, 3), 3);
    AlphaResult r = alpha(lt, AlphaMode::Exact);
    CHECK(r.value == doctest::Approx(std::exp(t)).epsilon(1e-9));
    CHECK(r.witness_rank == 1);
  }

  // the canonical quadratic is constant along the orbit
  StreamRng rng(11, 0);
  HaarSampler sampler(3, 2, 77);
  Eigen::MatrixXd g0 = oracles::random_sl(rng, 5, 10.0);
  Eigen::MatrixXd q0 = canonical_gram(5, 3);
  for (int it = 0; it < 100; ++it) {
    GroupElement k = sampler.sample();
    Lattice lat = orbit_lattice(g0, 1.3, k, 3);
    Eigen::VectorXd v(5);
    for (int i = 0; i < 5; ++i) v[i] = rng.uniform(-3.0, 3.0);
    double before = (g0 * v).dot(q0 * (g0 * v));
    Eigen::VectorXd img = lat.basis() * v;
    double after = img.dot(q0 * img);
    CHECK(after == doctest::Approx(before).epsilon(1e-6));
  }

  Eigen::MatrixXd bad = 2.0 * Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS(orbit_lattice(bad, 0.0, diagonal_flow(0.0, 4, 2), 2));
}

TEST_CASE("sampler streams are reproducible and independent") {
  HaarSampler a(3, 2, 555, 3);
  HaarSampler b(3, 2, 555, 3);
  for (int i = 0; i < 10; ++i)
    CHECK((a.sample().matrix - b.sample().matrix).cwiseAbs().maxCoeff() == 0.0);
  HaarSampler c = a.split(4);
  CHECK((a.sample().matrix - c.sample().matrix).cwiseAbs().maxCoeff() > 1e-6);
}
