#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qlpairs/lattice.hpp"

#include <cmath>

using namespace qlpairs;

namespace {

double witness_covolume(const Lattice& lat, const std::vector<Eigen::VectorXi>& w) {
  Eigen::MatrixXd m(lat.n(), int(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i)
    m.col(int(i)) = lat.basis() * w[i].cast<double>();
  return std::sqrt((m.transpose() * m).determinant());
}

}  // namespace

TEST_CASE("ball enumeration on the integer lattice") {
  Lattice z3(Eigen::MatrixXd::Identity(3, 3));
  auto pts = shortest_vectors(z3, 1.5);
  CHECK(pts.size() == 18);  // 6 of norm 1, 12 of norm sqrt(2)
  int norm1 = 0, norm2 = 0;
  for (const auto& v : pts) {
    int nsq = v.squaredNorm();
    if (nsq == 1) ++norm1;
    if (nsq == 2) ++norm2;
  }
  CHECK(norm1 == 6);
  CHECK(norm2 == 12);

  Lattice z2(Eigen::MatrixXd::Identity(2, 2));
  CHECK(shortest_vectors(z2, 0.5).empty());

  Eigen::MatrixXd d = Eigen::VectorXd{{0.5, 2.0}}.asDiagonal();
  auto pts2 = shortest_vectors(Lattice(d), 0.6);
  CHECK(pts2.size() == 2);
  CHECK(std::abs(pts2[0][0]) == 1);
  CHECK(pts2[0][1] == 0);
}

TEST_CASE("enumeration matches the cube oracle on random bases") {
  StreamRng rng(77, 0);
  for (int it = 0; it < 25; ++it) {
    int n = 2 + int(rng.below(3));
    Eigen::MatrixXd b = oracles::random_sl(rng, n, 10.0);
    double radius = 0.8 + rng.uniform() * 1.2;
    auto got = shortest_vectors(Lattice(b), radius);
    // box bound: |x_i| <= radius * ||row_i(B^{-1})||
    Eigen::MatrixXd binv = b.inverse();
    int box = 1;
    for (int i = 0; i < n; ++i)
      box = std::max(box, int(std::ceil(radius * binv.row(i).norm())) + 1);
    auto want = oracles::cube_ball_points(b, radius, box);
    CHECK(got.size() == want.size());
  }
}

TEST_CASE("enumeration is closed under negation") {
  StreamRng rng(78, 0);
  Eigen::MatrixXd b = oracles::random_sl(rng, 4, 10.0);
  auto pts = shortest_vectors(Lattice(b), 1.4);
  for (const auto& v : pts) {
    bool found = false;
    for (const auto& w : pts)
      if (w == -v) { found = true; break; }
    CHECK(found);
  }
}

TEST_CASE("explosion guard trips on absurd radii") {
  Lattice z4(Eigen::MatrixXd::Identity(4, 4));
  CHECK_THROWS_AS(shortest_vectors(z4, 5000.0), ExplosionGuard);
}

TEST_CASE("height of the integer lattice is exactly one") {
  for (int n = 2; n <= 5; ++n) {
    AlphaResult r = alpha(Lattice(Eigen::MatrixXd::Identity(n, n)), AlphaMode::Exact);
    CHECK(r.value == 1.0);
    CHECK(r.witness_rank == 1);
    CHECK(witness_covolume(Lattice(Eigen::MatrixXd::Identity(n, n)),
                           r.witness_vectors) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("height of stretched diagonal lattices") {
  Eigen::MatrixXd d = Eigen::VectorXd{{0.5, 2.0, 1.0, 1.0}}.asDiagonal();
  AlphaResult r = alpha(Lattice(d), AlphaMode::Exact);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.witness_rank == 1);

  // flow-displaced lattice: value e with witness e_1
  for (int n : {4, 5}) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    a(0, 0) = std::exp(-1.0);
    a(1, 1) = std::exp(1.0);
    AlphaResult ra = alpha(Lattice(a), AlphaMode::Exact);
    CHECK(ra.value == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(ra.witness_rank == 1);
    CHECK(ra.witness_vectors[0].cwiseAbs().sum() == 1);
    CHECK(std::abs(ra.witness_vectors[0][0]) == 1);
  }
}

TEST_CASE("exact height against the exhaustive sublattice oracle") {
  StreamRng rng(20260811, 10);
  for (int it = 0; it < 8; ++it) {
    Eigen::MatrixXd b = oracles::random_sl(rng, 4, 6.0);
    Lattice lat(b);
    AlphaResult r = alpha(lat, AlphaMode::Exact);
    // oracle: all sublattices generated by vectors with entries in [-4, 4]
    double best = 0.0;
    for (int k = 1; k <= 4; ++k) {
      double dk = oracles::exhaustive_rank_min(b, k, 4, 12.0);
      best = std::max(best, 1.0 / dk);
    }
    CHECK(r.value == doctest::Approx(best).epsilon(1e-9));
    CHECK(witness_covolume(lat, r.witness_vectors) ==
          doctest::Approx(1.0 / r.value).epsilon(1e-9));
  }
}

TEST_CASE("per-rank minima match the oracle") {
  StreamRng rng(20260811, 11);
  for (int it = 0; it < 5; ++it) {
    Eigen::MatrixXd b = oracles::random_sl(rng, 4, 5.0);
    AlphaResult r = alpha(Lattice(b), AlphaMode::Exact);
    REQUIRE(r.rank_minima.size() == 4);
    for (int k = 1; k <= 3; ++k) {
      double want = oracles::exhaustive_rank_min(b, k, 4, 12.0);
      CHECK(r.rank_minima[k - 1] == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("height is rotation invariant") {
  StreamRng rng(20260811, 12);
  for (int it = 0; it < 10; ++it) {
    Eigen::MatrixXd b = oracles::random_sl(rng, 4, 20.0);
    Eigen::MatrixXd a = oracles::random_matrix(rng, 4);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd k = qr.householderQ();
    if (k.determinant() < 0) k.col(0) *= -1.0;
    double a1 = alpha(Lattice(b), AlphaMode::Exact).value;
    double a2 = alpha(Lattice(k * b), AlphaMode::Exact).value;
    CHECK(a1 == doctest::Approx(a2).epsilon(1e-9));
  }
}

TEST_CASE("submultiplicativity under diagonal displacement") {
  // the height of a positive diagonal lattice equals the largest exterior
  // operator norm of the inverse, which makes the product bound sharp
  StreamRng rng(20260811, 13);
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd xi(4);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      xi[i] = 0.8 * rng.normal();
      s += xi[i];
    }
    for (int i = 0; i < 4; ++i) xi[i] -= s / 4;
    Eigen::MatrixXd a = xi.array().exp().matrix().asDiagonal();
    Eigen::MatrixXd g = oracles::random_sl(rng, 4, 20.0);
    double lhs = alpha(Lattice(a * g), AlphaMode::Exact).value;
    double rhs = alpha(Lattice(a), AlphaMode::Exact).value *
                 alpha(Lattice(g), AlphaMode::Exact).value;
    CHECK(lhs <= rhs * (1.0 + 1e-6));
  }
}

TEST_CASE("non-diagonal symmetric displacement can violate the product bound") {
  // frozen instance: both sides verified against the exhaustive oracle; the
  // bound survives only with the exterior-norm factor, not with the height
  // of the displacing lattice itself
  StreamRng rng(20260811, 13);
  Eigen::MatrixXd a, g;
  for (int it = 0; it <= 5; ++it) {
    a = oracles::random_spd_det1(rng, 4, 0.8);
    g = oracles::random_sl(rng, 4, 20.0);
  }
  double va = alpha(Lattice(a), AlphaMode::Exact).value;
  double vg = alpha(Lattice(g), AlphaMode::Exact).value;
  double vag = alpha(Lattice(a * g), AlphaMode::Exact).value;
  CHECK(vag > va * vg);  // naive product bound fails here
  CHECK(vag <= max_exterior_operator_norm(a.inverse()) * vg * (1.0 + 1e-6));
  for (int k = 1; k <= 3; ++k) {
    AlphaResult r = alpha(Lattice(a * g), AlphaMode::Exact);
    CHECK(r.rank_minima[k - 1] ==
          doctest::Approx(oracles::exhaustive_rank_min(a * g, k, 5, 14.0)).epsilon(1e-9));
  }
}

TEST_CASE("operator norm bound across exterior powers") {
  StreamRng rng(20260811, 14);
  for (int it = 0; it < 60; ++it) {
    Eigen::MatrixXd g1 = oracles::random_sl(rng, 4, 10.0);
    Eigen::MatrixXd g2 = oracles::random_sl(rng, 4, 10.0);
    double lhs = alpha(Lattice(g1 * g2), AlphaMode::Exact).value /
                 alpha(Lattice(g2), AlphaMode::Exact).value;
    double rhs = max_exterior_operator_norm(g1.inverse());
    CHECK(lhs <= rhs * (1.0 + 1e-6));
  }
}

TEST_CASE("certified bounds bracket the exact value") {
  StreamRng rng(20260811, 15);
  for (int it = 0; it < 20; ++it) {
    int n = 4 + int(rng.below(2));
    Eigen::MatrixXd b = oracles::random_sl(rng, n, 50.0);
    AlphaResult ex = alpha(Lattice(b), AlphaMode::Exact);
    AlphaResult ce = alpha(Lattice(b), AlphaMode::Certified);
    CHECK(ce.lower <= ex.value * (1.0 + 1e-9));
    CHECK(ce.upper >= ex.value * (1.0 - 1e-9));
  }
  // exact mode is unavailable above n = 5
  Eigen::MatrixXd b6 = Eigen::MatrixXd::Identity(6, 6);
  CHECK_THROWS_AS(alpha(Lattice(b6), AlphaMode::Exact), ModeUnavailable);
  CHECK_NOTHROW(alpha(Lattice(b6), AlphaMode::Certified));
}

TEST_CASE("siegel transform as a finite sum") {
  SupportedFunction ball;
  ball.support_radius = 1.5;
  ball.eval = [](const Eigen::VectorXd& v) { return v.norm() <= 1.5 ? 1.0 : 0.0; };
  CHECK(siegel_transform(ball, Lattice(Eigen::MatrixXd::Identity(3, 3))) == 18.0);

  SupportedFunction small;
  small.support_radius = 0.5;
  small.eval = [](const Eigen::VectorXd& v) { return v.norm() <= 0.5 ? 1.0 : 0.0; };
  for (int n = 2; n <= 5; ++n)
    CHECK(siegel_transform(small, Lattice(Eigen::MatrixXd::Identity(n, n))) == 0.0);

  // tent function vanishing on every nonzero integer point
  SupportedFunction tent;
  tent.support_radius = 1.2;
  tent.eval = [](const Eigen::VectorXd& v) { return std::max(0.0, 1.0 - v.norm()); };
  CHECK(siegel_transform(tent, Lattice(Eigen::MatrixXd::Identity(2, 2))) == 0.0);
}

TEST_CASE("uniform bound of the transform by the height") {
  // fit the constant on a designed sample (random + stretched structures),
  // then verify on a fresh random sample
  SupportedFunction ball;
  ball.support_radius = 1.0;
  ball.eval = [](const Eigen::VectorXd& v) { return v.norm() <= 1.0 ? 1.0 : 0.0; };

  auto ratio = [&](const Lattice& lat) {
    double ft = siegel_transform(ball, lat);
    double av = alpha(lat, AlphaMode::Exact).value;
    return ft / av;
  };

  StreamRng fit_rng(101, 0);
  double c = 0.0;
  Eigen::MatrixXd best_b = Eigen::MatrixXd::Identity(4, 4);
  for (int it = 0; it < 500; ++it) {
    Eigen::MatrixXd b = oracles::random_sl(fit_rng, 4, 100.0);
    double r = ratio(Lattice(b));
    if (r > c) {
      c = r;
      best_b = b;
    }
  }
  // push the fitted constant toward the in-class supremum by a seeded hill
  // climb from the best random draw; a fresh sample then stays below it
  {
    StreamRng climb_rng(303, 0);
    double cur = c;
    Eigen::MatrixXd b = best_b;
    for (int step = 0; step < 400; ++step) {
      Eigen::MatrixXd pert(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) pert(i, j) = 0.03 * climb_rng.normal();
      Eigen::MatrixXd cand = b * (Eigen::MatrixXd::Identity(4, 4) + pert);
      double det = cand.determinant();
      if (det < 0) cand.col(0) *= -1.0;
      cand /= std::pow(std::abs(det), 0.25);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(cand);
      if (svd.singularValues()(0) / svd.singularValues()(3) > 100.0) continue;
      double r = ratio(Lattice(cand));
      if (r > cur) {
        cur = r;
        b = cand;
      }
    }
    c = std::max(c, cur);
  }

  StreamRng fresh_rng(202, 0);
  for (int it = 0; it < 500; ++it)
    CHECK(ratio(Lattice(oracles::random_sl(fresh_rng, 4, 100.0))) <= c);
}
