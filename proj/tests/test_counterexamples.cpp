#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qlpairs/counterexamples.hpp"
#include "qlpairs/rational.hpp"

#include <cmath>

using namespace qlpairs;

TEST_CASE("truncated dyadic-factorial values") {
  CHECK(liouville_beta(1) == 0.5);
  CHECK(liouville_beta(2) == 0.75);
  CHECK(liouville_beta(3) == 0.75 + std::pow(2.0, -6.0));
  // terms beyond the fifth vanish at double precision
  CHECK(liouville_beta(8) == liouville_beta(5));
  double b = liouville_beta(8);
  CHECK(b > 0.5);
  CHECK(b < 1.0);
}

TEST_CASE("family classification and kernel signatures") {
  FormPair s22 = build_pair(make_family(std::sqrt(2.0) - 1.0, BetaVariant::Sig22));
  CHECK(s22.cls().kind == PairKind::TypeI);
  CHECK(s22.cls().p == 2);
  Signature r22 = signature_with_kernel(restrict_to_kernel(s22.q, s22.l).gram());
  CHECK(r22.positive == 2);
  CHECK(r22.negative == 1);

  FormPair s23 = build_pair(make_family(std::sqrt(2.0) - 1.0, BetaVariant::Sig23));
  CHECK(s23.cls().kind == PairKind::TypeI);
  Signature r23 = signature_with_kernel(restrict_to_kernel(s23.q, s23.l).gram());
  CHECK(r23.positive == 2);
  CHECK(r23.negative == 2);

  // rational beta is caught by the rationality scan
  FormPair rational = build_pair(make_family(0.75, BetaVariant::Sig22));
  CHECK(rationality_scan(rational.q, rational.l, 50).detected());
}

TEST_CASE("the assembled grams satisfy the family identity exactly") {
  // q + l (x) l collapses to diag(1, 1, -beta, 0) for the four-variable
  // family, and to diag(1, 1, -beta, -beta, 0) for the five-variable one;
  // exact rational arithmetic at rational beta
  for (const Rational& beta : {Rational(3, 4), Rational(5, 7), Rational(9, 16)}) {
    double b = double(beta.convert_to<double>());
    FormPair pair = build_pair(make_family(b, BetaVariant::Sig22));
    RatMatrix g(4, 4), want(4, 4);
    // reconstruct the gram exactly from the rational beta
    g(0, 0) = 1;
    g(1, 1) = 1;
    g(2, 2) = -beta - beta * beta;
    g(2, 3) = g(3, 2) = -beta;
    g(3, 3) = -1;
    std::vector<Rational> l{0, 0, beta, 1};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        Rational sum = g(i, j) + l[i] * l[j];
        want(i, j) = 0;
        if (i == j && i < 2) want(i, j) = 1;
        if (i == j && i == 2) want(i, j) = -beta;
        CHECK(sum == want(i, j));
      }
    // double-precision gram matches the exact assembly
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(pair.q.gram()(i, j) ==
              doctest::Approx(g(i, j).convert_to<double>()).epsilon(1e-15));
  }
}

TEST_CASE("auxiliary form matches q + l^2") {
  for (BetaVariant variant : {BetaVariant::Sig22, BetaVariant::Sig23}) {
    BetaFamily fam = make_family(std::sqrt(2.0) - 1.0, variant);
    FormPair pair = build_pair(fam);
    QuadraticForm aux = auxiliary_form(fam);
    Eigen::MatrixXd sum =
        pair.q.gram() + pair.l.coeffs() * pair.l.coeffs().transpose();
    const int m = aux.n();
    CHECK((sum.topLeftCorner(m, m) - aux.gram()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sum.cwiseAbs().bottomRows(1).maxCoeff() < 1e-12);
  }
}

TEST_CASE("witness validity for the displayed constraints") {
  BetaFamily fam = make_family(liouville_beta(8), BetaVariant::Sig22);
  SpikeReport rep = spike_scan(fam, {25.0, 50.0}, {-1.0, 2.0}, {-1.0, 1.0}, 2, 16);
  CHECK(rep.witnesses_valid);
  CHECK(rep.total_witnesses > 0);
  FormPair pair = build_pair(fam);
  for (const auto& w : rep.sample_witnesses) {
    Eigen::VectorXd v = w.v.cast<double>();
    double qv = v.dot(pair.q.gram() * v);
    double lv = pair.l.coeffs().dot(v);
    CHECK(qv >= -1.0 - 1e-9);
    CHECK(qv <= 2.0 + 1e-9);
    CHECK(std::abs(lv) <= 1.0 + 1e-9);
    CHECK(v.norm() <= std::sqrt(2.0) * 50.0 * (1.0 + 1e-12));
  }
}

TEST_CASE("witness count against a brute-force lift") {
  BetaFamily fam = make_family(liouville_beta(8), BetaVariant::Sig22);
  double T = 12.0;
  SpikeReport rep = spike_scan(fam, {T}, {-1.0, 2.0}, {-1.0, 1.0}, 1, 0);
  const double b = fam.beta;
  std::int64_t want = 0;
  int m = int(std::floor(T));
  for (int x1 = -m; x1 <= m; ++x1)
    for (int x2 = -m; x2 <= m; ++x2)
      for (int x3 = -m; x3 <= m; ++x3) {
        double n3 = double(x1) * x1 + double(x2) * x2 + double(x3) * x3;
        if (n3 > T * T) continue;
        double val = double(x1) * x1 + double(x2) * x2 - b * double(x3) * x3;
        if (val >= 1.0 / b && val <= 2.0) ++want;
      }
  CHECK(rep.rows[0].witness_count == want);
}

TEST_CASE("spike scan reports both windows and a spread verdict") {
  BetaFamily fam = make_family(0.5 + std::sqrt(5.0) / 8.0, BetaVariant::Sig22);
  SpikeReport rep = spike_scan(fam, {15.0, 25.0, 40.0, 60.0}, {-1.0, 2.0},
                               {-1.0, 1.0}, 2, 4);
  REQUIRE(rep.rows.size() == 4);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].N >= 0);
    CHECK(rep.rows[i].ratio >= 0.0);
    CHECK(rep.rows[i].N_aux_window <= rep.rows[i].N + rep.rows[i].N_aux_window);
  }
  CHECK(rep.ratio_spread > 0.0);
}
