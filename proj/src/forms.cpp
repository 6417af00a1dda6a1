#include "qlpairs/forms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qlpairs {

namespace {

int argmax_abs(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

/// Best rational approximation p/q with q <= qmax (continued fractions).
std::pair<long long, long long> nearest_rational(double x, long long qmax) {
  long long p0 = 1, q0 = 0, p1 = 0, q1 = 1;  // p0/q0 previous, p1/q1 current
  double y = x;
  for (int it = 0; it < 64; ++it) {
    double fa = std::floor(y);
    if (fa > 9e17 || fa < -9e17) break;
    long long a = (long long)fa;
    long long p2 = a * p0 + p1;
    long long q2 = a * q0 + q1;
    if (q2 > qmax || q2 < 0) break;
    p1 = p0; q1 = q0; p0 = p2; q0 = q2;
    double frac = y - fa;
    if (frac < 1e-15) break;
    y = 1.0 / frac;
  }
  if (q0 == 0) return {0, 1};
  return {p0, q0};
}

}  // namespace

QuadraticForm::QuadraticForm(Eigen::MatrixXd gram) : gram_(std::move(gram)) {
  if (gram_.rows() != gram_.cols()) throw std::invalid_argument("gram must be square");
  if (gram_.rows() < 1) throw std::invalid_argument("empty gram");
  double scale = std::max(1.0, gram_.cwiseAbs().maxCoeff());
  if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("gram must be symmetric to 1e-12");
  gram_ = 0.5 * (gram_ + gram_.transpose());
}

LinearForm::LinearForm(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() < 1) throw std::invalid_argument("empty linear form");
  if (coeffs_.cwiseAbs().maxCoeff() <= 1e-12)
    throw std::invalid_argument("linear form must be nonzero");
}

FormPair::FormPair(QuadraticForm q_, LinearForm l_) : q(std::move(q_)), l(std::move(l_)) {
  if (q.n() != l.n()) throw std::invalid_argument("form pair dimension mismatch");
  cls_ = classify_pair(q, l);
}

Signature signature_with_kernel(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const auto& ev = es.eigenvalues();
  double rad = ev.cwiseAbs().maxCoeff();
  double tol = kDegeneracyTol * std::max(rad, 1e-300);
  Signature s;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) ++s.positive;
    else if (ev[i] < -tol) ++s.negative;
    else ++s.zero;
  }
  return s;
}

Signature signature(const QuadraticForm& q) {
  Signature s = signature_with_kernel(q.gram());
  if (s.zero > 0) throw DegenerateForm("quadratic form is degenerate within tolerance");
  return s;
}

QuadraticForm restrict_to_kernel(const QuadraticForm& q, const LinearForm& l) {
  const int n = q.n();
  if (n != l.n()) throw std::invalid_argument("dimension mismatch");
  const int j = argmax_abs(l.coeffs());
  Eigen::MatrixXd basis(n, n - 1);
  basis.setZero();
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (i == j) continue;
    basis(i, col) = 1.0;
    basis(j, col) = -l.coeffs()[i] / l.coeffs()[j];
    ++col;
  }
  Eigen::MatrixXd restricted = basis.transpose() * q.gram() * basis;
  restricted = 0.5 * (restricted + restricted.transpose());
  return QuadraticForm(restricted);
}

PairClass classify_pair(const QuadraticForm& q, const LinearForm& l) {
  Signature full = signature(q);  // throws if q degenerate
  QuadraticForm r = restrict_to_kernel(q, l);
  Signature rs = signature_with_kernel(r.gram());

  PairClass c;
  c.restriction = rs;
  if (rs.zero == 0) {
    c.kind = PairKind::TypeI;
    // The deleted direction carries the sign the restriction is missing:
    // full.positive == rs.positive     -> orthocomplement negative, lambda > 0
    // full.positive == rs.positive + 1 -> orthocomplement positive, lambda < 0
    if (full.positive == rs.positive) {
      c.p = rs.positive;
      c.flipped = false;
      c.reducible = (rs.positive >= 1 && rs.negative >= 1);
    } else {
      c.p = rs.negative;
      c.flipped = true;
      c.reducible = (rs.positive >= 1 && rs.negative >= 1);
    }
    if (!c.reducible) c.p = rs.positive;  // report restriction data as-is
  } else if (rs.zero == 1) {
    c.kind = PairKind::TypeII;
    c.p = std::min(rs.positive, rs.negative) + 1;
    c.reducible = false;
  } else {
    c.kind = PairKind::Degenerate;
    c.p = 0;
  }
  return c;
}

Eigen::MatrixXd canonical_gram(int n, int p) {
  if (p < 1 || p > n - 1) throw std::invalid_argument("canonical parameter out of range");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  g(0, 1) = g(1, 0) = 1.0;
  for (int i = 2; i <= p; ++i) g(i, i) = 1.0;
  for (int i = p + 1; i < n; ++i) g(i, i) = -1.0;
  return g;
}

CanonicalReduction reduce_to_canonical(const QuadraticForm& q, const LinearForm& l) {
  const int n = q.n();
  PairClass cls = classify_pair(q, l);
  if (cls.kind != PairKind::TypeI)
    throw NotTypeI("pair does not classify as type I");
  if (!cls.reducible)
    throw NotTypeI("restriction to ker l is definite; no canonical model exists");

  // Fast path: the pair is already a scalar multiple of a canonical model.
  for (int p = 1; p <= n - 1; ++p) {
    Eigen::MatrixXd model = canonical_gram(n, p);
    double s = q.gram()(0, 1);
    if (std::abs(s) < 1e-12) break;
    double lm = l.coeffs()[n - 1];
    if (std::abs(lm) < 1e-12) break;
    bool gram_match = (q.gram() - s * model).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, std::abs(s));
    Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
    en[n - 1] = 1.0;
    bool lin_match = (l.coeffs() - lm * en).cwiseAbs().maxCoeff() <= 1e-12 * std::abs(lm);
    if (gram_match && lin_match) {
      CanonicalReduction red;
      red.g = Eigen::MatrixXd::Identity(n, n);
      red.lambda = 1.0 / s;
      red.mu = 1.0 / lm;
      red.target_p = p;
      return red;
    }
  }

  const double sigma = cls.flipped ? -1.0 : 1.0;
  Eigen::MatrixXd qg = sigma * q.gram();
  const int p = cls.p;

  // q'-orthonormal basis of ker l, positives first.
  const int j = argmax_abs(l.coeffs());
  Eigen::MatrixXd kb(n, n - 1);
  kb.setZero();
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (i == j) continue;
    kb(i, col) = 1.0;
    kb(j, col) = -l.coeffs()[i] / l.coeffs()[j];
    ++col;
  }
  Eigen::MatrixXd r = kb.transpose() * qg * kb;
  r = 0.5 * (r + r.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
  std::vector<int> order(n - 1);
  for (int i = 0; i < n - 1; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return es.eigenvalues()[a] > es.eigenvalues()[b];
  });
  std::vector<Eigen::VectorXd> w;
  w.reserve(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    double d = es.eigenvalues()[order[i]];
    double ad = std::abs(d);
    if (ad <= 0 || 1.0 / std::sqrt(ad) > 1e8)
      throw IllConditioned("kernel-basis rescaling factor exceeds 1e8");
    w.push_back(kb * es.eigenvectors().col(order[i]) / std::sqrt(ad));
  }
  // w[0..p-1] have q'(w)=+1, w[p..n-2] have q'(w)=-1.

  // Orthocomplement direction with l = 1, made q'-orthogonal to ker l.
  Eigen::VectorXd z = l.coeffs() / l.coeffs().squaredNorm();
  for (int i = 0; i < n - 1; ++i) {
    double sign = (i < p) ? 1.0 : -1.0;
    double c = z.dot(qg * w[i]) / sign;
    z -= c * w[i];
  }
  double zeta = z.dot(qg * z);
  if (!(zeta < 0)) throw NotTypeI("orthocomplement sign inconsistent with classification");
  if (1.0 / std::sqrt(-zeta) > 1e8 || std::sqrt(-zeta) > 1e8)
    throw IllConditioned("orthocomplement rescaling factor exceeds 1e8");
  Eigen::VectorXd vn = z / std::sqrt(-zeta);

  // Hyperbolic pair from the leading (+1, -1) directions; the change of
  // basis u = (x1+x2)/sqrt(2), v = (x1-x2)/sqrt(2) is orthonormal.
  const double is2 = 1.0 / std::sqrt(2.0);
  Eigen::VectorXd v1 = (w[0] + w[p]) * is2;
  Eigen::VectorXd v2 = (w[0] - w[p]) * is2;

  Eigen::MatrixXd g0(n, n);
  g0.col(0) = v1;
  g0.col(1) = v2;
  col = 2;
  for (int i = 1; i < p; ++i) g0.col(col++) = w[i];
  for (int i = p + 1; i < n - 1; ++i) g0.col(col++) = w[i];
  g0.col(n - 1) = vn;

  double det = g0.determinant();
  if (det < 0) {
    // negating a pure-square column keeps both form identities
    g0.col(2) *= -1.0;
    det = -det;
  }
  double c = std::pow(det, -1.0 / n);
  if (c > 1e8 || 1.0 / c > 1e8) throw IllConditioned("determinant normalization exceeds 1e8");

  CanonicalReduction red;
  red.g = c * g0;
  red.lambda = sigma / (c * c);
  red.mu = std::sqrt(-zeta) / c;
  red.target_p = p;
  return red;
}

RationalityReport rationality_scan(const QuadraticForm& q, const LinearForm& l,
                                   long long bound) {
  RationalityReport report;
  report.denominator_bound = bound;
  const int n = q.n();
  Eigen::MatrixXd ll = l.coeffs() * l.coeffs().transpose();

  auto is_near_rational = [&](const Eigen::MatrixXd& m) {
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i)
      for (int k = i; k < n; ++k) {
        auto [pp, qq] = nearest_rational(m(i, k), bound);
        if (std::abs(m(i, k) - double(pp) / double(qq)) > 1e-9 * scale) return false;
      }
    return true;
  };

  // The hit condition is projective, so normalized representatives
  // (alpha, beta) = (0, 1) and (1, p/q) cover every rational-ratio
  // combination whose ratio lies on the grid.
  if (is_near_rational(ll)) report.hits.push_back({0, 1, 1, 1});
  for (long long den = 1; den <= bound; ++den) {
    for (long long num = -bound; num <= bound; ++num) {
      if (std::gcd(std::abs(num), den) != 1) continue;
      Eigen::MatrixXd m = q.gram() + (double(num) / double(den)) * ll;
      if (is_near_rational(m)) report.hits.push_back({1, 1, num, den});
    }
  }
  return report;
}

}  // namespace qlpairs
