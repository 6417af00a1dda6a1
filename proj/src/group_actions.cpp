#include "qlpairs/group_actions.hpp"

#include <cmath>

namespace qlpairs {

GroupElement make_group_element(Eigen::MatrixXd m, int n, int p) {
  GroupElement g;
  g.matrix = std::move(m);
  Eigen::MatrixXd q0 = canonical_gram(n, p);
  g.preserves_q0 =
      (g.matrix.transpose() * q0 * g.matrix - q0).cwiseAbs().maxCoeff() < 1e-9;
  Eigen::RowVectorXd last = g.matrix.row(n - 1);
  Eigen::RowVectorXd en = Eigen::RowVectorXd::Zero(n);
  en[n - 1] = 1.0;
  g.preserves_last_coord = (last - en).cwiseAbs().maxCoeff() < 1e-12;
  g.preserves_euclidean =
      (g.matrix.transpose() * g.matrix - Eigen::MatrixXd::Identity(n, n))
          .cwiseAbs()
          .maxCoeff() < 1e-9;
  return g;
}

GroupElement diagonal_flow(double t, int n, int p) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  m(0, 0) = std::exp(-t);
  m(1, 1) = std::exp(t);
  return make_group_element(std::move(m), n, p);
}

Eigen::MatrixXd hyperbolic_change_of_basis(int n, int p) {
  (void)p;
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
  const double is2 = 1.0 / std::sqrt(2.0);
  c(0, 0) = is2;
  c(0, 1) = is2;
  c(1, 0) = is2;
  c(1, 1) = -is2;
  return c;
}

HaarSampler::HaarSampler(int p, int q, std::uint64_t seed, std::uint64_t stream)
    : p_(p), q_(q), seed_(seed), rng_(seed, stream) {
  if (p < 1 || q < 2) throw std::invalid_argument("sampler needs p >= 1, q >= 2");
  const int n = p + q;
  cob_ = hyperbolic_change_of_basis(n, p);
  // Diagonal-coordinate index sets: after the change of basis the form is
  // diag with signs (+, -, +^{p-1}, -^{q-1}); the rotating blocks are the
  // positive coordinates and the negative ones except the last.
  pos_idx_.push_back(0);
  for (int i = 2; i <= p; ++i) pos_idx_.push_back(i);
  neg_idx_.push_back(1);
  for (int i = p + 1; i < n - 1; ++i) neg_idx_.push_back(i);
}

Eigen::MatrixXd HaarSampler::haar_so(int m) {
  if (m <= 0) return Eigen::MatrixXd::Identity(std::max(m, 0), std::max(m, 0));
  if (m == 1) return Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng_.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd qmat = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j)
    if (r(j, j) < 0) qmat.col(j) *= -1.0;
  // O(m) Haar; right-multiplying the det = -1 component by a fixed
  // reflection yields Haar on SO(m).
  if (qmat.determinant() < 0) qmat.col(m - 1) *= -1.0;
  return qmat;
}

GroupElement HaarSampler::sample() {
  const int n = p_ + q_;
  Eigen::MatrixXd kd = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd rp = haar_so(p_);
  Eigen::MatrixXd rq = haar_so(q_ - 1);
  for (std::size_t a = 0; a < pos_idx_.size(); ++a)
    for (std::size_t b = 0; b < pos_idx_.size(); ++b)
      kd(pos_idx_[a], pos_idx_[b]) = rp(int(a), int(b));
  for (std::size_t a = 0; a < neg_idx_.size(); ++a)
    for (std::size_t b = 0; b < neg_idx_.size(); ++b)
      kd(neg_idx_[a], neg_idx_[b]) = rq(int(a), int(b));
  return make_group_element(cob_ * kd * cob_.transpose(), n, p_);
}

Lattice orbit_lattice(const Eigen::MatrixXd& g0, double t, const GroupElement& k, int p) {
  const int n = int(g0.rows());
  if (std::abs(g0.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("orbit base point must have determinant 1 within 1e-9");
  GroupElement at = diagonal_flow(t, n, p);
  return Lattice(at.matrix * k.matrix * g0);
}

}  // namespace qlpairs
