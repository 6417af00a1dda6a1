#pragma once

#include "qlpairs/forms.hpp"
#include "qlpairs/lattice.hpp"
#include "qlpairs/rng.hpp"

#include <Eigen/Dense>
#include <cstdint>

namespace qlpairs {

struct GroupElement {
  Eigen::MatrixXd matrix;
  bool preserves_q0 = false;        // M^T Q0 M = Q0 within 1e-9
  bool preserves_last_coord = false;  // last row equals e_n within 1e-12
  bool preserves_euclidean = false;   // M^T M = Id within 1e-9
};

/// Recomputes the `preserves` flags of m for the canonical pair with
/// parameter p (gram of 2x1x2 + ... per canonical_gram).
GroupElement make_group_element(Eigen::MatrixXd m, int n, int p);

/// diag(e^{-t}, e^t, 1, ..., 1); preserves the canonical pair.
GroupElement diagonal_flow(double t, int n, int p);

/// Haar sampler for the compact stabilizer of the canonical pair:
/// independent Haar blocks from SO(p) and SO(q-1) in diagonal coordinates,
/// conjugated into hyperbolic coordinates by a fixed orthogonal change of
/// basis with +-1/sqrt(2) entries.
class HaarSampler {
public:
  HaarSampler(int p, int q, std::uint64_t seed, std::uint64_t stream = 0);

  int n() const { return p_ + q_; }
  int p() const { return p_; }
  int q() const { return q_; }
  const Eigen::MatrixXd& change_of_basis() const { return cob_; }

  GroupElement sample();

  /// Fresh sampler on an independent stream (for shard-parallel runs).
  HaarSampler split(std::uint64_t stream) const {
    return HaarSampler(p_, q_, seed_, stream);
  }

private:
  Eigen::MatrixXd haar_so(int m);
  int p_, q_;
  std::uint64_t seed_;
  Eigen::MatrixXd cob_;
  std::vector<int> pos_idx_, neg_idx_;
  StreamRng rng_;
};

/// Change of basis mapping diagonal coordinates to hyperbolic coordinates:
/// orthogonal, symmetric, C^T Q0 C = diag(+-1) with the sign pattern
/// (+, -, +^{p-1}, -^{q-1}).
Eigen::MatrixXd hyperbolic_change_of_basis(int n, int p);

/// Lattice a_t k g0 Z^n.
Lattice orbit_lattice(const Eigen::MatrixXd& g0, double t, const GroupElement& k, int p);

}  // namespace qlpairs
