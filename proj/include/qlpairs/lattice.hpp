#pragma once

#include "qlpairs/rational.hpp"

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qlpairs {

struct ExplosionGuard : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModeUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lattice g Z^n given by its basis matrix (columns are generators).
class Lattice {
public:
  Lattice() = default;
  explicit Lattice(Eigen::MatrixXd basis, bool require_unimodular = false);

  int n() const { return int(basis_.rows()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  Eigen::VectorXd image(const Eigen::VectorXi& v) const {
    return basis_ * v.cast<double>();
  }
  Lattice dual() const;  // basis g^{-T}

private:
  Eigen::MatrixXd basis_;
};

/// LLL reduction (delta = 0.99). Returns the reduced basis B*U together
/// with the unimodular transform U (integer coordinates of the reduced
/// vectors in the original basis).
struct ReducedBasis {
  Eigen::MatrixXd basis;
  Eigen::MatrixXi transform;
};
ReducedBasis lll_reduce(const Eigen::MatrixXd& basis, double delta = 0.99);

inline constexpr long long kEnumNodeGuard = 1'000'000'000LL;

/// All nonzero integer vectors v with ||g v|| <= radius, closed under
/// negation. Depth-first enumeration with interval pruning on a reduced
/// basis; throws ExplosionGuard past the node budget.
std::vector<Eigen::VectorXi> shortest_vectors(const Lattice& lattice, double radius,
                                              long long node_guard = kEnumNodeGuard);

/// A nonzero lattice vector of minimal norm (integer coordinates).
Eigen::VectorXi shortest_vector(const Lattice& lattice);

enum class AlphaMode { Exact, Certified };

struct AlphaResult {
  double value = 0.0;
  int witness_rank = 0;
  /// Integer coordinate vectors spanning the minimizing sublattice
  /// (Exact mode only).
  std::vector<Eigen::VectorXi> witness_vectors;
  AlphaMode mode = AlphaMode::Exact;
  double lower = 0.0, upper = 0.0;  // Certified bounds (lower = reported value)
  double gap_factor = 1.0;          // reduction-quality constant in the bounds
  /// Minimal covolume per rank (Exact mode), index 0 <-> rank 1.
  std::vector<double> rank_minima;
};

/// Height of the lattice: max over ranks i of 1 / (minimal covolume of a
/// rank-i sublattice). Exact mode (n <= 5) enumerates minimizing
/// sublattices directly in ranks 1 and 2 and reaches the remaining ranks
/// through the dual lattice; Certified mode reports reduced-basis bounds.
AlphaResult alpha(const Lattice& lattice, AlphaMode mode = AlphaMode::Exact);

/// Compactly supported test function with an explicit support radius.
struct SupportedFunction {
  double support_radius = 0.0;
  std::function<double(const Eigen::VectorXd&)> eval;
};

/// Sum of f over the nonzero lattice points, computed as an exact finite
/// sum over the support ball.
double siegel_transform(const SupportedFunction& f, const Lattice& lattice);

/// Product of the j largest singular values, maximized over j; equals the
/// largest operator norm among the exterior powers of m.
double max_exterior_operator_norm(const Eigen::MatrixXd& m);

}  // namespace qlpairs
