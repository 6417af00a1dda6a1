#pragma once

#include "qlpairs/bump.hpp"
#include "qlpairs/counting.hpp"
#include "qlpairs/forms.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qlpairs {

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedR : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VolumeMethod { Quadrature, MonteCarlo };

struct VolumeReport {
  double V = 0.0;
  VolumeMethod method = VolumeMethod::Quadrature;
  double error_estimate = 0.0;  // stderr (MC) or mesh-refinement delta
  double T = 0.0;
  Interval I, J;
  bool constraints_inactive = false;  // both windows cover the whole ball range
};

struct VolumeParams {
  int grid = 0;           // outer nodes per free dimension (0 = auto)
  int u_nodes = 64;       // nodes for the linear-pivot direction
  std::uint64_t seed = 1; // MC seed
  std::int64_t samples = 1000000;  // MC samples
  /// Override of the quadratic-pivot coordinate (-1 = automatic). Useful
  /// when the automatic pivot leaves a coupled indefinite block in the
  /// outer grid, which concentrates the support on thin shells.
  int quad_pivot = -1;
};

/// Lebesgue volume of {||v|| < T, q(v) in I, l(v) in J}. Quadrature uses
/// the counting slab decomposition with exact 1-D fiber lengths in the
/// quadratic-pivot coordinate; MonteCarlo is plain hit-ratio sampling in
/// the ball (useful at small T, where hits are plentiful).
VolumeReport volume_joint(const FormPair& pair, double T, const Interval& I,
                          const Interval& J, VolumeMethod method,
                          const VolumeParams& params = {});

struct ConstantFit {
  double C = 0.0;
  double slope = 0.0;              // fitted 1/T coefficient
  std::vector<double> T_list;
  std::vector<double> normalized;  // V / (T^{n-3} |I||J|)
  std::vector<double> residuals;
};

/// Extrapolates V / (T^{n-3}|I||J|) against 1/T to estimate the volume
/// constant. Throws NonConvergence when the residual trend grows.
ConstantFit estimate_constant(const FormPair& pair, const std::vector<double>& T_list,
                              const Interval& I, const Interval& J,
                              const VolumeParams& params = {});

/// Surface measure of the unit sphere in R^m (the paper-facing gamma_{m-1}).
double sphere_surface(int m);

/// 2^{(p+q-2)/2} / (gamma_{p-1} gamma_{q-1}).
double c_pq(int p, int q);

/// Normalization that makes the kernel identities hold against a
/// *probability* Haar measure on the compact stabilizer:
/// c_pq(p, q-1) * gamma_{p-1} * gamma_{q-1}.
double kernel_constant(int p, int q);

/// Fiber kernel: (1/r^{n-3}) integral of f(r, x2, x3.., x_{n-1}, s) over
/// the free coordinates, with x2 solved from the canonical quadratic value
/// zeta. f lives on R^n_+ (vanishes unless x_n > 0).
double jf_integral(const ProductBump& f, int p, double r, double zeta, double s,
                   double rel_tol = 1e-6);

struct KernelLimitRow {
  double t = 0.0;
  double lhs = 0.0;        // kernel_constant * e^{(n-3)t} * MC K-average
  double rhs = 0.0;        // fiber kernel at shrunken radius
  double rel_gap = 0.0;
  double mc_stderr = 0.0;  // scaled to the lhs
  double fitted_constant = 0.0;  // rhs / (e^{(n-3)t} * MC average)
};

struct KernelLimitReport {
  std::vector<KernelLimitRow> rows;
  bool gap_decreasing = false;
  bool final_within_tol = false;
  double tol = 0.02;
};

/// Compares the spherical average of f along the flow against the fiber
/// kernel prediction; the gap must shrink and end below tol.
KernelLimitReport verify_kernel_limit(const ProductBump& f, const Eigen::VectorXd& v,
                                      const std::vector<double>& t_list, int p, int q,
                                      std::int64_t samples, std::uint64_t seed,
                                      double tol = 0.02);

struct LimitIntegralRow {
  double T = 0.0;
  double lhs = 0.0;
  double rel_gap = 0.0;
};

struct LimitIntegralReport {
  double rhs = 0.0;        // flow-invariant side (K x (r, zeta, s) integral)
  double rhs_stderr = 0.0;
  std::vector<LimitIntegralRow> rows;
  bool final_within_tol = false;
  double tol = 0.03;
};

struct LimitIntegralParams {
  std::int64_t k_samples = 20000;
  int r_nodes = 65;
  std::uint64_t seed = 1;
  int lhs_grid = 160;
  double tol = 0.03;
};

/// Scaling limit of (1/T^{n-3}) integral h(v/T, q0(v), l0(v)) dv against
/// the polar decomposition over the compact-orbit cone. Test observables
/// should be supported on the x1 > 0 half-cone.
LimitIntegralReport verify_limit_integral(const SlotBump& h, int p, int q,
                                          const std::vector<double>& T_list,
                                          const LimitIntegralParams& params = {});

}  // namespace qlpairs
