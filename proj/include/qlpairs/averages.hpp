#pragma once

#include "qlpairs/bump.hpp"
#include "qlpairs/group_actions.hpp"
#include "qlpairs/lattice.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qlpairs {

struct AverageEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t samples = 0;
  double t = 0.0;
  std::uint64_t seed = 0;
};

/// Monte Carlo estimate of the spherical average of alpha^delta along the
/// flow at time t, over the compact stabilizer of the canonical pair.
AverageEstimate spherical_average_alpha(const Eigen::MatrixXd& g0, double t,
                                        double delta, std::int64_t samples,
                                        std::uint64_t seed, int p, int q,
                                        int shards = 1);

struct BoundednessRow {
  AverageEstimate estimate;
  double running_max = 0.0;
};

struct BoundednessReport {
  std::vector<BoundednessRow> rows;
  std::string verdict;  // "bounded-consistent" or "suspect-growth"
  bool bounded_consistent = false;
};

/// Scans t over a grid; "bounded-consistent" when the running maxima of the
/// estimates stabilize (last three within mutual 3 sigma). Sampling cannot
/// prove boundedness; this is a consistency check only.
BoundednessReport boundedness_scan(const Eigen::MatrixXd& g0, double delta,
                                   const std::vector<double>& t_grid,
                                   std::int64_t samples, std::uint64_t seed,
                                   int p, int q, int shards = 1);

enum class OrbitCase { Dense, FixedVector, Ambiguous };

struct DirectionDetection {
  OrbitCase orbit_case = OrbitCase::Dense;
  /// Primitive integer point on the invariant line (FixedVector case).
  Eigen::VectorXi primitive_point;
  long long denominator_bound = 0;
};

/// Detects whether the line R * g0^{-1} e_n meets the integer lattice, by
/// bounded-denominator rational reconstruction of the coordinate ratios.
DirectionDetection detect_invariant_direction(const Eigen::MatrixXd& g0,
                                              long long denominator_bound = 1000000);

struct EquidistributionRow {
  double t = 0.0;
  AverageEstimate estimate;
  double predicted = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
};

struct EquidistributionReport {
  DirectionDetection detection;
  double integral_f = 0.0;        // dense-case prediction
  double correction = 0.0;        // persistent-point sum (FixedVector case)
  double predicted_dense = 0.0;   // = integral_f
  double predicted_fixed = 0.0;   // = integral_f + correction
  std::vector<EquidistributionRow> rows;
  bool final_within_tol = false;
  double tol = 0.05;
};

/// Spherical averages of the Siegel transform of f along the flow,
/// compared against the orbit-closure prediction: integral of f in the
/// dense case, plus the persistent-lattice-point correction in the
/// fixed-vector case. Ambiguous detection reports both predictions and
/// gates on the dense one.
EquidistributionReport equidistribution_check(const ProductBump& f,
                                              const Eigen::MatrixXd& g0,
                                              const std::vector<double>& t_grid,
                                              std::int64_t samples, std::uint64_t seed,
                                              int p, int q, double tol = 0.05,
                                              int shards = 1,
                                              long long direction_bound = 1000000);

}  // namespace qlpairs
