#pragma once

#include "qlpairs/forms.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlpairs {

struct GuardExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0, hi = 0.0;  // open interval (lo, hi)
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo < x && x < hi; }
  Interval negated() const { return {-hi, -lo}; }
};

struct CountQuery {
  FormPair pair;
  double T = 0.0;
  Interval I, J;
  bool collect_witnesses = false;
  int shards = 1;
};

struct ShardCount {
  int lo = 0, hi = 0;  // outer-coordinate range [lo, hi)
  std::int64_t count = 0;
};

struct CountReport {
  std::int64_t N = 0;
  double T = 0.0;
  Interval I, J;
  std::vector<ShardCount> shards;
  double wall_seconds = 0.0;  // volatile; excluded from determinism checks
  std::int64_t boundary_hits = 0;  // integer points within 1e-12 of a constraint edge
  std::vector<Eigen::VectorXi> witnesses;  // filled when requested
};

/// Exact N = #{v in Z^n \ {0} : ||v|| < T, q(v) in I, l(v) in J}.
/// The zero vector is always excluded (matching the nonzero-sum convention
/// of the Siegel transform); all inequalities are strict. Enumerates n-2
/// free coordinates, slices the designated linear-pivot coordinate by the
/// J-constraint, and solves the final coordinate by the quadratic formula;
/// every candidate integer is accepted by direct evaluation of all three
/// constraints, so the result matches brute force exactly.
CountReport count_joint(const CountQuery& query);

/// Single-pass scan: enumerates once at max(T_list) and buckets by ||v||,
/// emitting one cumulative report per threshold.
std::vector<CountReport> count_scan(const CountQuery& query_template,
                                    const std::vector<double>& T_list);

/// Shared predicate (used by the brute-force oracle in tests).
bool count_predicate(const FormPair& pair, double T, const Interval& I,
                     const Interval& J, const Eigen::VectorXi& v);

struct Band {
  double lo = 0.0, hi = 0.0;  // open
};

/// Solution set of {a < A w^2 + B w + C < b} as up to two open intervals;
/// returns the interval count. Degenerate leading coefficients fall back
/// to the linear and constant cases.
int quadratic_band(double A, double B, double C, double a, double b, Band out[2]);

}  // namespace qlpairs
