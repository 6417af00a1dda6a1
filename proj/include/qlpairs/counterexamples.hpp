#pragma once

#include "qlpairs/counting.hpp"
#include "qlpairs/forms.hpp"

#include <string>
#include <vector>

namespace qlpairs {

enum class BetaVariant { Sig22, Sig23 };

struct BetaFamily {
  double beta = 0.0;
  BetaVariant variant = BetaVariant::Sig22;
  bool beta_in_range = true;  // the analysis path wants beta in (1/2, 1)
};

/// beta = sum of 2^{-k!} over k = 1..terms (terms beyond the fifth are
/// below double precision of the partial sum).
double liouville_beta(int terms);

BetaFamily make_family(double beta, BetaVariant variant);

/// Sig22: q = (x1^2+x2^2) - b x3^2 - (b x3 + x4)^2 with l = b x3 + x4;
/// Sig23: the five-variable analogue with l = b x3 + b x4 + x5.
FormPair build_pair(const BetaFamily& family);

/// Auxiliary definite-direction form x1^2 + x2^2 - b^2 x3^2 (Sig22) or
/// x1^2 + x2^2 - b^2 (x3 + x4)^2-type analogue used by the witness lift.
QuadraticForm auxiliary_form(const BetaFamily& family);

struct SpikeWitness {
  Eigen::VectorXi v;
  double q_value = 0.0;
  double l_value = 0.0;
  double norm = 0.0;
};

struct SpikeRow {
  double T = 0.0;
  std::int64_t N = 0;            // window I = (-1, 2)
  std::int64_t N_aux_window = 0; // window I = (1/beta, 2)
  double ratio = 0.0;            // N / T^{n-3}
  std::int64_t witness_count = 0;
};

struct SpikeReport {
  BetaFamily family;
  std::vector<SpikeRow> rows;
  std::vector<SpikeWitness> sample_witnesses;
  bool witnesses_valid = false;  // every witness passes the three constraints
  bool non_stabilizing = false;  // max/min of ratios over the top half > 1.5
  double ratio_spread = 0.0;
  std::int64_t total_witnesses = 0;
};

/// Counts N_{T, I, J} along T_list, constructs the explicit lift witnesses
/// (solutions of the auxiliary form in [1/beta, 2] with the last coordinate
/// rounded to make |l| <= 1/2), validates the displayed constraints
/// (q in [-1,2], l in [-1,1], ||v|| <= sqrt(2) T), and reports whether the
/// normalized ratio sequence stabilizes. Exploratory output, not pass/fail.
SpikeReport spike_scan(const BetaFamily& family, const std::vector<double>& T_list,
                       const Interval& I, const Interval& J, int shards = 1,
                       std::size_t max_sample_witnesses = 8);

}  // namespace qlpairs
