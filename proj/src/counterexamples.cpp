#include "qlpairs/counterexamples.hpp"

#include <algorithm>
#include <cmath>

namespace qlpairs {

double liouville_beta(int terms) {
  double acc = 0.0;
  double fact = 1.0;
  for (int k = 1; k <= terms; ++k) {
    fact *= k;
    if (fact > 1060) break;  // 2^{-1060} underflows; sum is already exact
    acc += std::pow(2.0, -fact);
  }
  return acc;
}

BetaFamily make_family(double beta, BetaVariant variant) {
  if (beta == 0.0) throw std::invalid_argument("beta must be nonzero");
  BetaFamily fam;
  fam.beta = beta;
  fam.variant = variant;
  fam.beta_in_range = (beta > 0.5 && beta < 1.0);
  return fam;
}

FormPair build_pair(const BetaFamily& family) {
  const double b = family.beta;
  if (family.variant == BetaVariant::Sig22) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g(0, 0) = 1.0;
    g(1, 1) = 1.0;
    g(2, 2) = -b - b * b;
    g(2, 3) = g(3, 2) = -b;
    g(3, 3) = -1.0;
    Eigen::VectorXd l(4);
    l << 0.0, 0.0, b, 1.0;
    return FormPair(QuadraticForm(g), LinearForm(l));
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(5, 5);
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  g(2, 2) = -b - b * b;
  g(3, 3) = -b - b * b;
  g(2, 3) = g(3, 2) = -b * b;
  g(2, 4) = g(4, 2) = -b;
  g(3, 4) = g(4, 3) = -b;
  g(4, 4) = -1.0;
  Eigen::VectorXd l(5);
  l << 0.0, 0.0, b, b, 1.0;
  return FormPair(QuadraticForm(g), LinearForm(l));
}

// q + l^2 collapses to a definite-plus-one-negative-block form with a zero
// last coordinate; this is the exact auxiliary form the witness lift solves.
QuadraticForm auxiliary_form(const BetaFamily& family) {
  const double b = family.beta;
  if (family.variant == BetaVariant::Sig22) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
    g(0, 0) = 1.0;
    g(1, 1) = 1.0;
    g(2, 2) = -b;
    return QuadraticForm(g);
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  g(2, 2) = -b;
  g(3, 3) = -b;
  return QuadraticForm(g);
}

namespace {

/// Enumerates solutions of the auxiliary form in [1/beta, 2] inside the
/// T-ball and lifts them by rounding the last coordinate; the lift keeps
/// |l| <= 1/2 and lands q in [1/beta - 1, 2].
std::int64_t lift_witnesses(const BetaFamily& family, const FormPair& pair, double T,
                            std::vector<SpikeWitness>& sample, std::size_t max_sample,
                            bool& all_valid) {
  const double b = family.beta;
  const int n = pair.n();
  const double lo = 1.0 / b, hi = 2.0;
  std::int64_t count = 0;
  const long long x3max = (long long)std::floor(T);

  auto check_and_record = [&](Eigen::VectorXi v) {
    Eigen::VectorXd vd = v.cast<double>();
    double qv = vd.dot(pair.q.gram() * vd);
    double lv = pair.l.coeffs().dot(vd);
    double nrm = vd.norm();
    bool ok = (qv >= -1.0 - 1e-9 && qv <= 2.0 + 1e-9) &&
              (lv >= -1.0 - 1e-9 && lv <= 1.0 + 1e-9) &&
              (nrm <= std::sqrt(2.0) * T * (1.0 + 1e-12));
    if (!ok) all_valid = false;
    ++count;
    if (sample.size() < max_sample) sample.push_back({v, qv, lv, nrm});
  };

  if (family.variant == BetaVariant::Sig22) {
    for (long long x3 = -x3max; x3 <= x3max; ++x3) {
      double c = b * double(x3) * double(x3);
      double smin = lo + c, smax = hi + c;  // x1^2 + x2^2 range
      double ballroom = T * T - double(x3) * double(x3);
      smax = std::min(smax, ballroom);
      if (smax < smin) continue;
      long long x1max = (long long)std::floor(std::sqrt(smax));
      for (long long x1 = -x1max; x1 <= x1max; ++x1) {
        double rem_lo = smin - double(x1) * double(x1);
        double rem_hi = smax - double(x1) * double(x1);
        if (rem_hi < 0) continue;
        long long x2hi = (long long)std::floor(std::sqrt(rem_hi));
        long long x2lo = rem_lo > 0 ? (long long)std::ceil(std::sqrt(rem_lo)) : 0;
        for (long long x2 = x2lo; x2 <= x2hi; ++x2) {
          double val = double(x1) * double(x1) + double(x2) * double(x2) - c;
          if (!(val >= lo && val <= hi)) continue;
          long long x4 = (long long)std::llround(-b * double(x3));
          Eigen::VectorXi v(4);
          v << int(x1), int(x2), int(x3), int(x4);
          check_and_record(v);
          if (x2 != 0) {
            v[1] = int(-x2);
            check_and_record(v);
          }
        }
      }
    }
  } else {
    for (long long x3 = -x3max; x3 <= x3max; ++x3)
      for (long long x4 = -x3max; x4 <= x3max; ++x4) {
        double sq34 = double(x3) * double(x3) + double(x4) * double(x4);
        if (sq34 > T * T) continue;
        double s = b * double(x3) + b * double(x4);
        double c = b * sq34;
        double smin = lo + c, smax = hi + c;
        double ballroom = T * T - sq34;
        smax = std::min(smax, ballroom);
        if (smax < smin) continue;
        long long x1max = (long long)std::floor(std::sqrt(smax));
        for (long long x1 = -x1max; x1 <= x1max; ++x1) {
          double rem_lo = smin - double(x1) * double(x1);
          double rem_hi = smax - double(x1) * double(x1);
          if (rem_hi < 0) continue;
          long long x2hi = (long long)std::floor(std::sqrt(rem_hi));
          long long x2lo = rem_lo > 0 ? (long long)std::ceil(std::sqrt(rem_lo)) : 0;
          for (long long x2 = x2lo; x2 <= x2hi; ++x2) {
            double val = double(x1) * double(x1) + double(x2) * double(x2) - c;
            if (!(val >= lo && val <= hi)) continue;
            long long x5 = (long long)std::llround(-s);
            Eigen::VectorXi v(5);
            v << int(x1), int(x2), int(x3), int(x4), int(x5);
            check_and_record(v);
            if (x2 != 0) {
              v[1] = int(-x2);
              check_and_record(v);
            }
          }
        }
      }
  }
  (void)n;
  return count;
}

}  // namespace

SpikeReport spike_scan(const BetaFamily& family, const std::vector<double>& T_list,
                       const Interval& I, const Interval& J, int shards,
                       std::size_t max_sample_witnesses) {
  SpikeReport rep;
  rep.family = family;
  FormPair pair = build_pair(family);
  const int n = pair.n();

  CountQuery q;
  q.pair = pair;
  q.I = I;
  q.J = J;
  q.shards = shards;
  std::vector<CountReport> counts = count_scan(q, T_list);

  // second window: I = (1/beta, 2), the auxiliary-form window
  CountQuery q2 = q;
  q2.I = {1.0 / family.beta, 2.0};
  std::vector<CountReport> counts2;
  if (q2.I.lo < q2.I.hi) counts2 = count_scan(q2, T_list);

  rep.witnesses_valid = true;
  for (std::size_t i = 0; i < T_list.size(); ++i) {
    SpikeRow row;
    row.T = T_list[i];
    row.N = counts[i].N;
    row.N_aux_window = counts2.empty() ? 0 : counts2[i].N;
    row.ratio = double(counts[i].N) / std::pow(T_list[i], n - 3);
    bool valid = rep.witnesses_valid;
    row.witness_count = lift_witnesses(family, pair, T_list[i], rep.sample_witnesses,
                                       max_sample_witnesses, valid);
    rep.witnesses_valid = valid;
    rep.total_witnesses += row.witness_count;
    rep.rows.push_back(row);
  }

  // spike verdict: ratio spread over the top half of the T ladder
  std::size_t half = rep.rows.size() / 2;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = half; i < rep.rows.size(); ++i) {
    if (rep.rows[i].ratio <= 0) continue;
    lo = std::min(lo, rep.rows[i].ratio);
    hi = std::max(hi, rep.rows[i].ratio);
  }
  rep.ratio_spread = (lo > 0 && std::isfinite(lo)) ? hi / lo : 0.0;
  rep.non_stabilizing = rep.ratio_spread > 1.5;
  return rep;
}

}  // namespace qlpairs
