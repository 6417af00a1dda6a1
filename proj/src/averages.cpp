#include "qlpairs/averages.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace qlpairs {

namespace {

struct MomentAccumulator {
  double sum = 0.0, sumsq = 0.0;
  std::int64_t count = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++count;
  }
  void merge(const MomentAccumulator& o) {
    sum += o.sum;
    sumsq += o.sumsq;
    count += o.count;
  }
  double mean() const { return sum / double(count); }
  double se() const {
    double m = mean();
    double var = std::max(0.0, sumsq / double(count) - m * m);
    return std::sqrt(var / double(count));
  }
};

/// Shard-parallel Monte Carlo over the compact stabilizer; shard streams
/// are independent and merged in fixed order, so results do not depend on
/// the thread schedule.
template <typename PerSample>
MomentAccumulator mc_over_k(int p, int q, std::int64_t samples, std::uint64_t seed,
                            std::uint64_t stream_base, int shards,
                            PerSample&& per_sample) {
  shards = std::max(1, shards);
  std::vector<MomentAccumulator> acc(shards);
  std::vector<std::int64_t> shard_n(shards, samples / shards);
  for (int s = 0; s < samples % shards; ++s) ++shard_n[s];

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int s = next.fetch_add(1);
      if (s >= shards) return;
      HaarSampler sampler(p, q, seed, stream_base + std::uint64_t(s));
      for (std::int64_t i = 0; i < shard_n[s]; ++i)
        acc[s].add(per_sample(sampler.sample()));
    }
  };
  std::vector<std::thread> pool;
  int hw = std::max(1u, std::thread::hardware_concurrency());
  for (int i = 0; i < std::min(hw, shards); ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  MomentAccumulator total;
  for (const auto& a : acc) total.merge(a);
  return total;
}

long long vec_gcd(const Eigen::VectorXi& v) {
  long long g = 0;
  for (int i = 0; i < v.size(); ++i) g = std::gcd(g, (long long)std::abs(v[i]));
  return g;
}

std::pair<long long, long long> rationalize(double x, long long qmax) {
  long long p0 = 1, q0 = 0, p1 = 0, q1 = 1;
  double y = x;
  for (int it = 0; it < 64; ++it) {
    double fa = std::floor(y);
    if (std::abs(fa) > 9e17) break;
    long long a = (long long)fa;
    long long p2 = a * p0 + p1, q2 = a * q0 + q1;
    if (q2 > qmax || q2 < 0) break;
    p1 = p0; q1 = q0; p0 = p2; q0 = q2;
    double frac = y - fa;
    if (frac < 1e-13) break;
    y = 1.0 / frac;
  }
  if (q0 == 0) return {0, 0};
  return {p0, q0};
}

}  // namespace

AverageEstimate spherical_average_alpha(const Eigen::MatrixXd& g0, double t,
                                        double delta, std::int64_t samples,
                                        std::uint64_t seed, int p, int q, int shards) {
  if (!(delta > 0.0 && delta < 2.0))
    throw std::invalid_argument("delta must lie in (0, 2)");
  const int n = p + q;
  if (g0.rows() != n) throw std::invalid_argument("dimension mismatch");
  Eigen::MatrixXd at = diagonal_flow(t, n, p).matrix;
  MomentAccumulator acc =
      mc_over_k(p, q, samples, seed, 0x1000, shards, [&](const GroupElement& k) {
        Lattice lat(at * k.matrix * g0);
        return std::pow(alpha(lat, AlphaMode::Exact).value, delta);
      });
  AverageEstimate est;
  est.mean = acc.mean();
  est.stderr_ = acc.se();
  est.samples = acc.count;
  est.t = t;
  est.seed = seed;
  return est;
}

BoundednessReport boundedness_scan(const Eigen::MatrixXd& g0, double delta,
                                   const std::vector<double>& t_grid,
                                   std::int64_t samples, std::uint64_t seed,
                                   int p, int q, int shards) {
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("t grid must be increasing");
  BoundednessReport rep;
  double running = 0.0;
  std::vector<double> max_se;  // stderr of the estimate realizing each running max
  double se_at_max = 0.0;
  for (double t : t_grid) {
    AverageEstimate est = spherical_average_alpha(g0, t, delta, samples, seed, p, q, shards);
    if (est.mean > running) {
      running = est.mean;
      se_at_max = est.stderr_;
    }
    max_se.push_back(se_at_max);
    rep.rows.push_back({est, running});
  }
  rep.bounded_consistent = false;
  if (rep.rows.size() >= 3) {
    const std::size_t k = rep.rows.size();
    rep.bounded_consistent = true;
    for (std::size_t a = k - 3; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) {
        double gap = std::abs(rep.rows[a].running_max - rep.rows[b].running_max);
        double sigma = 3.0 * (max_se[a] + max_se[b]);
        if (gap > sigma) rep.bounded_consistent = false;
      }
  }
  rep.verdict = rep.bounded_consistent ? "bounded-consistent" : "suspect-growth";
  return rep;
}

DirectionDetection detect_invariant_direction(const Eigen::MatrixXd& g0,
                                              long long denominator_bound) {
  const int n = int(g0.rows());
  Eigen::VectorXd w = g0.inverse().col(n - 1);  // g0^{-1} e_n
  DirectionDetection det;
  det.denominator_bound = denominator_bound;

  int j = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(w[i]) > std::abs(w[j])) j = i;

  // Three-way decision: a genuine rational p/q reproduces the double to
  // ~1e-14 relative, while an algebraic irrational's best approximation
  // with denominator q stays ~1/q^2 away. The zone between the thresholds
  // is undecidable at double precision and reported as such.
  const double accept_tol = 1e-12;
  const double reject_tol = 1e-9;
  std::vector<long long> nums(n), dens(n);
  long long lcm = 1;
  bool ambiguous = false;
  for (int i = 0; i < n; ++i) {
    double ratio = w[i] / w[j];
    auto [pp, qq] = rationalize(ratio, denominator_bound);
    if (qq == 0) {
      det.orbit_case = OrbitCase::Ambiguous;
      return det;
    }
    double err = std::abs(ratio - double(pp) / double(qq)) / (1.0 + std::abs(ratio));
    if (err > reject_tol) {
      det.orbit_case = OrbitCase::Dense;
      return det;
    }
    if (err > accept_tol) ambiguous = true;
    nums[i] = pp;
    dens[i] = qq;
    lcm = std::lcm(lcm, qq);
    if (lcm > (long long)4e18 / std::max(1LL, denominator_bound)) {
      det.orbit_case = OrbitCase::Ambiguous;
      return det;
    }
  }
  if (ambiguous) {
    det.orbit_case = OrbitCase::Ambiguous;
    return det;
  }
  Eigen::VectorXi v(n);
  for (int i = 0; i < n; ++i) {
    long long val = nums[i] * (lcm / dens[i]);
    if (std::abs(val) > 2e9) {
      det.orbit_case = OrbitCase::Ambiguous;
      return det;
    }
    v[i] = int(val);
  }
  long long g = vec_gcd(v);
  if (g > 1)
    for (int i = 0; i < n; ++i) v[i] = int(v[i] / g);
  det.orbit_case = OrbitCase::FixedVector;
  det.primitive_point = v;
  return det;
}

EquidistributionReport equidistribution_check(const ProductBump& f,
                                              const Eigen::MatrixXd& g0,
                                              const std::vector<double>& t_grid,
                                              std::int64_t samples, std::uint64_t seed,
                                              int p, int q, double tol, int shards,
                                              long long direction_bound) {
  const int n = p + q;
  if (f.n() != n || g0.rows() != n) throw std::invalid_argument("dimension mismatch");
  EquidistributionReport rep;
  rep.tol = tol;
  rep.detection = detect_invariant_direction(g0, direction_bound);
  rep.integral_f = f.integral();
  rep.predicted_dense = rep.integral_f;

  // Persistent points: integer multiples of g0 * P stay fixed under the
  // whole flow-orbit family, so they contribute to every sample.
  rep.correction = 0.0;
  if (rep.detection.orbit_case == OrbitCase::FixedVector) {
    Eigen::VectorXd base = g0 * rep.detection.primitive_point.cast<double>();
    double bn = base.norm();
    double rad = f.support_radius();
    int mmax = bn > 0 ? int(std::floor(rad / bn)) + 1 : 0;
    for (int m = -mmax; m <= mmax; ++m) {
      if (m == 0) continue;
      rep.correction += f(double(m) * base);
    }
  }
  rep.predicted_fixed = rep.integral_f + rep.correction;

  double predicted = (rep.detection.orbit_case == OrbitCase::FixedVector)
                         ? rep.predicted_fixed
                         : rep.predicted_dense;

  SupportedFunction sf;
  sf.support_radius = f.support_radius();
  sf.eval = [&f](const Eigen::VectorXd& x) { return f(x); };

  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    Eigen::MatrixXd at = diagonal_flow(t, n, p).matrix;
    MomentAccumulator acc = mc_over_k(
        p, q, samples, seed, 0x2000 + 0x100 * ti, shards, [&](const GroupElement& k) {
          return siegel_transform(sf, Lattice(at * k.matrix * g0));
        });
    EquidistributionRow row;
    row.t = t;
    row.estimate = {acc.mean(), acc.se(), acc.count, t, seed};
    row.predicted = predicted;
    row.abs_gap = std::abs(acc.mean() - predicted);
    row.rel_gap = row.abs_gap / std::max(1e-300, std::abs(predicted));
    rep.rows.push_back(row);
  }
  if (!rep.rows.empty()) rep.final_within_tol = rep.rows.back().rel_gap < tol;
  return rep;
}

}  // namespace qlpairs
