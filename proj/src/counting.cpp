#include "qlpairs/counting.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

namespace qlpairs {

namespace {

constexpr double kTGuard = 1e4;
constexpr double kPivotTol = 1e-12;

/// Integer candidates of an open interval, widened by eps so that boundary
/// integers are resolved by direct evaluation rather than the root formula.
struct IntRange {
  long long lo = 1, hi = 0;
  bool empty() const { return lo > hi; }
};

IntRange integer_candidates(double lo, double hi, double eps) {
  if (!(lo < hi)) return {};
  IntRange r;
  r.lo = (long long)std::ceil(lo - eps);
  r.hi = (long long)std::floor(hi + eps);
  return r;
}

struct Plan {
  int n = 0;
  int j_l = 0;       // linear pivot (largest |l| coefficient)
  int j_q = 0;       // quadratic pivot (largest |Q_kk|, k != j_l)
  bool quadratic_ok = false;  // |Q_{j_q,j_q}| above tolerance
  std::vector<int> free_idx;  // remaining n-2 coordinates
};

Plan make_plan(const FormPair& pair) {
  Plan plan;
  const int n = pair.n();
  plan.n = n;
  const auto& l = pair.l.coeffs();
  const auto& Q = pair.q.gram();
  plan.j_l = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(l[i]) > std::abs(l[plan.j_l])) plan.j_l = i;
  plan.j_q = -1;
  double best = kPivotTol;
  for (int i = 0; i < n; ++i) {
    if (i == plan.j_l) continue;
    if (std::abs(Q(i, i)) > best) {
      best = std::abs(Q(i, i));
      plan.j_q = i;
    }
  }
  plan.quadratic_ok = plan.j_q >= 0;
  if (!plan.quadratic_ok) {
    // no usable quadratic pivot: keep a placeholder coordinate and verify
    // candidates over the full set (documented fallback; linear in w)
    for (int i = 0; i < n; ++i)
      if (i != plan.j_l) { plan.j_q = i; break; }
  }
  for (int i = 0; i < n; ++i)
    if (i != plan.j_l && i != plan.j_q) plan.free_idx.push_back(i);
  return plan;
}

}  // namespace

int quadratic_band(double A, double B, double C, double a, double b, Band out[2]) {
  auto roots = [](double A_, double B_, double C_, double& r1, double& r2) {
    // A_ w^2 + B_ w + C_ = 0, A_ != 0; returns false when no real roots
    double disc = B_ * B_ - 4.0 * A_ * C_;
    if (disc < 0) return false;
    double s = std::sqrt(disc);
    double q = -0.5 * (B_ + (B_ >= 0 ? s : -s));
    r1 = q / A_;
    r2 = (std::abs(q) > 0) ? C_ / q : -B_ / (2.0 * A_) ;
    if (r1 > r2) std::swap(r1, r2);
    return true;
  };
  if (std::abs(A) <= kPivotTol) {
    // linear band
    if (std::abs(B) <= kPivotTol) {
      if (a < C && C < b) {
        out[0] = {-std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
        return 1;
      }
      return 0;
    }
    double w1 = (a - C) / B, w2 = (b - C) / B;
    if (w1 > w2) std::swap(w1, w2);
    out[0] = {w1, w2};
    return 1;
  }
  double lo1, lo2, hi1, hi2;
  if (A > 0) {
    // {q < b} is (hi1, hi2); {q > a} is the complement of [lo1, lo2]
    if (!roots(A, B, C - b, hi1, hi2)) return 0;
    if (roots(A, B, C - a, lo1, lo2)) {
      int cnt = 0;
      if (hi1 < lo1) out[cnt++] = {hi1, lo1};
      if (lo2 < hi2) out[cnt++] = {lo2, hi2};
      return cnt;
    }
    out[0] = {hi1, hi2};
    return 1;
  }
  // A < 0: {q > a} is (g1, g2); {q < b} is the complement of [f1, f2]
  if (!roots(A, B, C - a, lo1, lo2)) return 0;
  if (roots(A, B, C - b, hi1, hi2)) {
    int cnt = 0;
    if (lo1 < hi1) out[cnt++] = {lo1, hi1};
    if (hi2 < lo2) out[cnt++] = {hi2, lo2};
    return cnt;
  }
  out[0] = {lo1, lo2};
  return 1;
}

namespace {

struct WorkResult {
  std::int64_t count = 0;
  std::int64_t boundary_hits = 0;
  std::vector<Eigen::VectorXi> witnesses;
  std::vector<std::int64_t> bucket_counts;  // for scans
};

/// Enumerates all lattice points for outer values in [outer_lo, outer_hi).
/// `t_list` non-empty => bucket by ||v|| against the thresholds.
WorkResult run_range(const FormPair& pair, const Plan& plan, double T,
                     const Interval& I, const Interval& J, int outer_lo,
                     int outer_hi, bool witnesses,
                     const std::vector<double>& t_list) {
  WorkResult res;
  res.bucket_counts.assign(t_list.size(), 0);
  const int n = plan.n;
  const auto& Q = pair.q.gram();
  const auto& l = pair.l.coeffs();
  const double Tsq = T * T;
  const int j_l = plan.j_l, j_q = plan.j_q;
  const double l_u = l[j_l];
  const double l_w = l[j_q];
  const double A = plan.quadratic_ok ? Q(j_q, j_q) : 0.0;
  const int nfree = int(plan.free_idx.size());

  Eigen::VectorXi v = Eigen::VectorXi::Zero(n);
  Eigen::VectorXd vd = Eigen::VectorXd::Zero(n);

  auto accept = [&](long long w) {
    v[j_q] = int(w);
    for (int i = 0; i < n; ++i) vd[i] = double(v[i]);
    double nsq = vd.squaredNorm();
    if (nsq == 0.0) return;  // the zero vector is excluded by convention
    if (!(nsq < Tsq)) return;
    double qv = vd.dot(Q * vd);
    double lv = l.dot(vd);
    const double margin = 1e-12 * (1.0 + std::abs(qv) + std::abs(lv) + nsq);
    if (std::min({qv - I.lo, I.hi - qv, lv - J.lo, J.hi - lv, Tsq - nsq}) < margin)
      ++res.boundary_hits;
    if (!(qv > I.lo && qv < I.hi)) return;
    if (!(lv > J.lo && lv < J.hi)) return;
    if (t_list.empty()) {
      ++res.count;
      if (witnesses) res.witnesses.push_back(v);
    } else {
      double nrm = std::sqrt(nsq);
      for (std::size_t b = 0; b < t_list.size(); ++b)
        if (nrm < t_list[b]) ++res.bucket_counts[b];
      ++res.count;
    }
  };

  // recursive loop over free coordinates, then u = x_{j_l}, then w = x_{j_q}
  std::function<void(int, double, double)> rec =
      [&](int depth, double norm_acc, double l_acc) {
    if (depth == nfree) {
      double rem = Tsq - norm_acc;
      if (!(rem > 0)) return;
      double wmax_all = std::sqrt(rem);
      // feasible u range: ball plus J-feasibility (exact when l_w == 0)
      double ulo, uhi;
      if (std::abs(l_w) <= kPivotTol) {
        if (std::abs(l_u) <= kPivotTol) return;  // J unenforceable: l zero here
        double a1 = (J.lo - l_acc) / l_u, a2 = (J.hi - l_acc) / l_u;
        if (a1 > a2) std::swap(a1, a2);
        ulo = std::max(a1, -wmax_all);
        uhi = std::min(a2, wmax_all);
      } else {
        double spread = std::abs(l_w) * wmax_all;
        double a1 = (J.lo - l_acc - spread) / l_u, a2 = (J.hi - l_acc + spread) / l_u;
        if (a1 > a2) std::swap(a1, a2);
        ulo = std::max(a1, -wmax_all);
        uhi = std::min(a2, wmax_all);
      }
      IntRange ur = integer_candidates(ulo, uhi, 1e-9);
      if (ur.empty()) return;
      for (long long u = ur.lo; u <= ur.hi; ++u) {
        v[j_l] = int(u);
        double rem_w = rem - double(u) * double(u);
        if (!(rem_w > 0)) continue;
        double wball = std::sqrt(rem_w);

        // l-band in w
        Band wl{-wball, wball};
        double l_here = l_acc + l_u * double(u);
        if (std::abs(l_w) > kPivotTol) {
          double b1 = (J.lo - l_here) / l_w, b2 = (J.hi - l_here) / l_w;
          if (b1 > b2) std::swap(b1, b2);
          wl.lo = std::max(wl.lo, b1);
          wl.hi = std::min(wl.hi, b2);
        } else if (!(J.lo < l_here && l_here < J.hi)) {
          // treated as candidate-free; direct evaluation would reject all
          continue;
        }
        if (!(wl.lo < wl.hi)) continue;

        // quadratic band in w: q(v) = A w^2 + B w + C at w = 0
        v[j_q] = 0;
        double B = 0.0, C = 0.0;
        {
          for (int i = 0; i < n; ++i) vd[i] = double(v[i]);
          C = vd.dot(Q * vd);
          B = 2.0 * Q.row(j_q).dot(vd);
        }
        Band bands[2];
        int nb = quadratic_band(A, B, C, I.lo, I.hi, bands);
        for (int bi = 0; bi < nb; ++bi) {
          double lo = std::max(bands[bi].lo, wl.lo);
          double hi = std::min(bands[bi].hi, wl.hi);
          IntRange wr = integer_candidates(lo, hi, 1e-9);
          for (long long w = wr.lo; w <= wr.hi; ++w) accept(w);
        }
      }
      return;
    }
    const int idx = plan.free_idx[depth];
    int lo = 0, hi = 0;
    double room = Tsq - norm_acc;
    if (!(room > 0)) return;
    double bound = std::sqrt(room);
    lo = int(std::ceil(-bound - 1e-9));
    hi = int(std::floor(bound + 1e-9));
    if (depth == 0) {
      lo = std::max(lo, outer_lo);
      hi = std::min(hi, outer_hi - 1);
    }
    for (int x = lo; x <= hi; ++x) {
      v[idx] = x;
      rec(depth + 1, norm_acc + double(x) * double(x), l_acc + l[idx] * double(x));
    }
  };
  rec(0, 0.0, 0.0);
  return res;
}

}  // namespace

bool count_predicate(const FormPair& pair, double T, const Interval& I,
                     const Interval& J, const Eigen::VectorXi& v) {
  Eigen::VectorXd vd = v.cast<double>();
  double nsq = vd.squaredNorm();
  if (nsq == 0.0) return false;
  if (!(nsq < T * T)) return false;
  double qv = vd.dot(pair.q.gram() * vd);
  if (!(qv > I.lo && qv < I.hi)) return false;
  double lv = pair.l.coeffs().dot(vd);
  return lv > J.lo && lv < J.hi;
}

static std::vector<CountReport> count_impl(const CountQuery& query,
                                           const std::vector<double>& t_list) {
  if (!(query.T > 0)) throw std::invalid_argument("T must be positive");
  if (query.T > kTGuard) throw GuardExceeded("T exceeds the 1e4 guard");
  if (!(query.I.lo < query.I.hi) || !(query.J.lo < query.J.hi))
    throw std::invalid_argument("intervals must be nonempty open intervals");
  signature(query.pair.q);  // throws DegenerateForm when degenerate

  const auto t0 = std::chrono::steady_clock::now();
  Plan plan = make_plan(query.pair);
  const int outer_span = 2 * int(std::floor(query.T)) + 1;
  const int outer_base = -int(std::floor(query.T));
  const int shards = std::max(1, query.shards);
  std::vector<ShardCount> shard_info;
  std::vector<WorkResult> results(shards);

  std::vector<std::pair<int, int>> ranges;
  for (int s = 0; s < shards; ++s) {
    int lo = outer_base + (outer_span * s) / shards;
    int hi = outer_base + (outer_span * (s + 1)) / shards;
    ranges.push_back({lo, hi});
  }

  // threads only accelerate; shard results merge in fixed order
  {
    std::vector<std::thread> pool;
    int hw = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        int s = next.fetch_add(1);
        if (s >= shards) return;
        results[s] = run_range(query.pair, plan, query.T, query.I, query.J,
                               ranges[s].first, ranges[s].second,
                               query.collect_witnesses, t_list);
      }
    };
    for (int i = 0; i < std::min(hw, shards); ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  CountReport base;
  base.T = query.T;
  base.I = query.I;
  base.J = query.J;
  std::vector<std::int64_t> buckets(t_list.size(), 0);
  for (int s = 0; s < shards; ++s) {
    base.N += results[s].count;
    base.boundary_hits += results[s].boundary_hits;
    shard_info.push_back({ranges[s].first, ranges[s].second, results[s].count});
    for (std::size_t b = 0; b < t_list.size(); ++b)
      buckets[b] += results[s].bucket_counts[b];
    if (query.collect_witnesses)
      base.witnesses.insert(base.witnesses.end(), results[s].witnesses.begin(),
                            results[s].witnesses.end());
  }
  base.shards = shard_info;
  base.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (t_list.empty()) return {base};
  std::vector<CountReport> out;
  for (std::size_t b = 0; b < t_list.size(); ++b) {
    CountReport r = base;
    r.T = t_list[b];
    r.N = buckets[b];
    r.witnesses.clear();
    r.shards.clear();
    for (int s = 0; s < shards; ++s)
      r.shards.push_back({ranges[s].first, ranges[s].second,
                          results[s].bucket_counts[b]});
    out.push_back(std::move(r));
  }
  return out;
}

CountReport count_joint(const CountQuery& query) {
  return count_impl(query, {})[0];
}

std::vector<CountReport> count_scan(const CountQuery& query_template,
                                    const std::vector<double>& T_list) {
  if (T_list.empty()) throw std::invalid_argument("empty T list");
  for (std::size_t i = 1; i < T_list.size(); ++i)
    if (!(T_list[i] > T_list[i - 1]))
      throw std::invalid_argument("T list must be increasing");
  CountQuery q = query_template;
  q.T = T_list.back();
  return count_impl(q, T_list);
}

}  // namespace qlpairs
