#include "qlpairs/volumetrics.hpp"

#include "qlpairs/group_actions.hpp"
#include "qlpairs/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

namespace qlpairs {

namespace {

constexpr double kPivotTol = 1e-12;

struct Plan {
  int n = 0, j_l = 0, j_q = 0;
  bool quadratic_ok = false;
  std::vector<int> free_idx;
  /// Coordinate in which q is exactly linear (zero diagonal, coupled rows)
  /// and l vanishes; resolved analytically when present. Hyperbolic-block
  /// pairs need this to avoid thin quadrature supports at large T.
  int j_lin = -1;
};

Plan make_plan(const FormPair& pair, int quad_pivot_override = -1) {
  Plan plan;
  const int n = pair.n();
  plan.n = n;
  const auto& l = pair.l.coeffs();
  const auto& Q = pair.q.gram();
  plan.j_l = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(l[i]) > std::abs(l[plan.j_l])) plan.j_l = i;
  plan.j_q = -1;
  if (quad_pivot_override >= 0 && quad_pivot_override != plan.j_l &&
      std::abs(Q(quad_pivot_override, quad_pivot_override)) > kPivotTol) {
    plan.j_q = quad_pivot_override;
  } else {
    double best = kPivotTol;
    for (int i = 0; i < n; ++i) {
      if (i == plan.j_l) continue;
      if (std::abs(Q(i, i)) > best) {
        best = std::abs(Q(i, i));
        plan.j_q = i;
      }
    }
  }
  plan.quadratic_ok = plan.j_q >= 0;
  if (!plan.quadratic_ok)
    for (int i = 0; i < n; ++i)
      if (i != plan.j_l) { plan.j_q = i; break; }
  for (int i = 0; i < n; ++i)
    if (i != plan.j_l && i != plan.j_q) plan.free_idx.push_back(i);

  double best_coupling = 0.0;
  for (int k : plan.free_idx) {
    if (std::abs(Q(k, k)) > kPivotTol) continue;
    if (std::abs(l[k]) > kPivotTol) continue;
    double coupling = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != k) coupling += std::abs(Q(k, j));
    if (coupling > best_coupling) {
      best_coupling = coupling;
      plan.j_lin = k;
    }
  }
  return plan;
}

double ball_volume(int n, double T) {
  return std::pow(3.14159265358979323846, 0.5 * n) /
         std::tgamma(0.5 * n + 1.0) * std::pow(T, n);
}

/// Total length of the w-fiber at fixed free coordinates and u.
double fiber_length(const FormPair& pair, const Plan& plan,
                    const Eigen::VectorXd& partial, double T,
                    const Interval& I, const Interval& J) {
  const auto& Q = pair.q.gram();
  const auto& l = pair.l.coeffs();
  Eigen::VectorXd v = partial;
  v[plan.j_q] = 0.0;
  double rem = T * T - v.squaredNorm();
  if (!(rem > 0)) return 0.0;
  double wball = std::sqrt(rem);
  Band wl{-wball, wball};
  double l_here = l.dot(v);
  double l_w = l[plan.j_q];
  if (std::abs(l_w) > kPivotTol) {
    double b1 = (J.lo - l_here) / l_w, b2 = (J.hi - l_here) / l_w;
    if (b1 > b2) std::swap(b1, b2);
    wl.lo = std::max(wl.lo, b1);
    wl.hi = std::min(wl.hi, b2);
  } else if (!(J.lo < l_here && l_here < J.hi)) {
    return 0.0;
  }
  if (!(wl.lo < wl.hi)) return 0.0;
  double A = plan.quadratic_ok ? Q(plan.j_q, plan.j_q) : 0.0;
  double C = v.dot(Q * v);
  double B = 2.0 * Q.row(plan.j_q).dot(v);
  Band bands[2];
  int nb = quadratic_band(A, B, C, I.lo, I.hi, bands);
  double len = 0.0;
  for (int bi = 0; bi < nb; ++bi) {
    double lo = std::max(bands[bi].lo, wl.lo);
    double hi = std::min(bands[bi].hi, wl.hi);
    if (lo < hi) len += hi - lo;
  }
  return len;
}

/// Exact length of the x_{j_lin} fiber: q is linear there and the J and
/// ball constraints intersect as plain intervals. `v` carries every other
/// coordinate.
double linear_fiber_length(const FormPair& pair, const Plan& plan,
                           Eigen::VectorXd& v, double T, const Interval& I,
                           const Interval& J) {
  const int k = plan.j_lin;
  v[k] = 0.0;
  double rem = T * T - v.squaredNorm();
  if (!(rem > 0)) return 0.0;
  double xb = std::sqrt(rem);
  double lo = -xb, hi = xb;
  double l_k = pair.l.coeffs()[k];
  double l_acc = pair.l.coeffs().dot(v);
  if (std::abs(l_k) > kPivotTol) {
    double a = (J.lo - l_acc) / l_k, b = (J.hi - l_acc) / l_k;
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  } else if (!(J.lo < l_acc && l_acc < J.hi)) {
    return 0.0;
  }
  if (!(lo < hi)) return 0.0;
  double c0 = v.dot(pair.q.gram() * v);
  double slope = 2.0 * pair.q.gram().row(k).dot(v);
  if (std::abs(slope) <= kPivotTol)
    return (I.lo < c0 && c0 < I.hi) ? hi - lo : 0.0;
  double a = (I.lo - c0) / slope, b = (I.hi - c0) / slope;
  if (a > b) std::swap(a, b);
  lo = std::max(lo, a);
  hi = std::min(hi, b);
  return lo < hi ? hi - lo : 0.0;
}

/// Simpson nodes/weights on [a, b].
template <typename F>
double simpson(F&& f, double a, double b, int nodes) {
  if (!(b > a)) return 0.0;
  int m = std::max(3, nodes | 1);  // odd node count (even panel count)
  double h = (b - a) / (m - 1);
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double w = (i == 0 || i == m - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f(a + h * i);
  }
  return acc * h / 3.0;
}

/// Integral over [a, b] for integrands with sqrt-type endpoint behavior:
/// the substitution x = end + L t^2 regularizes both ends.
template <typename F>
double segment_integral(F&& f, double a, double b, int nodes = 21) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  auto go = [&](double from, double to) {
    double L = to - from;
    return simpson([&](double t) { return f(from + L * t * t) * 2.0 * L * t; },
                   0.0, 1.0, nodes);
  };
  return go(a, m) - go(b, m);
}

/// Integration layers below the outer grid: the J-slab direction u, one
/// Simpson mid layer, and an exact innermost fiber (quadratic bands, or the
/// linear coordinate when the plan found one).
struct InnerLayers {
  int mid = -1;    // Simpson coordinate between u and the exact fiber
  bool linear_fiber = false;
};

InnerLayers choose_layers(const FormPair& pair, const Plan& plan) {
  InnerLayers layers;
  if (plan.j_lin >= 0) {
    layers.linear_fiber = true;
    layers.mid = plan.j_q;
    return layers;
  }
  // partner: the free coordinate most strongly coupled to the pivot; the
  // analytic fiber smooths it, so it must sit inside the quadrature
  double best = -1.0;
  for (int k : plan.free_idx) {
    double c = std::abs(pair.q.gram()(plan.j_q, k));
    if (c > best) {
      best = c;
      layers.mid = k;
    }
  }
  return layers;
}

double inner_integral(const FormPair& pair, const Plan& plan,
                      const InnerLayers& layers, const Eigen::VectorXd& partial,
                      double T, const Interval& I, const Interval& J, int u_nodes) {
  const auto& l = pair.l.coeffs();
  const int exact_coord = layers.linear_fiber ? plan.j_lin : plan.j_q;
  Eigen::VectorXd v = partial;
  v[plan.j_l] = 0.0;
  v[layers.mid] = 0.0;
  v[exact_coord] = 0.0;
  double rem = T * T - v.squaredNorm();
  if (!(rem > 0)) return 0.0;
  double umax = std::sqrt(rem);

  // conservative J-feasibility clip of the u range; exactness comes from
  // the innermost fiber
  double ulo = -umax, uhi = umax;
  {
    double l_u = l[plan.j_l];
    double spread =
        (std::abs(l[layers.mid]) + std::abs(l[exact_coord])) * umax;
    double l_acc = l.dot(v);
    double a1 = (J.lo - l_acc - spread) / l_u, a2 = (J.hi - l_acc + spread) / l_u;
    if (a1 > a2) std::swap(a1, a2);
    ulo = std::max(ulo, a1);
    uhi = std::min(uhi, a2);
  }
  if (!(ulo < uhi)) return 0.0;

  Eigen::VectorXd vu = v;
  return simpson(
      [&](double u) {
        vu = v;
        vu[plan.j_l] = u;
        double rem_m = T * T - vu.squaredNorm();
        if (!(rem_m > 0)) return 0.0;
        double mball = std::sqrt(rem_m);
        double mlo = -mball, mhi = mball;
        double l_m = l[layers.mid];
        if (std::abs(l_m) > kPivotTol) {
          double spread = std::abs(l[exact_coord]) * mball;
          double l_acc = l.dot(vu);
          double b1 = (J.lo - l_acc - spread) / l_m,
                 b2 = (J.hi - l_acc + spread) / l_m;
          if (b1 > b2) std::swap(b1, b2);
          mlo = std::max(mlo, b1);
          mhi = std::min(mhi, b2);
        }
        if (!(mlo < mhi)) return 0.0;
        Eigen::VectorXd vm = vu;
        return simpson(
            [&](double m) {
              vm = vu;
              vm[layers.mid] = m;
              if (layers.linear_fiber)
                return linear_fiber_length(pair, plan, vm, T, I, J);
              return fiber_length(pair, plan, vm, T, I, J);
            },
            mlo, mhi, 2 * u_nodes + 1);
      },
      ulo, uhi, u_nodes);
}

/// Detached 2x2 block: a coordinate pair coupled only to itself by q and
/// invisible to l. The block's contribution at fixed remaining coordinates
/// is an exact area between conic level sets inside a disk.
struct DetachedBlock {
  int i = -1, j = -1;
  double lam1 = 0.0, lam2 = 0.0;  // eigenvalues of the 2x2 block
};

DetachedBlock find_detached_block(const FormPair& pair) {
  const int n = pair.n();
  const auto& Q = pair.q.gram();
  const auto& l = pair.l.coeffs();
  DetachedBlock blk;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(Q(i, j)) <= kPivotTol) continue;
      if (std::abs(l[i]) > kPivotTol || std::abs(l[j]) > kPivotTol) continue;
      bool detached = true;
      for (int k = 0; k < n && detached; ++k) {
        if (k == i || k == j) continue;
        if (std::abs(Q(i, k)) > kPivotTol || std::abs(Q(j, k)) > kPivotTol)
          detached = false;
      }
      if (!detached) continue;
      double a = Q(i, i), b = Q(i, j), d = Q(j, j);
      double tr = a + d, disc = std::sqrt((a - d) * (a - d) + 4.0 * b * b);
      blk.i = i;
      blk.j = j;
      blk.lam1 = 0.5 * (tr + disc);
      blk.lam2 = 0.5 * (tr - disc);
      return blk;
    }
  return blk;
}

/// (1/2) integral over [0, 2pi) of r_max(theta)^2 for the region
/// {lam1 y1^2 + lam2 y2^2 <= t} inside the disk of squared radius rho_sq;
/// split at the angles where the conic meets the disk boundary so each
/// piece is smooth.
double conic_disk_area(double t, double rho_sq, double lam1, double lam2) {
  if (!(rho_sq > 0)) return 0.0;
  const double c1 = 0.5 * (lam1 + lam2), c2 = 0.5 * (lam1 - lam2);
  auto g = [&](double th) { return c1 + c2 * std::cos(2.0 * th); };
  auto half_rsq = [&](double th) {
    double gv = g(th);
    if (gv > kPivotTol) {
      if (t <= 0) return 0.0;
      return 0.5 * std::min(rho_sq, t / gv);
    }
    if (gv < -kPivotTol) {
      if (t >= 0) return 0.5 * rho_sq;
      double r2 = t / gv;
      return r2 >= rho_sq ? 0.0 : 0.5 * (rho_sq - r2);
    }
    return t >= 0 ? 0.5 * rho_sq : 0.0;
  };
  // kink angles: g = 0 and g = t / rho_sq
  std::vector<double> cuts{0.0, 6.283185307179586476925286766559};
  auto add_roots = [&](double target) {
    if (std::abs(c2) <= kPivotTol) return;
    double cv = (target - c1) / c2;
    if (cv < -1.0 || cv > 1.0) return;
    double base = 0.5 * std::acos(std::min(1.0, std::max(-1.0, cv)));
    for (double th : {base, 3.14159265358979323846 - base,
                      3.14159265358979323846 + base,
                      6.283185307179586476925286766559 - base})
      cuts.push_back(th);
  };
  add_roots(0.0);
  add_roots(t / rho_sq);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] - cuts[k] < 1e-14) continue;
    acc += simpson(half_rsq, cuts[k], cuts[k + 1], 33);
  }
  return acc;
}

/// Halton sequence point (bases 2, 3, 5), used for the low-discrepancy
/// integration of the reduced detached-block integrand.
inline double halton(std::int64_t index, int base) {
  double f = 1.0, r = 0.0;
  std::int64_t i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

/// Volume with the detached-block area integrated exactly: the remaining
/// n-2 coordinates (one of them confined to the J-slab) are integrated by
/// a deterministic low-discrepancy sequence, which is robust against the
/// thin level-crossing ridges that defeat tensor grids at large T.
double detached_pass(const FormPair& pair, const DetachedBlock& blk, double T,
                     const Interval& I, const Interval& J, std::int64_t points,
                     double* error_estimate) {
  const int n = pair.n();
  const auto& Q = pair.q.gram();
  const auto& l = pair.l.coeffs();
  int j_l = -1;
  std::vector<int> rest_idx;
  for (int k = 0; k < n; ++k) {
    if (k == blk.i || k == blk.j) continue;
    if (j_l < 0 || std::abs(l[k]) > std::abs(l[j_l])) j_l = k;
  }
  for (int k = 0; k < n; ++k)
    if (k != blk.i && k != blk.j && k != j_l) rest_idx.push_back(k);
  const int nrest = int(rest_idx.size());
  if (nrest > 2) throw std::invalid_argument("detached path supports n <= 5");
  static const int bases[3] = {2, 3, 5};

  auto value_at = [&](std::int64_t idx, Eigen::VectorXd& v) {
    v.setZero();
    double weight = 1.0;
    for (int d = 0; d < nrest; ++d) {
      double x = (2.0 * halton(idx, bases[d]) - 1.0) * T;
      v[rest_idx[d]] = x;
      weight *= 2.0 * T;
    }
    v[j_l] = 0.0;
    double rem = T * T - v.squaredNorm();
    if (!(rem > 0)) return 0.0;
    double umax = std::sqrt(rem);
    double l_acc = l.dot(v);
    double a1 = (J.lo - l_acc) / l[j_l], a2 = (J.hi - l_acc) / l[j_l];
    if (a1 > a2) std::swap(a1, a2);
    double ulo = std::max(-umax, a1), uhi = std::min(umax, a2);
    if (!(ulo < uhi)) return 0.0;
    double u = ulo + halton(idx, bases[nrest]) * (uhi - ulo);
    weight *= uhi - ulo;
    v[j_l] = u;
    double rho_sq = T * T - v.squaredNorm();
    if (!(rho_sq > 0)) return 0.0;
    double q_rest = v.dot(Q * v);
    double area = conic_disk_area(I.hi - q_rest, rho_sq, blk.lam1, blk.lam2) -
                  conic_disk_area(I.lo - q_rest, rho_sq, blk.lam1, blk.lam2);
    return weight * area;
  };

  // chunked deterministic sums; the second half doubles as an error probe
  const int chunks = 64;
  std::vector<double> sums(chunks, 0.0);
  std::vector<std::int64_t> counts(chunks, 0);
  std::atomic<int> next{0};
  auto worker = [&]() {
    Eigen::VectorXd v(n);
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= chunks) return;
      std::int64_t lo = points * c / chunks, hi = points * (c + 1) / chunks;
      double acc = 0.0;
      for (std::int64_t i = lo; i < hi; ++i) acc += value_at(i + 1, v);
      sums[c] = acc;
      counts[c] = hi - lo;
    }
  };
  {
    std::vector<std::thread> pool;
    int hw = std::max(1u, std::thread::hardware_concurrency());
    for (int i = 0; i < hw; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  double total = 0.0, first_half = 0.0;
  std::int64_t total_n = 0, half_n = 0;
  for (int c = 0; c < chunks; ++c) {
    total += sums[c];
    total_n += counts[c];
    if (c < chunks / 2) {
      first_half += sums[c];
      half_n += counts[c];
    }
  }
  double mean = total / double(total_n);
  if (error_estimate) *error_estimate = std::abs(first_half / double(half_n) - mean);
  return mean;
}

/// True when the pair admits the detached-block decomposition with the
/// remaining coordinates mutually uncoupled.
bool detached_usable(const FormPair& pair, const DetachedBlock& blk) {
  if (blk.i < 0) return false;
  const int n = pair.n();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (a == blk.i || a == blk.j || b == blk.i || b == blk.j) continue;
      if (std::abs(pair.q.gram()(a, b)) > kPivotTol) return false;
    }
  return n - 2 <= 3;
}

double quadrature_pass(const FormPair& pair, const Plan& plan, double T,
                       const Interval& I, const Interval& J, int grid, int u_nodes) {
  InnerLayers layers = choose_layers(pair, plan);
  const int exact_coord = layers.linear_fiber ? plan.j_lin : plan.j_q;
  std::vector<int> outer_idx;
  for (int k : plan.free_idx)
    if (k != exact_coord && k != layers.mid) outer_idx.push_back(k);
  const int nout = int(outer_idx.size());
  const double h = 2.0 * T / grid;

  if (nout == 0) {
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(plan.n);
    return inner_integral(pair, plan, layers, partial, T, I, J, u_nodes);
  }

  // flattened midpoint grid over the outer box, first dimension threaded
  std::int64_t inner_cells = 1;
  for (int d = 1; d < nout; ++d) inner_cells *= grid;

  std::vector<double> chunk_sums(grid, 0.0);
  std::atomic<int> next{0};
  auto worker = [&]() {
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(plan.n);
    for (;;) {
      int i0 = next.fetch_add(1);
      if (i0 >= grid) return;
      double acc = 0.0;
      double x0 = -T + (i0 + 0.5) * h;
      for (std::int64_t c = 0; c < inner_cells; ++c) {
        partial.setZero();
        partial[outer_idx[0]] = x0;
        std::int64_t rest = c;
        double normsq = x0 * x0;
        for (int d = 1; d < nout; ++d) {
          int idx = int(rest % grid);
          rest /= grid;
          double xd = -T + (idx + 0.5) * h;
          partial[outer_idx[d]] = xd;
          normsq += xd * xd;
        }
        if (normsq >= T * T) continue;
        acc += inner_integral(pair, plan, layers, partial, T, I, J, u_nodes);
      }
      chunk_sums[i0] = acc;
    }
  };
  {
    std::vector<std::thread> pool;
    int hw = std::max(1u, std::thread::hardware_concurrency());
    for (int i = 0; i < hw; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  double total = 0.0;
  for (double s : chunk_sums) total += s;  // fixed order
  return total * std::pow(h, nout);
}

}  // namespace

double sphere_surface(int m) {
  if (m < 1) throw std::invalid_argument("sphere_surface needs m >= 1");
  return 2.0 * std::pow(3.14159265358979323846, 0.5 * m) / std::tgamma(0.5 * m);
}

double c_pq(int p, int q) {
  if (p < 1 || q < 1) throw std::invalid_argument("c_pq needs p, q >= 1");
  int n = p + q;
  return std::pow(2.0, 0.5 * (n - 2)) / (sphere_surface(p) * sphere_surface(q));
}

double kernel_constant(int p, int q) {
  // gamma_{p-1} gamma_{q-1} are the unit-sphere surfaces of R^p and R^q
  return c_pq(p, q - 1) * sphere_surface(p) * sphere_surface(q);
}

VolumeReport volume_joint(const FormPair& pair, double T, const Interval& I,
                          const Interval& J, VolumeMethod method,
                          const VolumeParams& params) {
  if (!(T > 0)) throw std::invalid_argument("T must be positive");
  VolumeReport rep;
  rep.T = T;
  rep.I = I;
  rep.J = J;
  rep.method = method;
  const int n = pair.n();

  // inactive-constraint guard: both windows dominate the ball ranges
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pair.q.gram());
    double qmin = std::min(0.0, es.eigenvalues().minCoeff()) * T * T;
    double qmax = std::max(0.0, es.eigenvalues().maxCoeff()) * T * T;
    double lrad = pair.l.coeffs().norm() * T;
    if (I.lo <= qmin && qmax <= I.hi && J.lo <= -lrad && lrad <= J.hi) {
      rep.constraints_inactive = true;
      rep.V = ball_volume(n, T);
      rep.error_estimate = 0.0;
      return rep;
    }
  }

  if (method == VolumeMethod::Quadrature) {
    DetachedBlock blk = find_detached_block(pair);
    if (detached_usable(pair, blk)) {
      std::int64_t points = std::max<std::int64_t>(params.samples, 2000000);
      rep.V = detached_pass(pair, blk, T, I, J, points, &rep.error_estimate);
      return rep;
    }
    Plan plan = make_plan(pair, params.quad_pivot);
    int grid = params.grid;
    if (grid <= 0) grid = (n <= 4) ? 256 : 144;
    double coarse = quadrature_pass(pair, plan, T, I, J, grid / 2, params.u_nodes);
    double fine = quadrature_pass(pair, plan, T, I, J, grid, params.u_nodes);
    rep.V = fine;
    rep.error_estimate = std::abs(fine - coarse);
    return rep;
  }

  // MonteCarlo: hit ratio in the ball
  StreamRng rng(params.seed, 0);
  std::int64_t hits = 0;
  const std::int64_t N = params.samples;
  Eigen::VectorXd v(n);
  for (std::int64_t s = 0; s < N; ++s) {
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = rng.normal();
      nrm += v[i] * v[i];
    }
    double r = T * std::pow(rng.uniform(), 1.0 / n) / std::sqrt(nrm);
    v *= r;
    double qv = v.dot(pair.q.gram() * v);
    if (!(qv > I.lo && qv < I.hi)) continue;
    double lv = pair.l.coeffs().dot(v);
    if (lv > J.lo && lv < J.hi) ++hits;
  }
  double p = double(hits) / double(N);
  double vb = ball_volume(n, T);
  rep.V = vb * p;
  rep.error_estimate = vb * std::sqrt(std::max(p * (1.0 - p), 1.0 / N) / double(N));
  return rep;
}

ConstantFit estimate_constant(const FormPair& pair, const std::vector<double>& T_list,
                              const Interval& I, const Interval& J,
                              const VolumeParams& params) {
  if (T_list.size() < 3) throw std::invalid_argument("need at least 3 T values");
  for (std::size_t i = 1; i < T_list.size(); ++i)
    if (!(T_list[i] > T_list[i - 1]))
      throw std::invalid_argument("T list must be increasing");
  const int n = pair.n();
  ConstantFit fit;
  fit.T_list = T_list;
  const double denom = I.length() * J.length();
  for (double T : T_list) {
    VolumeReport r = volume_joint(pair, T, I, J, VolumeMethod::Quadrature, params);
    fit.normalized.push_back(r.V / (std::pow(T, n - 3) * denom));
  }
  // least squares y = C + m * (1/T)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int k = int(T_list.size());
  for (int i = 0; i < k; ++i) {
    double x = 1.0 / T_list[i], y = fit.normalized[i];
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  double det = k * sxx - sx * sx;
  fit.slope = (k * sxy - sx * sy) / det;
  fit.C = (sy * sxx - sx * sxy) / det;
  for (int i = 0; i < k; ++i)
    fit.residuals.push_back(fit.normalized[i] - (fit.C + fit.slope / T_list[i]));
  double e_first = std::abs(fit.normalized.front() - fit.C);
  double e_last = std::abs(fit.normalized.back() - fit.C);
  if (e_last > e_first + 1e-9 * (1.0 + std::abs(fit.C)))
    throw NonConvergence("normalized volumes do not approach the fitted constant");
  return fit;
}

double jf_integral(const ProductBump& f, int p, double r, double zeta, double s,
                   double rel_tol) {
  const int n = f.n();
  if (n < 4 || n > 5) throw std::invalid_argument("fiber kernel supports n = 4, 5");
  if (r <= 1e-9) throw UnsupportedR("fiber kernel requires r > 1e-9");
  const double f_r = f.windows[0](r);
  const double f_s = f.windows[n - 1](s);
  if (f_r == 0.0 || f_s == 0.0) return 0.0;
  const double rsq_level = zeta + s * s;

  auto refine = [&](auto&& pass) {
    double prev = 0.0;
    for (int level = 0;; ++level) {
      double total = pass(32 << level) * f_r * f_s / std::pow(r, n - 3);
      if (level > 0 &&
          std::abs(total - prev) <= rel_tol * std::max(1e-300, std::abs(total)))
        return total;
      if (level >= 7) return total;
      prev = total;
    }
  };

  if (n == 4) {
    // single free coordinate x3, subtracted when it sits in the positive
    // block (p >= 2), added otherwise:
    // x2 = (zeta -/+ x3^2 + s^2) / (2r)
    const auto& w3 = f.windows[2];
    const double c3 = (p >= 2) ? -1.0 : 1.0;
    return refine([&](int nodes) {
      double h = (w3.hi() - w3.lo()) / nodes;
      double acc = 0.0;
      for (int i = 0; i < nodes; ++i) {
        double y = w3.lo() + (i + 0.5) * h;
        double x2 = (zeta + s * s + c3 * y * y) / (2.0 * r);
        acc += f.windows[1](x2) * w3(y);
      }
      return acc * h;
    });
  }

  // n = 5: exact polar reparametrization of the free plane. With
  // tau(u) = sqrt(zeta + s^2 - 2 r u) the area element tau dtau dphi equals
  // r du dphi, and the integrand stays smooth in (u, phi) even when the
  // level band is a thin annulus (large flow times). Requires both free
  // coordinates on the same sign block, which p = 3 provides.
  if (p != 3) throw std::invalid_argument("five-variable fiber kernel expects p = 3");
  const auto& wu = f.windows[1];
  const double cap = rsq_level / (2.0 * r);
  const double ulo = wu.lo(), uhi = std::min(wu.hi(), cap);
  if (!(ulo < uhi)) return 0.0;
  return refine([&](int nodes) {
    double hu = (uhi - ulo) / nodes;
    double hphi = 6.283185307179586476925286766559 / nodes;
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
      double u = ulo + (i + 0.5) * hu;
      double tau_sq = rsq_level - 2.0 * r * u;
      if (tau_sq <= 0) continue;
      double tau = std::sqrt(tau_sq);
      double wu_val = wu(u);
      if (wu_val == 0.0) continue;
      double row = 0.0;
      for (int j = 0; j < nodes; ++j) {
        double phi = (j + 0.5) * hphi;
        row += f.windows[2](tau * std::cos(phi)) * f.windows[3](tau * std::sin(phi));
      }
      acc += wu_val * row;
    }
    return acc * hu * hphi * r;  // du dphi measure carries a factor r
  });
}

KernelLimitReport verify_kernel_limit(const ProductBump& f, const Eigen::VectorXd& v,
                                      const std::vector<double>& t_list, int p, int q,
                                      std::int64_t samples, std::uint64_t seed,
                                      double tol) {
  const int n = p + q;
  if (f.n() != n || v.size() != n) throw std::invalid_argument("dimension mismatch");
  Eigen::MatrixXd q0 = canonical_gram(n, p);
  const double zeta = v.dot(q0 * v);
  const double s = v[n - 1];
  const double shrink = std::sqrt(v.squaredNorm() + zeta);
  const double cst = kernel_constant(p, q);

  KernelLimitReport rep;
  rep.tol = tol;
  for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
    const double t = t_list[ti];
    HaarSampler sampler(p, q, seed, ti);
    Eigen::MatrixXd at = diagonal_flow(t, n, p).matrix;
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < samples; ++i) {
      GroupElement k = sampler.sample();
      double val = f(at * (k.matrix * v));
      sum += val;
      sumsq += val * val;
    }
    double mean = sum / double(samples);
    double var = std::max(0.0, sumsq / double(samples) - mean * mean);
    double se = std::sqrt(var / double(samples));
    double scale = std::exp(double(n - 3) * t);
    KernelLimitRow row;
    row.t = t;
    row.lhs = cst * scale * mean;
    row.rhs = jf_integral(f, p, shrink * std::exp(-t), zeta, s);
    row.mc_stderr = cst * scale * se;
    row.rel_gap = std::abs(row.lhs - row.rhs) / std::max(1e-300, std::abs(row.rhs));
    row.fitted_constant = (mean > 0) ? row.rhs / (scale * mean) : 0.0;
    rep.rows.push_back(row);
  }
  if (!rep.rows.empty()) {
    rep.gap_decreasing = rep.rows.back().rel_gap <= rep.rows.front().rel_gap + 1e-12;
    rep.final_within_tol = rep.rows.back().rel_gap < tol;
  }
  return rep;
}

LimitIntegralReport verify_limit_integral(const SlotBump& h, int p, int q,
                                          const std::vector<double>& T_list,
                                          const LimitIntegralParams& params) {
  const int n = p + q;
  if (h.vec.n() != n) throw std::invalid_argument("dimension mismatch");
  LimitIntegralReport rep;
  rep.tol = params.tol;

  // flow-invariant side: separable windows integrate out; the vector slot
  // is averaged over the compact orbit of e_1 and integrated in r against
  // r^{n-4}/2 (the r^{n-3} dr/(2r) measure).
  {
    HaarSampler sampler(p, q, params.seed, 0);
    const double zs = h.zeta.integral() * h.s.integral();
    double rmax = h.vec.support_radius();
    double sum = 0.0, sumsq = 0.0;
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
    e1[0] = 1.0;
    for (std::int64_t i = 0; i < params.k_samples; ++i) {
      GroupElement k = sampler.sample();
      Eigen::VectorXd dir = k.matrix.transpose() * e1;
      double ri = simpson(
          [&](double r) {
            return h.vec(r * dir) * 0.5 * std::pow(r, n - 4);
          },
          0.0, rmax, params.r_nodes);
      sum += ri;
      sumsq += ri * ri;
    }
    double mean = sum / double(params.k_samples);
    double var = std::max(0.0, sumsq / double(params.k_samples) - mean * mean);
    rep.rhs = kernel_constant(p, q) * zs * mean;
    rep.rhs_stderr =
        kernel_constant(p, q) * zs * std::sqrt(var / double(params.k_samples));
  }

  // scaling side at each T: integrate h(v/T, q0(v), l0(v)) over the slab
  // decomposition with the canonical pair (pivot x_3, linear slot x_n)
  Eigen::MatrixXd q0 = canonical_gram(n, p);
  for (double T : T_list) {
    // free coordinates: all except j_q = 2 (x_3); x_n is confined to the
    // s-window, the others to T * vector windows
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
      if (i != 2) free_idx.push_back(i);

    std::function<double(int, Eigen::VectorXd&)> outer = [&](int d,
                                                             Eigen::VectorXd& v) -> double {
      if (d == int(free_idx.size())) {
        // fiber over w = v_3: q0(v) = w^2 * Q33-ish + B w + C with the
        // canonical gram; restrict to the zeta window and the vector window
        double A = q0(2, 2);
        v[2] = 0.0;
        double C = v.dot(q0 * v);
        double B = 2.0 * q0.row(2).dot(v);
        Band bands[2];
        int nb = quadratic_band(A, B, C, h.zeta.lo(), h.zeta.hi(), bands);
        double acc = 0.0;
        const auto& w3 = h.vec.windows[2];
        for (int bi = 0; bi < nb; ++bi) {
          double lo = std::max(bands[bi].lo, T * w3.lo());
          double hi = std::min(bands[bi].hi, T * w3.hi());
          if (!(lo < hi)) continue;
          acc += simpson(
              [&](double w) {
                Eigen::VectorXd vv = v;
                vv[2] = w;
                double qv = vv.dot(q0 * vv);
                return h(vv / T, qv, vv[n - 1]);
              },
              lo, hi, 33);
        }
        return acc;
      }
      int idx = free_idx[d];
      double lo, hi;
      int nodes;
      if (idx == n - 1) {
        lo = std::max(h.s.lo(), T * h.vec.windows[idx].lo());
        hi = std::min(h.s.hi(), T * h.vec.windows[idx].hi());
        nodes = 33;
      } else {
        lo = T * h.vec.windows[idx].lo();
        hi = T * h.vec.windows[idx].hi();
        nodes = params.lhs_grid;
      }
      if (!(lo < hi)) return 0.0;
      // midpoint in the wide directions, Simpson elsewhere
      if (idx == n - 1) {
        return simpson(
            [&](double x) {
              Eigen::VectorXd vv = v;
              vv[idx] = x;
              return outer(d + 1, vv);
            },
            lo, hi, nodes);
      }
      double hstep = (hi - lo) / nodes;
      double acc = 0.0;
      for (int i = 0; i < nodes; ++i) {
        v[idx] = lo + (i + 0.5) * hstep;
        acc += outer(d + 1, v);
      }
      return acc * hstep;
    };

    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    double integral = outer(0, v);
    LimitIntegralRow row;
    row.T = T;
    row.lhs = integral / std::pow(T, n - 3);
    row.rel_gap = std::abs(row.lhs - rep.rhs) / std::max(1e-300, std::abs(rep.rhs));
    rep.rows.push_back(row);
  }
  if (!rep.rows.empty()) rep.final_within_tol = rep.rows.back().rel_gap < params.tol;
  return rep;
}

}  // namespace qlpairs
