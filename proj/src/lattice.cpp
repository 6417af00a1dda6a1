#include "qlpairs/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qlpairs {

namespace {

struct GramSchmidt {
  Eigen::MatrixXd mu;    // mu(i,j) = <b_i, b*_j>/||b*_j||^2 for i > j
  Eigen::VectorXd csq;   // ||b*_i||^2
};

GramSchmidt gram_schmidt(const Eigen::MatrixXd& b) {
  const int m = int(b.cols());
  GramSchmidt gs;
  gs.mu = Eigen::MatrixXd::Zero(m, m);
  gs.csq = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd star = b;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < i; ++j) {
      double d = star.col(j).squaredNorm();
      gs.mu(i, j) = b.col(i).dot(star.col(j)) / d;
      star.col(i) -= gs.mu(i, j) * star.col(j);
    }
    gs.csq[i] = star.col(i).squaredNorm();
  }
  return gs;
}

/// Depth-first enumeration of integer combinations x with ||B x|| bounded.
/// `on_vector` receives x and the squared norm; its return value becomes the
/// new squared bound (allows shrinking searches). Throws past node_guard.
void enumerate(const Eigen::MatrixXd& b, double bound_sq,
               long long node_guard,
               const std::function<double(const Eigen::VectorXi&, double)>& on_vector) {
  const int m = int(b.cols());
  GramSchmidt gs = gram_schmidt(b);
  for (int i = 0; i < m; ++i)
    if (!(gs.csq[i] > 0)) throw std::invalid_argument("enumerate: dependent basis");

  Eigen::VectorXi x = Eigen::VectorXi::Zero(m);
  std::vector<double> rho(m + 1, 0.0);   // partial squared norms, rho[k] for levels >= k
  std::vector<double> center(m, 0.0);
  long long nodes = 0;
  double bsq = bound_sq;

  // iterative DFS over levels m-1 .. 0
  std::vector<int> lo(m), hi(m);
  int level = m - 1;
  bool descending = true;
  while (level < m) {
    if (descending) {
      double c = 0.0;
      for (int j = level + 1; j < m; ++j) c -= gs.mu(j, level) * x[j];
      center[level] = c;
      double room = bsq - rho[level + 1];
      if (room < 0) room = 0;
      double w = std::sqrt(room / gs.csq[level]);
      lo[level] = int(std::ceil(c - w - 1e-12));
      hi[level] = int(std::floor(c + w + 1e-12));
      x[level] = lo[level];
    } else {
      ++x[level];
    }
    if (x[level] > hi[level]) {
      ++level;
      descending = false;
      continue;
    }
    if (++nodes > node_guard)
      throw ExplosionGuard("enumeration node budget exceeded");
    double y = x[level] - center[level];
    double contrib = y * y * gs.csq[level];
    if (rho[level + 1] + contrib > bsq + 1e-12 * (1.0 + bsq)) {
      descending = false;
      continue;  // sibling
    }
    rho[level] = rho[level + 1] + contrib;
    if (level == 0) {
      bool zero = true;
      for (int i = 0; i < m; ++i)
        if (x[i] != 0) { zero = false; break; }
      if (!zero) {
        double nb = on_vector(x, rho[0]);
        if (nb < bsq) bsq = nb;
      }
      descending = false;
    } else {
      --level;
      descending = true;
    }
  }
}

long long vec_gcd(const Eigen::VectorXi& v) {
  long long g = 0;
  for (int i = 0; i < v.size(); ++i) g = std::gcd(g, (long long)std::abs(v[i]));
  return g;
}

using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Unimodular U with w^T U = (g, 0, ..., 0), g = +/- gcd; column Euclid sweep.
IMat row_clear(Eigen::VectorXi w) {
  const int n = int(w.size());
  IMat u = IMat::Identity(n, n);
  std::vector<long long> r(n);
  for (int i = 0; i < n; ++i) r[i] = w[i];
  for (int i = 1; i < n; ++i) {
    if (r[i] == 0) continue;
    if (r[0] == 0) {
      std::swap(r[0], r[i]);
      u.col(0).swap(u.col(i));
      continue;
    }
    // extended gcd on (r[0], r[i])
    long long a = r[0], b = r[i];
    long long x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
      long long t = a / b;
      a -= t * b; std::swap(a, b);
      x0 -= t * x1; std::swap(x0, x1);
      y0 -= t * y1; std::swap(y0, y1);
    }
    // a = gcd = x0*r0 + y0*ri ; columns combine accordingly
    long long g = a, p = r[0] / g, q = r[i] / g;
    Eigen::Matrix<long long, Eigen::Dynamic, 1> c0 = u.col(0), ci = u.col(i);
    u.col(0) = x0 * c0 + y0 * ci;
    u.col(i) = -q * c0 + p * ci;
    r[0] = g;
    r[i] = 0;
  }
  return u;
}

/// Columns of a unimodular matrix whose first column is the primitive v.
IMat unimodular_completion(const Eigen::VectorXi& v) {
  // row_clear gives w^T U = (g,0,..,0); for a column vector use the
  // transpose relation: U^T v = g e_1, so v = U^{-T} (g e_1); instead solve
  // directly: find W unimodular with W v = e_1 via the same sweep on rows.
  const int n = int(v.size());
  IMat winv = IMat::Identity(n, n);  // tracks W^{-1}
  std::vector<long long> r(n);
  for (int i = 0; i < n; ++i) r[i] = v[i];
  for (int i = 1; i < n; ++i) {
    if (r[i] == 0) continue;
    if (r[0] == 0) {
      std::swap(r[0], r[i]);
      winv.col(0).swap(winv.col(i));
      continue;
    }
    long long a = r[0], b = r[i];
    long long x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
      long long t = a / b;
      a -= t * b; std::swap(a, b);
      x0 -= t * x1; std::swap(x0, x1);
      y0 -= t * y1; std::swap(y0, y1);
    }
    long long g = a, p = r[0] / g, q = r[i] / g;
    // E acts on coordinates (0,i): new r0 = g, new ri = 0.
    // W^{-1} picks up E^{-1} = [[p, -y0],[q, x0]] on columns (0,i).
    Eigen::Matrix<long long, Eigen::Dynamic, 1> c0 = winv.col(0), ci = winv.col(i);
    winv.col(0) = p * c0 + q * ci;
    winv.col(i) = -y0 * c0 + x0 * ci;
    r[0] = g;
    r[i] = 0;
  }
  if (r[0] == -1) winv.col(0) *= -1;
  else if (r[0] != 1) throw std::invalid_argument("completion expects a primitive vector");
  return winv;  // first column equals v
}

double pair_covolume(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double aa = a.squaredNorm(), bb = b.squaredNorm(), ab = a.dot(b);
  double s = aa * bb - ab * ab;
  return s > 0 ? std::sqrt(s) : 0.0;
}

struct Rank2Result {
  double covolume = 0.0;
  Eigen::VectorXi v1, v2;
};

Eigen::VectorXi to_int(const Eigen::Matrix<long long, Eigen::Dynamic, 1>& v) {
  Eigen::VectorXi r(v.size());
  for (int i = 0; i < v.size(); ++i) r[i] = int(v[i]);
  return r;
}

/// Minimal covolume over rank-2 sublattices. Every minimizing Gauss-reduced
/// pair has its shorter vector v with ||v||^2 <= (2/sqrt(3)) * covol, so it
/// suffices to scan short primitive v and pick the best partner from the
/// projected quotient lattice.
Rank2Result rank2_minimum(const Lattice& lat, const ReducedBasis& red,
                          long long node_guard) {
  const int n = lat.n();
  const Eigen::MatrixXd& b = lat.basis();

  Rank2Result best;
  best.covolume = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double c = pair_covolume(red.basis.col(i), red.basis.col(j));
      if (c > 0 && c < best.covolume) {
        best.covolume = c;
        best.v1 = red.transform.col(i);
        best.v2 = red.transform.col(j);
      }
    }

  const double k_gauss = 2.0 / std::sqrt(3.0);
  double vbound = std::sqrt(k_gauss * best.covolume) * (1.0 + 1e-9);

  std::vector<Eigen::VectorXi> cands;
  enumerate(red.basis, vbound * vbound, node_guard,
            [&](const Eigen::VectorXi& x, double) {
              Eigen::VectorXi v = red.transform * x;
              if (vec_gcd(v) == 1) {
                // keep one of +/- v
                for (int i = 0; i < n; ++i) {
                  if (v[i] > 0) { cands.push_back(v); break; }
                  if (v[i] < 0) break;
                }
              }
              return std::numeric_limits<double>::infinity();
            });

  for (const auto& v : cands) {
    IMat comp = unimodular_completion(v);
    Eigen::VectorXd bv = b * v.cast<double>();
    double bvsq = bv.squaredNorm();
    Eigen::MatrixXd proj(n, n - 1);
    for (int j = 1; j < n; ++j) {
      Eigen::VectorXd w = b * comp.col(j).cast<double>();
      proj.col(j - 1) = w - (w.dot(bv) / bvsq) * bv;
    }
    ReducedBasis pred = lll_reduce(proj);
    double best_tau_sq = pred.basis.colwise().squaredNorm().minCoeff();
    Eigen::VectorXi best_y;
    enumerate(pred.basis, best_tau_sq * (1.0 + 1e-12), node_guard,
              [&](const Eigen::VectorXi& x, double nsq) {
                if (nsq <= best_tau_sq * (1.0 + 1e-12)) {
                  best_tau_sq = std::min(best_tau_sq, nsq);
                  best_y = pred.transform * x;
                }
                return best_tau_sq * (1.0 + 1e-12);
              });
    if (best_y.size() == 0) {
      // the column minimum itself is the shortest projected vector
      int arg = 0;
      pred.basis.colwise().squaredNorm().minCoeff(&arg);
      best_y = pred.transform.col(arg);
    }
    double cand = std::sqrt(bvsq) * std::sqrt(best_tau_sq);
    if (cand < best.covolume * (1.0 - 1e-13)) {
      best.covolume = cand;
      best.v1 = v;
      Eigen::Matrix<long long, Eigen::Dynamic, 1> w =
          comp.rightCols(n - 1).cast<long long>() * best_y.cast<long long>();
      best.v2 = to_int(w);
    }
  }
  return best;
}

}  // namespace

Lattice::Lattice(Eigen::MatrixXd basis, bool require_unimodular) : basis_(std::move(basis)) {
  if (basis_.rows() != basis_.cols() || basis_.rows() < 1)
    throw std::invalid_argument("lattice basis must be square");
  double det = basis_.determinant();
  if (std::abs(det) < 1e-14) throw std::invalid_argument("lattice basis is singular");
  if (require_unimodular && std::abs(std::abs(det) - 1.0) >= 1e-9)
    throw std::invalid_argument("basis is not unimodular within 1e-9");
}

Lattice Lattice::dual() const {
  return Lattice(basis_.inverse().transpose());
}

ReducedBasis lll_reduce(const Eigen::MatrixXd& basis, double delta) {
  const int m = int(basis.cols());
  ReducedBasis r{basis, Eigen::MatrixXi::Identity(m, m)};
  GramSchmidt gs = gram_schmidt(r.basis);

  auto size_reduce = [&](int i, int j) {
    double q = std::round(gs.mu(i, j));
    if (q == 0.0) return;
    r.basis.col(i) -= q * r.basis.col(j);
    r.transform.col(i) -= int(q) * r.transform.col(j);
    for (int k = 0; k < j; ++k) gs.mu(i, k) -= q * gs.mu(j, k);
    gs.mu(i, j) -= q;
  };

  int k = 1;
  long long steps = 0;
  const long long step_guard = 100000 + 1000LL * m * m;
  while (k < m) {
    if (++steps > step_guard) break;  // defensive cap; basis is still valid
    for (int j = k - 1; j >= 0; --j) size_reduce(k, j);
    if (gs.csq[k] >= (delta - gs.mu(k, k - 1) * gs.mu(k, k - 1)) * gs.csq[k - 1]) {
      ++k;
    } else {
      r.basis.col(k).swap(r.basis.col(k - 1));
      Eigen::VectorXi tmp = r.transform.col(k);
      r.transform.col(k) = r.transform.col(k - 1);
      r.transform.col(k - 1) = tmp;
      gs = gram_schmidt(r.basis);  // small m: recompute rather than update
      k = std::max(k - 1, 1);
    }
  }
  return r;
}

std::vector<Eigen::VectorXi> shortest_vectors(const Lattice& lattice, double radius,
                                              long long node_guard) {
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
  ReducedBasis red = lll_reduce(lattice.basis());
  // cheap explosion prediction from the Gaussian heuristic per level
  {
    GramSchmidt gs = gram_schmidt(red.basis);
    double pred = 1.0;
    for (int i = 0; i < lattice.n(); ++i)
      pred *= 2.0 * radius / std::sqrt(gs.csq[i]) + 1.0;
    if (pred > 100.0 * double(node_guard))
      throw ExplosionGuard("predicted enumeration size exceeds the node budget");
  }
  std::vector<Eigen::VectorXi> out;
  const double rtol = radius + 1e-9 * std::max(1.0, radius);
  enumerate(red.basis, rtol * rtol, node_guard,
            [&](const Eigen::VectorXi& x, double) {
              Eigen::VectorXi v = red.transform * x;
              if ((lattice.basis() * v.cast<double>()).norm() <= rtol)
                out.push_back(v);
              return std::numeric_limits<double>::infinity();
            });
  std::sort(out.begin(), out.end(), [](const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(),
                                        b.data(), b.data() + b.size());
  });
  return out;
}

Eigen::VectorXi shortest_vector(const Lattice& lattice) {
  ReducedBasis red = lll_reduce(lattice.basis());
  double best = red.basis.colwise().squaredNorm().minCoeff();
  int arg = 0;
  red.basis.colwise().squaredNorm().minCoeff(&arg);
  Eigen::VectorXi bestx = red.transform.col(arg);
  enumerate(red.basis, best * (1.0 + 1e-12), kEnumNodeGuard,
            [&](const Eigen::VectorXi& x, double nsq) {
              if (nsq < best) {
                best = nsq;
                bestx = red.transform * x;
              }
              return best * (1.0 + 1e-12);
            });
  return bestx;
}

AlphaResult alpha(const Lattice& lattice, AlphaMode mode) {
  const int n = lattice.n();
  const Eigen::MatrixXd& b = lattice.basis();
  const double det = std::abs(b.determinant());

  if (mode == AlphaMode::Certified) {
    ReducedBasis red = lll_reduce(b);
    GramSchmidt gs = gram_schmidt(red.basis);
    AlphaResult res;
    res.mode = AlphaMode::Certified;
    res.lower = 0.0;
    res.upper = 0.0;
    double cov = 1.0;
    for (int i = 1; i <= n; ++i) {
      cov *= std::sqrt(gs.csq[i - 1]);
      double gap = std::pow(2.0, double(i) * double(n - i) / 2.0);
      if (1.0 / cov > res.lower) {
        res.lower = 1.0 / cov;
        res.witness_rank = i;
      }
      res.upper = std::max(res.upper, gap / cov);
      res.gap_factor = std::max(res.gap_factor, gap);
      res.rank_minima.push_back(cov);  // upper bounds on the true minima
    }
    res.value = res.lower;
    return res;
  }

  if (n > 5) throw ModeUnavailable("exact height computation is limited to n <= 5");

  ReducedBasis red = lll_reduce(b);
  Lattice dualL = lattice.dual();
  ReducedBasis dred = lll_reduce(dualL.basis());

  std::vector<double> d(n + 1, 0.0);  // d[i] = minimal rank-i covolume
  std::vector<std::vector<Eigen::VectorXi>> wit(n + 1);

  // rank 1
  Eigen::VectorXi s1 = shortest_vector(lattice);
  d[1] = (b * s1.cast<double>()).norm();
  wit[1] = {s1};

  // rank n-1 via the dual shortest vector: the minimizing hyperplane
  // sublattice is the integer kernel of the dual witness
  Eigen::VectorXi s1d;
  if (n >= 2) {
    s1d = shortest_vector(dualL);
    d[n - 1] = (dualL.basis() * s1d.cast<double>()).norm() * det;
    IMat u = row_clear(s1d);
    for (int j = 1; j < n; ++j) wit[n - 1].push_back(to_int(u.col(j)));
  }

  // rank 2 direct (n >= 4; for n = 3 it equals the dual computation above)
  if (n >= 4) {
    Rank2Result r2 = rank2_minimum(lattice, red, kEnumNodeGuard);
    d[2] = r2.covolume;
    wit[2] = {r2.v1, r2.v2};
  }

  // rank n-2 via dual rank-2 (only needed for n = 5; n = 4 has it already)
  if (n == 5) {
    Rank2Result r2d = rank2_minimum(dualL, dred, kEnumNodeGuard);
    d[3] = r2d.covolume * det;
    IMat u1 = row_clear(r2d.v1);
    // express the second dual witness in the kernel coordinates of the first
    Eigen::VectorXi w2(n - 1);
    for (int j = 1; j < n; ++j) {
      long long acc = 0;
      for (int i = 0; i < n; ++i) acc += (long long)r2d.v2[i] * u1(i, j);
      w2[j - 1] = int(acc);
    }
    IMat u2 = row_clear(w2);
    for (int j = 1; j < n - 1; ++j) {
      Eigen::Matrix<long long, Eigen::Dynamic, 1> col =
          u1.rightCols(n - 1).cast<long long>() * u2.col(j).cast<long long>();
      wit[3].push_back(to_int(col));
    }
  }

  // full rank
  d[n] = det;
  wit[n].clear();
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXi e = Eigen::VectorXi::Zero(n);
    e[j] = 1;
    wit[n].push_back(e);
  }

  AlphaResult res;
  res.mode = AlphaMode::Exact;
  res.value = 0.0;
  for (int i = 1; i <= n; ++i) {
    if (d[i] <= 0) continue;
    res.rank_minima.push_back(d[i]);
    double v = 1.0 / d[i];
    if (v > res.value * (1.0 + 1e-12)) {
      res.value = v;
      res.witness_rank = i;
      res.witness_vectors = wit[i];
    }
  }
  res.lower = res.upper = res.value;
  return res;
}

double siegel_transform(const SupportedFunction& f, const Lattice& lattice) {
  double acc = 0.0;
  for (const auto& v : shortest_vectors(lattice, f.support_radius))
    acc += f.eval(lattice.basis() * v.cast<double>());
  return acc;
}

double max_exterior_operator_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  double best = 0.0, prod = 1.0;
  for (int j = 0; j < s.size(); ++j) {
    prod *= s[j];
    best = std::max(best, prod);
  }
  return best;
}

}  // namespace qlpairs
