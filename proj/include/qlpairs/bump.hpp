#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qlpairs {

/// Smooth compactly supported window: cos^2(pi (x-c) / (2h)) on |x-c| < h.
/// Integrates to h; C^1 at the support edges.
struct CosineWindow {
  double center = 0.0;
  double half_width = 1.0;

  double operator()(double x) const {
    double t = (x - center) / half_width;
    if (!(std::abs(t) < 1.0)) return 0.0;
    double c = std::cos(1.5707963267948966 * t);
    return c * c;
  }
  double integral() const { return half_width; }
  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
};

/// Product of per-coordinate cosine windows on R^n.
struct ProductBump {
  std::vector<CosineWindow> windows;

  int n() const { return int(windows.size()); }
  double operator()(const Eigen::VectorXd& v) const {
    if (v.size() != n()) throw std::invalid_argument("bump dimension mismatch");
    double acc = 1.0;
    for (int i = 0; i < n(); ++i) {
      acc *= windows[i](v[i]);
      if (acc == 0.0) return 0.0;
    }
    return acc;
  }
  double integral() const {
    double acc = 1.0;
    for (const auto& w : windows) acc *= w.integral();
    return acc;
  }
  /// Radius of a ball containing the support box.
  double support_radius() const {
    double acc = 0.0;
    for (const auto& w : windows) {
      double m = std::max(std::abs(w.lo()), std::abs(w.hi()));
      acc += m * m;
    }
    return std::sqrt(acc) * (1.0 + 1e-12);
  }
  /// True when the support lies in the half-space x_n > 0.
  bool positive_last_coordinate() const {
    return windows.back().lo() >= 0.0;
  }
};

/// Test observable h(v, zeta, s): a vector bump times windows in the
/// quadratic value zeta and the linear value s. Slot order is fixed:
/// (vector, q-value, l-value).
struct SlotBump {
  ProductBump vec;
  CosineWindow zeta;
  CosineWindow s;

  double operator()(const Eigen::VectorXd& v, double zeta_val, double s_val) const {
    double a = zeta(zeta_val);
    if (a == 0.0) return 0.0;
    double b = s(s_val);
    if (b == 0.0) return 0.0;
    return a * b * vec(v);
  }
};

}  // namespace qlpairs
