#pragma once

// Named experiment inputs shared by the command line and the acceptance
// battery.

#include "qlpairs/bump.hpp"
#include "qlpairs/forms.hpp"

#include <cmath>

namespace qlpairs::builtin {

/// Five-variable headline pair: rotated hyperbolic block (so no rational
/// isotropic vector meets ker l), irrational algebraic coefficients,
/// kernel signature (3,1). No real scalar combination alpha q + beta l^2
/// is rational: the x3^2 coefficient forces alpha = 0 and the x4 x5
/// cross-coefficient then forces beta = 0.
inline FormPair flagship5() {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(5, 5);
  g(0, 0) = 1.0;
  g(0, 1) = g(1, 0) = 1.0;
  g(1, 1) = -std::sqrt(2.0);
  g(2, 2) = 1.0 + std::sqrt(2.0) / 2.0;
  g(3, 3) = 1.0;
  g(4, 4) = -1.0;
  Eigen::VectorXd l(5);
  l << 0.0, 0.0, 0.0, 1.0, std::sqrt(3.0);
  return FormPair(QuadraticForm(g), LinearForm(l));
}

/// Four-variable sibling of the headline pair.
inline FormPair flagship4() {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  g(0, 0) = 1.0;
  g(0, 1) = g(1, 0) = 1.0;
  g(1, 1) = -std::sqrt(2.0);
  g(2, 2) = 1.0 + std::sqrt(2.0) / 2.0;
  g(3, 3) = -1.0;
  Eigen::VectorXd l(4);
  l << 0.0, 0.0, 1.0, std::sqrt(3.0);
  return FormPair(QuadraticForm(g), LinearForm(l));
}

/// Canonical model pair (gram of 2x1x2 + ... with parameter p, l = x_n).
inline FormPair canonical_pair(int n, int p) {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(n);
  l[n - 1] = 1.0;
  return FormPair(QuadraticForm(canonical_gram(n, p)), LinearForm(l));
}

/// Base point with an irrational invariant direction (dense orbit case).
inline Eigen::MatrixXd dense_base(int n) {
  Eigen::MatrixXd lo = Eigen::MatrixXd::Identity(n, n);
  lo(1, 0) = std::sqrt(2.0) / 2.0;
  lo(2, 1) = std::sqrt(3.0) / 3.0;
  lo(3, 2) = std::sqrt(5.0) / 5.0;
  lo(n - 1, 0) = std::sqrt(7.0) / 7.0;
  Eigen::MatrixXd up = Eigen::MatrixXd::Identity(n, n);
  up(0, 2) = std::sqrt(3.0) / 2.0;
  up(1, 3) = std::sqrt(2.0) / 3.0;
  up(2, n - 1) = std::sqrt(5.0) / 3.0;
  up(0, n - 1) = std::sqrt(7.0) / 4.0;
  return lo * up;
}

/// Base point fixing e_n (rational invariant direction) with an irrational
/// bottom row, so the pulled-back pair still has no rational scalar
/// combination.
inline Eigen::MatrixXd fixed_base(int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  a(0, 1) = std::sqrt(2.0) / 2.0;
  a(1, 2) = std::sqrt(3.0) / 3.0;
  a(0, 3) = std::sqrt(7.0) / 5.0;
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(n, n);
  b(1, 0) = std::sqrt(5.0) / 4.0;
  b(2, 1) = std::sqrt(2.0) / 5.0;
  b(3, 0) = std::sqrt(3.0) / 7.0;
  Eigen::MatrixXd g = a * b;
  g(n - 1, 0) = std::sqrt(2.0) / 3.0;
  g(n - 1, 1) = std::sqrt(3.0) / 5.0;
  if (n > 4) {
    g(n - 1, 2) = std::sqrt(5.0) / 7.0;
    g(n - 1, 3) = std::sqrt(7.0) / 9.0;
  }
  return g;
}

/// Wide-window observable for the kernel-identity runs at n = 5: full
/// angular coverage of the level circle, positive last coordinate.
inline ProductBump kernel_bump5() {
  ProductBump f;
  f.windows = {{0.0, 0.5}, {0.0, 2.5}, {0.0, 1.2}, {0.0, 1.2}, {0.8, 0.35}};
  return f;
}

/// Evaluation point for the kernel identity (level values inside the
/// observable's profile, positive last coordinate).
inline Eigen::VectorXd kernel_point5() {
  Eigen::VectorXd v(5);
  v << 0.9, 0.4, 0.5, 0.3, 0.8;
  return v;
}

/// Observable for the scaling-limit identity at n = 4, supported on the
/// positive-first-coordinate half-cone.
inline SlotBump limit_bump4() {
  SlotBump h;
  h.vec.windows = {{0.55, 0.3}, {-0.25, 0.25}, {0.0, 0.6}, {0.0, 0.5}};
  h.zeta = {0.3, 0.5};
  h.s = {0.2, 0.4};
  return h;
}

/// Bumps for the equidistribution runs.
inline ProductBump equi_bump_dense(int n) {
  ProductBump f;
  for (int i = 0; i < n; ++i) f.windows.push_back({0.0, 0.8});
  return f;
}
inline ProductBump equi_bump_fixed(int n) {
  ProductBump f;
  for (int i = 0; i < n - 1; ++i) f.windows.push_back({0.0, 0.5});
  f.windows.push_back({0.9, 0.5});
  return f;
}

}  // namespace qlpairs::builtin
