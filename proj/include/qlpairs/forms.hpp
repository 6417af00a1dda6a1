#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlpairs {

struct DegenerateForm : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotTypeI : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllConditioned : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Relative eigenvalue cutoff below which a symmetric form counts as
/// degenerate. Floating input needs a cutoff even though the underlying
/// theory assumes exact non-degeneracy.
inline constexpr double kDegeneracyTol = 1e-10;

struct Signature {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  bool operator==(const Signature&) const = default;
};

class QuadraticForm {
public:
  QuadraticForm() = default;
  explicit QuadraticForm(Eigen::MatrixXd gram);

  int n() const { return int(gram_.rows()); }
  const Eigen::MatrixXd& gram() const { return gram_; }

  double operator()(const Eigen::VectorXd& v) const { return v.dot(gram_ * v); }
  /// Polarized bilinear value q(u, v).
  double bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return u.dot(gram_ * v);
  }

private:
  Eigen::MatrixXd gram_;
};

class LinearForm {
public:
  LinearForm() = default;
  explicit LinearForm(Eigen::VectorXd coeffs);

  int n() const { return int(coeffs_.size()); }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  double operator()(const Eigen::VectorXd& v) const { return coeffs_.dot(v); }

private:
  Eigen::VectorXd coeffs_;
};

enum class PairKind { TypeI, TypeII, Degenerate };

struct PairClass {
  PairKind kind = PairKind::Degenerate;
  /// Canonical parameter of the equivalence class (see reduce_to_canonical
  /// for the sign convention). For TypeI with an indefinite restriction this
  /// is invariant under the full (g, lambda, mu) action.
  int p = 0;
  Signature restriction;  // signature of q restricted to ker l
  /// True when the scaling lambda matching the canonical model must be
  /// negative (the restriction's positive count then differs from p).
  bool flipped = false;
  /// TypeI pairs with a definite restriction have no canonical model in the
  /// standard family; they classify as TypeI but cannot be reduced.
  bool reducible = false;
};

struct FormPair {
  QuadraticForm q;
  LinearForm l;

  FormPair() = default;
  FormPair(QuadraticForm q_, LinearForm l_);
  int n() const { return q.n(); }
  const PairClass& cls() const { return cls_; }

private:
  PairClass cls_;
};

/// Eigenvalue signature of a non-degenerate quadratic form.
/// Throws DegenerateForm if any eigenvalue is below the relative cutoff.
Signature signature(const QuadraticForm& q);

/// Signature allowing zeros (no throw); used for restrictions.
Signature signature_with_kernel(const Eigen::MatrixXd& gram);

/// Gram matrix of q pulled back to ker l along the standard section basis.
/// The result's signature is basis-independent.
QuadraticForm restrict_to_kernel(const QuadraticForm& q, const LinearForm& l);

PairClass classify_pair(const QuadraticForm& q, const LinearForm& l);

/// Gram matrix of the canonical model with parameter p:
/// 2 x1 x2 + x3^2 + ... + x_{p+1}^2 - x_{p+2}^2 - ... - x_n^2.
Eigen::MatrixXd canonical_gram(int n, int p);

struct CanonicalReduction {
  Eigen::MatrixXd g;  // det(g) = 1
  double lambda = 1.0;
  double mu = 1.0;
  int target_p = 0;  // canonical parameter of the target model
};

/// Finds (g, lambda, mu) with lambda * q(g x) equal to the canonical model
/// of parameter target_p and mu * l(g x) = x_n. The scalars are chosen
/// positive whenever the pair's invariants allow it; lambda < 0 occurs
/// exactly when the q-orthocomplement of ker l is positive.
CanonicalReduction reduce_to_canonical(const QuadraticForm& q, const LinearForm& l);

struct RationalityHit {
  long long alpha_num, alpha_den;
  long long beta_num, beta_den;
};

struct RationalityReport {
  std::vector<RationalityHit> hits;
  long long denominator_bound = 0;
  bool detected() const { return !hits.empty(); }
};

/// Grid heuristic for condition (2): scans normalized scalar combinations
/// alpha*gram + beta*(l (x) l) for proximity (1e-9) to a rational matrix with
/// denominators below the bound. Empty report means "not detected at this
/// resolution", never a proof of irrationality.
RationalityReport rationality_scan(const QuadraticForm& q, const LinearForm& l,
                                   long long denominator_bound);

}  // namespace qlpairs
