#pragma once

#include "qlpairs/rational.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlpairs {

struct BadSignature : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct WrongComponent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Component { H, S, UPlus, UMinus, T, Mixed };

std::string component_name(Component c);

/// Traceless n x n matrix with exact rational entries, tagged by the
/// module component it lies in (Mixed when it spans several).
struct LieElement {
  RatMatrix entries;
  Component tag = Component::Mixed;

  int n() const { return int(entries.rows()); }
};

/// Extended scalar for the deformation parameter: a rational value or the
/// distinguished infinity (which selects the opposite nilpotent part).
struct Xi {
  bool infinite = false;
  Rational value = 0;

  static Xi infinity() { return Xi{true, 0}; }
  static Xi of(const Rational& v) { return Xi{false, v}; }
  Xi negated() const { return infinite ? *this : Xi{false, -value}; }
  bool is_zero() const { return !infinite && value == 0; }
  std::string str() const { return infinite ? "inf" : value.str(); }
};

/// Splitting of the traceless matrices as a module over the block
/// pseudo-orthogonal subalgebra acting on the first n-1 coordinates,
/// built in diagonal coordinates diag(1,..,1,-1,..,-1) (p plus signs).
struct Decomposition {
  int p = 0, q = 0;  // n = p + q; the block subalgebra has signature (p, q-1)
  std::vector<LieElement> h;        // (n-1)(n-2)/2
  std::vector<LieElement> s;        // n(n-1)/2 - 1
  std::vector<LieElement> u_plus;   // n-1, spanned by E_{i,n}
  std::vector<LieElement> u_minus;  // n-1, spanned by E_{n,i}
  std::vector<LieElement> t;        // 1

  int n() const { return p + q; }
  /// Exact span membership test for one component.
  const RatSpan& span(Component c) const;
  /// Recomputes the component tag of an arbitrary traceless matrix.
  Component classify(const RatMatrix& m) const;

  // filled by build_decomposition
  RatSpan span_h, span_s, span_up, span_um, span_t;
};

/// Basis vectors exactly as prescribed: h = block so(p, q-1); s = the
/// traceless symmetric complement inside the top-left block; u+ = E_{i,n};
/// u- = E_{n,i}; t = diag(1,..,1,-(n-1)).
Decomposition build_decomposition(int p, int q);

/// Exact commutator XY - YX; tag recomputed by projection when a
/// decomposition is supplied.
LieElement bracket(const LieElement& x, const LieElement& y,
                   const Decomposition* dec = nullptr);

/// Signed transpose u+ -> u-: E_{i,n} -> E_{n,i} for i <= p and
/// E_{i,n} -> -E_{n,i} for p+1 <= i <= n-1; extended linearly.
LieElement phi_map(const LieElement& v, const Decomposition& dec);

/// Basis of (Id + xi * Phi) u+; xi = 0 gives u+, xi = infinity gives u-.
std::vector<LieElement> u_xi_basis(const Xi& xi, const Decomposition& dec);

/// Gram matrix (exact) of the deformed quadratic form
/// x1^2+..+xp^2 - x_{p+1}^2-..-x_{n-1}^2 + xi*x_n^2.
RatMatrix deformed_gram(int p, int q, const Rational& xi);

struct RelationResult {
  std::string name;
  bool pass = false;
  std::string witness;  // entries of an offending bracket, if any
};

struct IntermediateReport {
  int p = 0, q = 0;
  std::vector<RelationResult> results;
  bool all_pass() const {
    for (const auto& r : results)
      if (!r.pass) return false;
    return true;
  }
};

/// Exact verification battery for the intermediate-subalgebra table:
/// (a) h + u_xi is bracket-closed and annihilates the deformed gram,
/// (b) [t, u_xi] and [s, u_xi] land in u_{-xi},
/// (c) every candidate subalgebra in the table is bracket-closed,
/// (d) h + u_xi + t is NOT closed for finite nonzero xi, and u_xi alone
///     is not closed either.
IntermediateReport check_intermediate_subalgebras(int p, int q,
                                                  const std::vector<Xi>& xi_list);

}  // namespace qlpairs
