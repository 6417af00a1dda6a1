#include "qlpairs/lie.hpp"

#include <sstream>

namespace qlpairs {

std::string component_name(Component c) {
  switch (c) {
    case Component::H: return "h";
    case Component::S: return "s";
    case Component::UPlus: return "u+";
    case Component::UMinus: return "u-";
    case Component::T: return "t";
    case Component::Mixed: return "mixed";
  }
  return "?";
}

const RatSpan& Decomposition::span(Component c) const {
  switch (c) {
    case Component::H: return span_h;
    case Component::S: return span_s;
    case Component::UPlus: return span_up;
    case Component::UMinus: return span_um;
    case Component::T: return span_t;
    default: throw std::invalid_argument("no span for mixed component");
  }
}

Component Decomposition::classify(const RatMatrix& m) const {
  if (m.is_zero()) return Component::Mixed;
  for (Component c : {Component::H, Component::S, Component::UPlus,
                      Component::UMinus, Component::T})
    if (span(c).contains(m)) return c;
  return Component::Mixed;
}

Decomposition build_decomposition(int p, int q) {
  if (p < 1 || q < 2 || p + q < 4) throw BadSignature("need p >= 1, q >= 2, p+q >= 4");
  const int n = p + q;
  const int m = n - 1;
  Decomposition dec;
  dec.p = p;
  dec.q = q;

  // Diagonal-coordinate gram of the restricted form, signature (p, q-1).
  std::vector<int> eps(m);
  for (int i = 0; i < m; ++i) eps[i] = (i < p) ? 1 : -1;

  auto embed = [&](const RatMatrix& block) {
    RatMatrix full(n, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) full(i, j) = block(i, j);
    return full;
  };

  // h: A * Q' with A antisymmetric (m x m), embedded in the top-left block.
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      RatMatrix b(m, m);
      b(i, j) = eps[j];
      b(j, i) = -eps[i];
      dec.h.push_back({embed(b), Component::H});
    }

  // s: S * Q' with S symmetric and trace(S * Q') = 0.
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      RatMatrix b(m, m);
      b(i, j) = eps[j];
      b(j, i) = eps[i];
      dec.s.push_back({embed(b), Component::S});
    }
  for (int i = 0; i + 1 < m; ++i) {
    RatMatrix b(m, m);
    b(i, i) = 1;
    b(i + 1, i + 1) = -1;
    dec.s.push_back({embed(b), Component::S});
  }

  for (int i = 0; i < m; ++i)
    dec.u_plus.push_back({RatMatrix::unit(n, i, n - 1), Component::UPlus});
  for (int i = 0; i < m; ++i)
    dec.u_minus.push_back({RatMatrix::unit(n, n - 1, i), Component::UMinus});

  RatMatrix tgen(n, n);
  for (int i = 0; i < m; ++i) tgen(i, i) = 1;
  tgen(n - 1, n - 1) = -(n - 1);
  dec.t.push_back({tgen, Component::T});

  const std::size_t width = std::size_t(n) * n;
  dec.span_h = RatSpan(width);
  dec.span_s = RatSpan(width);
  dec.span_up = RatSpan(width);
  dec.span_um = RatSpan(width);
  dec.span_t = RatSpan(width);
  for (const auto& e : dec.h) dec.span_h.add(e.entries);
  for (const auto& e : dec.s) dec.span_s.add(e.entries);
  for (const auto& e : dec.u_plus) dec.span_up.add(e.entries);
  for (const auto& e : dec.u_minus) dec.span_um.add(e.entries);
  for (const auto& e : dec.t) dec.span_t.add(e.entries);
  return dec;
}

LieElement bracket(const LieElement& x, const LieElement& y, const Decomposition* dec) {
  if (x.n() != y.n()) throw DimensionMismatch("bracket of different sizes");
  LieElement r;
  r.entries = commutator(x.entries, y.entries);
  r.tag = dec ? dec->classify(r.entries) : Component::Mixed;
  return r;
}

LieElement phi_map(const LieElement& v, const Decomposition& dec) {
  if (v.tag != Component::UPlus || !dec.span_up.contains(v.entries))
    throw WrongComponent("phi_map expects an element of u+");
  const int n = dec.n();
  RatMatrix r(n, n);
  for (int i = 0; i < n - 1; ++i) {
    Rational c = v.entries(i, n - 1);
    if (c == 0) continue;
    r(n - 1, i) = (i < dec.p) ? c : -c;
  }
  return {r, Component::UMinus};
}

std::vector<LieElement> u_xi_basis(const Xi& xi, const Decomposition& dec) {
  if (xi.infinite) return dec.u_minus;
  std::vector<LieElement> basis;
  basis.reserve(dec.u_plus.size());
  for (const auto& e : dec.u_plus) {
    LieElement v = e;
    if (xi.value != 0) {
      LieElement img = phi_map(e, dec);
      v.entries = v.entries + img.entries * xi.value;
      v.tag = Component::Mixed;
    }
    basis.push_back(v);
  }
  return basis;
}

RatMatrix deformed_gram(int p, int q, const Rational& xi) {
  const int n = p + q;
  RatMatrix g(n, n);
  for (int i = 0; i < p; ++i) g(i, i) = 1;
  for (int i = p; i < n - 1; ++i) g(i, i) = -1;
  g(n - 1, n - 1) = xi;
  return g;
}

namespace {

std::string first_entries(const RatMatrix& m) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < m.cols(); ++j)
      os << (j ? "," : "") << m(i, j).str();
  }
  os << "]";
  return os.str();
}

bool annihilates_gram(const RatMatrix& x, const RatMatrix& g) {
  return (x.transpose() * g + g * x).is_zero();
}

/// Checks that every pairwise bracket of `gens` stays in their exact span.
/// On failure records one offending bracket.
RelationResult closure_check(const std::string& name,
                             const std::vector<const LieElement*>& gens,
                             std::size_t width) {
  RatSpan span(width);
  for (const auto* g : gens) span.add(g->entries);
  RelationResult res{name, true, ""};
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      RatMatrix br = commutator(gens[i]->entries, gens[j]->entries);
      if (!span.contains(br)) {
        res.pass = false;
        res.witness = "bracket(" + std::to_string(i) + "," + std::to_string(j) +
                      ") leaves span: " + first_entries(br);
        return res;
      }
    }
  return res;
}

std::vector<const LieElement*> ptrs(const std::vector<LieElement>& v) {
  std::vector<const LieElement*> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(&e);
  return out;
}

void append(std::vector<const LieElement*>& dst, const std::vector<LieElement>& src) {
  for (const auto& e : src) dst.push_back(&e);
}

}  // namespace

IntermediateReport check_intermediate_subalgebras(int p, int q,
                                                  const std::vector<Xi>& xi_list) {
  Decomposition dec = build_decomposition(p, q);
  const int n = dec.n();
  const std::size_t width = std::size_t(n) * n;
  IntermediateReport rep;
  rep.p = p;
  rep.q = q;

  auto add = [&](RelationResult r) { rep.results.push_back(std::move(r)); };

  // Fixed candidates: h, h+t, h+u+, h+u-, h+u+ +t, h+u- +t, and the
  // sl_{n-1}-row candidates built on h+s.
  {
    add(closure_check("h", ptrs(dec.h), width));

    std::vector<const LieElement*> g = ptrs(dec.h);
    append(g, dec.t);
    add(closure_check("h+t", g, width));

    g = ptrs(dec.h); append(g, dec.u_plus);
    add(closure_check("h+u+", g, width));
    g = ptrs(dec.h); append(g, dec.u_minus);
    add(closure_check("h+u-", g, width));
    g = ptrs(dec.h); append(g, dec.u_plus); append(g, dec.t);
    add(closure_check("h+u+ +t", g, width));
    g = ptrs(dec.h); append(g, dec.u_minus); append(g, dec.t);
    add(closure_check("h+u- +t", g, width));

    g = ptrs(dec.h); append(g, dec.s);
    add(closure_check("h+s", g, width));
    {
      // h+s must be the full traceless top-left block
      RatSpan span(width);
      std::size_t d = 0;
      for (const auto* e : g) d += span.add(e->entries) ? 1 : 0;
      RelationResult r{"dim(h+s) == (n-1)^2 - 1", d == std::size_t((n - 1) * (n - 1) - 1), ""};
      if (!r.pass) r.witness = "dim = " + std::to_string(d);
      add(r);
    }
    g = ptrs(dec.h); append(g, dec.s); append(g, dec.u_plus);
    add(closure_check("h+s+u+", g, width));
    g = ptrs(dec.h); append(g, dec.s); append(g, dec.u_minus);
    add(closure_check("h+s+u-", g, width));
    g = ptrs(dec.h); append(g, dec.s); append(g, dec.t);
    add(closure_check("h+s+t", g, width));
    g = ptrs(dec.h); append(g, dec.s); append(g, dec.u_plus); append(g, dec.t);
    add(closure_check("h+s+u+ +t", g, width));
    g = ptrs(dec.h); append(g, dec.s); append(g, dec.u_minus); append(g, dec.t);
    add(closure_check("h+s+u- +t", g, width));
  }

  for (const Xi& xi : xi_list) {
    const std::string sx = "xi=" + xi.str();
    std::vector<LieElement> uxi = u_xi_basis(xi, dec);
    std::vector<LieElement> uneg = u_xi_basis(xi.negated(), dec);
    RatSpan span_uneg(width);
    for (const auto& e : uneg) span_uneg.add(e.entries);

    // (a) closure of h + u_xi, and so(q_xi) membership for finite xi != 0
    {
      std::vector<const LieElement*> g = ptrs(dec.h);
      append(g, uxi);
      add(closure_check("h+u(" + sx + ")", g, width));

      if (!xi.infinite && !xi.is_zero()) {
        // h + u_xi annihilates the deformed gram with the reciprocal-negated
        // parameter: (E_1n + xi E_n1) pairs with last-coordinate weight -1/xi
        RatMatrix gram = deformed_gram(p, q, Rational(-1) / xi.value);
        RelationResult r{"h+u(" + sx + ") inside so(q[-1/xi])", true, ""};
        for (const auto* e : g)
          if (!annihilates_gram(e->entries, gram)) {
            r.pass = false;
            r.witness = first_entries(e->entries);
            break;
          }
        add(r);

        // dimension: h + u_xi spans all of so(q_xi), which has dim n(n-1)/2
        RatSpan sp(width);
        std::size_t d = 0;
        for (const auto* e : g) d += sp.add(e->entries) ? 1 : 0;
        RelationResult rd{"dim so(q_xi) (" + sx + ")", d == std::size_t(n * (n - 1) / 2), ""};
        if (!rd.pass) rd.witness = "dim = " + std::to_string(d);
        add(rd);
      }
    }

    // (b) [t, u_xi] and [s, u_xi] inside u_{-xi}
    {
      RelationResult r{"[t,u(" + sx + ")] in u(-xi)", true, ""};
      for (const auto& u : uxi) {
        RatMatrix br = commutator(dec.t[0].entries, u.entries);
        if (!span_uneg.contains(br)) {
          r.pass = false;
          r.witness = first_entries(br);
          break;
        }
      }
      add(r);

      RelationResult rs{"[s,u(" + sx + ")] in u(-xi)", true, ""};
      for (const auto& se : dec.s) {
        for (const auto& u : uxi) {
          RatMatrix br = commutator(se.entries, u.entries);
          if (!span_uneg.contains(br)) {
            rs.pass = false;
            rs.witness = first_entries(br);
            break;
          }
        }
        if (!rs.pass) break;
      }
      add(rs);
    }

    // (d) non-closure statements for finite xi != 0
    if (!xi.infinite && !xi.is_zero()) {
      std::vector<const LieElement*> g = ptrs(dec.h);
      append(g, uxi);
      append(g, dec.t);
      RelationResult r = closure_check("h+u(" + sx + ")+t", g, width);
      RelationResult inv{"h+u(" + sx + ")+t NOT closed", !r.pass, r.pass ? "unexpectedly closed" : ""};
      add(inv);

      RelationResult ru = closure_check("u(" + sx + ") alone", ptrs(uxi), width);
      RelationResult invu{"u(" + sx + ") alone NOT closed", !ru.pass,
                          ru.pass ? "unexpectedly closed" : ""};
      add(invu);
    }
  }

  return rep;
}

}  // namespace qlpairs
