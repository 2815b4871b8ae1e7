#pragma once

#include <compare>
#include <map>
#include <vector>

#include "fhb/op_expr.hpp"
#include "fhb/sublattice.hpp"

namespace fhb {

/// Sum over all sublattice translates of a local representative.
struct TranslatedOperator {
  OpExpr local;
  SubLattice lattice;

  bool is_zero() const { return local.is_zero(); }
};

/// Lattice shifts l for which support(a) and support(translate(b, l)) share a site.
std::vector<Site> overlapping_shifts(const OpExpr& a, const OpExpr& b, const SubLattice& lattice);

/// Representative of [sum_i a_i, sum_k b_k], namely sum_l [a_0, b_l] over
/// overlapping shifts l, with translation-equivalent terms merged.
TranslatedOperator commute_translated(const TranslatedOperator& a, const TranslatedOperator& b);

/// Merges terms that are sublattice translates of one another. Each term is
/// placed so that its smallest site lies in the unit cell at the origin.
OpExpr fold_translates(const OpExpr& local, const SubLattice& lattice);

/// Shift that moves a term into its canonical (folded) position.
Site canonical_shift(const Term& t, const SubLattice& lattice);

/// Powers of the hopping coefficient v and interaction coefficient u.
struct Degree {
  int v = 0;
  int u = 0;
  friend auto operator<=>(const Degree&, const Degree&) = default;
  friend Degree operator+(Degree a, Degree b) { return {a.v + b.v, a.u + b.u}; }
};

/// Translated operator split into components homogeneous in (v, u).
struct GradedOperator {
  std::map<Degree, OpExpr> parts;
  SubLattice lattice;

  static GradedOperator homogeneous(const TranslatedOperator& op, Degree d);
  bool is_zero() const;
  TranslatedOperator component(Degree d) const;
  GradedOperator& add(const GradedOperator& other, double scale = 1.0);
};

/// Bilinear commutator of graded operators; degrees add.
GradedOperator commute_translated(const GradedOperator& a, const GradedOperator& b);

/// Splits a translated sum whose terms carry provenance tags into homogeneous
/// components. `tagged` lists (degree, operator) contributions.
GradedOperator monomial_degree(const std::vector<std::pair<Degree, TranslatedOperator>>& tagged);

}  // namespace fhb
