#include "fhb/translated.hpp"

#include <algorithm>
#include <stdexcept>

namespace fhb {

std::vector<Site> overlapping_shifts(const OpExpr& a, const OpExpr& b, const SubLattice& lattice) {
  std::vector<Site> shifts;
  const auto sa = a.site_support();
  const auto sb = b.site_support();
  for (const Site& x : sa) {
    for (const Site& y : sb) {
      const Site d = x - y;
      if (lattice.contains(d)) shifts.push_back(d);
    }
  }
  std::sort(shifts.begin(), shifts.end());
  shifts.erase(std::unique(shifts.begin(), shifts.end()), shifts.end());
  return shifts;
}

Site canonical_shift(const Term& t, const SubLattice& lattice) {
  Site anchor = t.factors.front().i;
  for (const Leaf& l : t.factors) anchor = std::min(anchor, l.i);
  return lattice.cell_of(anchor);
}

OpExpr fold_translates(const OpExpr& local, const SubLattice& lattice) {
  std::vector<Term> terms;
  terms.reserve(local.size());
  for (const Term& t : local.terms()) {
    const Site shift = canonical_shift(t, lattice);
    Term s{t.coeff, {}};
    s.factors.reserve(t.factors.size());
    for (const Leaf& l : t.factors) s.factors.push_back(translate(l, -shift));
    terms.push_back(std::move(s));
  }
  return OpExpr::from_terms(std::move(terms));
}

TranslatedOperator commute_translated(const TranslatedOperator& a, const TranslatedOperator& b) {
  if (!(a.lattice == b.lattice)) throw std::invalid_argument("commutator of operators on different sublattices");
  TranslatedOperator out{{}, a.lattice};
  if (a.is_zero() || b.is_zero()) return out;
  std::vector<Term> acc;
  for (const Site& l : overlapping_shifts(a.local, b.local, a.lattice)) {
    const OpExpr c = commutator(a.local, translate(b.local, l));
    acc.insert(acc.end(), c.terms().begin(), c.terms().end());
  }
  out.local = fold_translates(OpExpr::from_terms(std::move(acc)), a.lattice);
  return out;
}

GradedOperator GradedOperator::homogeneous(const TranslatedOperator& op, Degree d) {
  GradedOperator g;
  g.lattice = op.lattice;
  if (!op.is_zero()) g.parts[d] = op.local;
  return g;
}

bool GradedOperator::is_zero() const {
  return std::all_of(parts.begin(), parts.end(), [](const auto& kv) { return kv.second.is_zero(); });
}

TranslatedOperator GradedOperator::component(Degree d) const {
  auto it = parts.find(d);
  return {it == parts.end() ? OpExpr{} : it->second, lattice};
}

GradedOperator& GradedOperator::add(const GradedOperator& other, double scale) {
  if (parts.empty() && lattice.rank() == 0) lattice = other.lattice;
  for (const auto& [d, op] : other.parts) {
    OpExpr sum = parts[d] + scale * op;
    sum = fold_translates(sum, lattice);
    if (sum.is_zero()) {
      parts.erase(d);
    } else {
      parts[d] = std::move(sum);
    }
  }
  return *this;
}

GradedOperator commute_translated(const GradedOperator& a, const GradedOperator& b) {
  GradedOperator out;
  out.lattice = a.lattice;
  for (const auto& [da, opa] : a.parts) {
    for (const auto& [db, opb] : b.parts) {
      const TranslatedOperator c = commute_translated(TranslatedOperator{opa, a.lattice}, TranslatedOperator{opb, b.lattice});
      if (c.is_zero()) continue;
      out.add(GradedOperator::homogeneous(c, da + db));
    }
  }
  return out;
}

GradedOperator monomial_degree(const std::vector<std::pair<Degree, TranslatedOperator>>& tagged) {
  GradedOperator out;
  for (const auto& [d, op] : tagged) {
    if (out.lattice.rank() == 0) out.lattice = op.lattice;
    out.add(GradedOperator::homogeneous(op, d));
  }
  return out;
}

}  // namespace fhb
