#include "fhb/lattice_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace fhb {

namespace {

int pmod(int a, int n) { return ((a % n) + n) % n; }

OpExpr onsite_interaction(const Site& s, double weight) {
  const OpExpr nu = OpExpr::number(s, Spin::up);
  const OpExpr nd = OpExpr::number(s, Spin::down);
  return weight * (nu * nd);
}

OpExpr spin_summed_hopping(const Site& a, const Site& b) {
  return OpExpr::hopping(a, b, Spin::up) + OpExpr::hopping(a, b, Spin::down);
}

// Hexagon vertices g_1..g_6, counterclockwise from angle 0.
std::vector<Site> hexagon_vertices() {
  const Site e1{2, -1, -1};
  const Site e2{1, 1, -2};
  return {e1, e2, e2 - e1, -e1, -e2, e1 - e2};
}

}  // namespace

std::vector<Site> Geometry::bond_directions() const {
  switch (kind) {
    case GeometryKind::chain1d:
      return {Site{1}};
    case GeometryKind::square2d:
      return {Site{1, 0}, Site{0, 1}};
    case GeometryKind::triangular2d: {
      const auto g = hexagon_vertices();
      return {g[0], g[1], g[2]};
    }
  }
  return {};
}

void Geometry::check_extents(const std::vector<int>& extents) const {
  const std::size_t axes = kind == GeometryKind::chain1d ? 1 : 2;
  if (extents.size() != axes) throw std::invalid_argument("torus needs " + std::to_string(axes) + " extent(s)");
  for (int L : extents) {
    if (kind == GeometryKind::triangular2d) {
      if (L < 3 || L % 3 != 0) throw std::invalid_argument("triangular torus extents must be multiples of 3");
    } else {
      if (L % 2 != 0) throw std::invalid_argument("torus extents must be even");
      if (L < 4) throw std::invalid_argument("torus extents below 4 produce coincident bonds");
    }
  }
}

Site Geometry::wrap(const Site& s, const std::vector<int>& extents) const {
  switch (kind) {
    case GeometryKind::chain1d:
      return Site{pmod(s[0], extents[0])};
    case GeometryKind::square2d:
      return Site{pmod(s[0], extents[0]), pmod(s[1], extents[1])};
    case GeometryKind::triangular2d: {
      // (a, b, c) = n1 (2,-1,-1) + n2 (1,1,-2)
      const int n1 = pmod((s[0] - s[1]) / 3, extents[0]);
      const int n2 = pmod((s[0] + 2 * s[1]) / 3, extents[1]);
      return n1 * Site{2, -1, -1} + n2 * Site{1, 1, -2};
    }
  }
  return s;
}

std::vector<Site> Geometry::torus_sites(const std::vector<int>& extents) const {
  std::vector<Site> out;
  switch (kind) {
    case GeometryKind::chain1d:
      for (int a = 0; a < extents[0]; ++a) out.push_back(Site{a});
      break;
    case GeometryKind::square2d:
      for (int a = 0; a < extents[0]; ++a)
        for (int b = 0; b < extents[1]; ++b) out.push_back(Site{a, b});
      break;
    case GeometryKind::triangular2d:
      for (int a = 0; a < extents[0]; ++a)
        for (int b = 0; b < extents[1]; ++b) out.push_back(a * Site{2, -1, -1} + b * Site{1, 1, -2});
      break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

TranslatedOperator Decomposition::scaled(int gamma, double v, double u) const {
  const double c = couplings[gamma] == Coupling::kinetic ? v : u;
  return {c * terms[gamma].local, terms[gamma].lattice};
}

LatticeModel build_1d() {
  LatticeModel m;
  m.geometry = {GeometryKind::chain1d, 1, SubLattice({Site{2}}), 2, "1d"};
  const SubLattice& lat = m.geometry.sublattice;
  const OpExpr h1 = spin_summed_hopping(Site{0}, Site{1});
  const OpExpr h2 = spin_summed_hopping(Site{-1}, Site{0});
  const OpExpr h3 = onsite_interaction(Site{0}, 1.0) + onsite_interaction(Site{1}, 1.0);
  m.decomposition.terms = {{h1, lat}, {h2, lat}, {h3, lat}};
  m.decomposition.couplings = {Coupling::kinetic, Coupling::kinetic, Coupling::interaction};
  return m;
}

LatticeModel build_square() {
  LatticeModel m;
  m.geometry = {GeometryKind::square2d, 2, SubLattice({Site{2, 0}, Site{0, 2}}), 4, "square"};
  const SubLattice& lat = m.geometry.sublattice;
  const std::vector<Site> p{Site{0, 0}, Site{1, 0}, Site{1, 1}, Site{0, 1}};
  const Site diag{1, 1};
  OpExpr h1, h2, h3;
  for (int k = 0; k < 4; ++k) {
    const Site& a = p[k];
    const Site& b = p[(k + 1) % 4];
    h1 += spin_summed_hopping(a, b);
    h2 += spin_summed_hopping(a - diag, b - diag);
    h3 += onsite_interaction(a, 1.0);
  }
  m.decomposition.terms = {{h1, lat}, {h2, lat}, {h3, lat}};
  m.decomposition.couplings = {Coupling::kinetic, Coupling::kinetic, Coupling::interaction};
  return m;
}

LatticeModel build_triangular() {
  LatticeModel m;
  m.geometry = {GeometryKind::triangular2d, 3, SubLattice({Site{3, 0, -3}, Site{0, 3, -3}}), 3, "triangular"};
  const SubLattice& lat = m.geometry.sublattice;
  const auto g = hexagon_vertices();
  const Site o = Site::origin(3);
  for (int l = 0; l < 3; ++l) {
    const Site& a = g[2 * l];
    const Site& b = g[2 * l + 1];
    const OpExpr h = spin_summed_hopping(o, a) + spin_summed_hopping(a, b) + spin_summed_hopping(b, o);
    m.decomposition.terms.push_back({h, lat});
    m.decomposition.couplings.push_back(Coupling::kinetic);
  }
  OpExpr h4 = onsite_interaction(o, 1.0);
  for (const Site& s : g) h4 += onsite_interaction(s, 1.0 / 3.0);
  m.decomposition.terms.push_back({h4, lat});
  m.decomposition.couplings.push_back(Coupling::interaction);
  return m;
}

LatticeModel build_model(std::string_view name) {
  if (name == "1d") return build_1d();
  if (name == "square") return build_square();
  if (name == "triangular") return build_triangular();
  throw std::invalid_argument("unknown geometry '" + std::string(name) + "' (expected 1d, square or triangular)");
}

Site rotate_triangular(const Site& s) { return Site{s[2], s[0], s[1]}; }

OpExpr rotate_triangular(const OpExpr& a) {
  std::vector<Term> terms;
  for (const Term& t : a.terms()) {
    Term r{t.coeff, {}};
    for (const Leaf& l : t.factors) {
      const Site i = rotate_triangular(l.i);
      const Site j = rotate_triangular(l.j);
      switch (l.kind) {
        case LeafKind::hopping:
          r.factors.push_back(OpExpr::hopping(i, j, l.spin).terms()[0].factors[0]);
          break;
        case LeafKind::antisymm_hopping: {
          const OpExpr g = OpExpr::antisymm_hopping(i, j, l.spin);
          r.coeff *= g.terms()[0].coeff;
          r.factors.push_back(g.terms()[0].factors[0]);
          break;
        }
        case LeafKind::number:
          r.factors.push_back(l);
          r.factors.back().i = i;
          r.factors.back().j = i;
          break;
      }
    }
    terms.push_back(std::move(r));
  }
  return OpExpr::from_terms(std::move(terms));
}

namespace {

// Re-expresses a translated copy with torus coordinates; hopping endpoints
// that wrap keep their orientation via the canonical constructors.
OpExpr wrap_expr(const OpExpr& a, const Geometry& geo, const std::vector<int>& extents) {
  std::vector<OpExpr> terms;
  OpExpr out;
  for (const Term& t : a.terms()) {
    std::vector<OpExpr> factors;
    for (const Leaf& l : t.factors) {
      const Site i = geo.wrap(l.i, extents);
      const Site j = geo.wrap(l.j, extents);
      switch (l.kind) {
        case LeafKind::hopping:
          factors.push_back(OpExpr::hopping(i, j, l.spin));
          break;
        case LeafKind::antisymm_hopping:
          factors.push_back(OpExpr::antisymm_hopping(i, j, l.spin));
          break;
        case LeafKind::number:
          factors.push_back(OpExpr::number(i, l.spin));
          break;
      }
    }
    out += t.coeff * OpExpr::product(factors);
  }
  return out;
}

}  // namespace

std::vector<OpExpr> realize_on_torus(const LatticeModel& model, const std::vector<int>& extents, double v, double u) {
  const Geometry& geo = model.geometry;
  geo.check_extents(extents);
  std::vector<Site> cells;
  for (const Site& s : geo.torus_sites(extents)) {
    if (geo.sublattice.contains(s)) cells.push_back(s);
  }
  std::vector<OpExpr> out;
  for (int gamma = 0; gamma < model.decomposition.size(); ++gamma) {
    const TranslatedOperator h = model.decomposition.scaled(gamma, v, u);
    std::vector<Term> acc;
    for (const Site& c : cells) {
      const OpExpr copy = wrap_expr(translate(h.local, c), geo, extents);
      acc.insert(acc.end(), copy.terms().begin(), copy.terms().end());
    }
    out.push_back(OpExpr::from_terms(std::move(acc)));
  }
  return out;
}

OpExpr hubbard_on_torus(const Geometry& geometry, const std::vector<int>& extents, double v, double u) {
  geometry.check_extents(extents);
  std::vector<Term> acc;
  for (const Site& s : geometry.torus_sites(extents)) {
    for (const Site& d : geometry.bond_directions()) {
      const OpExpr h = v * spin_summed_hopping(s, geometry.wrap(s + d, extents));
      acc.insert(acc.end(), h.terms().begin(), h.terms().end());
    }
    const OpExpr n = u * onsite_interaction(s, 1.0);
    acc.insert(acc.end(), n.terms().begin(), n.terms().end());
  }
  return OpExpr::from_terms(std::move(acc));
}

}  // namespace fhb
