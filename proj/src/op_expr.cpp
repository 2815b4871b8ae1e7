#include "fhb/op_expr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

namespace fhb {

std::string to_string(const Site& s) {
  std::string out;
  if (s.dim > 1) out += '(';
  for (int k = 0; k < s.dim; ++k) {
    if (k) out += ',';
    out += std::to_string(s.x[k]);
  }
  if (s.dim > 1) out += ')';
  return out;
}

std::string to_string(Spin s) { return s == Spin::up ? "up" : "dn"; }

std::string to_string(const Leaf& leaf) {
  std::string out;
  switch (leaf.kind) {
    case LeafKind::hopping:
      out = "h[" + to_string(leaf.i) + "," + to_string(leaf.j);
      break;
    case LeafKind::antisymm_hopping:
      out = "g[" + to_string(leaf.i) + "," + to_string(leaf.j);
      break;
    case LeafKind::number:
      out = "n[" + to_string(leaf.i);
      break;
  }
  return out + ";" + to_string(leaf.spin) + "]";
}

bool trivially_commute(const Leaf& a, const Leaf& b) {
  if (a.spin != b.spin) return true;
  if (a.kind == LeafKind::number && b.kind == LeafKind::number) return true;
  if (!a.touches(b.i) && !a.touches(b.j)) return true;
  return a == b;
}

std::vector<Leaf> canonical_factors(std::vector<Leaf> f) {
  const std::size_t n = f.size();
  if (n < 2) return f;
  std::vector<Leaf> out;
  out.reserve(n);
  std::vector<char> used(n, 0);
  for (;;) {
    out.clear();
    std::fill(used.begin(), used.end(), 0);
    for (std::size_t step = 0; step < f.size(); ++step) {
      std::size_t best = f.size();
      for (std::size_t k = 0; k < f.size(); ++k) {
        if (used[k]) continue;
        bool free = true;
        for (std::size_t l = 0; l < k && free; ++l) {
          if (!used[l] && !trivially_commute(f[l], f[k])) free = false;
        }
        if (free && (best == f.size() || f[k] < f[best])) best = k;
      }
      used[best] = 1;
      out.push_back(f[best]);
    }
    std::vector<Leaf> collapsed;
    collapsed.reserve(out.size());
    for (const Leaf& x : out) {
      if (x.kind == LeafKind::number && !collapsed.empty() && collapsed.back() == x) continue;
      collapsed.push_back(x);
    }
    if (collapsed.size() == out.size()) return out;
    f = std::move(collapsed);
    used.resize(f.size());
  }
}

namespace {

bool factors_less(const std::vector<Leaf>& a, const std::vector<Leaf>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Leaf make_leaf(LeafKind kind, const Site& i, const Site& j, Spin s) {
  Leaf l;
  l.kind = kind;
  l.i = i;
  l.j = j;
  l.spin = s;
  return l;
}

// Single-particle matrix entry c * E_pq, i.e. c * a+_p a_q.
struct Entry {
  Site p;
  Site q;
  double c;
};

int leaf_entries(const Leaf& l, std::array<Entry, 2>& out) {
  switch (l.kind) {
    case LeafKind::hopping:
      out[0] = {l.i, l.j, 1.0};
      out[1] = {l.j, l.i, 1.0};
      return 2;
    case LeafKind::antisymm_hopping:
      out[0] = {l.i, l.j, 1.0};
      out[1] = {l.j, l.i, -1.0};
      return 2;
    case LeafKind::number:
      out[0] = {l.i, l.i, 1.0};
      return 1;
  }
  return 0;
}

// [a, b] for unit leaves of equal spin, as weighted unit leaves.
// Uses [E_pq, E_rs] = delta_qr E_ps - delta_sp E_rq.
void leaf_commutator(const Leaf& a, const Leaf& b, std::vector<std::pair<double, Leaf>>& out) {
  out.clear();
  if (trivially_commute(a, b)) return;
  std::array<Entry, 2> ea{}, eb{};
  const int na = leaf_entries(a, ea);
  const int nb = leaf_entries(b, eb);
  std::array<Entry, 8> acc{};
  int nacc = 0;
  auto add = [&](const Site& p, const Site& q, double c) {
    for (int k = 0; k < nacc; ++k) {
      if (acc[k].p == p && acc[k].q == q) {
        acc[k].c += c;
        return;
      }
    }
    acc[nacc++] = {p, q, c};
  };
  for (int x = 0; x < na; ++x) {
    for (int y = 0; y < nb; ++y) {
      const Entry& u = ea[x];
      const Entry& v = eb[y];
      if (u.q == v.p) add(u.p, v.q, u.c * v.c);
      if (v.q == u.p) add(v.p, u.q, -u.c * v.c);
    }
  }
  std::array<char, 8> done{};
  for (int k = 0; k < nacc; ++k) {
    if (done[k]) continue;
    done[k] = 1;
    const Entry& e = acc[k];
    if (e.p == e.q) {
      if (std::abs(e.c) > kDropTolerance) out.emplace_back(e.c, make_leaf(LeafKind::number, e.p, e.p, a.spin));
      continue;
    }
    double c_pq = e.c;
    double c_qp = 0.0;
    for (int m = k + 1; m < nacc; ++m) {
      if (!done[m] && acc[m].p == e.q && acc[m].q == e.p) {
        c_qp += acc[m].c;
        done[m] = 1;
      }
    }
    Site lo = e.p, hi = e.q;
    if (hi < lo) {
      std::swap(lo, hi);
      std::swap(c_pq, c_qp);
    }
    const double sym = 0.5 * (c_pq + c_qp);
    const double anti = 0.5 * (c_pq - c_qp);
    if (std::abs(sym) > kDropTolerance) out.emplace_back(sym, make_leaf(LeafKind::hopping, lo, hi, a.spin));
    if (std::abs(anti) > kDropTolerance) {
      out.emplace_back(anti, make_leaf(LeafKind::antisymm_hopping, lo, hi, a.spin));
    }
  }
}

std::vector<Mode> term_support(const Term& t) {
  std::vector<Mode> modes;
  for (const Leaf& l : t.factors) {
    modes.push_back({l.i, l.spin});
    if (l.kind != LeafKind::number) modes.push_back({l.j, l.spin});
  }
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  return modes;
}

bool sorted_overlap(const std::vector<Mode>& a, const std::vector<Mode>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

OpExpr OpExpr::hopping(const Site& i, const Site& j, Spin s, double alpha) {
  if (i == j) throw std::invalid_argument("hopping term requires distinct sites");
  if (i.dim != j.dim) throw std::invalid_argument("site dimension mismatch");
  const Site& lo = i < j ? i : j;
  const Site& hi = i < j ? j : i;
  return from_terms({Term{alpha, {make_leaf(LeafKind::hopping, lo, hi, s)}}});
}

OpExpr OpExpr::antisymm_hopping(const Site& i, const Site& j, Spin s, double alpha) {
  if (i.dim != j.dim) throw std::invalid_argument("site dimension mismatch");
  if (i == j) return {};
  if (j < i) return from_terms({Term{-alpha, {make_leaf(LeafKind::antisymm_hopping, j, i, s)}}});
  return from_terms({Term{alpha, {make_leaf(LeafKind::antisymm_hopping, i, j, s)}}});
}

OpExpr OpExpr::number(const Site& i, Spin s, double alpha) {
  return from_terms({Term{alpha, {make_leaf(LeafKind::number, i, i, s)}}});
}

OpExpr OpExpr::from_terms(std::vector<Term> terms) {
  for (Term& t : terms) {
    if (t.factors.empty()) throw std::invalid_argument("term without factors");
    t.factors = canonical_factors(std::move(t.factors));
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return factors_less(a.factors, b.factors); });
  OpExpr out;
  out.terms_.reserve(terms.size());
  for (Term& t : terms) {
    if (!out.terms_.empty() && out.terms_.back().factors == t.factors) {
      out.terms_.back().coeff += t.coeff;
    } else {
      if (!out.terms_.empty() && std::abs(out.terms_.back().coeff) < kDropTolerance) out.terms_.pop_back();
      out.terms_.push_back(std::move(t));
    }
  }
  if (!out.terms_.empty() && std::abs(out.terms_.back().coeff) < kDropTolerance) out.terms_.pop_back();
  return out;
}

OpExpr OpExpr::product(std::span<const OpExpr> factors) {
  if (factors.empty()) throw std::invalid_argument("empty product");
  std::vector<Term> acc(factors[0].terms_.begin(), factors[0].terms_.end());
  for (std::size_t k = 1; k < factors.size(); ++k) {
    std::vector<Term> next;
    next.reserve(acc.size() * factors[k].terms_.size());
    for (const Term& a : acc) {
      for (const Term& b : factors[k].terms_) {
        Term t{a.coeff * b.coeff, a.factors};
        t.factors.insert(t.factors.end(), b.factors.begin(), b.factors.end());
        next.push_back(std::move(t));
      }
    }
    acc = std::move(next);
  }
  return from_terms(std::move(acc));
}

OpExpr::Kind OpExpr::kind() const {
  if (terms_.empty()) return Kind::zero;
  if (terms_.size() > 1) return Kind::sum;
  const Term& t = terms_.front();
  if (t.factors.size() > 1) return Kind::product;
  switch (t.factors.front().kind) {
    case LeafKind::hopping:
      return Kind::hopping;
    case LeafKind::antisymm_hopping:
      return Kind::antisymm_hopping;
    case LeafKind::number:
      return Kind::number;
  }
  return Kind::sum;
}

bool OpExpr::is_quadratic() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.factors.size() == 1; });
}

std::vector<Mode> OpExpr::support() const {
  std::vector<Mode> modes;
  for (const Term& t : terms_) {
    for (const Leaf& l : t.factors) {
      modes.push_back({l.i, l.spin});
      if (l.kind != LeafKind::number) modes.push_back({l.j, l.spin});
    }
  }
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  return modes;
}

std::vector<Site> OpExpr::site_support() const {
  std::vector<Site> sites;
  for (const Term& t : terms_) {
    for (const Leaf& l : t.factors) {
      sites.push_back(l.i);
      sites.push_back(l.j);
    }
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

int OpExpr::dim() const { return terms_.empty() ? 0 : terms_.front().factors.front().i.dim; }

OpExpr OpExpr::operator+(const OpExpr& other) const {
  std::vector<Term> all(terms_);
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return from_terms(std::move(all));
}

OpExpr OpExpr::operator-(const OpExpr& other) const { return *this + (-1.0) * other; }

OpExpr operator*(double s, const OpExpr& a) {
  OpExpr out;
  if (std::abs(s) == 0.0) return out;
  out.terms_.reserve(a.terms_.size());
  for (const Term& t : a.terms_) {
    if (std::abs(s * t.coeff) >= kDropTolerance) out.terms_.push_back({s * t.coeff, t.factors});
  }
  return out;
}

OpExpr operator*(const OpExpr& a, const OpExpr& b) {
  const OpExpr fs[2] = {a, b};
  if (a.is_zero() || b.is_zero()) return {};
  return OpExpr::product(fs);
}

bool OpExpr::approx_equal(const OpExpr& other, double tol) const {
  // Terms present on one side only must be negligible.
  auto ia = terms_.begin();
  auto ib = other.terms_.begin();
  while (ia != terms_.end() || ib != other.terms_.end()) {
    if (ib == other.terms_.end() || (ia != terms_.end() && factors_less(ia->factors, ib->factors))) {
      if (std::abs(ia->coeff) > tol) return false;
      ++ia;
    } else if (ia == terms_.end() || factors_less(ib->factors, ia->factors)) {
      if (std::abs(ib->coeff) > tol) return false;
      ++ib;
    } else {
      if (std::abs(ia->coeff - ib->coeff) > tol) return false;
      ++ia;
      ++ib;
    }
  }
  return true;
}

std::size_t OpExpr::hash() const {
  std::size_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
  for (const Term& t : terms_) {
    mix(static_cast<std::size_t>(std::llround(t.coeff * 1e9)));
    for (const Leaf& l : t.factors) {
      mix(static_cast<std::size_t>(l.kind) * 31 + static_cast<std::size_t>(l.spin));
      for (int k = 0; k < kMaxDim; ++k) {
        mix(static_cast<std::size_t>(l.i.x[k] + 1024));
        mix(static_cast<std::size_t>(l.j.x[k] + 1024));
      }
    }
  }
  return h;
}

std::string OpExpr::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  char buf[64];
  bool first = true;
  for (const Term& t : terms_) {
    const double mag = std::abs(t.coeff);
    if (first) {
      if (t.coeff < 0) out += "-";
    } else {
      out += t.coeff < 0 ? " - " : " + ";
    }
    first = false;
    if (std::abs(mag - 1.0) > 1e-12) {
      std::snprintf(buf, sizeof buf, "%.6g ", mag);
      out += buf;
    }
    for (std::size_t k = 0; k < t.factors.size(); ++k) {
      if (k) out += " ";
      out += fhb::to_string(t.factors[k]);
    }
  }
  return out;
}

OpExpr commute_elementary(const Leaf& a, double alpha, const Leaf& b, double beta) {
  std::vector<std::pair<double, Leaf>> raw;
  leaf_commutator(a, b, raw);
  std::vector<Term> terms;
  terms.reserve(raw.size());
  for (auto& [c, leaf] : raw) terms.push_back({alpha * beta * c, {leaf}});
  return OpExpr::from_terms(std::move(terms));
}

OpExpr commute_elementary(const OpExpr& a, const OpExpr& b) {
  if (a.is_zero() || b.is_zero()) return {};
  if (a.size() != 1 || b.size() != 1 || a.terms()[0].factors.size() != 1 || b.terms()[0].factors.size() != 1) {
    throw std::invalid_argument("commute_elementary expects single leaves");
  }
  return commute_elementary(a.terms()[0].factors[0], a.terms()[0].coeff, b.terms()[0].factors[0],
                            b.terms()[0].coeff);
}

OpExpr commutator(const OpExpr& a, const OpExpr& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<std::vector<Mode>> supp_b;
  supp_b.reserve(b.size());
  for (const Term& t : b.terms()) supp_b.push_back(term_support(t));

  std::vector<Term> out;
  std::vector<std::pair<double, Leaf>> leaf_comm;
  for (const Term& ta : a.terms()) {
    const std::vector<Mode> supp_a = term_support(ta);
    for (std::size_t ib = 0; ib < b.size(); ++ib) {
      if (!sorted_overlap(supp_a, supp_b[ib])) continue;
      const Term& tb = b.terms()[ib];
      if (ta.factors == tb.factors) continue;
      // Each pair is expanded with the smaller factor sequence outside.
      const bool swap = tb.factors < ta.factors;
      const auto& P = swap ? tb.factors : ta.factors;
      const auto& Q = swap ? ta.factors : tb.factors;
      const double sign = swap ? -1.0 : 1.0;
      // [P, Q] = sum_k sum_l P[<k] Q[<l] [P_k, Q_l] Q[>l] P[>k]
      for (std::size_t k = 0; k < P.size(); ++k) {
        for (std::size_t l = 0; l < Q.size(); ++l) {
          leaf_commutator(P[k], Q[l], leaf_comm);
          for (auto& [c, leaf] : leaf_comm) {
            Term t;
            t.coeff = sign * ta.coeff * tb.coeff * c;
            t.factors.reserve(P.size() + Q.size() - 1);
            t.factors.insert(t.factors.end(), P.begin(), P.begin() + static_cast<std::ptrdiff_t>(k));
            t.factors.insert(t.factors.end(), Q.begin(), Q.begin() + static_cast<std::ptrdiff_t>(l));
            t.factors.push_back(leaf);
            t.factors.insert(t.factors.end(), Q.begin() + static_cast<std::ptrdiff_t>(l) + 1, Q.end());
            t.factors.insert(t.factors.end(), P.begin() + static_cast<std::ptrdiff_t>(k) + 1, P.end());
            out.push_back(std::move(t));
          }
        }
      }
    }
  }
  return OpExpr::from_terms(std::move(out));
}

Leaf translate(const Leaf& a, const Site& d) {
  Leaf out = a;
  out.i = a.i + d;
  out.j = a.j + d;
  return out;
}

OpExpr translate(const OpExpr& a, const Site& d) {
  if (!a.is_zero() && a.dim() != d.dim) throw std::invalid_argument("translation dimension mismatch");
  std::vector<Term> terms;
  terms.reserve(a.size());
  for (const Term& t : a.terms()) {
    Term s{t.coeff, {}};
    s.factors.reserve(t.factors.size());
    for (const Leaf& l : t.factors) s.factors.push_back(translate(l, d));
    terms.push_back(std::move(s));
  }
  return OpExpr::from_terms(std::move(terms));
}

}  // namespace fhb
