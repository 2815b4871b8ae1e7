#include "fhb/norm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>

namespace fhb {

ModeIndex::ModeIndex(std::vector<Mode> modes) : modes_(std::move(modes)) {
  std::sort(modes_.begin(), modes_.end());
  modes_.erase(std::unique(modes_.begin(), modes_.end()), modes_.end());
}

int ModeIndex::index_of(const Mode& m) const {
  auto it = std::lower_bound(modes_.begin(), modes_.end(), m);
  if (it == modes_.end() || !(*it == m)) return -1;
  return static_cast<int>(it - modes_.begin());
}

bool ModeIndex::covers(const OpExpr& a) const {
  for (const Mode& m : a.support()) {
    if (index_of(m) < 0) return false;
  }
  return true;
}

namespace {

// Compiled leaf: mode indices of the two endpoints and the relative sign of
// the reverse hop (+1 hopping, -1 antisymmetric, 0 number).
struct CompiledLeaf {
  int p;
  int q;
  int reverse_sign;
};

struct CompiledTerm {
  double coeff;
  std::vector<CompiledLeaf> factors;
};

std::vector<CompiledTerm> compile(const OpExpr& a, const ModeIndex& modes) {
  std::vector<CompiledTerm> out;
  out.reserve(a.size());
  for (const Term& t : a.terms()) {
    CompiledTerm ct{t.coeff, {}};
    for (const Leaf& l : t.factors) {
      const int p = modes.index_of({l.i, l.spin});
      const int q = modes.index_of({l.j, l.spin});
      if (p < 0 || q < 0) throw std::invalid_argument("mode index does not cover the operator support");
      int rs = 0;
      if (l.kind == LeafKind::hopping) rs = 1;
      if (l.kind == LeafKind::antisymm_hopping) rs = -1;
      ct.factors.push_back({p, q, rs});
    }
    out.push_back(std::move(ct));
  }
  return out;
}

// a+_p a_q |state>; returns false if annihilated.
inline bool hop(int p, int q, std::uint32_t& state, double& amp) {
  const std::uint32_t bq = 1u << q;
  if (!(state & bq)) return false;
  if (std::popcount(state & (bq - 1)) & 1) amp = -amp;
  state ^= bq;
  const std::uint32_t bp = 1u << p;
  if (state & bp) return false;
  if (std::popcount(state & (bp - 1)) & 1) amp = -amp;
  state |= bp;
  return true;
}

template <typename Emit>
void apply_factors(const std::vector<CompiledLeaf>& f, int k, std::uint32_t state, double amp, Emit&& emit) {
  if (k < 0) {
    emit(state, amp);
    return;
  }
  const CompiledLeaf& l = f[static_cast<std::size_t>(k)];
  if (l.reverse_sign == 0) {
    if (state & (1u << l.p)) apply_factors(f, k - 1, state, amp, emit);
    return;
  }
  std::uint32_t s1 = state;
  double a1 = amp;
  if (hop(l.p, l.q, s1, a1)) apply_factors(f, k - 1, s1, a1, emit);
  std::uint32_t s2 = state;
  double a2 = amp * l.reverse_sign;
  if (hop(l.q, l.p, s2, a2)) apply_factors(f, k - 1, s2, a2, emit);
}

template <typename Emit>
void apply_expr(const std::vector<CompiledTerm>& terms, std::uint32_t state, Emit&& emit) {
  for (const CompiledTerm& t : terms) {
    apply_factors(t.factors, static_cast<int>(t.factors.size()) - 1, state, t.coeff, emit);
  }
}

}  // namespace

Eigen::MatrixXd to_matrix(const OpExpr& a, const ModeIndex& modes) {
  const int m = modes.size();
  if (m > 14) throw std::invalid_argument("to_matrix: too many modes for a dense matrix");
  const auto terms = compile(a, modes);
  const std::size_t dim = std::size_t{1} << m;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint32_t s = 0; s < dim; ++s) {
    apply_expr(terms, s, [&](std::uint32_t t, double amp) { out(t, s) += amp; });
  }
  return out;
}

Eigen::MatrixXd annihilation_matrix(int k, int m) {
  const std::size_t dim = std::size_t{1} << m;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const std::uint32_t bk = 1u << k;
  for (std::uint32_t s = 0; s < dim; ++s) {
    if (!(s & bk)) continue;
    const double sign = (std::popcount(s & (bk - 1)) & 1) ? -1.0 : 1.0;
    out(s ^ bk, s) = sign;
  }
  return out;
}

std::vector<SectorBlock> sector_blocks(const OpExpr& a, const ModeIndex& modes) {
  const int m = modes.size();
  if (m > 24) throw std::invalid_argument("sector_blocks: too many modes");
  std::uint32_t up_mask = 0;
  for (int k = 0; k < m; ++k) {
    if (modes.modes()[static_cast<std::size_t>(k)].spin == Spin::up) up_mask |= 1u << k;
  }
  const std::uint32_t all = (m == 32) ? ~0u : ((1u << m) - 1);
  const std::uint32_t dn_mask = all & ~up_mask;
  const int n_up_modes = std::popcount(up_mask);
  const int n_dn_modes = std::popcount(dn_mask);

  std::vector<SectorBlock> blocks;
  std::vector<int> block_of((n_up_modes + 1) * (n_dn_modes + 1), -1);
  std::vector<std::int32_t> position(std::size_t{1} << m);
  for (std::uint32_t s = 0; s <= all; ++s) {
    const int nu = std::popcount(s & up_mask);
    const int nd = std::popcount(s & dn_mask);
    int& b = block_of[static_cast<std::size_t>(nu * (n_dn_modes + 1) + nd)];
    if (b < 0) {
      b = static_cast<int>(blocks.size());
      blocks.push_back({nu, nd, {}, {}});
    }
    position[s] = static_cast<std::int32_t>(blocks[static_cast<std::size_t>(b)].states.size());
    blocks[static_cast<std::size_t>(b)].states.push_back(s);
    if (s == all) break;
  }
  const auto terms = compile(a, modes);
  for (SectorBlock& blk : blocks) {
    const auto n = static_cast<Eigen::Index>(blk.states.size());
    blk.matrix = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
      const std::uint32_t s = blk.states[static_cast<std::size_t>(col)];
      apply_expr(terms, s, [&](std::uint32_t t, double amp) {
        if (std::popcount(t & up_mask) != blk.n_up || std::popcount(t & dn_mask) != blk.n_down) {
          throw std::logic_error("operator does not conserve particle number per spin");
        }
        blk.matrix(position[t], col) += amp;
      });
    }
  }
  return blocks;
}

namespace {

double dense_norm(const Eigen::MatrixXd& m, bool symmetric) {
  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  }
  const Eigen::MatrixXd g = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Largest |eigenvalue| of the symmetric operator x -> apply(x) by Lanczos with
// full reorthogonalization. An exhausted Krylov space from a generic start vector holds every
// distinct eigenvalue. Empty when neither that nor the residual test occurs.
template <class Apply>
std::optional<double> lanczos_extreme(Eigen::Index n, Apply apply, double scale) {
  const Eigen::Index max_steps = std::min<Eigen::Index>(n, 160);
  Eigen::MatrixXd q(n, max_steps + 1);
  std::vector<double> alpha, beta;
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  q.col(0) = v.normalized();
  for (Eigen::Index k = 0; k < max_steps; ++k) {
    Eigen::VectorXd w = apply(q.col(k));
    alpha.push_back(q.col(k).dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd proj = q.leftCols(k + 1).transpose() * w;
      w.noalias() -= q.leftCols(k + 1) * proj;
    }
    const double b = w.norm();
    const Eigen::Index m = k + 1;
    const bool breakdown = b <= 1e-12 * scale;
    if (!breakdown && m % 6 != 0 && m != max_steps) {
      beta.push_back(b);
      q.col(k + 1) = w / b;
      continue;
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::Index top = std::abs(es.eigenvalues()(0)) > std::abs(es.eigenvalues()(m - 1)) ? 0 : m - 1;
    const double theta = std::abs(es.eigenvalues()(top));
    const double residual = b * std::abs(es.eigenvectors()(m - 1, top));
    if (breakdown) return theta;
    if (m >= 8 && residual <= 1e-11 * std::max(theta, scale)) return theta;
    beta.push_back(b);
    q.col(k + 1) = w / b;
  }
  return std::nullopt;
}

}  // namespace

double matrix_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  const bool symmetric = m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * scale;
  if (m.rows() < 256) return dense_norm(m, symmetric);
  const Eigen::SparseMatrix<double> sp = m.sparseView();
  const Eigen::SparseMatrix<double> spt = sp.transpose();
  std::optional<double> r;
  if (symmetric) {
    r = lanczos_extreme(m.cols(), [&](const auto& x) -> Eigen::VectorXd { return sp * x; }, scale);
  } else {
    r = lanczos_extreme(m.cols(), [&](const auto& x) -> Eigen::VectorXd { return spt * (sp * x); },
                        scale * scale);
    if (r) r = std::sqrt(*r);
  }
  return r ? *r : dense_norm(m, symmetric);
}

NormResult spectral_norm_exact(const OpExpr& a, const NormOptions& opts) {
  if (a.is_zero()) return {0.0, true, NormMethod::dense_block};
  const ModeIndex modes = ModeIndex::covering(a);
  if (modes.size() > opts.max_modes) {
    throw UnsupportedNorm("operator acts on " + std::to_string(modes.size()) + " modes, dense limit is " +
                          std::to_string(opts.max_modes));
  }
  double best = 0.0;
  for (const SectorBlock& b : sector_blocks(a, modes)) best = std::max(best, matrix_norm(b.matrix));
  return {best, true, NormMethod::dense_block};
}

NormResult spectral_norm_quadratic(const OpExpr& a) {
  if (a.is_zero()) return {0.0, true, NormMethod::quadratic};
  if (!a.is_quadratic()) throw std::invalid_argument("spectral_norm_quadratic: operator is not quadratic");
  const ModeIndex modes = ModeIndex::covering(a);
  const int m = modes.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  for (const Term& t : a.terms()) {
    const Leaf& l = t.factors.front();
    const int p = modes.index_of({l.i, l.spin});
    const int q = modes.index_of({l.j, l.spin});
    switch (l.kind) {
      case LeafKind::number:
        h(p, p) += t.coeff;
        break;
      case LeafKind::hopping:
        h(p, q) += t.coeff;
        h(q, p) += t.coeff;
        break;
      case LeafKind::antisymm_hopping:
        h(p, q) += t.coeff;
        h(q, p) -= t.coeff;
        break;
    }
  }
  const double scale = h.cwiseAbs().maxCoeff();
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  const double sym = (h + h.transpose()).cwiseAbs().maxCoeff();
  if (asym <= 1e-13 * scale) {
    // Hermitian: extreme many-body eigenvalues fill all positive or all negative levels.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    double pos = 0.0, neg = 0.0;
    for (double e : es.eigenvalues()) (e > 0 ? pos : neg) += e;
    return {std::max(pos, -neg), true, NormMethod::quadratic};
  }
  if (sym <= 1e-13 * scale) {
    // Anti-Hermitian: i*h is Hermitian with spectrum symmetric about zero.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.transpose() * h, Eigen::EigenvaluesOnly);
    double total = 0.0;
    for (double e : es.eigenvalues()) total += std::sqrt(std::max(0.0, e));
    return {0.5 * total, true, NormMethod::quadratic};
  }
  throw UnsupportedNorm("quadratic operator is neither Hermitian nor anti-Hermitian");
}

namespace {

// Quadratic operators that are neither Hermitian nor anti-Hermitian have no
// single-particle shortcut; small ones are realized densely instead.
bool quadratic_dense_fallback(const OpExpr& a, const NormOptions& opts) {
  bool has_h = false, has_g = false;
  for (const Term& t : a.terms()) {
    const LeafKind k = t.factors.front().kind;
    has_h = has_h || k != LeafKind::antisymm_hopping;
    has_g = has_g || k == LeafKind::antisymm_hopping;
  }
  return has_h && has_g && static_cast<int>(a.support().size()) <= opts.max_modes;
}

std::vector<Mode> term_modes(const Term& t) {
  std::vector<Mode> modes;
  for (const Leaf& l : t.factors) {
    modes.push_back({l.i, l.spin});
    modes.push_back({l.j, l.spin});
  }
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  return modes;
}

std::size_t mode_count(const std::vector<std::size_t>& idx, const std::vector<std::vector<Mode>>& supp) {
  std::vector<Mode> all;
  for (std::size_t k : idx) all.insert(all.end(), supp[k].begin(), supp[k].end());
  std::sort(all.begin(), all.end());
  return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
}

std::vector<std::vector<std::size_t>> components(const std::vector<std::size_t>& idx,
                                                 const std::vector<std::vector<Mode>>& supp) {
  std::vector<std::size_t> parent(idx.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<Mode, std::size_t> owner;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    for (const Mode& m : supp[idx[k]]) {
      auto [it, fresh] = owner.emplace(m, k);
      if (!fresh) parent[find(k)] = find(it->second);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < idx.size(); ++k) groups[find(k)].push_back(idx[k]);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, g] : groups) out.push_back(std::move(g));
  return out;
}

bool all_quadratic(const OpExpr& a, const std::vector<std::size_t>& idx) {
  return std::all_of(idx.begin(), idx.end(), [&](std::size_t k) { return a.terms()[k].factors.size() == 1; });
}

}  // namespace

std::vector<std::vector<std::size_t>> cluster_terms(const OpExpr& a, int max_modes) {
  std::vector<std::vector<Mode>> supp;
  supp.reserve(a.size());
  for (const Term& t : a.terms()) supp.push_back(term_modes(t));

  for (std::size_t k = 0; k < a.size(); ++k) {
    if (supp[k].size() > static_cast<std::size_t>(max_modes) && a.terms()[k].factors.size() > 1) {
      throw UnsupportedNorm("single non-quadratic term acts on more than " + std::to_string(max_modes) + " modes");
    }
  }
  std::vector<std::size_t> all(a.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<std::size_t>> pending = components(all, supp);
  std::vector<std::vector<std::size_t>> out;
  while (!pending.empty()) {
    std::vector<std::size_t> comp = std::move(pending.back());
    pending.pop_back();
    if (mode_count(comp, supp) <= static_cast<std::size_t>(max_modes) || all_quadratic(a, comp)) {
      out.push_back(std::move(comp));
      continue;
    }
    if (comp.size() == 1) {
      throw UnsupportedNorm("single non-quadratic term acts on more than " + std::to_string(max_modes) + " modes");
    }
    // Peel off terms until the rest fits; peeled terms are clustered again.
    std::vector<std::size_t> removed;
    std::map<Mode, int> multiplicity;
    for (std::size_t k : comp) {
      for (const Mode& m : supp[k]) ++multiplicity[m];
    }
    while (comp.size() > 1 && multiplicity.size() > static_cast<std::size_t>(max_modes)) {
      std::size_t best = 0;
      std::size_t best_freed = 0;
      for (std::size_t k = 0; k < comp.size(); ++k) {
        std::size_t freed = 0;
        for (const Mode& m : supp[comp[k]]) freed += multiplicity[m] == 1 ? 1 : 0;
        if (k == 0 || freed > best_freed) {
          best_freed = freed;
          best = k;
        }
      }
      for (const Mode& m : supp[comp[best]]) {
        if (--multiplicity[m] == 0) multiplicity.erase(m);
      }
      removed.push_back(comp[best]);
      comp.erase(comp.begin() + static_cast<std::ptrdiff_t>(best));
    }
    for (auto& g : components(comp, supp)) out.push_back(std::move(g));
    for (auto& g : components(removed, supp)) pending.push_back(std::move(g));
  }
  for (auto& g : out) std::sort(g.begin(), g.end());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

OpExpr subset(const OpExpr& a, const std::vector<std::size_t>& idx) {
  std::vector<Term> terms;
  terms.reserve(idx.size());
  for (std::size_t k : idx) terms.push_back(a.terms()[k]);
  return OpExpr::from_terms(std::move(terms));
}

NormResult cluster_norm(const OpExpr& part, const NormOptions& opts) {
  if (part.is_quadratic() && !quadratic_dense_fallback(part, opts)) return spectral_norm_quadratic(part);
  return spectral_norm_exact(part, opts);
}

}  // namespace

NormResult spectral_norm_clustered(const OpExpr& a, const NormOptions& opts) {
  NormResult out{0.0, false, NormMethod::clustered};
  for (const auto& idx : cluster_terms(a, opts.max_modes)) out.value += cluster_norm(subset(a, idx), opts).value;
  return out;
}

NormResult spectral_norm(const OpExpr& a, const NormOptions& opts) {
  if (a.is_zero()) return {0.0, true, NormMethod::dense_block};
  if (a.is_quadratic() && !quadratic_dense_fallback(a, opts)) return spectral_norm_quadratic(a);
  if (static_cast<int>(a.support().size()) <= opts.max_modes) return spectral_norm_exact(a, opts);
  return spectral_norm_clustered(a, opts);
}

namespace {

Term shifted(const Term& t, const Site& d) {
  Term out{t.coeff, {}};
  out.factors.reserve(t.factors.size());
  for (const Leaf& l : t.factors) out.factors.push_back(translate(l, d));
  return out;
}

std::vector<Site> term_sites(const Term& t) {
  std::vector<Site> sites;
  for (const Leaf& l : t.factors) {
    sites.push_back(l.i);
    sites.push_back(l.j);
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

double centroid_distance(const std::vector<Site>& sites) {
  double c[kMaxDim] = {};
  for (const Site& s : sites) {
    for (int k = 0; k < s.dim; ++k) c[k] += s[k];
  }
  double d = 0.0;
  for (double v : c) d += (v / static_cast<double>(sites.size())) * (v / static_cast<double>(sites.size()));
  return d;
}

std::size_t shared_sites(const std::vector<Site>& a, const std::vector<Site>& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

struct Box {
  std::array<int, kMaxDim> lo{};
  std::array<int, kMaxDim> hi{};
  int dim = 1;
};

Box bounding_box(const std::vector<Site>& sites) {
  Box b;
  b.dim = sites.front().dim;
  b.lo = sites.front().x;
  b.hi = sites.front().x;
  for (const Site& s : sites) {
    for (int k = 0; k < b.dim; ++k) {
      b.lo[k] = std::min(b.lo[k], s[k]);
      b.hi[k] = std::max(b.hi[k], s[k]);
    }
  }
  return b;
}

Box shifted_box(Box b, const Site& d) {
  for (int k = 0; k < b.dim; ++k) {
    b.lo[k] += d[k];
    b.hi[k] += d[k];
  }
  return b;
}

// Number of lattice sites inside the intersection of two boxes. Three
// coordinates denote the sum-zero triangular embedding.
long box_overlap(const Box& a, const Box& b) {
  std::array<int, kMaxDim> lo{}, hi{};
  for (int k = 0; k < a.dim; ++k) {
    lo[k] = std::max(a.lo[k], b.lo[k]);
    hi[k] = std::min(a.hi[k], b.hi[k]);
    if (lo[k] > hi[k]) return 0;
  }
  if (a.dim < 3) {
    long n = 1;
    for (int k = 0; k < a.dim; ++k) n *= hi[k] - lo[k] + 1;
    return n;
  }
  long n = 0;
  for (int x = lo[0]; x <= hi[0]; ++x) {
    for (int y = lo[1]; y <= hi[1]; ++y) {
      const int z = -x - y;
      if (z < lo[2] || z > hi[2]) continue;
      if (((x - y) % 3 + 3) % 3 == 0) ++n;
    }
  }
  return n;
}

}  // namespace

OpExpr telescoped_representative(const TranslatedOperator& op, const NormOptions& opts) {
  if (op.is_zero() || opts.placement == Placement::folded) return op.local;
  const std::vector<Site> shifts = op.lattice.window(opts.shift_window);
  std::vector<Term> placed;
  placed.reserve(op.local.size());

  if (opts.placement == Placement::centered) {
    for (const Term& t : op.local.terms()) {
      const Site base = Site::origin(op.lattice.dim()) - canonical_shift(t, op.lattice);
      Site best = base;
      double best_d = centroid_distance(term_sites(shifted(t, base)));
      for (const Site& l : shifts) {
        const double d = centroid_distance(term_sites(shifted(t, base + l)));
        if (d < best_d - 1e-9) {
          best_d = d;
          best = base + l;
        }
      }
      placed.push_back(shifted(t, best));
    }
    return OpExpr::from_terms(std::move(placed));
  }

  if (opts.placement == Placement::box) {
    NormOptions start = opts;
    start.placement = Placement::centered;
    const OpExpr init = telescoped_representative(op, start);
    std::vector<Term> terms(init.terms().begin(), init.terms().end());
    std::vector<Box> boxes;
    std::vector<double> dist;
    for (const Term& t : terms) {
      const auto sites = term_sites(t);
      boxes.push_back(bounding_box(sites));
      dist.push_back(centroid_distance(sites));
    }
    auto score = [&](std::size_t k, const Box& b) {
      long total = 0;
      for (std::size_t l = 0; l < terms.size(); ++l) {
        if (l != k) total += box_overlap(b, boxes[l]);
      }
      return total;
    };
    for (int sweep = 0; sweep < 20; ++sweep) {
      bool changed = false;
      for (std::size_t k = 0; k < terms.size(); ++k) {
        long best = score(k, boxes[k]);
        Site best_shift = Site::origin(op.lattice.dim());
        double best_d = dist[k];
        for (const Site& l : shifts) {
          if (l == Site::origin(op.lattice.dim())) continue;
          const Box b = shifted_box(boxes[k], l);
          const long sc = score(k, b);
          const double d = centroid_distance(term_sites(shifted(terms[k], l)));
          if (sc > best || (sc == best && d < best_d - 1e-9)) {
            best = sc;
            best_d = d;
            best_shift = l;
          }
        }
        if (!(best_shift == Site::origin(op.lattice.dim()))) {
          terms[k] = shifted(terms[k], best_shift);
          boxes[k] = shifted_box(boxes[k], best_shift);
          dist[k] = best_d;
          changed = true;
        }
      }
      if (!changed) break;
    }
    return OpExpr::from_terms(std::move(terms));
  }

  // Greedy overlap: largest terms first, each moved to share as many sites as
  // possible with the terms already placed.
  std::vector<std::size_t> order(op.local.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return term_sites(op.local.terms()[a]).size() > term_sites(op.local.terms()[b]).size();
  });
  std::vector<Site> occupied;
  for (std::size_t idx : order) {
    const Term& t = op.local.terms()[idx];
    Site best = Site::origin(op.lattice.dim());
    std::size_t best_overlap = 0;
    double best_d = centroid_distance(term_sites(t));
    for (const Site& l : shifts) {
      const auto sites = term_sites(shifted(t, l));
      const std::size_t ov = shared_sites(sites, occupied);
      const double d = centroid_distance(sites);
      if (ov > best_overlap || (ov == best_overlap && d < best_d - 1e-9)) {
        best_overlap = ov;
        best_d = d;
        best = l;
      }
    }
    Term moved = shifted(t, best);
    const auto sites = term_sites(moved);
    occupied.insert(occupied.end(), sites.begin(), sites.end());
    std::sort(occupied.begin(), occupied.end());
    occupied.erase(std::unique(occupied.begin(), occupied.end()), occupied.end());
    placed.push_back(std::move(moved));
  }
  return OpExpr::from_terms(std::move(placed));
}

NormResult per_site_norm(const TranslatedOperator& op, const Geometry& geometry, const NormOptions& opts) {
  NormResult r = spectral_norm(telescoped_representative(op, opts), opts);
  r.value /= geometry.site_ratio;
  return r;
}

NormResult NormCache::get_or_compute(const OpExpr& a, const NormOptions& opts) {
  const std::size_t h = a.hash();
  {
    std::lock_guard lock(mutex_);
    auto [lo, hi] = entries_.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (it->second.expr == a) return it->second.result;
    }
  }
  NormResult r = spectral_norm(a, opts);
  std::lock_guard lock(mutex_);
  entries_.emplace(h, Entry{a, r});
  return r;
}

std::size_t NormCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace fhb
