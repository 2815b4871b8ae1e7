#include "fhb/product_formula.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fhb {

void ProductFormula::check_consistency(double tol) const {
  std::vector<double> total(static_cast<std::size_t>(term_count), 0.0);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const Factor& f = factors[k];
    if (f.gamma < 0 || f.gamma >= term_count) throw std::invalid_argument(name + ": term index out of range");
    if (k > 0 && factors[k - 1].gamma == f.gamma) throw std::invalid_argument(name + ": unmerged neighbouring factors");
    total[static_cast<std::size_t>(f.gamma)] += f.coeff;
  }
  for (int g = 0; g < term_count; ++g) {
    const double err = std::abs(total[static_cast<std::size_t>(g)] - 1.0);
    if (err > tol) {
      std::ostringstream msg;
      msg << name << ": coefficients of term " << g + 1 << " sum to " << total[static_cast<std::size_t>(g)]
          << " instead of 1";
      throw std::invalid_argument(msg.str());
    }
  }
}

std::vector<Factor> merge_factors(std::vector<Factor> factors) {
  std::vector<Factor> out;
  for (Factor& f : factors) {
    if (!out.empty() && out.back().gamma == f.gamma) {
      Factor& last = out.back();
      last.coeff += f.coeff;
      if (last.exact && f.exact) {
        last.exact = *last.exact + *f.exact;
      } else {
        last.exact.reset();
      }
      if (last.exact ? last.exact->numerator() == 0 : last.coeff == 0.0) out.pop_back();
      continue;
    }
    if (f.exact ? f.exact->numerator() == 0 : f.coeff == 0.0) continue;
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

std::vector<Factor> strang_raw(int gamma_count, double scale, std::optional<Rational> exact_scale) {
  std::vector<Factor> out;
  auto half = [&](int g) {
    Factor f{0.5 * scale, g, std::nullopt};
    if (exact_scale) f.exact = Rational(1, 2) * *exact_scale;
    out.push_back(f);
  };
  for (int g = 0; g < gamma_count; ++g) half(g);
  for (int g = gamma_count - 1; g >= 0; --g) half(g);
  return out;
}

std::vector<Factor> suzuki_raw(int k, int gamma_count, double scale) {
  if (k == 1) return strang_raw(gamma_count, scale, std::nullopt);
  const double uk = 1.0 / (4.0 - std::pow(4.0, 1.0 / (2.0 * k - 1.0)));
  const auto outer = suzuki_raw(k - 1, gamma_count, uk * scale);
  const auto middle = suzuki_raw(k - 1, gamma_count, (1.0 - 4.0 * uk) * scale);
  std::vector<Factor> out;
  for (int r = 0; r < 2; ++r) out.insert(out.end(), outer.begin(), outer.end());
  out.insert(out.end(), middle.begin(), middle.end());
  for (int r = 0; r < 2; ++r) out.insert(out.end(), outer.begin(), outer.end());
  return out;
}

}  // namespace

ProductFormula strang(int term_count) {
  if (term_count < 1) throw std::invalid_argument("strang: need at least one term");
  ProductFormula f;
  f.name = "strang";
  f.order = 2;
  f.term_count = term_count;
  f.factors = merge_factors(strang_raw(term_count, 1.0, Rational(1)));
  f.check_consistency();
  return f;
}

ProductFormula suzuki(int order, int term_count) {
  if (order < 2 || order % 2 != 0) throw std::invalid_argument("suzuki: order must be even and at least 2");
  if (term_count < 1) throw std::invalid_argument("suzuki: need at least one term");
  if (order == 2) return strang(term_count);
  ProductFormula f;
  f.name = "suzuki" + std::to_string(order);
  f.order = order;
  f.term_count = term_count;
  f.factors = merge_factors(suzuki_raw(order / 2, term_count, 1.0));
  f.check_consistency(1e-12);
  return f;
}

ProductFormula custom(const CoefficientTable& table, int order, std::string name) {
  if (order < 1) throw std::invalid_argument("custom formula: order must be positive");
  if (table.term_count < 1) throw std::invalid_argument("custom formula: no terms");
  std::vector<Factor> raw;
  for (std::size_t v = 0; v < table.coeffs.size(); ++v) {
    const auto& row = table.coeffs[v];
    if (static_cast<int>(row.size()) != table.term_count) {
      throw std::invalid_argument("custom formula: stage " + std::to_string(v + 1) + " has the wrong column count");
    }
    std::vector<int> perm(row.size());
    for (std::size_t g = 0; g < perm.size(); ++g) perm[g] = static_cast<int>(g);
    if (v < table.permutation.size() && !table.permutation[v].empty()) perm = table.permutation[v];
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t g = 0; g < sorted.size(); ++g) {
      if (sorted[g] != static_cast<int>(g)) throw std::invalid_argument("custom formula: invalid permutation");
    }
    for (int g : perm) {
      Factor f{row[static_cast<std::size_t>(g)], g, std::nullopt};
      if (v < table.exact.size()) f.exact = table.exact[v][static_cast<std::size_t>(g)];
      raw.push_back(f);
    }
  }
  ProductFormula f;
  f.name = std::move(name);
  f.order = order;
  f.term_count = table.term_count;
  f.factors = merge_factors(std::move(raw));
  f.check_consistency(1e-12);
  return f;
}

namespace {

std::pair<double, std::optional<Rational>> parse_number(const std::string& tok) {
  const auto slash = tok.find('/');
  try {
    if (slash != std::string::npos) {
      const std::int64_t num = std::stoll(tok.substr(0, slash));
      const std::int64_t den = std::stoll(tok.substr(slash + 1));
      if (den == 0) throw std::invalid_argument("zero denominator");
      Rational r(num, den);
      return {boost::rational_cast<double>(r), r};
    }
    std::size_t used = 0;
    const double x = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("trailing characters");
    return {x, std::nullopt};
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse number '" + tok + "'");
  }
}

}  // namespace

LoadedFormula load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open formula file " + path.string());
  LoadedFormula out;
  out.name = path.stem().string();
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<std::string> rest;
    for (std::string tok; ls >> tok;) rest.push_back(tok);
    if (key == "terms" || key == "order") {
      if (rest.size() != 1) fail(key + " expects one integer");
      (key == "terms" ? out.table.term_count : out.order) = std::stoi(rest[0]);
    } else if (key == "name") {
      if (rest.size() != 1) fail("name expects one word");
      out.name = rest[0];
    } else if (key == "stage") {
      if (out.table.term_count == 0) fail("'terms' must precede the first stage");
      if (static_cast<int>(rest.size()) != out.table.term_count) fail("stage has the wrong column count");
      std::vector<double> row;
      std::vector<std::optional<Rational>> exact;
      for (const auto& tok : rest) {
        auto [x, r] = parse_number(tok);
        row.push_back(x);
        exact.push_back(r);
      }
      out.table.coeffs.push_back(std::move(row));
      out.table.exact.push_back(std::move(exact));
      out.table.permutation.emplace_back();
    } else if (key == "perm") {
      if (out.table.coeffs.empty()) fail("perm without a preceding stage");
      if (static_cast<int>(rest.size()) != out.table.term_count) fail("perm has the wrong column count");
      std::vector<int> perm;
      for (const auto& tok : rest) perm.push_back(std::stoi(tok) - 1);
      out.table.permutation.back() = std::move(perm);
    } else {
      fail("unknown keyword '" + key + "'");
    }
  }
  if (out.order < 1) throw std::invalid_argument(path.string() + ": missing 'order'");
  if (out.table.coeffs.empty()) throw std::invalid_argument(path.string() + ": no stages");
  return out;
}

ProductFormula formula_by_name(const std::string& name, int term_count) {
  if (name == "strang") return strang(term_count);
  if (name == "suzuki4") return suzuki(4, term_count);
  if (name == "suzuki6") return suzuki(6, term_count);
  if (name.rfind("custom:", 0) == 0) {
    const LoadedFormula lf = load_table(name.substr(7));
    if (lf.table.term_count != term_count) {
      throw std::invalid_argument("formula file is written for " + std::to_string(lf.table.term_count) +
                                  " terms, the geometry has " + std::to_string(term_count));
    }
    return custom(lf.table, lf.order, lf.name);
  }
  throw std::invalid_argument("unknown formula '" + name + "'");
}

namespace {

using CMatrix = Eigen::MatrixXcd;

struct SpectralForm {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
  CMatrix exp(double t) const {
    const Eigen::VectorXcd phase = (values.cast<std::complex<double>>() * std::complex<double>(0.0, -t)).array().exp();
    return vectors.cast<std::complex<double>>() * phase.asDiagonal() * vectors.transpose().cast<std::complex<double>>();
  }
};

SpectralForm diagonalize(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  return {es.eigenvectors(), es.eigenvalues()};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double verify_order(const ProductFormula& f, int trials, double t_lo, double t_hi, int dim, std::uint64_t seed,
                    double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> slopes;
  constexpr int kPoints = 8;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<SpectralForm> terms;
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(dim, dim);
    for (int g = 0; g < f.term_count; ++g) {
      Eigen::MatrixXd m(dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = normal(rng);
      m = scale * 0.5 * (m + m.transpose()) / std::sqrt(static_cast<double>(dim));
      total += m;
      terms.push_back(diagonalize(m));
    }
    const SpectralForm whole = diagonalize(total);
    std::vector<double> lx, ly;
    for (int k = 0; k < kPoints; ++k) {
      const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(k) / (kPoints - 1));
      CMatrix u = CMatrix::Identity(dim, dim);
      for (const Factor& fac : f.factors) u = terms[static_cast<std::size_t>(fac.gamma)].exp(fac.coeff * t) * u;
      const CMatrix diff = u - whole.exp(t);
      const double err = Eigen::JacobiSVD<CMatrix>(diff).singularValues()(0);
      if (err <= 0.0) return 0.0;
      lx.push_back(std::log(t));
      ly.push_back(std::log(err));
    }
    slopes.push_back(fit_slope(lx, ly));
  }
  std::sort(slopes.begin(), slopes.end());
  return slopes[slopes.size() / 2];
}

namespace {

// All vectors of n non-negative integers summing to total, lexicographic.
void compositions(int n, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int q = 0; q <= total; ++q) {
    cur.push_back(q);
    compositions(n, total - q, cur, out);
    cur.pop_back();
  }
}

std::int64_t factorial(int n) {
  std::int64_t r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

std::int64_t multinomial(const std::vector<int>& q) {
  int total = 0;
  std::int64_t denom = 1;
  for (int x : q) {
    total += x;
    denom *= factorial(x);
  }
  return factorial(total) / denom;
}

std::optional<Rational> exact_abs(const Factor& f) {
  if (!f.exact) return std::nullopt;
  return boost::abs(*f.exact);
}

BoundTerm make_term(const ProductFormula& f, const std::vector<int>& factor_idx, const std::vector<int>& q, int target) {
  BoundTerm t;
  t.target = target;
  const Rational base(multinomial(q), factorial(f.order + 1));
  double value = boost::rational_cast<double>(base);
  std::optional<Rational> exact = base;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (q[k] == 0) continue;
    const Factor& fac = f.factors[static_cast<std::size_t>(factor_idx[k])];
    value *= std::pow(std::abs(fac.coeff), q[k]);
    if (exact) {
      if (auto a = exact_abs(fac)) {
        for (int r = 0; r < q[k]; ++r) *exact *= *a;
      } else {
        exact.reset();
      }
    }
    t.chain.push_back({factor_idx[k], q[k]});
  }
  t.prefactor = value;
  t.exact_prefactor = exact;
  return t;
}

}  // namespace

std::vector<BoundTerm> theorem1_terms(const ProductFormula& f, int s) {
  const int K = f.size();
  if (s < 1 || s > K) throw std::invalid_argument("theorem1_terms: split index out of range");
  std::vector<BoundTerm> out;
  std::vector<int> cur;
  // Left part: ad_{A_s}^{q_s} ... ad_{A_j}^{q_j} B_j, q_j != 0.
  for (int j = 2; j <= s; ++j) {
    const int n = s - j + 1;
    std::vector<std::vector<int>> comps;
    compositions(n, f.order, cur, comps);
    for (const auto& c : comps) {
      if (c.front() == 0) continue;
      // c[0] = q_j ... c[n-1] = q_s; chain outermost first is A_s .. A_j.
      std::vector<int> idx, q;
      for (int k = n - 1; k >= 0; --k) {
        idx.push_back(j - 1 + k);
        q.push_back(c[static_cast<std::size_t>(k)]);
      }
      out.push_back(make_term(f, idx, q, j));
    }
  }
  // Right part: ad_{A_{s+1}}^{q_{s+1}} ... ad_{A_j}^{q_j} B_j, q_j != 0.
  for (int j = s + 1; j <= K; ++j) {
    const int n = j - s;
    std::vector<std::vector<int>> comps;
    compositions(n, f.order, cur, comps);
    for (const auto& c : comps) {
      if (c.back() == 0) continue;
      // c[0] = q_{s+1} ... c[n-1] = q_j; outermost first is A_{s+1}.
      std::vector<int> idx, q;
      for (int k = 0; k < n; ++k) {
        idx.push_back(s + k);
        q.push_back(c[static_cast<std::size_t>(k)]);
      }
      out.push_back(make_term(f, idx, q, j));
    }
  }
  return out;
}

std::string CommutatorTuple::to_string() const {
  std::string s;
  for (std::size_t k = 0; k + 1 < gammas.size(); ++k) s += "[H" + std::to_string(gammas[k] + 1) + ",";
  if (!gammas.empty()) s += "H" + std::to_string(gammas.back() + 1);
  s += std::string(gammas.size() > 0 ? gammas.size() - 1 : 0, ']');
  return s;
}

namespace {

void accumulate(std::map<CommutatorTuple, TupleTerm>& acc, CommutatorTuple tuple, double coeff,
                std::optional<Rational> exact) {
  const std::size_t n = tuple.gammas.size();
  if (n >= 2 && tuple.gammas[n - 2] > tuple.gammas[n - 1]) std::swap(tuple.gammas[n - 2], tuple.gammas[n - 1]);
  auto [it, fresh] = acc.try_emplace(tuple, TupleTerm{0.0, Rational(0), tuple});
  it->second.coeff += coeff;
  if (it->second.exact && exact) {
    *it->second.exact += *exact;
  } else {
    it->second.exact.reset();
  }
}

}  // namespace

std::vector<TupleTerm> expand_terms(const ProductFormula& f, const std::vector<BoundTerm>& terms) {
  std::map<CommutatorTuple, TupleTerm> acc;
  for (const BoundTerm& t : terms) {
    std::vector<int> outer;
    for (const ChainLink& l : t.chain) {
      for (int r = 0; r < l.power; ++r) outer.push_back(f.factors[static_cast<std::size_t>(l.factor)].gamma);
    }
    // B_j grouped by term.
    std::map<int, std::pair<double, std::optional<Rational>>> b;
    for (int l = 0; l < t.target - 1; ++l) {
      const Factor& fac = f.factors[static_cast<std::size_t>(l)];
      auto [it, fresh] = b.try_emplace(fac.gamma, 0.0, Rational(0));
      it->second.first += fac.coeff;
      if (it->second.second && fac.exact) {
        *it->second.second += *fac.exact;
      } else {
        it->second.second.reset();
      }
    }
    for (const auto& [gamma, w] : b) {
      if (gamma == outer.back()) continue;
      if (std::abs(w.first) < 1e-15) continue;
      CommutatorTuple tuple{outer};
      tuple.gammas.push_back(gamma);
      std::optional<Rational> exact;
      if (t.exact_prefactor && w.second) exact = *t.exact_prefactor * boost::abs(*w.second);
      accumulate(acc, std::move(tuple), t.prefactor * std::abs(w.first), exact);
    }
  }
  std::vector<TupleTerm> out;
  for (auto& [k, v] : acc) out.push_back(std::move(v));
  return out;
}

std::vector<GroupedStrangTerm> prop10_grouped(int term_count) {
  std::vector<GroupedStrangTerm> out;
  for (int g1 = 0; g1 + 1 < term_count; ++g1) {
    std::vector<int> later;
    for (int g = g1 + 1; g < term_count; ++g) later.push_back(g);
    out.push_back({Rational(1, 12), later, later, g1});
    out.push_back({Rational(1, 24), {g1}, later, g1});
  }
  return out;
}

std::vector<TupleTerm> prop10_terms(int term_count) {
  std::map<CommutatorTuple, TupleTerm> acc;
  for (const GroupedStrangTerm& g : prop10_grouped(term_count)) {
    for (int o : g.outer) {
      for (int m : g.middle) {
        accumulate(acc, CommutatorTuple{{o, m, g.inner}}, boost::rational_cast<double>(g.prefactor), g.prefactor);
      }
    }
  }
  std::vector<TupleTerm> out;
  for (auto& [k, v] : acc) out.push_back(std::move(v));
  return out;
}

}  // namespace fhb
