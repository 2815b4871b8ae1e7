#include "fhb/bound_engine.hpp"

#include "fhb/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace fhb {

bool BoundPolynomial::all_exact() const {
  return std::all_of(breakdown.begin(), breakdown.end(), [](const TermContribution& c) { return c.exact; });
}

TranslatedOperator CommutatorEvaluator::nested(const std::vector<int>& gammas) {
  if (gammas.empty()) throw std::invalid_argument("empty commutator tuple");
  for (int g : gammas) {
    if (g < 0 || g >= model_.decomposition.size()) {
      throw std::invalid_argument("term index H" + std::to_string(g + 1) + " out of range");
    }
  }
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(gammas); it != memo_.end()) return it->second;
  }
  TranslatedOperator result;
  if (gammas.size() == 1) {
    result = model_.decomposition.terms[static_cast<std::size_t>(gammas.front())];
  } else {
    const std::vector<int> rest(gammas.begin() + 1, gammas.end());
    const TranslatedOperator inner = nested(rest);
    result = commute_translated(model_.decomposition.terms[static_cast<std::size_t>(gammas.front())], inner);
  }
  std::lock_guard lock(mutex_);
  memo_.emplace(gammas, result);
  return result;
}

Degree CommutatorEvaluator::degree(const std::vector<int>& gammas) const {
  Degree d;
  for (int g : gammas) d = d + model_.decomposition.degree(g);
  return d;
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FHB_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

struct NormTask {
  std::string label;
  Degree degree;
  double prefactor = 0.0;
  TranslatedOperator op;
  NormResult result;
};

void add_graded(std::vector<NormTask>& tasks, const std::string& label, double prefactor, const GradedOperator& g) {
  for (const auto& [d, local] : g.parts) {
    if (local.is_zero()) continue;
    tasks.push_back({label, d, prefactor, {local, g.lattice}, {}});
  }
}

std::string chain_label(const ProductFormula& f, const BoundTerm& t) {
  std::ostringstream os;
  for (const ChainLink& l : t.chain) {
    os << "ad(A" << l.factor + 1 << "=H" << f.factors[static_cast<std::size_t>(l.factor)].gamma + 1 << ")";
    if (l.power > 1) os << "^" << l.power;
    os << " ";
  }
  os << "B" << t.target;
  return os.str();
}

std::vector<NormTask> build_tasks(CommutatorEvaluator& ev, const ProductFormula& f, const BoundOptions& opts, int s) {
  std::vector<NormTask> tasks;
  const SubLattice& lattice = ev.model().geometry.sublattice;
  if (opts.mode == BoundMode::prop10) {
    if (f.order != 2 || f.name != "strang") throw std::invalid_argument("prop10 mode requires the Strang formula");
    if (opts.grouping == NormGrouping::expanded) {
      for (const TupleTerm& t : prop10_terms(f.term_count)) {
        tasks.push_back({t.tuple.to_string(), ev.degree(t.tuple.gammas), t.coeff, ev.nested(t.tuple.gammas), {}});
      }
    } else {
      for (const GroupedStrangTerm& g : prop10_grouped(f.term_count)) {
        GradedOperator sum;
        sum.lattice = lattice;
        std::ostringstream label;
        label << "prop10 inner=H" << g.inner + 1 << (g.outer.size() == 1 && g.outer[0] == g.inner ? " (self)" : "");
        for (int o : g.outer) {
          for (int m : g.middle) {
            const std::vector<int> tuple{o, m, g.inner};
            sum.add(GradedOperator::homogeneous(ev.nested(tuple), ev.degree(tuple)));
          }
        }
        add_graded(tasks, label.str(), boost::rational_cast<double>(g.prefactor), sum);
      }
    }
    return tasks;
  }

  const std::vector<BoundTerm> terms = theorem1_terms(f, s);
  if (opts.grouping == NormGrouping::expanded) {
    for (const TupleTerm& t : expand_terms(f, terms)) {
      tasks.push_back({t.tuple.to_string(), ev.degree(t.tuple.gammas), t.coeff, ev.nested(t.tuple.gammas), {}});
    }
    return tasks;
  }
  for (const BoundTerm& t : terms) {
    std::vector<int> outer;
    for (const ChainLink& l : t.chain) {
      for (int r = 0; r < l.power; ++r) outer.push_back(f.factors[static_cast<std::size_t>(l.factor)].gamma);
    }
    GradedOperator sum;
    sum.lattice = lattice;
    std::map<int, double> weights;
    for (int l = 0; l < t.target - 1; ++l) {
      weights[f.factors[static_cast<std::size_t>(l)].gamma] += f.factors[static_cast<std::size_t>(l)].coeff;
    }
    for (const auto& [gamma, w] : weights) {
      if (gamma == outer.back() || std::abs(w) < 1e-15) continue;
      std::vector<int> tuple = outer;
      tuple.push_back(gamma);
      sum.add(GradedOperator::homogeneous(ev.nested(tuple), ev.degree(tuple)), w);
    }
    add_graded(tasks, chain_label(f, t), t.prefactor, sum);
  }
  return tasks;
}

}  // namespace

BoundPolynomial evaluate_bound(const LatticeModel& model, const ProductFormula& f, const BoundOptions& opts) {
  if (f.term_count != model.decomposition.size()) {
    throw std::invalid_argument("formula has " + std::to_string(f.term_count) + " terms but the decomposition has " +
                                std::to_string(model.decomposition.size()));
  }
  const int s = opts.s > 0 ? opts.s : default_split(f);
  CommutatorEvaluator ev(model);
  std::vector<NormTask> tasks = build_tasks(ev, f, opts, s);

  NormCache cache;
  const Geometry& geo = model.geometry;
  parallel_for(tasks.size(), worker_count(opts.workers), [&](std::size_t k) {
    NormTask& task = tasks[k];
    const OpExpr rep = telescoped_representative(task.op, opts.norm);
    try {
      task.result = cache.get_or_compute(rep, opts.norm);
    } catch (const UnsupportedNorm& e) {
      throw UnsupportedNorm(task.label + ": " + e.what());
    }
    task.result.value /= geo.site_ratio;
  });

  BoundPolynomial bp;
  bp.t_power = f.order + 1;
  bp.formula = f.name;
  bp.geometry = geo.name;
  bp.mode = opts.mode == BoundMode::prop10 ? "prop10" : "theorem1";
  bp.s = opts.mode == BoundMode::prop10 ? 0 : s;
  for (const NormTask& task : tasks) {
    const double c = task.prefactor * task.result.value;
    if (c > 0.0) bp.coeffs[task.degree] += c;
    bp.breakdown.push_back({task.label, task.degree, task.prefactor, task.result.value, task.result.exact});
  }
  return bp;
}

double evaluate_at(const BoundPolynomial& bp, double t, double v, double u) {
  if (t < 0.0) throw std::invalid_argument("evaluate_at: negative time");
  double sum = 0.0;
  for (const auto& [d, c] : bp.coeffs) sum += c * std::pow(std::abs(v), d.v) * std::pow(std::abs(u), d.u);
  return sum * std::pow(t, bp.t_power);
}

SplitScan scan_split(const LatticeModel& model, const ProductFormula& f, BoundOptions opts, double t, double v,
                     double u) {
  if (opts.mode != BoundMode::theorem1) throw std::invalid_argument("split scan applies to theorem1 mode only");
  SplitScan scan;
  double best = 0.0;
  for (int s = 1; s <= f.size(); ++s) {
    opts.s = s;
    BoundPolynomial bp = evaluate_bound(model, f, opts);
    const double value = evaluate_at(bp, t, v, u);
    scan.values.emplace_back(s, value);
    if (s == 1 || value < best) {
      best = value;
      scan.best_s = s;
      scan.best = std::move(bp);
    }
  }
  return scan;
}

namespace {

std::string monomial(const Degree& d) {
  std::string s;
  if (d.v > 0) s += "|v|" + (d.v > 1 ? "^" + std::to_string(d.v) : std::string());
  if (d.u > 0) s += std::string(s.empty() ? "" : " ") + "|u|" + (d.u > 1 ? "^" + std::to_string(d.u) : std::string());
  return s;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Highest v-degree first.
std::vector<std::pair<Degree, double>> ordered(const BoundPolynomial& bp) {
  std::vector<std::pair<Degree, double>> out(bp.coeffs.begin(), bp.coeffs.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first.v > b.first.v; });
  return out;
}

}  // namespace

std::string format_polynomial(const BoundPolynomial& bp) {
  std::string s = "t^" + std::to_string(bp.t_power) + " * (";
  bool first = true;
  for (const auto& [d, c] : ordered(bp)) {
    if (!first) s += " + ";
    s += fmt(c) + " " + monomial(d);
    first = false;
  }
  if (first) s += "0";
  return s + ")";
}

std::string to_text(const BoundPolynomial& bp) {
  std::ostringstream os;
  os << "geometry: " << bp.geometry << "\n"
     << "formula: " << bp.formula << "\n"
     << "mode: " << bp.mode << "\n"
     << "s: " << (bp.mode == "prop10" ? std::string("n/a") : std::to_string(bp.s)) << "\n"
     << "t_power: " << bp.t_power << "\n"
     << "exact_norms: " << (bp.all_exact() ? "true" : "false") << "\n"
     << "bound_per_site: " << format_polynomial(bp) << "\n\n"
     << "[monomials]\n"
     << "v_deg\tu_deg\tcoefficient\n";
  for (const auto& [d, c] : ordered(bp)) os << d.v << "\t" << d.u << "\t" << fmt(c) << "\n";
  os << "\n[terms]\n"
     << "label\tv_deg\tu_deg\tprefactor\tnorm_per_site\texact\n";
  for (const auto& c : bp.breakdown) {
    os << c.label << "\t" << c.degree.v << "\t" << c.degree.u << "\t" << fmt(c.prefactor) << "\t"
       << fmt(c.norm_per_site) << "\t" << (c.exact ? "true" : "false") << "\n";
  }
  return os.str();
}

std::string to_csv(const BoundPolynomial& bp) {
  std::ostringstream os;
  os << "v_deg,u_deg,t_power,coefficient\n";
  for (const auto& [d, c] : ordered(bp)) os << d.v << "," << d.u << "," << bp.t_power << "," << fmt(c) << "\n";
  return os.str();
}

std::string terms_to_csv(const BoundPolynomial& bp) {
  std::ostringstream os;
  os << "label,v_deg,u_deg,prefactor,norm_per_site,exact\n";
  for (const auto& c : bp.breakdown) {
    os << '"' << c.label << "\"," << c.degree.v << "," << c.degree.u << "," << fmt(c.prefactor) << ","
       << fmt(c.norm_per_site) << "," << (c.exact ? "true" : "false") << "\n";
  }
  return os.str();
}

namespace {

class CommutatorParser {
 public:
  CommutatorParser(std::string_view text, CommutatorEvaluator& ev) : ev_(ev) {
    for (char c : text) {
      if (!std::isspace(static_cast<unsigned char>(c))) text_.push_back(c);
    }
  }

  CommutatorValue parse() {
    CommutatorValue v = expr();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return v;
  }

 private:
  CommutatorValue expr() {
    if (peek() == 'H') {
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected a term index after H");
      const int gamma = std::stoi(text_.substr(start, pos_ - start)) - 1;
      const std::vector<int> tuple{gamma};
      return {ev_.nested(tuple), ev_.degree(tuple)};
    }
    expect('[');
    const CommutatorValue a = expr();
    expect(',');
    const CommutatorValue b = expr();
    expect(']');
    return {commute_translated(a.op, b.op), a.degree + b.degree};
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("commutator spec \"" + text_ + "\": " + what + " at position " + std::to_string(pos_));
  }

  CommutatorEvaluator& ev_;
  std::string text_;
  std::size_t pos_ = 0;
};

}  // namespace

CommutatorValue evaluate_commutator(std::string_view spec, CommutatorEvaluator& ev) {
  return CommutatorParser(spec, ev).parse();
}

}  // namespace fhb
