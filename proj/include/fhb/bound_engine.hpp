#pragma once

#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fhb/lattice_model.hpp"
#include "fhb/norm.hpp"
#include "fhb/product_formula.hpp"

namespace fhb {

enum class BoundMode { theorem1, prop10 };

/// expanded: one norm per nested commutator of decomposition terms.
/// grouped: one norm per bound summand and monomial, keeping cancellations.
enum class NormGrouping { expanded, grouped };

struct BoundOptions {
  BoundMode mode = BoundMode::theorem1;
  /// Split index; 0 selects ceil(K/2).
  int s = 0;
  NormGrouping grouping = NormGrouping::expanded;
  NormOptions norm;
  /// 0 reads FHB_WORKERS, falling back to the hardware concurrency.
  int workers = 0;
};

struct TermContribution {
  std::string label;
  Degree degree;
  double prefactor = 0.0;
  double norm_per_site = 0.0;
  bool exact = true;
};

struct BoundPolynomial {
  int t_power = 0;
  std::map<Degree, double> coeffs;
  std::string formula;
  std::string geometry;
  std::string mode;
  int s = 0;
  std::vector<TermContribution> breakdown;

  double coefficient(int v_deg, int u_deg) const {
    auto it = coeffs.find({v_deg, u_deg});
    return it == coeffs.end() ? 0.0 : it->second;
  }
  bool all_exact() const;
};

/// Nested commutators of unit-coupling decomposition terms, memoized by tuple.
class CommutatorEvaluator {
 public:
  explicit CommutatorEvaluator(const LatticeModel& model) : model_(model) {}

  /// [H_g0, [H_g1, ... H_g(n-1)]] with v = u = 1.
  TranslatedOperator nested(const std::vector<int>& gammas);
  Degree degree(const std::vector<int>& gammas) const;
  const LatticeModel& model() const { return model_; }

 private:
  const LatticeModel& model_;
  std::mutex mutex_;
  std::map<std::vector<int>, TranslatedOperator> memo_;
};

BoundPolynomial evaluate_bound(const LatticeModel& model, const ProductFormula& f, const BoundOptions& opts = {});

/// Sum of coeff * t^{t_power} * |v|^{v_deg} * |u|^{u_deg}.
double evaluate_at(const BoundPolynomial& bp, double t, double v, double u);

struct SplitScan {
  std::vector<std::pair<int, double>> values;  // (s, bound at the probe point)
  int best_s = 1;
  BoundPolynomial best;
};

/// Evaluates every split index and keeps the smallest bound at (t, v, u).
SplitScan scan_split(const LatticeModel& model, const ProductFormula& f, BoundOptions opts, double t = 1.0,
                     double v = -1.0, double u = 1.0);

/// Human-readable polynomial such as "t^3 * (0.5 |v|^3 + ...)".
std::string format_polynomial(const BoundPolynomial& bp);
/// Key-value header followed by the monomial and breakdown tables.
std::string to_text(const BoundPolynomial& bp);
std::string to_csv(const BoundPolynomial& bp);

/// Per-term breakdown with columns label, v_deg, u_deg, prefactor, norm_per_site, exact.
std::string terms_to_csv(const BoundPolynomial& bp);

int worker_count(int requested);

/// Result of a bracket expression such as "[H1,[H2,H1]]" with v = u = 1.
struct CommutatorValue {
  TranslatedOperator op;
  Degree degree;
};

/// Grammar: expr := H<index> | "[" expr "," expr "]"; whitespace is ignored and
/// indices are one-based. Throws std::invalid_argument on malformed input.
CommutatorValue evaluate_commutator(std::string_view spec, CommutatorEvaluator& ev);

}  // namespace fhb
