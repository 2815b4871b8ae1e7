#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fhb/site.hpp"

namespace fhb {

/// Coefficients with magnitude below this are treated as zero.
inline constexpr double kDropTolerance = 1e-12;

enum class LeafKind : std::uint8_t { hopping = 0, antisymm_hopping = 1, number = 2 };

/// Elementary single-spin operator with unit weight:
///   hopping          h_ij = a+_i a_j + a+_j a_i   (stored with i < j)
///   antisymm_hopping g_ij = a+_i a_j - a+_j a_i   (stored with i < j)
///   number           n_i  = a+_i a_i              (j == i)
/// Field order defines the canonical ordering: kind, then sites, then spin.
struct Leaf {
  LeafKind kind = LeafKind::number;
  Site i;
  Site j;
  Spin spin = Spin::up;

  friend auto operator<=>(const Leaf&, const Leaf&) = default;
  friend bool operator==(const Leaf&, const Leaf&) = default;

  bool touches(const Site& s) const { return i == s || j == s; }
};

/// Two leaves commute without needing the algebra: different spin, disjoint
/// sites, both number operators, or identical.
bool trivially_commute(const Leaf& a, const Leaf& b);

/// coeff * factors[0] * factors[1] * ... (operator product, left to right).
struct Term {
  double coeff = 0.0;
  std::vector<Leaf> factors;
};

/// Symbolic operator expression, always held in canonical form: a sum of
/// weighted products of unit leaves, sorted by factor sequence with like
/// terms merged. An empty sum is the zero operator.
class OpExpr {
 public:
  enum class Kind { zero, hopping, antisymm_hopping, number, product, sum };

  OpExpr() = default;

  /// alpha * h_ij. Rejects i == j.
  static OpExpr hopping(const Site& i, const Site& j, Spin s, double alpha = 1.0);
  /// alpha * g_ij. Yields zero for i == j and flips the sign if i > j.
  static OpExpr antisymm_hopping(const Site& i, const Site& j, Spin s, double alpha = 1.0);
  static OpExpr number(const Site& i, Spin s, double alpha = 1.0);
  /// Canonicalizes an arbitrary list of terms.
  static OpExpr from_terms(std::vector<Term> terms);
  /// Ordered product of expressions, distributed over sums.
  static OpExpr product(std::span<const OpExpr> factors);

  Kind kind() const;
  bool is_zero() const { return terms_.empty(); }
  /// Linear combination of single leaves only (free-fermion operator).
  bool is_quadratic() const;
  std::span<const Term> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  /// Sorted set of modes acted on.
  std::vector<Mode> support() const;
  /// Sorted set of sites acted on (spin ignored).
  std::vector<Site> site_support() const;
  int dim() const;

  OpExpr operator+(const OpExpr& other) const;
  OpExpr operator-(const OpExpr& other) const;
  OpExpr operator-() const { return -1.0 * *this; }
  OpExpr& operator+=(const OpExpr& other) { return *this = *this + other; }
  friend OpExpr operator*(double s, const OpExpr& a);
  friend OpExpr operator*(const OpExpr& a, const OpExpr& b);

  /// Structural equality with coefficient tolerance.
  bool approx_equal(const OpExpr& other, double tol = 1e-12) const;
  friend bool operator==(const OpExpr& a, const OpExpr& b) { return a.approx_equal(b, 0.0); }

  std::size_t hash() const;
  std::string to_string() const;

 private:
  std::vector<Term> terms_;
};

/// Commutator of two weighted leaves.
OpExpr commute_elementary(const Leaf& a, double alpha, const Leaf& b, double beta);
/// Commutator of leaf expressions (each argument must be a single leaf).
OpExpr commute_elementary(const OpExpr& a, const OpExpr& b);

/// [a, b] by bilinearity and the Leibniz rule over products.
OpExpr commutator(const OpExpr& a, const OpExpr& b);

/// Shift every site by d.
OpExpr translate(const OpExpr& a, const Site& d);
Leaf translate(const Leaf& a, const Site& d);

std::string to_string(const Leaf& leaf);

/// Canonical order of a factor sequence: factors only move past neighbours
/// they trivially commute with; duplicate number operators collapse (n*n = n).
std::vector<Leaf> canonical_factors(std::vector<Leaf> factors);

}  // namespace fhb
