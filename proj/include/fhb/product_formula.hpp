#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fhb {

using Rational = boost::rational<std::int64_t>;

/// One exponential e^{-i t a H_gamma}; gamma is zero-based.
struct Factor {
  double coeff = 0.0;
  int gamma = 0;
  /// Present when the coefficient is rational (Strang, tables written as fractions).
  std::optional<Rational> exact;
};

/// Ordered product of exponentials. factors[0] acts first (A_1), factors.back() last (A_K).
struct ProductFormula {
  std::string name;
  int order = 1;
  int term_count = 1;
  std::vector<Factor> factors;

  int size() const { return static_cast<int>(factors.size()); }
  /// Throws std::invalid_argument unless each term's coefficients sum to 1
  /// within tol and no two neighbouring factors share a term.
  void check_consistency(double tol = 1e-12) const;
};

/// Combines neighbouring factors acting on the same term and drops zero factors.
std::vector<Factor> merge_factors(std::vector<Factor> factors);

ProductFormula strang(int term_count);
/// Suzuki recursion of order 2k starting from the Strang formula.
ProductFormula suzuki(int order, int term_count);

/// Stage table: stage v applies e^{-i t a[v][g] H_{perm[v][g]}} for g = 0..G-1
/// in sequence. An empty permutation means the natural order.
struct CoefficientTable {
  std::vector<std::vector<double>> coeffs;
  std::vector<std::vector<std::optional<Rational>>> exact;
  std::vector<std::vector<int>> permutation;
  int term_count = 0;
};

ProductFormula custom(const CoefficientTable& table, int order, std::string name = "custom");

/// Reads a stage table from text. Format (documented in README):
///   # comment lines
///   terms G
///   order p
///   stage a_1 ... a_G          (numbers or fractions such as 1/2)
///   perm  g_1 ... g_G          (optional, one-based, applies to the preceding stage)
struct LoadedFormula {
  CoefficientTable table;
  int order = 0;
  std::string name;
};
LoadedFormula load_table(const std::filesystem::path& path);

/// Formula by CLI name: strang, suzuki4, suzuki6 or custom:<path>.
ProductFormula formula_by_name(const std::string& name, int term_count);

/// Log-log slope of ||S(t) - e^{-itH}|| over [t_lo, t_hi] with random real
/// symmetric matrices of dimension dim substituted for the terms; the median
/// over trials is returned.
double verify_order(const ProductFormula& f, int trials, double t_lo = 1e-3, double t_hi = 1e-2, int dim = 8,
                    std::uint64_t seed = 7, double scale = 1.0);

/// Adjoint chain ad_{A_k1}^{q1} ... ad_{A_kn}^{qn} B_j, outermost first.
struct ChainLink {
  int factor = 0;  // zero-based index into the formula
  int power = 0;
};

struct BoundTerm {
  /// Multinomial / (p+1)! times the |a_k|^{q_k} factors of the chain.
  double prefactor = 0.0;
  std::optional<Rational> exact_prefactor;
  std::vector<ChainLink> chain;
  /// One-based j; B_j sums factors 0..j-2.
  int target = 0;
};

/// Summands of the higher-order bound for the given splitting index s (1 <= s <= K).
std::vector<BoundTerm> theorem1_terms(const ProductFormula& f, int s);
inline int default_split(const ProductFormula& f) { return (f.size() + 1) / 2; }

/// Nested commutator [H_g0, [H_g1, ... [H_g(n-2), H_g(n-1)]]], zero-based term indices.
struct CommutatorTuple {
  std::vector<int> gammas;
  friend auto operator<=>(const CommutatorTuple&, const CommutatorTuple&) = default;
  std::string to_string() const;
};

struct TupleTerm {
  double coeff = 0.0;
  std::optional<Rational> exact;
  CommutatorTuple tuple;
};

/// Expands each bound term over the summands of B_j by the triangle inequality
/// and merges tuples that only differ by the order of the innermost pair.
std::vector<TupleTerm> expand_terms(const ProductFormula& f, const std::vector<BoundTerm>& terms);

/// Grouped form of the sharpened Strang bound: one entry per (gamma1, kind).
/// outer / middle list the terms summed in the two commutator slots.
struct GroupedStrangTerm {
  Rational prefactor;
  std::vector<int> outer;
  std::vector<int> middle;
  int inner = 0;
};
std::vector<GroupedStrangTerm> prop10_grouped(int term_count);
/// Same bound with all sums expanded.
std::vector<TupleTerm> prop10_terms(int term_count);

}  // namespace fhb
