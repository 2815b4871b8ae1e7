#pragma once

#include <optional>
#include <vector>

#include "fhb/site.hpp"

namespace fhb {

/// Translation group spanned by integer unit-cell vectors. The vectors may
/// span a subspace of the coordinate space (triangular embedding: rank 2 in
/// three coordinates).
class SubLattice {
 public:
  SubLattice() = default;
  explicit SubLattice(std::vector<Site> unit_vectors);

  const std::vector<Site>& unit_vectors() const { return basis_; }
  int dim() const { return basis_.empty() ? 0 : basis_.front().dim; }
  int rank() const { return static_cast<int>(basis_.size()); }

  /// Integer coefficients of d in the unit-vector basis, if d belongs to the lattice.
  std::optional<std::vector<int>> coefficients(const Site& d) const;
  bool contains(const Site& d) const { return coefficients(d).has_value(); }

  Site point(const std::vector<int>& coeffs) const;

  /// Lattice vector l such that x - l lies in the half-open unit cell at the origin.
  /// Only meaningful for x in the span of the unit vectors.
  Site cell_of(const Site& x) const;

  /// All lattice vectors with coefficients in [-radius, radius].
  std::vector<Site> window(int radius) const;

  friend bool operator==(const SubLattice&, const SubLattice&) = default;

 private:
  // Real-valued coefficients from the selected coordinate rows (Cramer's rule).
  void solve(const Site& x, double* c) const;

  std::vector<Site> basis_;
  std::vector<int> rows_;  // coordinate indices with nonsingular minor
  long det_ = 0;
};

}  // namespace fhb
