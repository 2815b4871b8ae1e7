#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fhb/translated.hpp"

namespace fhb {

enum class GeometryKind { chain1d, square2d, triangular2d };

struct Geometry {
  GeometryKind kind = GeometryKind::chain1d;
  int dim = 1;
  SubLattice sublattice;
  /// |Lambda| / |Lambda'|
  int site_ratio = 2;
  std::string name;

  /// Half of the nearest-neighbour displacements (one per bond orientation).
  std::vector<Site> bond_directions() const;
  /// Maps a site onto the periodic torus with the given extents.
  Site wrap(const Site& s, const std::vector<int>& extents) const;
  /// All sites of the torus, in wrapped coordinates.
  std::vector<Site> torus_sites(const std::vector<int>& extents) const;
  /// Throws std::invalid_argument unless the extents are commensurate with the
  /// sublattice and large enough to avoid coincident bonds.
  void check_extents(const std::vector<int>& extents) const;
};

enum class Coupling { kinetic, interaction };

struct Decomposition {
  /// Local representatives with unit coupling (v = u = 1).
  std::vector<TranslatedOperator> terms;
  std::vector<Coupling> couplings;

  int size() const { return static_cast<int>(terms.size()); }
  Degree degree(int gamma) const {
    return couplings[gamma] == Coupling::kinetic ? Degree{1, 0} : Degree{0, 1};
  }
  /// H_gamma with physical couplings applied.
  TranslatedOperator scaled(int gamma, double v, double u) const;
};

struct LatticeModel {
  Geometry geometry;
  Decomposition decomposition;
};

LatticeModel build_1d();
LatticeModel build_square();
LatticeModel build_triangular();
/// "1d", "square" or "triangular".
LatticeModel build_model(std::string_view name);

/// Rotation by 2 pi / 3 in the triangular integer embedding.
Site rotate_triangular(const Site& s);
OpExpr rotate_triangular(const OpExpr& a);

/// Explicit full-lattice sums of each decomposition term on a periodic torus.
std::vector<OpExpr> realize_on_torus(const LatticeModel& model, const std::vector<int>& extents, double v = 1.0,
                                     double u = 1.0);

/// Fermi-Hubbard Hamiltonian built directly from the bond list.
OpExpr hubbard_on_torus(const Geometry& geometry, const std::vector<int>& extents, double v = 1.0, double u = 1.0);

}  // namespace fhb
