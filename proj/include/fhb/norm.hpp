#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "fhb/lattice_model.hpp"
#include "fhb/op_expr.hpp"

namespace fhb {

/// Contiguous Jordan-Wigner numbering of a mode set, ordered by (site, spin).
class ModeIndex {
 public:
  ModeIndex() = default;
  explicit ModeIndex(std::vector<Mode> modes);
  static ModeIndex covering(const OpExpr& a) { return ModeIndex(a.support()); }

  int size() const { return static_cast<int>(modes_.size()); }
  /// -1 if the mode is not indexed.
  int index_of(const Mode& m) const;
  const std::vector<Mode>& modes() const { return modes_; }
  bool covers(const OpExpr& a) const;

 private:
  std::vector<Mode> modes_;
};

enum class NormMethod { dense_block, quadratic, clustered };

struct NormResult {
  double value = 0.0;
  bool exact = true;
  NormMethod method = NormMethod::dense_block;
};

class UnsupportedNorm : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How translated summands are positioned before the local norm is taken.
enum class Placement {
  folded,    ///< smallest site in the unit cell at the origin
  centered,  ///< centroid as close to the origin as possible
  overlap,   ///< greedy maximal shared-site overlap
  box,       ///< maximal pairwise overlap of bounding boxes
};

struct NormOptions {
  /// Largest mode count realized as a matrix.
  int max_modes = 14;
  Placement placement = Placement::box;
  /// Radius (in unit-vector coefficients) of the telescoping shift search.
  int shift_window = 2;
};

/// Dense 2^m matrix of a on the given modes (small m only; tests and oracles).
Eigen::MatrixXd to_matrix(const OpExpr& a, const ModeIndex& modes);
/// Annihilation operator a_k in the Jordan-Wigner basis of m modes.
Eigen::MatrixXd annihilation_matrix(int k, int m);

/// One block of fixed (N_up, N_down) occupation.
struct SectorBlock {
  int n_up = 0;
  int n_down = 0;
  std::vector<std::uint32_t> states;
  Eigen::MatrixXd matrix;
};

/// Particle-number blocks of a. Throws std::logic_error if a does not
/// conserve the occupation of each spin species.
std::vector<SectorBlock> sector_blocks(const OpExpr& a, const ModeIndex& modes);

/// Largest singular value of a dense real matrix.
double matrix_norm(const Eigen::MatrixXd& m);

NormResult spectral_norm_exact(const OpExpr& a, const NormOptions& opts = {});
NormResult spectral_norm_quadratic(const OpExpr& a);
NormResult spectral_norm_clustered(const OpExpr& a, const NormOptions& opts = {});
/// Exact whenever possible, otherwise a clustered upper bound.
NormResult spectral_norm(const OpExpr& a, const NormOptions& opts = {});

/// Groups of term indices used by the clustered bound, each on at most
/// max_modes modes unless it is a single quadratic cluster.
std::vector<std::vector<std::size_t>> cluster_terms(const OpExpr& a, int max_modes);

/// Representative of a translated operator after telescoping: translation
/// classes are shifted as rigid blocks to maximize their mutual support overlap.
OpExpr telescoped_representative(const TranslatedOperator& op, const NormOptions& opts = {});

/// Norm bound of a translated operator divided by the number of lattice sites.
NormResult per_site_norm(const TranslatedOperator& op, const Geometry& geometry, const NormOptions& opts = {});

/// Thread-safe memo of norms keyed by canonical expression.
class NormCache {
 public:
  NormResult get_or_compute(const OpExpr& a, const NormOptions& opts);
  std::size_t size() const;

 private:
  struct Entry {
    OpExpr expr;
    NormResult result;
  };
  mutable std::mutex mutex_;
  std::unordered_multimap<std::size_t, Entry> entries_;
};

}  // namespace fhb
