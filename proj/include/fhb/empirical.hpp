#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "fhb/bound_engine.hpp"
#include "fhb/lattice_model.hpp"
#include "fhb/norm.hpp"
#include "fhb/product_formula.hpp"

namespace fhb {

using ComplexMatrix = Eigen::MatrixXcd;

/// Hermitian operator on a fixed mode set, diagonalized once per particle-number sector.
class SectorSpectrum {
 public:
  SectorSpectrum(const OpExpr& h, const ModeIndex& modes);

  /// e^{-i t H} restricted to each sector, in the sector order of sector_blocks.
  std::vector<ComplexMatrix> evolution(double t) const;
  std::size_t sector_count() const { return vectors_.size(); }

 private:
  std::vector<Eigen::MatrixXd> vectors_;
  std::vector<Eigen::VectorXd> values_;
};

/// All (site, spin) modes of a torus; at most 16 are allowed.
ModeIndex torus_modes(const Geometry& geometry, const std::vector<int>& extents);

/// e^{-i t H} per particle-number sector.
std::vector<ComplexMatrix> exact_evolution(const OpExpr& h, const ModeIndex& modes, double t);

/// log-spaced grid of n points between lo and hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);
/// Default grid: 20 log-spaced points in [1e-3, 0.5].
std::vector<double> default_t_grid();

struct EmpiricalPoint {
  double t = 0.0;
  double error_per_site = 0.0;
  double bound_per_site = 0.0;
  /// bound / error, NaN when the error vanishes.
  double ratio = 0.0;
};

struct EmpiricalRun {
  std::string geometry;
  std::vector<int> extents;
  double v = -1.0;
  double u = 1.0;
  std::string formula;
  std::vector<EmpiricalPoint> points;
};

/// Per-site spectral norm of S(t) - e^{-itH} on a periodic torus. When bound is
/// given it is evaluated on the same grid.
EmpiricalRun splitting_error(const LatticeModel& model, const ProductFormula& f, const std::vector<int>& extents,
                             double v, double u, const std::vector<double>& t_grid,
                             const BoundPolynomial* bound = nullptr, int workers = 0);

/// Columns t, empirical_error_per_site, bound_per_site, ratio.
std::string to_csv(const EmpiricalRun& run);

/// Least-squares slope of log(error) against log(t) over points with t in [lo, hi].
double loglog_slope(const EmpiricalRun& run, double lo, double hi);

}  // namespace fhb
