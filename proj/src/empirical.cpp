#include "fhb/empirical.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fhb/parallel.hpp"

namespace fhb {

SectorSpectrum::SectorSpectrum(const OpExpr& h, const ModeIndex& modes) {
  for (const SectorBlock& b : sector_blocks(h, modes)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.matrix);
    if (eig.info() != Eigen::Success) throw std::runtime_error("sector diagonalization failed");
    vectors_.push_back(eig.eigenvectors());
    values_.push_back(eig.eigenvalues());
  }
}

std::vector<ComplexMatrix> SectorSpectrum::evolution(double t) const {
  std::vector<ComplexMatrix> out;
  out.reserve(vectors_.size());
  for (std::size_t k = 0; k < vectors_.size(); ++k) {
    if (t == 0.0) {
      out.push_back(ComplexMatrix::Identity(vectors_[k].rows(), vectors_[k].cols()));
      continue;
    }
    const Eigen::VectorXcd phase =
        values_[k].unaryExpr([t](double e) { return std::exp(std::complex<double>(0.0, -t * e)); });
    const ComplexMatrix v = vectors_[k].cast<std::complex<double>>();
    out.push_back(v * phase.asDiagonal() * v.adjoint());
  }
  return out;
}

ModeIndex torus_modes(const Geometry& geometry, const std::vector<int>& extents) {
  geometry.check_extents(extents);
  std::vector<Mode> modes;
  for (const Site& s : geometry.torus_sites(extents)) {
    modes.push_back({s, Spin::up});
    modes.push_back({s, Spin::down});
  }
  if (modes.size() > 16) {
    throw std::invalid_argument("torus has " + std::to_string(modes.size()) + " modes; at most 16 are supported");
  }
  return ModeIndex(std::move(modes));
}

std::vector<ComplexMatrix> exact_evolution(const OpExpr& h, const ModeIndex& modes, double t) {
  if (modes.size() > 16) throw std::invalid_argument("exact_evolution: at most 16 modes are supported");
  return SectorSpectrum(h, modes).evolution(t);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 1 || lo <= 0.0 || hi < lo) throw std::invalid_argument("log_grid: need n >= 1 and 0 < lo <= hi");
  std::vector<double> out;
  if (n == 1) return {lo};
  const double step = std::log(hi / lo) / (n - 1);
  for (int k = 0; k < n; ++k) out.push_back(k == n - 1 ? hi : lo * std::exp(step * k));
  return out;
}

std::vector<double> default_t_grid() { return log_grid(1e-3, 0.5, 20); }

namespace {

double spectral_norm_of(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

EmpiricalRun splitting_error(const LatticeModel& model, const ProductFormula& f, const std::vector<int>& extents,
                             double v, double u, const std::vector<double>& t_grid, const BoundPolynomial* bound,
                             int workers) {
  if (f.term_count != model.decomposition.size()) {
    throw std::invalid_argument("formula term count does not match the decomposition");
  }
  const Geometry& geo = model.geometry;
  const ModeIndex modes = torus_modes(geo, extents);
  const std::vector<OpExpr> parts = realize_on_torus(model, extents, v, u);
  OpExpr total;
  for (const OpExpr& p : parts) total = total + p;

  std::vector<SectorSpectrum> spectra;
  for (const OpExpr& p : parts) spectra.emplace_back(p, modes);
  const SectorSpectrum full(total, modes);
  const auto sites = static_cast<double>(geo.torus_sites(extents).size());

  EmpiricalRun run{geo.name, extents, v, u, f.name, std::vector<EmpiricalPoint>(t_grid.size())};
  parallel_for(t_grid.size(), worker_count(workers), [&](std::size_t k) {
    const double t = t_grid[k];
    if (t < 0.0) throw std::invalid_argument("negative time in grid");
    std::vector<ComplexMatrix> product = full.evolution(0.0);
    for (const Factor& fac : f.factors) {
      const auto step = spectra[static_cast<std::size_t>(fac.gamma)].evolution(fac.coeff * t);
      for (std::size_t b = 0; b < product.size(); ++b) product[b] = step[b] * product[b];
    }
    const auto exact = full.evolution(t);
    double err = 0.0;
    for (std::size_t b = 0; b < product.size(); ++b) err = std::max(err, spectral_norm_of(product[b] - exact[b]));
    EmpiricalPoint& pt = run.points[k];
    pt.t = t;
    pt.error_per_site = err / sites;
    pt.bound_per_site = bound ? evaluate_at(*bound, t, v, u) : std::numeric_limits<double>::quiet_NaN();
    pt.ratio = pt.error_per_site > 0.0 ? pt.bound_per_site / pt.error_per_site : std::numeric_limits<double>::quiet_NaN();
  });
  return run;
}

std::string to_csv(const EmpiricalRun& run) {
  std::ostringstream os;
  os << "t,empirical_error_per_site,bound_per_site,ratio\n";
  char buf[160];
  for (const EmpiricalPoint& p : run.points) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%.6g\n", p.t, p.error_per_site, p.bound_per_site, p.ratio);
    os << buf;
  }
  return os.str();
}

double loglog_slope(const EmpiricalRun& run, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const EmpiricalPoint& p : run.points) {
    if (p.t < lo || p.t > hi || p.error_per_site <= 0.0) continue;
    const double x = std::log(p.t), y = std::log(p.error_per_site);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("loglog_slope: fewer than two usable points");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fhb
