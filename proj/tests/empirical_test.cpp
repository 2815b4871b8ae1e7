#include <doctest.h>

#include <cmath>

#include "fhb/empirical.hpp"

using namespace fhb;

namespace {

double max_deviation_from_identity(const std::vector<ComplexMatrix>& blocks) {
  double worst = 0.0;
  for (const ComplexMatrix& b : blocks) {
    worst = std::max(worst, (b.adjoint() * b - ComplexMatrix::Identity(b.rows(), b.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("exact evolution is unitary and obeys the group law") {
  const LatticeModel m = build_1d();
  const OpExpr h = hubbard_on_torus(m.geometry, {4}, -1.0, 1.0);
  const ModeIndex modes = torus_modes(m.geometry, {4});
  CHECK(modes.size() == 8);
  const auto id = exact_evolution(h, modes, 0.0);
  for (const ComplexMatrix& b : id) CHECK((b - ComplexMatrix::Identity(b.rows(), b.cols())).cwiseAbs().maxCoeff() == 0.0);
  CHECK(max_deviation_from_identity(exact_evolution(h, modes, 0.7)) < 1e-10);
  const SectorSpectrum spec(h, modes);
  const auto a = spec.evolution(0.3), b = spec.evolution(0.45), ab = spec.evolution(0.75);
  for (std::size_t k = 0; k < ab.size(); ++k) CHECK((a[k] * b[k] - ab[k]).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mode limit is enforced") {
  const LatticeModel m = build_1d();
  CHECK_NOTHROW(torus_modes(m.geometry, {8}));
  CHECK_THROWS_AS(torus_modes(m.geometry, {10}), std::invalid_argument);
  CHECK_THROWS_AS(torus_modes(build_square().geometry, {4, 4}), std::invalid_argument);
}

TEST_CASE("time grids") {
  const auto grid = default_t_grid();
  CHECK(grid.size() == 20);
  CHECK(grid.front() == doctest::Approx(1e-3));
  CHECK(grid.back() == 0.5);
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] > grid[k - 1]);
  CHECK(log_grid(0.1, 0.1, 1).size() == 1);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), std::invalid_argument);
}

TEST_CASE("splitting error at zero time vanishes") {
  const LatticeModel m = build_1d();
  const EmpiricalRun run = splitting_error(m, strang(3), {4}, -1.0, 1.0, {0.0});
  CHECK(run.points.at(0).error_per_site == 0.0);
}

TEST_CASE("Strang error on the four-site chain") {
  const LatticeModel m = build_1d();
  BoundOptions o;
  o.mode = BoundMode::prop10;
  const BoundPolynomial bp = evaluate_bound(m, strang(3), o);
  const EmpiricalRun run = splitting_error(m, strang(3), {4}, -1.0, 1.0, default_t_grid(), &bp);
  CHECK(loglog_slope(run, 1e-3, 1e-2) == doctest::Approx(3.0).epsilon(0.02));
  for (const EmpiricalPoint& p : run.points) {
    CAPTURE(p.t);
    CHECK(p.error_per_site >= 0.0);
    CHECK(p.bound_per_site >= p.error_per_site);
  }
  const std::string csv = to_csv(run);
  CHECK(csv.rfind("t,empirical_error_per_site,bound_per_site,ratio\n", 0) == 0);
}

TEST_CASE("fourth-order error on the four-site chain") {
  const LatticeModel m = build_1d();
  BoundOptions o;
  o.s = 11;
  const BoundPolynomial bp = evaluate_bound(m, suzuki(4, 3), o);
  const EmpiricalRun run = splitting_error(m, suzuki(4, 3), {4}, -1.0, 1.0, log_grid(2e-2, 0.5, 12), &bp);
  CHECK(loglog_slope(run, 2e-2, 1e-1) == doctest::Approx(5.0).epsilon(0.04));
  for (const EmpiricalPoint& p : run.points) CHECK(p.bound_per_site >= p.error_per_site);
}

TEST_CASE("error is independent of the coupling signs on the chain") {
  const LatticeModel m = build_1d();
  const EmpiricalRun a = splitting_error(m, strang(3), {4}, -1.0, 1.0, {0.2});
  const EmpiricalRun b = splitting_error(m, strang(3), {4}, 1.0, 1.0, {0.2});
  CHECK(a.points[0].error_per_site == doctest::Approx(b.points[0].error_per_site).epsilon(1e-10));
}
