#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "fhb/lattice_model.hpp"
#include "fhb/norm.hpp"
#include "helpers.hpp"

using namespace fhb;
using fhb::testing::chain_sites;
using fhb::testing::random_expr;

namespace {

OpExpr h(int i, int j, Spin s = Spin::up) { return OpExpr::hopping(Site{i}, Site{j}, s); }
OpExpr g(int i, int j, Spin s = Spin::up) { return OpExpr::antisymm_hopping(Site{i}, Site{j}, s); }
OpExpr n(int i, Spin s = Spin::up) { return OpExpr::number(Site{i}, s); }

double svd_norm(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

double dense_norm(const OpExpr& a) { return svd_norm(to_matrix(a, ModeIndex::covering(a))); }

OpExpr random_quadratic(std::mt19937& rng, int sites, bool symmetric) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  OpExpr out;
  for (Spin s : kSpins) {
    for (int i = 0; i < sites; ++i) {
      if (symmetric) out += OpExpr::number(Site{i}, s, c(rng));
      for (int j = i + 1; j < sites; ++j) {
        out += symmetric ? OpExpr::hopping(Site{i}, Site{j}, s, c(rng))
                         : OpExpr::antisymm_hopping(Site{i}, Site{j}, s, c(rng));
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("matrix realization of single leaves") {
  const OpExpr number = n(0);
  const Eigen::MatrixXd m = to_matrix(number, ModeIndex::covering(number));
  CHECK(m.rows() == 2);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(1, 1) == 1.0);
  CHECK(m(0, 1) == 0.0);

  const OpExpr hop = h(0, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(to_matrix(hop, ModeIndex::covering(hop)));
  const Eigen::VectorXd ev = eig.eigenvalues();
  CHECK(ev(0) == doctest::Approx(-1.0));
  CHECK(ev(1) == doctest::Approx(0.0));
  CHECK(ev(2) == doctest::Approx(0.0));
  CHECK(ev(3) == doctest::Approx(1.0));
}

TEST_CASE("Jordan-Wigner operators satisfy the anticommutation relations") {
  for (int m : {2, 4, 6}) {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(1 << m, 1 << m);
    for (int i = 0; i < m; ++i) {
      const Eigen::MatrixXd ai = annihilation_matrix(i, m);
      for (int j = 0; j < m; ++j) {
        const Eigen::MatrixXd aj = annihilation_matrix(j, m);
        const Eigen::MatrixXd anti = ai * aj.transpose() + aj.transpose() * ai;
        const Eigen::MatrixXd expected = i == j ? id : Eigen::MatrixXd::Zero(1 << m, 1 << m);
        CHECK((anti - expected).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((ai * aj + aj * ai).cwiseAbs().maxCoeff() < 1e-14);
      }
    }
  }
}

TEST_CASE("to_matrix uses the Jordan-Wigner realization") {
  const ModeIndex modes({{Site{0}, Spin::up}, {Site{1}, Spin::up}, {Site{2}, Spin::up}});
  const Eigen::MatrixXd a0 = annihilation_matrix(0, 3);
  const Eigen::MatrixXd a2 = annihilation_matrix(2, 3);
  const Eigen::MatrixXd expected = a0.transpose() * a2 + a2.transpose() * a0;
  CHECK((to_matrix(h(0, 2), modes) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("matrix norm of large blocks agrees with the singular value decomposition") {
  std::mt19937 rng(11);
  std::normal_distribution<double> d;
  for (int n : {300, 420}) {
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = d(rng);
    const Eigen::MatrixXd sym = a + a.transpose();
    CHECK(matrix_norm(sym) == doctest::Approx(svd_norm(sym)).epsilon(1e-10));
    CHECK(matrix_norm(a) == doctest::Approx(svd_norm(a)).epsilon(1e-10));
    Eigen::MatrixXd degenerate = Eigen::MatrixXd::Zero(n, n);
    degenerate.diagonal().setConstant(-2.0);
    degenerate(0, 0) = 1.5;
    CHECK(matrix_norm(degenerate) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("exact norms of small operators") {
  CHECK(spectral_norm_exact(n(0) - n(3)).value == doctest::Approx(1.0));
  CHECK(spectral_norm_exact(n(1, Spin::down) - n(2, Spin::down)).value == doctest::Approx(1.0));
  CHECK(spectral_norm_exact(h(-2, 1) - h(-1, 0)).value == doctest::Approx(2.0));
  CHECK(spectral_norm(OpExpr{}).value == 0.0);
}

TEST_CASE("mixed quadratic operators fall back to dense blocks") {
  const OpExpr mixed = h(0, 1) + g(1, 2);
  CHECK_THROWS_AS(spectral_norm_quadratic(mixed), UnsupportedNorm);
  CHECK(spectral_norm(mixed).value == doctest::Approx(dense_norm(mixed)).epsilon(1e-12));
}

TEST_CASE("quadratic fast path matches dense diagonalization") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const bool symmetric = trial % 2 == 0;
    const OpExpr a = random_quadratic(rng, 4, symmetric);
    const NormResult q = spectral_norm_quadratic(a);
    CHECK(q.exact);
    CHECK(q.method == NormMethod::quadratic);
    CHECK(q.value == doctest::Approx(dense_norm(a)).epsilon(1e-10));
  }
  CHECK(spectral_norm_quadratic(h(0, 1)).value == doctest::Approx(1.0));
  CHECK(spectral_norm_quadratic(OpExpr{}).value == 0.0);
  CHECK_THROWS_AS(spectral_norm_quadratic(h(0, 1) * n(2)), std::invalid_argument);
}

TEST_CASE("particle-number blocks reproduce the dense norm") {
  std::mt19937 rng(29);
  const auto sites = chain_sites(3);
  for (int trial = 0; trial < 10; ++trial) {
    const OpExpr a = random_expr(rng, sites, 4);
    CHECK(spectral_norm_exact(a).value == doctest::Approx(dense_norm(a)).epsilon(1e-10));
  }
}

TEST_CASE("clustered bound dominates the exact norm") {
  std::mt19937 rng(41);
  const auto sites = chain_sites(4);
  for (int trial = 0; trial < 10; ++trial) {
    const OpExpr a = random_expr(rng, sites, 5);
    const double exact = spectral_norm_exact(a).value;
    NormOptions tight;
    tight.max_modes = 4;
    const NormResult c = spectral_norm_clustered(a, tight);
    CHECK_FALSE(c.exact);
    CHECK(c.value >= exact - 1e-10);
  }
}

TEST_CASE("clustering of disjoint and single summands") {
  const OpExpr left = h(0, 1) * n(0, Spin::down);
  const OpExpr right = h(5, 6) * n(6, Spin::down);
  const OpExpr both = left + right;
  CHECK(cluster_terms(both, 14).size() == 2);
  CHECK(spectral_norm_clustered(both).value == doctest::Approx(spectral_norm_exact(both).value).epsilon(1e-12));
  CHECK(spectral_norm_clustered(left).value == doctest::Approx(spectral_norm_exact(left).value).epsilon(1e-12));
}

TEST_CASE("oversized non-quadratic summand is rejected") {
  std::vector<OpExpr> factors;
  for (int k = 0; k < 8; ++k) factors.push_back(h(2 * k, 2 * k + 1));
  const OpExpr big = OpExpr::product(factors) + h(0, 1, Spin::down) * n(3, Spin::down);
  CHECK_THROWS_AS(spectral_norm_exact(big), UnsupportedNorm);
  CHECK_THROWS_AS(spectral_norm(big), UnsupportedNorm);
}

TEST_CASE("sector blocks enumerate occupations per spin") {
  const ModeIndex modes = ModeIndex::covering(h(0, 1) + h(0, 1, Spin::down));
  CHECK(sector_blocks(h(0, 1), modes).size() == 9);
}

TEST_CASE("per-site norm of the chain commutator [H1,[H2,H1]]") {
  const LatticeModel m = build_1d();
  const auto& t = m.decomposition.terms;
  const TranslatedOperator c = commute_translated(t[0], commute_translated(t[1], t[0]));
  for (Placement p : {Placement::centered, Placement::box}) {
    NormOptions opts;
    opts.placement = p;
    CHECK(per_site_norm(c, m.geometry, opts).value == doctest::Approx(4.0).epsilon(1e-12));
  }
  NormOptions overlap;
  overlap.placement = Placement::overlap;
  const double tight = per_site_norm(c, m.geometry, overlap).value;
  CHECK(tight <= 4.0 + 1e-12);
  CHECK(tight == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
  NormOptions folded;
  folded.placement = Placement::folded;
  CHECK(per_site_norm(c, m.geometry, folded).value >= 4.0 - 1e-12);
}

TEST_CASE("telescoped representatives are translates of the folded form") {
  const LatticeModel m = build_square();
  const auto& t = m.decomposition.terms;
  const TranslatedOperator c = commute_translated(t[0], commute_translated(t[0], t[1]));
  const SubLattice& lat = m.geometry.sublattice;
  for (Placement p : {Placement::centered, Placement::overlap, Placement::box}) {
    NormOptions opts;
    opts.placement = p;
    CHECK(fold_translates(telescoped_representative(c, opts), lat).approx_equal(fold_translates(c.local, lat), 1e-12));
  }
}

TEST_CASE("norm cache returns stored results") {
  NormCache cache;
  const OpExpr a = h(0, 1) * n(1, Spin::down);
  const NormResult first = cache.get_or_compute(a, {});
  const NormResult second = cache.get_or_compute(a, {});
  CHECK(cache.size() == 1);
  CHECK(first.value == second.value);
}
