#include <doctest.h>

#include "fhb/norm.hpp"
#include "fhb/op_expr.hpp"
#include "helpers.hpp"

using namespace fhb;
using fhb::testing::all_modes;
using fhb::testing::chain_sites;
using fhb::testing::random_expr;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("symbolic commutators agree with matrix commutators") {
  std::mt19937 rng(11);
  const auto sites = chain_sites(4);
  const ModeIndex modes = all_modes(sites);
  for (int trial = 0; trial < 40; ++trial) {
    const OpExpr a = random_expr(rng, sites, 3);
    const OpExpr b = random_expr(rng, sites, 3);
    const Eigen::MatrixXd ma = to_matrix(a, modes);
    const Eigen::MatrixXd mb = to_matrix(b, modes);
    const Eigen::MatrixXd expected = ma * mb - mb * ma;
    CHECK(max_abs(to_matrix(commutator(a, b), modes) - expected) < 1e-12);
  }
}

TEST_CASE("products agree with matrix products") {
  std::mt19937 rng(5);
  const auto sites = chain_sites(3);
  const ModeIndex modes = all_modes(sites);
  for (int trial = 0; trial < 30; ++trial) {
    const OpExpr a = random_expr(rng, sites, 2);
    const OpExpr b = random_expr(rng, sites, 2);
    CHECK(max_abs(to_matrix(a * b, modes) - to_matrix(a, modes) * to_matrix(b, modes)) < 1e-12);
  }
}

TEST_CASE("commutator is structurally antisymmetric") {
  std::mt19937 rng(23);
  const auto sites = chain_sites(3);
  for (int trial = 0; trial < 50; ++trial) {
    const OpExpr a = random_expr(rng, sites, 3, 3);
    const OpExpr b = random_expr(rng, sites, 3, 3);
    CHECK(commutator(a, b).approx_equal(-commutator(b, a), 1e-12));
    CHECK(commutator(a, a).is_zero());
  }
}

TEST_CASE("Jacobi identity under the matrix realization") {
  std::mt19937 rng(31);
  const auto sites = chain_sites(3);
  const ModeIndex modes = all_modes(sites);
  for (int trial = 0; trial < 20; ++trial) {
    const OpExpr a = random_expr(rng, sites, 2);
    const OpExpr b = random_expr(rng, sites, 2);
    const OpExpr c = random_expr(rng, sites, 2);
    const OpExpr jacobi = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) +
                          commutator(c, commutator(a, b));
    CHECK(max_abs(to_matrix(jacobi, modes)) < 1e-12);
  }
}

TEST_CASE("commutator is bilinear") {
  std::mt19937 rng(37);
  const auto sites = chain_sites(3);
  const ModeIndex modes = all_modes(sites);
  for (int trial = 0; trial < 10; ++trial) {
    const OpExpr a = random_expr(rng, sites, 2);
    const OpExpr b1 = random_expr(rng, sites, 2);
    const OpExpr b2 = random_expr(rng, sites, 2);
    const Eigen::MatrixXd lhs = to_matrix(commutator(a, b1 + 2.0 * b2), modes);
    const Eigen::MatrixXd rhs = to_matrix(commutator(a, b1) + 2.0 * commutator(a, b2), modes);
    CHECK(max_abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("canonical form is idempotent") {
  std::mt19937 rng(3);
  const auto sites = chain_sites(4);
  for (int trial = 0; trial < 20; ++trial) {
    const OpExpr a = random_expr(rng, sites, 4, 3);
    const std::vector<Term> terms(a.terms().begin(), a.terms().end());
    CHECK(OpExpr::from_terms(terms) == a);
  }
}

TEST_CASE("elementary leaf commutators") {
  const Site s0{0}, s1{1}, s2{2};
  SUBCASE("hoppings sharing a site give a signed hopping") {
    const OpExpr c = commutator(OpExpr::hopping(s0, s1, Spin::up), OpExpr::hopping(s1, s2, Spin::up));
    CHECK(c == OpExpr::antisymm_hopping(s0, s2, Spin::up));
  }
  SUBCASE("different spins commute") {
    CHECK(commutator(OpExpr::hopping(s0, s1, Spin::up), OpExpr::hopping(s0, s1, Spin::down)).is_zero());
  }
  SUBCASE("number and hopping") {
    const OpExpr c = commutator(OpExpr::number(s0, Spin::up), OpExpr::hopping(s0, s1, Spin::up));
    CHECK(c == OpExpr::antisymm_hopping(s0, s1, Spin::up));
  }
  SUBCASE("self commutator vanishes") {
    const OpExpr h = OpExpr::hopping(s0, s1, Spin::up) + OpExpr::number(s1, Spin::down);
    CHECK(commutator(h, h).is_zero());
  }
}

TEST_CASE("constructors normalize their arguments") {
  CHECK_THROWS_AS(OpExpr::hopping(Site{1}, Site{1}, Spin::up), std::invalid_argument);
  CHECK(OpExpr::antisymm_hopping(Site{1}, Site{1}, Spin::up).is_zero());
  CHECK(OpExpr::antisymm_hopping(Site{2}, Site{0}, Spin::up) == -OpExpr::antisymm_hopping(Site{0}, Site{2}, Spin::up));
  CHECK(OpExpr::hopping(Site{2}, Site{0}, Spin::up) == OpExpr::hopping(Site{0}, Site{2}, Spin::up));
  const OpExpr n = OpExpr::number(Site{0}, Spin::up);
  CHECK(n * n == n);
}

TEST_CASE("translation commutes with the commutator") {
  std::mt19937 rng(8);
  const auto sites = chain_sites(3);
  const Site d{5};
  for (int trial = 0; trial < 10; ++trial) {
    const OpExpr a = random_expr(rng, sites, 2);
    const OpExpr b = random_expr(rng, sites, 2);
    CHECK(translate(commutator(a, b), d).approx_equal(commutator(translate(a, d), translate(b, d)), 1e-12));
  }
}

TEST_CASE("quadratic detection and supports") {
  const OpExpr q = OpExpr::hopping(Site{0}, Site{1}, Spin::up) + OpExpr::number(Site{2}, Spin::down);
  CHECK(q.is_quadratic());
  CHECK(q.support().size() == 3);
  CHECK(q.site_support().size() == 3);
  CHECK_FALSE((q * q).is_quadratic());
  CHECK(OpExpr{}.kind() == OpExpr::Kind::zero);
}
