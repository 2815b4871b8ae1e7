#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "fhb/product_formula.hpp"

using namespace fhb;

namespace {

std::vector<Rational> exact_multiset(const std::vector<TupleTerm>& terms) {
  std::vector<Rational> out;
  for (const TupleTerm& t : terms) {
    REQUIRE(t.exact.has_value());
    out.push_back(*t.exact);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Rational> sorted(std::vector<Rational> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

double coefficient_of(const std::vector<TupleTerm>& terms, const std::vector<int>& gammas) {
  double c = 0.0;
  for (const TupleTerm& t : terms) {
    if (t.tuple.gammas == gammas) c += t.coeff;
  }
  return c;
}

}  // namespace

TEST_CASE("merged factor counts") {
  CHECK(strang(2).size() == 3);
  CHECK(strang(3).size() == 5);
  CHECK(suzuki(4, 2).size() == 11);
  CHECK(suzuki(4, 3).size() == 21);
  CHECK(suzuki(4, 4).size() == 31);
  CHECK(suzuki(6, 2).size() == 51);
}

TEST_CASE("coefficients of each term sum to one") {
  for (const ProductFormula& f : {strang(2), strang(3), suzuki(4, 3), suzuki(6, 2)}) {
    CHECK_NOTHROW(f.check_consistency(1e-12));
    for (std::size_t k = 1; k < f.factors.size(); ++k) CHECK(f.factors[k].gamma != f.factors[k - 1].gamma);
  }
}

TEST_CASE("Strang coefficients are exact rationals") {
  const ProductFormula f = strang(3);
  const std::vector<Rational> expected{{1, 2}, {1, 2}, {1}, {1, 2}, {1, 2}};
  for (std::size_t k = 0; k < f.factors.size(); ++k) {
    REQUIRE(f.factors[k].exact.has_value());
    CHECK(*f.factors[k].exact == expected[k]);
  }
  CHECK(f.factors[2].gamma == 2);
}

TEST_CASE("merging is invariant under splitting factors") {
  std::vector<Factor> raw{{0.25, 0, Rational(1, 4)}, {0.25, 0, Rational(1, 4)}, {1.0, 1, Rational(1)},
                          {0.0, 0, Rational(0)},     {0.5, 1, Rational(1, 2)},  {0.5, 0, Rational(1, 2)}};
  const std::vector<Factor> merged = merge_factors(raw);
  REQUIRE(merged.size() == 3);
  CHECK(*merged[0].exact == Rational(1, 2));
  CHECK(*merged[1].exact == Rational(3, 2));
  CHECK(merged[2].gamma == 0);
  const std::vector<Factor> again = merge_factors(merged);
  CHECK(again.size() == merged.size());
}

TEST_CASE("order conditions from log-log slopes") {
  CHECK(verify_order(strang(2), 5) == doctest::Approx(3.0).epsilon(0.05));
  CHECK(verify_order(strang(3), 5) == doctest::Approx(3.0).epsilon(0.05));
  CHECK(verify_order(suzuki(4, 2), 5, 1e-2, 1e-1) == doctest::Approx(5.0).epsilon(0.04));
  CHECK(verify_order(suzuki(4, 3), 5, 1e-2, 1e-1) == doctest::Approx(5.0).epsilon(0.04));
  CHECK(verify_order(suzuki(6, 2), 3, 1e-1, 3e-1) == doctest::Approx(7.0).epsilon(0.04));
}

TEST_CASE("two-term Strang bound prefactors") {
  const ProductFormula f = strang(2);
  const auto terms = expand_terms(f, theorem1_terms(f, default_split(f)));
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].tuple.to_string() == "[H1,[H1,H2]]");
  CHECK(*terms[0].exact == Rational(1, 24));
  CHECK(terms[1].tuple.to_string() == "[H2,[H1,H2]]");
  CHECK(*terms[1].exact == Rational(1, 12));
}

TEST_CASE("three-term Strang bound prefactor multiset") {
  const ProductFormula f = strang(3);
  const auto terms = expand_terms(f, theorem1_terms(f, 3));
  const std::vector<Rational> expected{{1, 24}, {1, 8}, {1, 12}, {1, 24}, {1, 12}, {1, 12}, {1, 24}, {1, 12}};
  CHECK(exact_multiset(terms) == sorted(expected));
  CHECK(coefficient_of(terms, {1, 0, 1}) == doctest::Approx(1.0 / 8.0));

  const auto sharp = prop10_terms(3);
  const std::vector<Rational> sharp_expected{{1, 24}, {1, 12}, {1, 12}, {1, 24}, {1, 12}, {1, 12}, {1, 24}, {1, 12}};
  CHECK(exact_multiset(sharp) == sorted(sharp_expected));
  CHECK(coefficient_of(sharp, {1, 0, 1}) == doctest::Approx(1.0 / 12.0));
  for (std::size_t k = 0; k < terms.size(); ++k) CHECK(sharp[k].tuple == terms[k].tuple);
}

TEST_CASE("grouped sharpened bound covers the expanded tuples") {
  const auto grouped = prop10_grouped(3);
  std::vector<std::vector<int>> tuples;
  for (const GroupedStrangTerm& g : grouped) {
    for (int o : g.outer) {
      for (int m : g.middle) tuples.push_back({o, m, g.inner});
    }
  }
  CHECK(tuples.size() >= prop10_terms(3).size());
}

TEST_CASE("split index changes the fourth-order prefactors") {
  const ProductFormula f = suzuki(4, 3);
  const std::vector<int> tuple{2, 2, 2, 1, 2};
  const double at10 = coefficient_of(expand_terms(f, theorem1_terms(f, 10)), tuple);
  const double at11 = coefficient_of(expand_terms(f, theorem1_terms(f, 11)), tuple);
  CHECK(at10 == doctest::Approx(0.0628).epsilon(1e-3));
  CHECK(at11 == doctest::Approx(0.03164).epsilon(1e-3));
  CHECK_THROWS_AS(theorem1_terms(f, 0), std::invalid_argument);
  CHECK_THROWS_AS(theorem1_terms(f, 22), std::invalid_argument);
}

TEST_CASE("bound terms carry the multinomial prefactor") {
  const ProductFormula f = strang(2);
  for (int s = 1; s <= f.size(); ++s) {
    for (const BoundTerm& t : theorem1_terms(f, s)) {
      CHECK(t.prefactor > 0.0);
      CHECK(t.target >= 2);
      CHECK(t.target <= f.size());
      int power = 0;
      for (const ChainLink& l : t.chain) power += l.power;
      CHECK(power == f.order);
    }
  }
}

TEST_CASE("stage tables load into formulas") {
  const auto path = write_temp("fhb_strang_table.txt",
                               "# two-term Strang\nname st\nterms 2\norder 2\nstage 1/2 1\nstage 1/2 0\n");
  const LoadedFormula lf = load_table(path);
  CHECK(lf.order == 2);
  CHECK(lf.name == "st");
  const ProductFormula f = custom(lf.table, lf.order, lf.name);
  const ProductFormula ref = strang(2);
  REQUIRE(f.size() == ref.size());
  for (int k = 0; k < f.size(); ++k) {
    CHECK(f.factors[k].gamma == ref.factors[k].gamma);
    CHECK(f.factors[k].coeff == doctest::Approx(ref.factors[k].coeff));
  }
  const ProductFormula by_name = formula_by_name("custom:" + path.string(), 2);
  CHECK(by_name.size() == 3);
  CHECK_THROWS_AS(formula_by_name("custom:" + path.string(), 3), std::invalid_argument);
  std::filesystem::remove(path);
}

TEST_CASE("stage permutations reorder the terms") {
  const auto path = write_temp("fhb_perm_table.txt", "terms 2\norder 1\nstage 1 1\nperm 2 1\n");
  const ProductFormula f = formula_by_name("custom:" + path.string(), 2);
  REQUIRE(f.size() == 2);
  CHECK(f.factors[0].gamma == 1);
  CHECK(f.factors[1].gamma == 0);
  std::filesystem::remove(path);
}

TEST_CASE("malformed stage tables are rejected") {
  const auto bad_sum = write_temp("fhb_bad_sum.txt", "terms 2\norder 2\nstage 1/2 1\n");
  CHECK_THROWS_AS(formula_by_name("custom:" + bad_sum.string(), 2), std::invalid_argument);
  const auto bad_token = write_temp("fhb_bad_token.txt", "terms 2\norder 2\nstage x 1\n");
  CHECK_THROWS_AS(load_table(bad_token), std::invalid_argument);
  CHECK_THROWS(load_table("/nonexistent/table.txt"));
  CHECK_THROWS_AS(formula_by_name("yoshida", 2), std::invalid_argument);
  std::filesystem::remove(bad_sum);
  std::filesystem::remove(bad_token);
}
