#pragma once

#include <random>
#include <vector>

#include "fhb/norm.hpp"
#include "fhb/op_expr.hpp"

namespace fhb::testing {

inline std::vector<Site> chain_sites(int n) {
  std::vector<Site> out;
  for (int k = 0; k < n; ++k) out.push_back(Site{k});
  return out;
}

/// Random leaf on the given sites, uniformly over the three kinds.
inline OpExpr random_leaf(std::mt19937& rng, const std::vector<Site>& sites) {
  std::uniform_int_distribution<int> kind(0, 2), site(0, static_cast<int>(sites.size()) - 1), spin(0, 1);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  const Spin s = spin(rng) ? Spin::down : Spin::up;
  const int i = site(rng);
  int j = site(rng);
  while (j == i) j = site(rng);
  switch (kind(rng)) {
    case 0:
      return OpExpr::hopping(sites[i], sites[j], s, coeff(rng));
    case 1:
      return OpExpr::antisymm_hopping(sites[i], sites[j], s, coeff(rng));
    default:
      return OpExpr::number(sites[i], s, coeff(rng));
  }
}

/// Sum of `terms` random products of one to `max_factors` leaves.
inline OpExpr random_expr(std::mt19937& rng, const std::vector<Site>& sites, int terms, int max_factors = 2) {
  std::uniform_int_distribution<int> len(1, max_factors);
  OpExpr out;
  for (int k = 0; k < terms; ++k) {
    std::vector<OpExpr> factors;
    for (int f = len(rng); f > 0; --f) factors.push_back(random_leaf(rng, sites));
    out += OpExpr::product(factors);
  }
  return out;
}

inline ModeIndex all_modes(const std::vector<Site>& sites) {
  std::vector<Mode> modes;
  for (const Site& s : sites) {
    modes.push_back({s, Spin::up});
    modes.push_back({s, Spin::down});
  }
  return ModeIndex(std::move(modes));
}

}  // namespace fhb::testing
