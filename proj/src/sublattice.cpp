#include "fhb/sublattice.hpp"

#include <cmath>
#include <stdexcept>

namespace fhb {

namespace {

long minor_det(const std::vector<Site>& b, const std::vector<int>& rows) {
  const int r = static_cast<int>(b.size());
  auto m = [&](int row, int col) { return static_cast<long>(b[col].x[rows[row]]); };
  if (r == 1) return m(0, 0);
  if (r == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

}  // namespace

SubLattice::SubLattice(std::vector<Site> unit_vectors) : basis_(std::move(unit_vectors)) {
  if (basis_.empty() || basis_.size() > kMaxDim) throw std::invalid_argument("sublattice needs 1..3 unit vectors");
  const int d = basis_.front().dim;
  for (const Site& b : basis_) {
    if (b.dim != d) throw std::invalid_argument("unit vectors differ in dimension");
  }
  const int r = rank();
  if (r > d) throw std::invalid_argument("more unit vectors than coordinates");
  // choose r coordinate rows with a nonzero minor
  std::vector<int> rows(r);
  auto search = [&](auto&& self, int pos, int start) -> bool {
    if (pos == r) {
      det_ = minor_det(basis_, rows);
      return det_ != 0;
    }
    for (int k = start; k < d; ++k) {
      rows[pos] = k;
      if (self(self, pos + 1, k + 1)) return true;
    }
    return false;
  };
  if (!search(search, 0, 0)) throw std::invalid_argument("unit vectors are linearly dependent");
  rows_ = rows;
}

void SubLattice::solve(const Site& x, double* c) const {
  const int r = rank();
  for (int col = 0; col < r; ++col) {
    std::vector<Site> replaced = basis_;
    replaced[col] = x;
    c[col] = static_cast<double>(minor_det(replaced, rows_)) / static_cast<double>(det_);
  }
}

std::optional<std::vector<int>> SubLattice::coefficients(const Site& d) const {
  if (d.dim != dim()) throw std::invalid_argument("dimension mismatch in sublattice membership");
  const int r = rank();
  std::vector<int> out(r);
  for (int col = 0; col < r; ++col) {
    std::vector<Site> replaced = basis_;
    replaced[col] = d;
    const long num = minor_det(replaced, rows_);
    if (num % det_ != 0) return std::nullopt;
    out[col] = static_cast<int>(num / det_);
  }
  if (point(out) != d) return std::nullopt;
  return out;
}

Site SubLattice::point(const std::vector<int>& coeffs) const {
  Site p = Site::origin(dim());
  for (int k = 0; k < rank(); ++k) p = p + coeffs[k] * basis_[k];
  return p;
}

Site SubLattice::cell_of(const Site& x) const {
  double c[kMaxDim] = {};
  solve(x, c);
  std::vector<int> fl(rank());
  for (int k = 0; k < rank(); ++k) fl[k] = static_cast<int>(std::floor(c[k] + 1e-9));
  return point(fl);
}

std::vector<Site> SubLattice::window(int radius) const {
  std::vector<Site> out;
  std::vector<int> c(rank(), -radius);
  for (;;) {
    out.push_back(point(c));
    int k = 0;
    while (k < rank() && ++c[k] > radius) c[k++] = -radius;
    if (k == rank()) break;
  }
  return out;
}

}  // namespace fhb
