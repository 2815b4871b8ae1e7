#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace fhb {

inline constexpr int kMaxDim = 3;

/// Integer lattice coordinates. Unused trailing entries stay zero so that
/// comparison is plain lexicographic order on the coordinate array.
struct Site {
  std::array<int, kMaxDim> x{};
  int dim = 1;

  Site() = default;
  Site(std::initializer_list<int> coords) : dim(static_cast<int>(coords.size())) {
    if (coords.size() == 0 || coords.size() > kMaxDim) {
      throw std::invalid_argument("site dimension must be 1, 2 or 3");
    }
    int k = 0;
    for (int c : coords) x[k++] = c;
  }

  static Site origin(int dim) {
    Site s;
    s.dim = dim;
    return s;
  }

  int operator[](int k) const { return x[k]; }
  int& operator[](int k) { return x[k]; }

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;

  friend Site operator+(Site a, const Site& b) {
    if (a.dim != b.dim) throw std::invalid_argument("site dimension mismatch");
    for (int k = 0; k < kMaxDim; ++k) a.x[k] += b.x[k];
    return a;
  }
  friend Site operator-(Site a, const Site& b) {
    if (a.dim != b.dim) throw std::invalid_argument("site dimension mismatch");
    for (int k = 0; k < kMaxDim; ++k) a.x[k] -= b.x[k];
    return a;
  }
  friend Site operator-(Site a) {
    for (int k = 0; k < kMaxDim; ++k) a.x[k] = -a.x[k];
    return a;
  }
  friend Site operator*(int s, Site a) {
    for (int k = 0; k < kMaxDim; ++k) a.x[k] *= s;
    return a;
  }
};

std::string to_string(const Site& s);

enum class Spin : std::uint8_t { up = 0, down = 1 };

constexpr Spin flip(Spin s) { return s == Spin::up ? Spin::down : Spin::up; }
inline constexpr std::array<Spin, 2> kSpins{Spin::up, Spin::down};

std::string to_string(Spin s);

/// A fermionic mode: one spin orientation on one lattice site.
struct Mode {
  Site site;
  Spin spin = Spin::up;

  friend auto operator<=>(const Mode&, const Mode&) = default;
  friend bool operator==(const Mode&, const Mode&) = default;
};

}  // namespace fhb
