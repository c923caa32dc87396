#ifndef MW_FIELD_HPP
#define MW_FIELD_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mw/errors.hpp"

namespace mw {

// Regular ny-by-nx grid with spacings dy, dx (length units). Row-major
// storage everywhere: index = iy * nx + ix, physical (y, x) = (iy dy, ix dx).
struct GridSpec {
  int ny = 0;
  int nx = 0;
  double dy = 1.0;
  double dx = 1.0;

  void validate() const {
    if (ny < 1 || nx < 1 || ny * nx < 4) throw DomainError("GridSpec: need ny*nx >= 4");
    if (!(std::isfinite(dy) && dy > 0.0) || !(std::isfinite(dx) && dx > 0.0))
      throw DomainError("GridSpec: spacings must be positive and finite");
  }
  int size() const { return ny * nx; }
  bool same_shape(const GridSpec& o) const { return ny == o.ny && nx == o.nx; }
  bool operator==(const GridSpec& o) const {
    return ny == o.ny && nx == o.nx && dy == o.dy && dx == o.dx;
  }
};

// Real-valued data on the grid (an observed or simulated realization).
struct Field {
  GridSpec grid;
  std::vector<double> values;

  double& at(int iy, int ix) { return values[static_cast<std::size_t>(iy * grid.nx + ix)]; }
  double at(int iy, int ix) const { return values[static_cast<std::size_t>(iy * grid.nx + ix)]; }
};

// Real values on the DFT wavenumber grid of `grid` (DC at index (0,0), axes
// 2 pi periodic with the usual signed-frequency wrapping past n/2).
struct SpectralField {
  GridSpec grid;
  std::vector<double> values;

  double& at(int iy, int ix) { return values[static_cast<std::size_t>(iy * grid.nx + ix)]; }
  double at(int iy, int ix) const { return values[static_cast<std::size_t>(iy * grid.nx + ix)]; }
};

// Values over signed lag offsets, (2 ny - 1) x (2 nx - 1), lag (0,0) at the
// center entry.
struct LagField {
  GridSpec grid;
  std::vector<double> values;

  int rows() const { return 2 * grid.ny - 1; }
  int cols() const { return 2 * grid.nx - 1; }
  double& at(int jy, int jx) {
    return values[static_cast<std::size_t>((jy + grid.ny - 1) * cols() + (jx + grid.nx - 1))];
  }
  double at(int jy, int jx) const {
    return values[static_cast<std::size_t>((jy + grid.ny - 1) * cols() + (jx + grid.nx - 1))];
  }
};

inline int signed_index(int i, int n) { return 2 * i <= n ? i : i - n; }

inline double wavenumber_y(const GridSpec& g, int iy) {
  return 2.0 * std::numbers::pi * signed_index(iy, g.ny) / (g.ny * g.dy);
}

inline double wavenumber_x(const GridSpec& g, int ix) {
  return 2.0 * std::numbers::pi * signed_index(ix, g.nx) / (g.nx * g.dx);
}

inline double wavenumber_norm(const GridSpec& g, int iy, int ix) {
  return std::hypot(wavenumber_y(g, iy), wavenumber_x(g, ix));
}

inline bool is_dc(int iy, int ix) { return iy == 0 && ix == 0; }

inline bool on_nyquist(const GridSpec& g, int iy, int ix) {
  return (g.ny % 2 == 0 && iy == g.ny / 2) || (g.nx % 2 == 0 && ix == g.nx / 2);
}

// Wavenumbers entering the likelihood sums: DC always out, Nyquist
// rows/columns in unless disabled.
std::vector<std::uint8_t> likelihood_inclusion_mask(const GridSpec& g, bool include_nyquist);

// Wavenumbers entering the residual distribution tests: DC and Nyquist out,
// and only one member of each Hermitian pair {k, -k} kept (a real field's
// periodogram repeats the other).
std::vector<std::uint8_t> test_inclusion_mask(const GridSpec& g);

}  // namespace mw

#endif
