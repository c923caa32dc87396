#ifndef MW_GRID_HPP
#define MW_GRID_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mw/field.hpp"

namespace mw {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Segment2 {
  Point2 a, b;
};

// Observation window w(x) in [0,1] over a grid; k_sum = sum of weights.
struct SamplingWindow {
  GridSpec grid;
  std::vector<double> weights;
  double k_sum = 0.0;

  double at(int iy, int ix) const { return weights[static_cast<std::size_t>(iy * grid.nx + ix)]; }
  bool is_binary() const;
  void validate() const;
};

struct FullPattern {};
struct RandomDeletionPattern {
  double fraction_observed = 1.0;
  std::uint64_t seed = 0;
};
struct CheckerboardPattern {
  int parity = 0;
  int period = 1;
};
struct PolygonInteriorPattern {
  std::vector<Point2> path;  // physical units, closed or implicitly closed
};
struct PolygonExteriorPattern {
  std::vector<Point2> path;
};
struct TracksPattern {
  std::vector<Segment2> segments;  // physical units
  double width = 0.0;              // 0 -> one grid cell
};
struct FromMaskPattern {
  std::vector<double> weights;  // ny*nx values in [0,1]
};

using WindowPattern = std::variant<FullPattern, RandomDeletionPattern, CheckerboardPattern,
                                   PolygonInteriorPattern, PolygonExteriorPattern, TracksPattern,
                                   FromMaskPattern>;

SamplingWindow make_window(const GridSpec& grid, const WindowPattern& pattern);

// "full", "random:<fraction>", "checkerboard:<parity>:<period>",
// "polygon-interior:<csv>", "polygon-exterior:<csv>", "tracks:<csv>[:width]",
// "mask:<path>" (CSV of weights or an MWGRID1 window).
WindowPattern parse_window_pattern(const std::string& text, std::uint64_t seed);

// Cosine ramp on the encompassing rectangular perimeter, acting only within
// `fraction` of each axis.
struct PerimeterCosine {
  double fraction = 0.05;
};
// Cosine^2 kernel convolved over the support and re-masked, repeated
// `iterations` times; smooths irregular mask boundaries and their corners.
struct MaskEdgeCosine {
  int iterations = 3;
  int half_width = 1;
};
using SmoothStyle = std::variant<PerimeterCosine, MaskEdgeCosine>;

SamplingWindow smooth_boundary(const SamplingWindow& window, const SmoothStyle& style);

// W(y) = sum_x w(x) w(x+y) over all signed lags, exact (zero-padded FFT;
// integer-exact for indicator windows).
LagField window_autocorrelation(const SamplingWindow& window);

// |w(k)|^2 of the zero-padded window under the plain unnormalized DFT, so
// the value at k = 0 is (sum w)^2. Output grid is (pad * ny) x (pad * nx)
// with the parent spacings.
SpectralField spectral_window(const SamplingWindow& window, int pad_factor = 2);

}  // namespace mw

#endif
