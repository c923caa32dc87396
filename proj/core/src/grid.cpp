#include "mw/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>

#include "mw/fft.hpp"

namespace mw {

namespace {

constexpr double kPi = std::numbers::pi;

double weight_sum(const std::vector<double>& w) {
  return std::accumulate(w.begin(), w.end(), 0.0);
}

SamplingWindow finish_window(const GridSpec& grid, std::vector<double> weights) {
  for (double v : weights)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("SamplingWindow: weights must lie in [0,1]");
  SamplingWindow w{grid, std::move(weights), 0.0};
  w.k_sum = weight_sum(w.weights);
  if (w.k_sum <= 0.0) throw EmptyWindowError("SamplingWindow: window has no observed samples");
  return w;
}

// --- polygon helpers (physical coordinates, even-odd rule) ---

std::vector<Point2> closed_path(const std::vector<Point2>& path) {
  if (path.size() < 3) throw GeometryError("polygon: need at least 3 vertices");
  std::vector<Point2> p = path;
  if (p.front().x == p.back().x && p.front().y == p.back().y) p.pop_back();
  if (p.size() < 3) throw GeometryError("polygon: need at least 3 distinct vertices");
  return p;
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_properly_intersect(const Point2& a, const Point2& b, const Point2& c,
                                 const Point2& d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

void require_simple(const std::vector<Point2>& p) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;  // shared endpoint
      if (segments_properly_intersect(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]))
        throw GeometryError("polygon: path is self-intersecting");
    }
  }
}

bool point_in_polygon(const std::vector<Point2>& p, double x, double y) {
  bool inside = false;
  const std::size_t n = p.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const bool straddles = (p[i].y > y) != (p[j].y > y);
    if (straddles) {
      const double x_cross = p[j].x + (y - p[j].y) / (p[i].y - p[j].y) * (p[i].x - p[j].x);
      if (x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance(double x, double y, const Segment2& s) {
  const double vx = s.b.x - s.a.x, vy = s.b.y - s.a.y;
  const double wx = x - s.a.x, wy = y - s.a.y;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(x - (s.a.x + t * vx), y - (s.a.y + t * vy));
}

std::vector<double> polygon_mask(const GridSpec& grid, const std::vector<Point2>& path,
                                 bool interior) {
  const auto p = closed_path(path);
  require_simple(p);
  std::vector<double> w(static_cast<std::size_t>(grid.size()), 0.0);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const bool in = point_in_polygon(p, ix * grid.dx, iy * grid.dy);
      w[static_cast<std::size_t>(iy * grid.nx + ix)] = (in == interior) ? 1.0 : 0.0;
    }
  return w;
}

struct MakeWindowVisitor {
  const GridSpec& grid;

  std::vector<double> operator()(const FullPattern&) const {
    return std::vector<double>(static_cast<std::size_t>(grid.size()), 1.0);
  }

  std::vector<double> operator()(const RandomDeletionPattern& p) const {
    if (!(p.fraction_observed > 0.0 && p.fraction_observed <= 1.0))
      throw DomainError("random_deletion: fraction_observed must be in (0,1]");
    const int n = grid.size();
    const int keep = std::max(1, static_cast<int>(std::lround(p.fraction_observed * n)));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    // explicit Fisher-Yates so the result is identical across platforms
    std::mt19937_64 gen(p.seed);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(gen() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < keep; ++i) w[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1.0;
    return w;
  }

  std::vector<double> operator()(const CheckerboardPattern& p) const {
    if (p.period < 1) throw DomainError("checkerboard: period must be >= 1");
    if (p.parity != 0 && p.parity != 1) throw DomainError("checkerboard: parity must be 0 or 1");
    std::vector<double> w(static_cast<std::size_t>(grid.size()), 0.0);
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix)
        if (((iy / p.period + ix / p.period) & 1) == p.parity)
          w[static_cast<std::size_t>(iy * grid.nx + ix)] = 1.0;
    return w;
  }

  std::vector<double> operator()(const PolygonInteriorPattern& p) const {
    return polygon_mask(grid, p.path, true);
  }

  std::vector<double> operator()(const PolygonExteriorPattern& p) const {
    return polygon_mask(grid, p.path, false);
  }

  std::vector<double> operator()(const TracksPattern& p) const {
    if (p.segments.empty()) throw DomainError("tracks: need at least one segment");
    const double width = p.width > 0.0 ? p.width : std::min(grid.dy, grid.dx);
    std::vector<double> w(static_cast<std::size_t>(grid.size()), 0.0);
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix) {
        const double x = ix * grid.dx, y = iy * grid.dy;
        for (const auto& s : p.segments) {
          if (point_segment_distance(x, y, s) <= 0.5 * width) {
            w[static_cast<std::size_t>(iy * grid.nx + ix)] = 1.0;
            break;
          }
        }
      }
    return w;
  }

  std::vector<double> operator()(const FromMaskPattern& p) const {
    if (p.weights.size() != static_cast<std::size_t>(grid.size()))
      throw ShapeMismatchError("from_mask: weight count does not match grid");
    return p.weights;
  }
};

}  // namespace

bool SamplingWindow::is_binary() const {
  for (double v : weights)
    if (v != 0.0 && v != 1.0) return false;
  return true;
}

void SamplingWindow::validate() const {
  grid.validate();
  if (weights.size() != static_cast<std::size_t>(grid.size()))
    throw ShapeMismatchError("SamplingWindow: weight count does not match grid");
  if (k_sum <= 0.0) throw EmptyWindowError("SamplingWindow: empty window");
}

SamplingWindow make_window(const GridSpec& grid, const WindowPattern& pattern) {
  grid.validate();
  return finish_window(grid, std::visit(MakeWindowVisitor{grid}, pattern));
}

SamplingWindow smooth_boundary(const SamplingWindow& window, const SmoothStyle& style) {
  window.validate();
  const GridSpec& g = window.grid;
  std::vector<double> w = window.weights;

  if (std::holds_alternative<PerimeterCosine>(style)) {
    const auto& pc = std::get<PerimeterCosine>(style);
    if (!(pc.fraction > 0.0 && pc.fraction <= 0.5))
      throw DomainError("perimeter_cosine: fraction must be in (0, 0.5]");
    auto ramp = [](int i, int n, double fraction) {
      const int len = std::max(1, static_cast<int>(std::lround(fraction * n)));
      const int from_edge = std::min(i, n - 1 - i);
      if (from_edge >= len) return 1.0;
      return 0.5 * (1.0 - std::cos(kPi * (from_edge + 1.0) / (len + 1.0)));
    };
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        w[static_cast<std::size_t>(iy * g.nx + ix)] *=
            ramp(iy, g.ny, pc.fraction) * ramp(ix, g.nx, pc.fraction);
  } else {
    const auto& mc = std::get<MaskEdgeCosine>(style);
    if (mc.iterations < 1) throw DomainError("mask_edge_cosine: iterations must be >= 1");
    if (mc.half_width < 1) throw DomainError("mask_edge_cosine: half_width must be >= 1");
    std::vector<double> kernel(static_cast<std::size_t>(2 * mc.half_width + 1));
    double ksum = 0.0;
    for (int j = -mc.half_width; j <= mc.half_width; ++j) {
      const double c = std::cos(0.5 * kPi * j / (mc.half_width + 1.0));
      kernel[static_cast<std::size_t>(j + mc.half_width)] = c * c;
      ksum += c * c;
    }
    for (auto& v : kernel) v /= ksum;
    const std::vector<double> support = window.weights;
    std::vector<double> tmp(w.size());
    for (int it = 0; it < mc.iterations; ++it) {
      // separable convolution, zero beyond the grid
      for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
          double s = 0.0;
          for (int j = -mc.half_width; j <= mc.half_width; ++j) {
            const int jx = ix + j;
            if (jx >= 0 && jx < g.nx)
              s += kernel[static_cast<std::size_t>(j + mc.half_width)] *
                   w[static_cast<std::size_t>(iy * g.nx + jx)];
          }
          tmp[static_cast<std::size_t>(iy * g.nx + ix)] = s;
        }
      for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
          double s = 0.0;
          for (int j = -mc.half_width; j <= mc.half_width; ++j) {
            const int jy = iy + j;
            if (jy >= 0 && jy < g.ny)
              s += kernel[static_cast<std::size_t>(j + mc.half_width)] *
                   tmp[static_cast<std::size_t>(jy * g.nx + ix)];
          }
          const std::size_t idx = static_cast<std::size_t>(iy * g.nx + ix);
          w[idx] = support[idx] > 0.0 ? std::min(1.0, s) : 0.0;
        }
    }
    const bool any_plateau = std::any_of(w.begin(), w.end(), [](double v) { return v >= 1.0 - 1e-12; });
    if (!any_plateau)
      throw DegenerateWindowError("mask_edge_cosine: no interior plateau survives smoothing");
  }
  return finish_window(g, std::move(w));
}

LagField window_autocorrelation(const SamplingWindow& window) {
  window.validate();
  const GridSpec& g = window.grid;
  const int py = fft::next_pow2(2 * g.ny - 1);
  const int px = fft::next_pow2(2 * g.nx - 1);
  std::vector<std::complex<double>> pad(static_cast<std::size_t>(py) * px, 0.0);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      pad[static_cast<std::size_t>(iy * px + ix)] = window.at(iy, ix);
  auto spec = fft::forward2d(py, px, pad);
  for (auto& v : spec) v = std::norm(v);
  auto corr = fft::backward2d(py, px, spec);
  const double scale = 1.0 / (static_cast<double>(py) * px);

  LagField out{g, std::vector<double>(static_cast<std::size_t>(2 * g.ny - 1) * (2 * g.nx - 1), 0.0)};
  const bool binary = window.is_binary();
  for (int jy = -(g.ny - 1); jy <= g.ny - 1; ++jy)
    for (int jx = -(g.nx - 1); jx <= g.nx - 1; ++jx) {
      const int wy = (jy + py) % py;
      const int wx = (jx + px) % px;
      double v = corr[static_cast<std::size_t>(wy * px + wx)].real() * scale;
      if (binary) v = std::round(v);  // counts of overlapping ones
      out.at(jy, jx) = v;
    }
  // enforce the exact W(-y) = W(y) symmetry of a real autocorrelation
  for (int jy = -(g.ny - 1); jy <= g.ny - 1; ++jy)
    for (int jx = -(g.nx - 1); jx <= g.nx - 1; ++jx) {
      if (jy < 0 || (jy == 0 && jx < 0)) continue;
      const double sym = 0.5 * (out.at(jy, jx) + out.at(-jy, -jx));
      out.at(jy, jx) = sym;
      out.at(-jy, -jx) = sym;
    }
  return out;
}

SpectralField spectral_window(const SamplingWindow& window, int pad_factor) {
  window.validate();
  if (pad_factor < 1) throw DomainError("spectral_window: pad_factor must be >= 1");
  const GridSpec& g = window.grid;
  const int py = pad_factor * g.ny;
  const int px = pad_factor * g.nx;
  std::vector<std::complex<double>> pad(static_cast<std::size_t>(py) * px, 0.0);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      pad[static_cast<std::size_t>(iy * px + ix)] = window.at(iy, ix);
  auto spec = fft::forward2d(py, px, pad);
  SpectralField out{GridSpec{py, px, g.dy, g.dx}, std::vector<double>(spec.size())};
  for (std::size_t i = 0; i < spec.size(); ++i) out.values[i] = std::norm(spec[i]);
  return out;
}

std::vector<std::uint8_t> likelihood_inclusion_mask(const GridSpec& g, bool include_nyquist) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.size()), 1);
  mask[0] = 0;  // DC
  if (!include_nyquist) {
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        if (on_nyquist(g, iy, ix)) mask[static_cast<std::size_t>(iy * g.nx + ix)] = 0;
  }
  return mask;
}

std::vector<std::uint8_t> test_inclusion_mask(const GridSpec& g) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.size()), 0);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      if (is_dc(iy, ix) || on_nyquist(g, iy, ix)) continue;
      const int cy = (g.ny - iy) % g.ny;
      const int cx = (g.nx - ix) % g.nx;
      // keep one representative of each Hermitian pair
      if (std::make_pair(iy, ix) <= std::make_pair(cy, cx))
        mask[static_cast<std::size_t>(iy * g.nx + ix)] = 1;
    }
  return mask;
}

}  // namespace mw
