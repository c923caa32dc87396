#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "mw/grid.hpp"

using namespace mw;

namespace {

// brute-force W(y) = sum_x w(x) w(x+y)
double autocorr_brute(const SamplingWindow& w, int jy, int jx) {
  double acc = 0.0;
  for (int iy = 0; iy < w.grid.ny; ++iy)
    for (int ix = 0; ix < w.grid.nx; ++ix) {
      const int oy = iy + jy, ox = ix + jx;
      if (oy < 0 || oy >= w.grid.ny || ox < 0 || ox >= w.grid.nx) continue;
      acc += w.at(iy, ix) * w.at(oy, ox);
    }
  return acc;
}

}  // namespace

TEST_CASE("full window") {
  GridSpec g{3, 3, 1.0, 1.0};
  const auto w = make_window(g, FullPattern{});
  CHECK(w.k_sum == 9.0);
  for (double v : w.weights) CHECK(v == 1.0);
  CHECK(w.is_binary());
}

TEST_CASE("random deletion hits the requested fraction and reproduces by seed") {
  GridSpec g{319, 326, 1.0, 1.0};
  const auto w1 = make_window(g, RandomDeletionPattern{2.0 / 3.0, 17});
  const auto w2 = make_window(g, RandomDeletionPattern{2.0 / 3.0, 17});
  const auto w3 = make_window(g, RandomDeletionPattern{2.0 / 3.0, 18});
  CHECK(w1.weights == w2.weights);
  CHECK(w1.weights != w3.weights);
  const double frac = w1.k_sum / g.size();
  CHECK(std::abs(frac - 2.0 / 3.0) < 0.005 * 2.0 / 3.0);
  CHECK_THROWS_AS(make_window(g, RandomDeletionPattern{0.0, 1}), DomainError);
  CHECK_THROWS_AS(make_window(g, RandomDeletionPattern{1.5, 1}), DomainError);
}

TEST_CASE("checkerboard pattern") {
  GridSpec g{4, 4, 1.0, 1.0};
  const auto w = make_window(g, CheckerboardPattern{0, 1});
  CHECK(w.k_sum == 8.0);
  CHECK(w.at(0, 0) == 1.0);
  CHECK(w.at(0, 1) == 0.0);
  const auto w2 = make_window(g, CheckerboardPattern{1, 2});
  CHECK(w2.at(0, 0) == 0.0);
  CHECK(w2.at(0, 2) == 1.0);
  CHECK(w2.at(1, 2) == 1.0);
}

TEST_CASE("polygon interior and exterior are exact complements") {
  GridSpec g{12, 14, 0.5, 0.5};
  const std::vector<Point2> path{{0.9, 0.7}, {5.3, 1.1}, {4.7, 4.9}, {1.2, 4.2}};
  const auto inside = make_window(g, PolygonInteriorPattern{path});
  const auto outside = make_window(g, PolygonExteriorPattern{path});
  CHECK(inside.k_sum + outside.k_sum == g.size());
  for (int i = 0; i < g.size(); ++i)
    CHECK(inside.weights[static_cast<std::size_t>(i)] +
              outside.weights[static_cast<std::size_t>(i)] ==
          1.0);
  CHECK(inside.k_sum > 0.0);
  // a self-intersecting bowtie is rejected
  const std::vector<Point2> bowtie{{0.0, 0.0}, {4.0, 4.0}, {4.0, 0.0}, {0.0, 4.0}};
  CHECK_THROWS_AS(make_window(g, PolygonInteriorPattern{bowtie}), GeometryError);
  CHECK_THROWS_AS(make_window(g, PolygonInteriorPattern{{{0, 0}, {1, 1}}}), GeometryError);
}

TEST_CASE("tracks rasterize within half a width") {
  GridSpec g{9, 9, 1.0, 1.0};
  const auto w = make_window(g, TracksPattern{{{{0.0, 4.0}, {8.0, 4.0}}}, 0.0});
  for (int ix = 0; ix < 9; ++ix) {
    CHECK(w.at(4, ix) == 1.0);
    CHECK(w.at(3, ix) == 0.0);
  }
  const auto wide = make_window(g, TracksPattern{{{{0.0, 4.0}, {8.0, 4.0}}}, 2.0});
  CHECK(wide.at(3, 2) == 1.0);
  CHECK(wide.at(2, 2) == 0.0);
}

TEST_CASE("from_mask validates shape and range") {
  GridSpec g{2, 2, 1.0, 1.0};
  CHECK_THROWS_AS(make_window(g, FromMaskPattern{{1.0, 0.0}}), ShapeMismatchError);
  CHECK_THROWS_AS(make_window(g, FromMaskPattern{{1.0, 0.5, -0.1, 1.0}}), DomainError);
  CHECK_THROWS_AS(make_window(g, FromMaskPattern{{0.0, 0.0, 0.0, 0.0}}), EmptyWindowError);
  const auto w = make_window(g, FromMaskPattern{{1.0, 0.5, 0.25, 0.0}});
  CHECK(w.k_sum == doctest::Approx(1.75));
  CHECK(!w.is_binary());
}

TEST_CASE("perimeter cosine taper") {
  GridSpec g{100, 100, 1.0, 1.0};
  const auto full = make_window(g, FullPattern{});
  const auto smoothed = smooth_boundary(full, PerimeterCosine{0.05});
  CHECK(smoothed.at(0, 0) < 1.0);
  CHECK(smoothed.at(50, 50) == 1.0);
  CHECK(smoothed.k_sum < full.k_sum);
  for (double v : smoothed.weights) CHECK((v >= 0.0 && v <= 1.0));
  // plateau untouched when applied again
  const auto twice = smooth_boundary(smoothed, PerimeterCosine{0.05});
  CHECK(twice.at(50, 50) == 1.0);
  CHECK(twice.at(12, 61) == smoothed.at(12, 61));  // interior point
  CHECK_THROWS_AS(smooth_boundary(full, PerimeterCosine{0.0}), DomainError);
  CHECK_THROWS_AS(smooth_boundary(full, PerimeterCosine{0.7}), DomainError);
}

TEST_CASE("mask edge cosine smoothing") {
  GridSpec g{24, 24, 1.0, 1.0};
  // sock-shaped blob
  const std::vector<Point2> sock{{3.0, 2.5},  {19.5, 3.5}, {20.0, 12.0},
                                 {12.0, 13.0}, {11.0, 20.0}, {4.0, 19.0}};
  const auto mask = make_window(g, PolygonInteriorPattern{sock});
  const auto smoothed = smooth_boundary(mask, MaskEdgeCosine{3, 1});
  CHECK(smoothed.k_sum < mask.k_sum);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(smoothed.weights[static_cast<std::size_t>(i)] >= 0.0);
    CHECK(smoothed.weights[static_cast<std::size_t>(i)] <= 1.0);
    if (mask.weights[static_cast<std::size_t>(i)] == 0.0)
      CHECK(smoothed.weights[static_cast<std::size_t>(i)] == 0.0);  // support preserved
  }
  // profile across a straight stretch of boundary rises monotonically 0 -> 1
  const int iy = 8;
  double prev = 0.0;
  bool reached_one = false;
  for (int ix = 0; ix < g.nx && !reached_one; ++ix) {
    const double v = smoothed.at(iy, ix);
    CHECK(v >= prev - 1e-12);
    prev = v;
    reached_one = v >= 1.0 - 1e-12;
  }
  CHECK(reached_one);
  const auto once = smooth_boundary(mask, MaskEdgeCosine{1, 1});
  int edge = -1;
  for (int ix = 1; ix < g.nx; ++ix)
    if (mask.at(iy, ix - 1) == 0.0 && mask.at(iy, ix) == 1.0) {
      edge = ix;
      break;
    }
  REQUIRE(edge > 0);
  CHECK(once.at(iy, edge) < 1.0);
  CHECK(once.at(iy, edge) > 0.0);
  // a blob too thin to keep a plateau degenerates
  GridSpec tiny{3, 3, 1.0, 1.0};
  std::vector<double> thin(9, 0.0);
  thin[4] = 1.0;
  const auto thin_w = make_window(tiny, FromMaskPattern{thin});
  CHECK_THROWS_AS(smooth_boundary(thin_w, MaskEdgeCosine{3, 1}), DegenerateWindowError);
}

TEST_CASE("window autocorrelation: closed form for the full 2x2 and brute force") {
  GridSpec g{2, 2, 1.0, 1.0};
  const auto w = make_window(g, FullPattern{});
  const auto acf = window_autocorrelation(w);
  CHECK(acf.at(0, 0) == 4.0);
  CHECK(acf.at(0, 1) == 2.0);
  CHECK(acf.at(0, -1) == 2.0);
  CHECK(acf.at(1, 0) == 2.0);
  CHECK(acf.at(-1, 0) == 2.0);
  CHECK(acf.at(1, 1) == 1.0);
  CHECK(acf.at(-1, 1) == 1.0);

  // 3x3 with a zero corner against the double loop
  GridSpec g3{3, 3, 1.0, 1.0};
  std::vector<double> m(9, 1.0);
  m[0] = 0.0;
  const auto w3 = make_window(g3, FromMaskPattern{m});
  const auto acf3 = window_autocorrelation(w3);
  for (int jy = -2; jy <= 2; ++jy)
    for (int jx = -2; jx <= 2; ++jx)
      CHECK(acf3.at(jy, jx) == doctest::Approx(autocorr_brute(w3, jy, jx)).epsilon(1e-12));
  CHECK(acf3.at(0, 0) == w3.k_sum);  // W(0) = K for binary windows

  // non-binary window: W(0) = sum w^2, symmetric
  const auto wf = make_window(g3, FromMaskPattern{{0.2, 1.0, 0.7, 0.5, 1.0, 0.0, 0.9, 0.3, 1.0}});
  const auto acf_f = window_autocorrelation(wf);
  double sq = 0.0;
  for (double v : wf.weights) sq += v * v;
  CHECK(acf_f.at(0, 0) == doctest::Approx(sq).epsilon(1e-13));
  for (int jy = -2; jy <= 2; ++jy)
    for (int jx = -2; jx <= 2; ++jx) {
      CHECK(acf_f.at(jy, jx) == acf_f.at(-jy, -jx));
      CHECK(acf_f.at(jy, jx) == doctest::Approx(autocorr_brute(wf, jy, jx)).epsilon(1e-12));
    }
}

TEST_CASE("complementarity of mask and antimask autocorrelations") {
  GridSpec g{7, 8, 1.0, 1.0};
  const auto mask = make_window(g, RandomDeletionPattern{0.4, 5});
  std::vector<double> anti(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i)
    anti[static_cast<std::size_t>(i)] = 1.0 - mask.weights[static_cast<std::size_t>(i)];
  const auto antimask = make_window(g, FromMaskPattern{anti});
  const auto full = make_window(g, FullPattern{});
  const auto acf_full = window_autocorrelation(full);
  const auto acf_mask = window_autocorrelation(mask);
  const auto acf_anti = window_autocorrelation(antimask);
  for (int jy = -(g.ny - 1); jy <= g.ny - 1; ++jy)
    for (int jx = -(g.nx - 1); jx <= g.nx - 1; ++jx) {
      double cross = 0.0;
      for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
          const int oy = iy + jy, ox = ix + jx;
          if (oy < 0 || oy >= g.ny || ox < 0 || ox >= g.nx) continue;
          cross += mask.at(iy, ix) * antimask.at(oy, ox) + antimask.at(iy, ix) * mask.at(oy, ox);
        }
      CHECK(acf_full.at(jy, jx) - acf_mask.at(jy, jx) - acf_anti.at(jy, jx) ==
            doctest::Approx(cross).epsilon(1e-11));
    }
}

TEST_CASE("spectral window normalization and Fejer shape") {
  GridSpec g{8, 8, 1.0, 1.0};
  const auto full = make_window(g, FullPattern{});
  const auto spec = spectral_window(full, 2);
  CHECK(spec.grid.ny == 16);
  CHECK(spec.grid.nx == 16);
  CHECK(spec.values[0] == doctest::Approx(full.k_sum * full.k_sum).epsilon(1e-12));
  double maxv = 0.0;
  for (double v : spec.values) {
    CHECK(v >= 0.0);
    maxv = std::max(maxv, v);
  }
  CHECK(maxv == spec.values[0]);  // peak at DC, the discrete Fejer kernel
  // Parseval under the plain DFT: mean over k of |w(k)|^2 = sum w^2
  double mean = 0.0;
  for (double v : spec.values) mean += v;
  mean /= static_cast<double>(spec.values.size());
  CHECK(mean == doctest::Approx(full.k_sum).epsilon(1e-12));
  CHECK_THROWS_AS(spectral_window(full, 0), DomainError);

  // random 4x4 window against the direct DFT sum
  GridSpec g4{4, 4, 1.0, 1.0};
  const auto w4 = make_window(g4, RandomDeletionPattern{0.6, 3});
  const auto s4 = spectral_window(w4, 2);
  for (int ky = 0; ky < 8; ++ky)
    for (int kx = 0; kx < 8; ++kx) {
      std::complex<double> acc = 0.0;
      for (int iy = 0; iy < 4; ++iy)
        for (int ix = 0; ix < 4; ++ix) {
          const double phase =
              -2.0 * std::numbers::pi *
              (static_cast<double>(ky) * iy / 8.0 + static_cast<double>(kx) * ix / 8.0);
          acc += w4.at(iy, ix) * std::complex<double>(std::cos(phase), std::sin(phase));
        }
      CHECK(s4.at(ky, kx) == doctest::Approx(std::norm(acc)).epsilon(1e-10));
    }
}

TEST_CASE("inclusion masks") {
  GridSpec g{4, 6, 1.0, 1.0};
  const auto like = likelihood_inclusion_mask(g, true);
  CHECK(like[0] == 0);
  CHECK(static_cast<int>(std::count(like.begin(), like.end(), 1)) == g.size() - 1);
  const auto no_nyq = likelihood_inclusion_mask(g, false);
  CHECK(no_nyq[static_cast<std::size_t>(2 * g.nx)] == 0);  // iy = ny/2 row
  CHECK(no_nyq[3] == 0);                                   // ix = nx/2 column
  const auto test = test_inclusion_mask(g);
  int kept = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      if (!test[static_cast<std::size_t>(iy * g.nx + ix)]) continue;
      ++kept;
      CHECK(!is_dc(iy, ix));
      CHECK(!on_nyquist(g, iy, ix));
      const int cy = (g.ny - iy) % g.ny, cx = (g.nx - ix) % g.nx;
      CHECK(test[static_cast<std::size_t>(cy * g.nx + cx)] == 0);
    }
  // 24 wavenumbers - 1 DC - 9 Nyquist = 14, in 7 Hermitian pairs
  CHECK(kept == 7);
}
