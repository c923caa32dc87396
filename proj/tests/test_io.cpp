#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mw/io.hpp"

using namespace mw;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mw_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("grid container round trip is bit exact") {
  TempDir tmp;
  GridContainer c;
  c.grid = {3, 4, 0.5, 0.25};
  c.kind = GridKind::FieldData;
  c.units = "km";
  c.metadata["seed"] = "42";
  for (int i = 0; i < 12; ++i) c.payload.push_back(std::sin(7.3 * i) * 1e3);
  c.payload[5] = -0.0;  // signed zero survives
  const auto path = tmp.path / "a.mwg";
  write_grid(c, path);
  const auto r = read_grid(path);
  CHECK(r.grid == c.grid);
  CHECK(r.kind == c.kind);
  CHECK(r.units == c.units);
  CHECK(r.metadata.at("seed") == "42");
  REQUIRE(r.payload.size() == c.payload.size());
  for (std::size_t i = 0; i < c.payload.size(); ++i) {
    // bit-exact, not merely approximately equal
    CHECK(std::memcmp(&r.payload[i], &c.payload[i], 8) == 0);
  }
  // rewriting the read container reproduces the file byte for byte
  const auto path2 = tmp.path / "b.mwg";
  write_grid(r, path2);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("golden 2x2 field layout is frozen") {
  TempDir tmp;
  GridContainer c;
  c.grid = {2, 2, 1.0, 1.0};
  c.kind = GridKind::FieldData;
  c.payload = {1.0, 2.0, 3.0, 4.0};
  const auto path = tmp.path / "golden.mwg";
  write_grid(c, path);
  const std::string blob = slurp(path);
  // magic + u32 header length + JSON header + 4 doubles
  CHECK(blob.substr(0, 8) == "MWGRID1\n");
  const auto header_len = static_cast<unsigned char>(blob[8]) |
                          (static_cast<unsigned char>(blob[9]) << 8) |
                          (static_cast<unsigned char>(blob[10]) << 16) |
                          (static_cast<unsigned char>(blob[11]) << 24);
  const std::string header = blob.substr(12, header_len);
  CHECK(header ==
        R"({"dx":1.0,"dy":1.0,"kind":"field","metadata":{},"nx":2,"ny":2,"units":""})");
  CHECK(blob.size() == 12 + header.size() + 32);
  // payload: 1.0, 2.0, 3.0, 4.0 as little-endian float64
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
  CHECK(std::memcmp(blob.data() + 12 + header_len, one, 8) == 0);
  const unsigned char four[8] = {0, 0, 0, 0, 0, 0, 0x10, 0x40};
  CHECK(std::memcmp(blob.data() + 12 + header_len + 24, four, 8) == 0);
}

TEST_CASE("container read failure modes") {
  TempDir tmp;
  const auto path = tmp.path / "bad.mwg";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTMAGIC garbage";
  }
  CHECK_THROWS_AS(read_grid(path), IoError);

  GridContainer c;
  c.grid = {2, 2, 1.0, 1.0};
  c.payload = {1, 2, 3, 4};
  write_grid(c, path);
  auto blob = slurp(path);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size() - 5));  // truncate payload
  }
  CHECK_THROWS_AS(read_grid(path), IoError);
  {
    blob[14] = '#';  // corrupt the header JSON
    std::ofstream out(path, std::ios::binary);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
  CHECK_THROWS_AS(read_grid(path), IoError);
  CHECK_THROWS_AS(read_grid(tmp.path / "missing.mwg"), IoError);
}

TEST_CASE("typed container conversions") {
  TempDir tmp;
  GridSpec g{4, 4, 1.0, 1.0};
  const auto w = make_window(g, RandomDeletionPattern{0.8, 3});
  const auto wc = to_container(w, "m");
  CHECK(wc.kind == GridKind::Window);
  const auto path = tmp.path / "w.mwg";
  write_grid(wc, path);
  const auto w2 = window_from_container(read_grid(path));
  CHECK(w2.weights == w.weights);
  CHECK(w2.k_sum == w.k_sum);
  CHECK_THROWS_AS(field_from_container(read_grid(path)), IoError);
}

TEST_CASE("csv mask and polygon ingestion") {
  TempDir tmp;
  const auto mask_path = tmp.path / "mask.csv";
  write_text(mask_path, "1,0,1\n0,1,0\n# comment\n1,1,0\n");
  const auto w = read_mask_csv(mask_path, 0.5, 0.5);
  CHECK(w.grid.ny == 3);
  CHECK(w.grid.nx == 3);
  CHECK(w.k_sum == 5.0);
  CHECK(w.at(0, 2) == 1.0);
  // round trip through the CSV writer
  const auto out_path = tmp.path / "mask2.csv";
  write_mask_csv(w, out_path);
  const auto w2 = read_mask_csv(out_path, 0.5, 0.5);
  CHECK(w2.weights == w.weights);

  write_text(tmp.path / "ragged.csv", "1,0\n1\n");
  CHECK_THROWS_AS(read_mask_csv(tmp.path / "ragged.csv"), IoError);

  const auto poly_path = tmp.path / "poly.csv";
  write_text(poly_path, "0.0,0.0\n4.0,0.5\n3.5,4.0\n0.5,3.0\n");
  const auto pts = read_polygon_csv(poly_path);
  REQUIRE(pts.size() == 4);
  CHECK(pts[1].x == 4.0);
  CHECK(pts[2].y == 4.0);

  const auto seg_path = tmp.path / "tracks.csv";
  write_text(seg_path, "0,0,8,0\n0,4,8,4\n");
  const auto segs = read_segments_csv(seg_path);
  REQUIRE(segs.size() == 2);
  CHECK(segs[1].b.y == 4.0);
}

TEST_CASE("window pattern strings") {
  GridSpec g{8, 8, 1.0, 1.0};
  CHECK(make_window(g, parse_window_pattern("full", 0)).k_sum == 64.0);
  const auto r1 = make_window(g, parse_window_pattern("random:0.5", 9));
  CHECK(r1.k_sum == 32.0);
  const auto cb = make_window(g, parse_window_pattern("checkerboard:0:2", 0));
  CHECK(cb.k_sum == 32.0);
  CHECK_THROWS_AS(parse_window_pattern("random", 0), ValidationError);
  CHECK_THROWS_AS(parse_window_pattern("nope:1", 0), ValidationError);

  TempDir tmp;
  write_text(tmp.path / "poly.csv", "0.0,0.0\n6.0,0.0\n6.0,6.0\n0.0,6.0\n");
  const auto inside =
      make_window(g, parse_window_pattern("polygon-interior:" + (tmp.path / "poly.csv").string(), 0));
  const auto outside =
      make_window(g, parse_window_pattern("polygon-exterior:" + (tmp.path / "poly.csv").string(), 0));
  CHECK(inside.k_sum + outside.k_sum == 64.0);
}

TEST_CASE("parameter and report json") {
  MaternParams p{2.5, 0.8, 3.25, {true, true, true}};
  const auto text = params_to_json(p);
  const auto q = params_from_json(text);
  CHECK(q.variance == p.variance);
  CHECK(q.smoothness == p.smoothness);
  CHECK(q.range == p.range);
  CHECK_THROWS_AS(params_from_json("{\"variance\": 1.0}"), IoError);
  CHECK_THROWS_AS(params_from_json("not json"), IoError);
  CHECK_THROWS_AS(params_from_json(R"({"variance":-1,"smoothness":1,"range":1})"), DomainError);
}
