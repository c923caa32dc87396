#include "mw/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mw {

namespace {

constexpr char kMagic[8] = {'M', 'W', 'G', 'R', 'I', 'D', '1', '\n'};

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

nlohmann::json mat3_json(const Mat3& m) {
  nlohmann::json j;
  j["labels"] = {"variance", "smoothness", "range"};
  j["row_major"] = m.m;
  return j;
}

}  // namespace

std::string grid_kind_name(GridKind kind) {
  switch (kind) {
    case GridKind::FieldData: return "field";
    case GridKind::Window: return "window";
    case GridKind::Spectral: return "spectral";
  }
  return "field";
}

GridKind grid_kind_by_name(const std::string& name) {
  if (name == "field") return GridKind::FieldData;
  if (name == "window") return GridKind::Window;
  if (name == "spectral") return GridKind::Spectral;
  throw IoError("unknown grid kind: " + name);
}

void write_grid(const GridContainer& container, const std::filesystem::path& path) {
  container.grid.validate();
  if (container.payload.size() != static_cast<std::size_t>(container.grid.size()))
    throw ShapeMismatchError("write_grid: payload length does not match grid");
  nlohmann::json header;
  header["ny"] = container.grid.ny;
  header["nx"] = container.grid.nx;
  header["dy"] = container.grid.dy;
  header["dx"] = container.grid.dx;
  header["units"] = container.units;
  header["kind"] = grid_kind_name(container.kind);
  header["metadata"] = container.metadata;
  const std::string header_text = header.dump();

  std::string blob;
  blob.reserve(8 + 4 + header_text.size() + 8 * container.payload.size());
  blob.append(kMagic, 8);
  put_u32_le(blob, static_cast<std::uint32_t>(header_text.size()));
  blob += header_text;
  for (double v : container.payload) put_f64_le(blob, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_grid: cannot open " + path.string());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("write_grid: short write to " + path.string());
}

GridContainer read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_grid: cannot open " + path.string());
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (blob.size() < 12 || std::memcmp(blob.data(), kMagic, 8) != 0)
    throw IoError("read_grid: magic mismatch, not an MWGRID1 file: " + path.string());
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint32_t header_len = get_u32_le(bytes + 8);
  if (blob.size() < 12 + static_cast<std::size_t>(header_len))
    throw IoError("read_grid: truncated header in " + path.string());

  GridContainer c;
  try {
    const auto header = nlohmann::json::parse(blob.substr(12, header_len));
    c.grid.ny = header.at("ny").get<int>();
    c.grid.nx = header.at("nx").get<int>();
    c.grid.dy = header.at("dy").get<double>();
    c.grid.dx = header.at("dx").get<double>();
    c.units = header.value("units", std::string{});
    c.kind = grid_kind_by_name(header.at("kind").get<std::string>());
    if (header.contains("metadata"))
      c.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("read_grid: malformed header in " + path.string() + ": " + e.what());
  }
  c.grid.validate();
  const std::size_t expected = static_cast<std::size_t>(c.grid.size()) * 8;
  const std::size_t offset = 12 + header_len;
  if (blob.size() - offset != expected)
    throw IoError("read_grid: truncated or oversized payload in " + path.string());
  c.payload.resize(static_cast<std::size_t>(c.grid.size()));
  for (std::size_t i = 0; i < c.payload.size(); ++i)
    c.payload[i] = get_f64_le(bytes + offset + 8 * i);
  return c;
}

GridContainer to_container(const Field& field, std::string units) {
  return GridContainer{field.grid, GridKind::FieldData, std::move(units), {}, field.values};
}

GridContainer to_container(const SamplingWindow& window, std::string units) {
  return GridContainer{window.grid, GridKind::Window, std::move(units), {}, window.weights};
}

GridContainer to_container(const SpectralField& spectral, std::string units) {
  return GridContainer{spectral.grid, GridKind::Spectral, std::move(units), {}, spectral.values};
}

Field field_from_container(const GridContainer& c) {
  if (c.kind != GridKind::FieldData) throw IoError("container does not hold a field");
  return Field{c.grid, c.payload};
}

SamplingWindow window_from_container(const GridContainer& c) {
  if (c.kind != GridKind::Window) throw IoError("container does not hold a window");
  return make_window(c.grid, FromMaskPattern{c.payload});
}

SpectralField spectral_from_container(const GridContainer& c) {
  if (c.kind != GridKind::Spectral) throw IoError("container does not hold spectral values");
  return SpectralField{c.grid, c.payload};
}

namespace {

std::vector<std::vector<double>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad CSV number '" + cell + "' in " + path.string());
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SamplingWindow read_mask_csv(const std::filesystem::path& path, double dy, double dx) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) throw IoError("read_mask_csv: no rows in " + path.string());
  const std::size_t nx = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != nx) throw IoError("read_mask_csv: ragged rows in " + path.string());
  GridSpec grid{static_cast<int>(rows.size()), static_cast<int>(nx), dy, dx};
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(grid.size()));
  for (const auto& r : rows) w.insert(w.end(), r.begin(), r.end());
  return make_window(grid, FromMaskPattern{std::move(w)});
}

void write_mask_csv(const SamplingWindow& window, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_mask_csv: cannot open " + path.string());
  out.precision(17);
  for (int iy = 0; iy < window.grid.ny; ++iy) {
    for (int ix = 0; ix < window.grid.nx; ++ix) {
      if (ix) out << ',';
      out << window.at(iy, ix);
    }
    out << '\n';
  }
}

std::vector<Point2> read_polygon_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  std::vector<Point2> pts;
  for (const auto& r : rows) {
    if (r.size() != 2) throw IoError("read_polygon_csv: expected x,y rows in " + path.string());
    pts.push_back({r[0], r[1]});
  }
  return pts;
}

std::vector<Segment2> read_segments_csv(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  std::vector<Segment2> segs;
  for (const auto& r : rows) {
    if (r.size() != 4) throw IoError("read_segments_csv: expected x1,y1,x2,y2 rows in " + path.string());
    segs.push_back({{r[0], r[1]}, {r[2], r[3]}});
  }
  return segs;
}

WindowPattern parse_window_pattern(const std::string& text, std::uint64_t seed) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
  if (head == "full") return FullPattern{};
  if (head == "random") {
    if (rest.empty()) throw ValidationError("random pattern needs a fraction, e.g. random:0.667");
    return RandomDeletionPattern{std::stod(rest), seed};
  }
  if (head == "checkerboard") {
    const auto c2 = rest.find(':');
    const int parity = std::stoi(rest.substr(0, c2));
    const int period = c2 == std::string::npos ? 1 : std::stoi(rest.substr(c2 + 1));
    return CheckerboardPattern{parity, period};
  }
  if (head == "polygon-interior") return PolygonInteriorPattern{read_polygon_csv(rest)};
  if (head == "polygon-exterior") return PolygonExteriorPattern{read_polygon_csv(rest)};
  if (head == "tracks") {
    const auto c2 = rest.rfind(':');
    std::string file = rest;
    double width = 0.0;
    if (c2 != std::string::npos) {
      try {
        width = std::stod(rest.substr(c2 + 1));
        file = rest.substr(0, c2);
      } catch (const std::exception&) {
        // no width suffix; the whole rest is the path
      }
    }
    return TracksPattern{read_segments_csv(file), width};
  }
  if (head == "mask") {
    if (rest.size() > 4 && rest.substr(rest.size() - 4) == ".csv") {
      const auto rows = read_csv_rows(rest);
      std::vector<double> w;
      for (const auto& r : rows) w.insert(w.end(), r.begin(), r.end());
      return FromMaskPattern{std::move(w)};
    }
    return FromMaskPattern{read_grid(rest).payload};
  }
  throw ValidationError("unknown window pattern: " + text);
}

std::string params_to_json(const MaternParams& params) {
  nlohmann::json j;
  j["variance"] = params.variance;
  j["smoothness"] = params.smoothness;
  j["range"] = params.range;
  return j.dump(2);
}

MaternParams params_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MaternParams p;
    p.variance = j.at("variance").get<double>();
    p.smoothness = j.at("smoothness").get<double>();
    p.range = j.at("range").get<double>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("params_from_json: ") + e.what());
  }
}

std::string matrix_to_json(const Mat3& m) { return mat3_json(m).dump(2); }

std::string param_covariance_to_json(const ParamCovariance& pc) {
  nlohmann::json j;
  j["covariance"] = mat3_json(pc.matrix);
  j["correlations"] = mat3_json(pc.correlations);
  j["evaluated_at"] = {{"variance", pc.evaluated_at.variance},
                       {"smoothness", pc.evaluated_at.smoothness},
                       {"range", pc.evaluated_at.range}};
  j["fisher_condition"] = pc.fisher_condition;
  j["fisher_warning"] = pc.fisher_warning;
  return j.dump(2);
}

std::string estimate_report_to_json(const EstimateReport& report) {
  nlohmann::json j;
  j["params"] = {{"variance", report.params_hat.variance},
                 {"smoothness", report.params_hat.smoothness},
                 {"range", report.params_hat.range}};
  j["active"] = report.params_hat.active;
  j["objective"] = report.objective_value;
  j["score_norm"] = report.score_norm;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["best_restart"] = report.best_restart;
  j["fisher"] = mat3_json(report.fisher_matrix);
  j["hessian"] = mat3_json(report.hessian_matrix);
  j["covariance"] = nlohmann::json::parse(param_covariance_to_json(report.covariance));
  nlohmann::json d;
  d["alpha"] = report.diagnostics.alpha;
  d["mean_x"] = report.diagnostics.mean_x;
  d["var_x"] = report.diagnostics.var_x;
  d["s2_x"] = report.diagnostics.s2_x;
  d["z_score"] = report.diagnostics.z_score;
  d["p_value"] = report.diagnostics.p_value;
  d["rejected"] = report.diagnostics.rejected;
  d["k_used"] = report.diagnostics.k_used;
  j["diagnostics"] = d;
  j["warnings"] = report.warnings;
  return j.dump(2);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_text: cannot open " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_text: cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace mw
