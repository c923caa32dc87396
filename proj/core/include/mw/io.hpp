#ifndef MW_IO_HPP
#define MW_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mw/estimate.hpp"
#include "mw/field.hpp"
#include "mw/grid.hpp"

namespace mw {

enum class GridKind { FieldData, Window, Spectral };

std::string grid_kind_name(GridKind kind);
GridKind grid_kind_by_name(const std::string& name);

// The MWGRID1 container: "MWGRID1\n" magic, a little-endian uint32 header
// length, a JSON header {ny, nx, dy, dx, units, kind, metadata}, then
// ny*nx row-major float64 little-endian payload.
struct GridContainer {
  GridSpec grid;
  GridKind kind = GridKind::FieldData;
  std::string units;
  std::map<std::string, std::string> metadata;
  std::vector<double> payload;
};

void write_grid(const GridContainer& container, const std::filesystem::path& path);
GridContainer read_grid(const std::filesystem::path& path);

GridContainer to_container(const Field& field, std::string units = {});
GridContainer to_container(const SamplingWindow& window, std::string units = {});
GridContainer to_container(const SpectralField& spectral, std::string units = {});
Field field_from_container(const GridContainer& container);
SamplingWindow window_from_container(const GridContainer& container);
SpectralField spectral_from_container(const GridContainer& container);

// CSV fallbacks: masks as rows of weights in [0,1]; polygons as "x,y"
// vertex rows; tracks as "x1,y1,x2,y2" segment rows.
SamplingWindow read_mask_csv(const std::filesystem::path& path, double dy = 1.0, double dx = 1.0);
void write_mask_csv(const SamplingWindow& window, const std::filesystem::path& path);
std::vector<Point2> read_polygon_csv(const std::filesystem::path& path);
std::vector<Segment2> read_segments_csv(const std::filesystem::path& path);

// JSON text for parameters, matrices, and reports.
std::string params_to_json(const MaternParams& params);
MaternParams params_from_json(const std::string& text);
std::string matrix_to_json(const Mat3& m);
std::string estimate_report_to_json(const EstimateReport& report);
std::string param_covariance_to_json(const ParamCovariance& pc);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mw

#endif
