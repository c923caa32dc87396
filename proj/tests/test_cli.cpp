#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mw/estimate.hpp"
#include "mw/io.hpp"
#include "mw/simulate.hpp"
#include "mw/uncertainty.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mw_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MWFIELD_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("simulate subcommand writes a reproducible field with metadata") {
  TempDir tmp;
  const auto out1 = tmp.path / "f1.mwg";
  const auto out2 = tmp.path / "f2.mwg";
  const std::string base = "simulate --ny 24 --nx 20 --dy 1 --dx 1 --variance 2 --smoothness 0.8 "
                           "--range 2.5 --seed 7 --units km --out ";
  CHECK(run_cli(base + out1.string()) == 0);
  CHECK(run_cli(base + out2.string()) == 0);
  CHECK(slurp(out1) == slurp(out2));
  const auto c = mw::read_grid(out1);
  CHECK(c.grid.ny == 24);
  CHECK(c.grid.nx == 20);
  CHECK(c.units == "km");
  CHECK(c.metadata.at("seed") == "7");
  CHECK(c.metadata.count("embed_ny") == 1);
  CHECK(c.metadata.count("clamped_mass_fraction") == 1);
}

TEST_CASE("fit and diagnose round trip through files") {
  TempDir tmp;
  const auto field = tmp.path / "f.mwg";
  CHECK(run_cli("simulate --ny 48 --nx 48 --variance 2 --smoothness 0.8 --range 2.5 --seed 3 "
                "--out " + field.string()) == 0);
  const auto report = tmp.path / "fit.json";
  const auto resid = tmp.path / "resid.mwg";
  const auto hist = tmp.path / "hist.csv";
  const auto qq = tmp.path / "qq.csv";
  CHECK(run_cli("fit --field " + field.string() + " --pattern random:0.75 --pattern-seed 5 "
                "--seed 1 --out " + report.string() + " --residuals-out " + resid.string() +
                " --hist-csv " + hist.string() + " --qq-csv " + qq.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("params").at("variance").get<double>() > 0.0);
  CHECK(j.at("covariance").at("covariance").at("row_major").size() == 9);
  CHECK(mw::read_grid(resid).kind == mw::GridKind::Spectral);
  CHECK(slurp(hist).rfind("bin_lower", 0) == 0);
  CHECK(slurp(qq).rfind("theoretical", 0) == 0);

  const auto diag = tmp.path / "diag.json";
  CHECK(run_cli("diagnose --field " + field.string() +
                " --variance 2 --smoothness 0.8 --range 2.5 --out " + diag.string()) == 0);
  const auto dj = nlohmann::json::parse(slurp(diag));
  CHECK(dj.at("p_value").get<double>() >= 0.0);
  CHECK(dj.at("k_used").get<int>() > 100);
}

TEST_CASE("nested fit flags") {
  TempDir tmp;
  const auto field = tmp.path / "f.mwg";
  CHECK(run_cli("simulate --ny 32 --nx 32 --variance 1 --smoothness 1.0 --range 2 --seed 9 --out " +
                field.string()) == 0);
  const auto report = tmp.path / "fit.json";
  CHECK(run_cli("fit --field " + field.string() + " --special-case whittle --seed 2 --out " +
                report.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("params").at("smoothness").get<double>() == 1.0);
  CHECK_FALSE(j.at("active")[1].get<bool>());
}

TEST_CASE("predict-cov against a fit ensemble on a small full mask") {
  TempDir tmp;
  // CLI prediction from the all-ones 8x8 mask
  const auto mask = tmp.path / "mask.csv";
  std::ofstream out(mask);
  for (int iy = 0; iy < 8; ++iy) out << "1,1,1,1,1,1,1,1\n";
  out.close();
  const auto cov_json = tmp.path / "cov.json";
  // nested two-parameter model: 64 observations cannot pin all three
  CHECK(run_cli("predict-cov --variance 1 --smoothness 1 --range 0.8 --hold-smoothness "
                "--mask-csv " + mask.string() + " --efficiency --out " + cov_json.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(cov_json));
  const auto pred = j.at("covariance").at("covariance").at("row_major");
  CHECK(pred.size() == 9);

  // in-process ensemble of maximum-likelihood fits on the same geometry
  mw::MaternParams truth{1.0, 1.0, 0.8, {true, true, true}};
  mw::GridSpec g{8, 8, 1.0, 1.0};
  const auto w = mw::make_window(g, mw::FullPattern{});
  const mw::FieldSimulator sim(truth, g);
  std::vector<mw::Vec3> estimates;
  for (int s = 0; s < 300; ++s) {
    mw::FitOptions opt;
    opt.seed = static_cast<std::uint64_t>(s);
    opt.restarts = 2;
    opt.compute_covariance = false;
    opt.compute_diagnostics = false;
    opt.fixed_smoothness = 1.0;
    const auto rep = mw::fit(sim.draw(static_cast<std::uint64_t>(s)).field, w, opt);
    if (rep.converged) estimates.push_back(rep.params_hat.as_vec());
  }
  CHECK(estimates.size() > 280);
  const auto stats = mw::ensemble_stats(estimates, truth);
  // predicted vs empirical standard deviation for the free parameters
  for (int c : {0, 2}) {
    const double sd_pred = std::sqrt(pred[static_cast<std::size_t>(4 * c)].get<double>());
    const double sd_emp = std::sqrt(stats.covariance(c, c));
    CHECK(sd_pred / sd_emp > 0.7);
    CHECK(sd_pred / sd_emp < 1.4);
  }
}

TEST_CASE("window-spectrum emits plot-ready tables") {
  TempDir tmp;
  const auto spec = tmp.path / "w.mwg";
  const auto csv = tmp.path / "w.csv";
  CHECK(run_cli("window-spectrum --ny 16 --nx 16 --pattern checkerboard:0:2 --pad 2 --out " +
                spec.string() + " --csv " + csv.string()) == 0);
  const auto c = mw::read_grid(spec);
  CHECK(c.grid.ny == 32);
  CHECK(c.kind == mw::GridKind::Spectral);
  CHECK(slurp(csv).rfind("ky,kx,power", 0) == 0);
}

TEST_CASE("experiment subcommand writes reproducible artifacts") {
  TempDir tmp;
  const std::string args =
      "experiment --kind growing_domain --trials 12,16 --n 4 --variance 1 --smoothness 0.6 "
      "--range 1.5 --ny 12 --nx 12 --window-pattern full --seed 4 --restarts 1 --no-predict "
      "--jobs 2 --out-dir ";
  CHECK(run_cli(args + (tmp.path / "e1").string()) == 0);
  CHECK(run_cli(args + (tmp.path / "e2").string()) == 0);
  for (const char* name : {"trials.csv", "estimates_0.csv", "estimates_1.csv", "summary.json"}) {
    CHECK(slurp(tmp.path / "e1" / name) == slurp(tmp.path / "e2" / name));
    CHECK(!slurp(tmp.path / "e1" / name).empty());
  }
  const auto j = nlohmann::json::parse(slurp(tmp.path / "e1" / "summary.json"));
  CHECK(j.at("plan").at("kind").get<std::string>() == "growing_domain");
  CHECK(j.at("trials").size() == 2);
}

TEST_CASE("exit codes distinguish validation from numerical failure") {
  TempDir tmp;
  CHECK(run_cli("fit --field /nonexistent.mwg --out " + (tmp.path / "r.json").string()) == 2);
  CHECK(run_cli("simulate --ny 8 --nx 8") == 2);  // missing required --out and parameters
  CHECK(run_cli("") == 2);                        // a subcommand is required
  CHECK(run_cli("--help") == 0);
  // an embedding that cannot be made positive semi-definite is a numerical failure
  CHECK(run_cli("simulate --ny 12 --nx 12 --variance 1 --smoothness 2.5 --range 400 --no-clamp "
                "--embed-factor 2 --out " + (tmp.path / "f.mwg").string()) == 3);
}
