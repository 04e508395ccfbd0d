#include "biphoton/cli.hpp"
#include "biphoton/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <sstream>

using namespace biphoton;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<double>> parse_csv(const std::string& text,
                                           std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header)
    *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      row.push_back(std::strtod(cell.c_str(), nullptr)); // keeps subnormals
    rows.push_back(row);
  }
  return rows;
}

const std::string kReference = std::string(BIPHOTON_SOURCE_DIR) + "/configs/reference.config";

// Checks the documented params schema: object sections with numeric fields.
void check_params_schema(const json& j) {
  for (const char* section : {"config", "scales", "validity", "azimuthal", "schmidt",
                              "noncollinear_window"})
    REQUIRE(j.at(section).is_object());
  for (const char* key : {"lambda_p_um", "waist_um", "length_um", "n_o", "n_p0", "theta0",
                          "zeta", "dtheta_p", "dtheta_L", "phi_const", "a", "b"})
    CHECK(j["scales"].at(key).is_number());
  for (const char* key : {"diffraction_ratio", "linearization_ratio", "length_threshold_ratio"}) {
    const auto& r = j["validity"].at(key);
    CHECK(r.at("value").is_number());
    CHECK(r.at("threshold").is_number());
    CHECK((r.at("status") == "pass" || r.at("status") == "warn"));
  }
  CHECK(j["validity"].at("length_threshold_um").is_number());
  for (const char* key : {"coincidence_width", "single_width", "R"})
    CHECK(j["azimuthal"].at(key).is_number());
  for (const char* key : {"K_double_gaussian", "K_a_over_2b", "K_oam_closed_form"})
    CHECK(j["schmidt"].at(key).is_number());
  CHECK(j.at("gauss_coefficient").is_number());
  CHECK(j["config"].at("crystal").is_string());
}

} // namespace

TEST_CASE("config parsing with units") {
  CHECK(cli::parse_length("0.5cm") == doctest::Approx(5000.0));
  CHECK(cli::parse_length("1464 um") == 1464.0);
  CHECK(cli::parse_length("1464mkm") == 1464.0);
  CHECK(cli::parse_length("404.7nm") == doctest::Approx(0.4047));
  CHECK(cli::parse_length("1.5mm") == doctest::Approx(1500.0));
  CHECK(cli::parse_length("0.002 m") == doctest::Approx(2000.0));
  CHECK(cli::parse_length("12") == 12.0);
  CHECK_THROWS_AS(cli::parse_length("3 furlongs"), ConfigError);
  CHECK_THROWS_AS(cli::parse_length("cm"), ConfigError);
  CHECK(cli::parse_angle("0.7rad") == 0.7);
  CHECK(cli::parse_angle("90deg") == doctest::Approx(oracle::pi / 2));
  CHECK_THROWS_AS(cli::parse_angle("1 grad"), ConfigError);

  const auto cfg = cli::load_run_config(kReference);
  CHECK(cfg.experiment.lambda_p == doctest::Approx(0.4047));
  CHECK(cfg.experiment.length == doctest::Approx(5000.0));
  CHECK(cfg.experiment.waist == doctest::Approx(1464.0));
  CHECK(cfg.experiment.phi0 == doctest::Approx(0.7));
  CHECK(cfg.experiment.crystal.name() == "BBO");

  CHECK_THROWS_AS(cli::parse_run_config("L = 1cm\nL = 2cm\n"), ConfigError);
  CHECK_THROWS_AS(cli::parse_run_config("colour = blue\n"), ConfigError);
  CHECK_THROWS_AS(cli::parse_run_config("just words\n"), ConfigError);
  const auto c2 = cli::parse_run_config("# comment\nw = 2mm  # trailing\nwalkoff = false\n");
  CHECK(c2.experiment.waist == doctest::Approx(2000.0));
  CHECK_FALSE(c2.include_walkoff);
}

TEST_CASE("params reproduces the reference anchors") {
  const auto r = run({"--config", kReference, "params"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  check_params_schema(j);
  CHECK(j["scales"]["theta0"].get<double>() == doctest::Approx(0.28).epsilon(0.01 / 0.28));
  CHECK(j["scales"]["zeta"].get<double>() == doctest::Approx(0.12).epsilon(0.01 / 0.12));
  CHECK(j["scales"]["phi_const"].get<double>() == doctest::Approx(-900).epsilon(0.1));
  CHECK(j["schmidt"]["K_oam_closed_form"].get<double>() ==
        doctest::Approx(2 * std::sqrt(2 * oracle::pi) * j["scales"]["theta0"].get<double>() *
                        1464.0 / 0.4047)
            .epsilon(1e-12));

  // Round trip: dump and re-parse gives the same document.
  CHECK(json::parse(j.dump()) == j);

  const auto csv = run({"--config", kReference, "--format", "csv", "params"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("quantity,value\n", 0) == 0);
  CHECK(csv.out.find("scales.theta0,") != std::string::npos);
}

TEST_CASE("flags override the config file") {
  const auto r = run({"--config", kReference, "--waist", "2928um", "params"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["config"]["waist_um"].get<double>() == 2928.0);
  CHECK(j["azimuthal"]["R"].get<double>() == doctest::Approx(2e4).epsilon(0.01));

  const auto exact = run({"--exact-paper-constants", "params"});
  CHECK(json::parse(exact.out)["gauss_coefficient"].get<double>() == 0.395);
}

TEST_CASE("exit codes") {
  const auto collinear = run({"--phi0", "0.5", "params"});
  CHECK(collinear.code == cli::kRegime);
  CHECK(collinear.err.find("collinear") != std::string::npos);

  CHECK(run({"params", "--bogus"}).code == cli::kConfig);
  CHECK(run({}).code == cli::kConfig);
  CHECK(run({"scan", "refractive_colour"}).code == cli::kConfig);
  CHECK(run({"--length", "-3cm", "params"}).code == cli::kConfig);
  CHECK(run({"--config", "/nonexistent.config", "params"}).code == cli::kConfig);
  CHECK(run({"density"}).code == cli::kResolution);
  CHECK(run({"schmidt", "numeric"}).code == cli::kResolution);
  CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("scan np_minus_no crosses zero at the window edges") {
  const auto r = run({"scan", "np_minus_no", "--points", "2001"});
  REQUIRE(r.code == 0);
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  CHECK(header == "phi0,np_minus_no");
  REQUIRE(rows.size() == 2001);
  std::vector<double> crossings;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if ((rows[i][1] > 0) != (rows[i - 1][1] > 0))
      crossings.push_back(rows[i][0]);
  REQUIRE(crossings.size() == 2);
  CHECK(crossings[0] == doctest::Approx(0.50).epsilon(0.01 / 0.5));
  CHECK(crossings[1] == doctest::Approx(2.64).epsilon(0.02 / 2.64));
}

TEST_CASE("scan walkoff follows cos(alpha_p)") {
  const auto r = run({"scan", "walkoff", "--from", "0", "--to", "3.141592653589793",
                      "--points", "3"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][1] == doctest::Approx(-0.1249).epsilon(1e-3));
  CHECK(std::abs(rows[1][1]) < 1e-15);
  CHECK(rows[2][1] == doctest::Approx(-rows[0][1]));
  const auto dense = parse_csv(run({"scan", "walkoff", "--points", "50"}).out);
  for (const auto& row : dense)
    CHECK(oracle::close(row[1], rows[0][1] * std::cos(row[0]), 1e-12, 1e-15));
}

TEST_CASE("scan sincfit") {
  const auto r = run({"scan", "sincfit", "--points", "4001"});
  REQUIRE(r.code == 0);
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  CHECK(header == "x,sinc2,gauss");
  double worst = 0;
  for (const auto& row : rows) {
    const double s = row[0] == 0 ? 1.0 : std::sin(row[0]) / row[0];
    CHECK(oracle::close(row[1], s * s, 1e-12, 1e-15));
    worst = std::max(worst, std::abs(row[1] - row[2]));
  }
  // Independent evaluation of the largest gap between the two curves.
  double oracle_worst = 0;
  for (int i = 0; i < 4001; ++i) {
    const double x = -oracle::pi + 2 * oracle::pi * i / 4000.0;
    const double s = x == 0 ? 1.0 : std::sin(x) / x;
    oracle_worst = std::max(oracle_worst, std::abs(s * s - std::exp(-0.359 * x * x)));
  }
  CHECK(worst == doctest::Approx(oracle_worst).epsilon(1e-12));
  CHECK(worst == doctest::Approx(0.04906).epsilon(1e-3));
}

TEST_CASE("density command") {
  // Narrow window so a 161-point grid resolves the ridge.
  const auto r = run({"--grid", "161", "density", "--window", "0.005"});
  REQUIRE(r.code == 0);
  std::string header;
  const auto rows = parse_csv(r.out, &header);
  CHECK(header == "alpha1,alpha2,density");
  REQUIRE(rows.size() == 161 * 161);
  const double w = json::parse(run({"params"}).out)["azimuthal"]["coincidence_width"].get<double>();
  for (const auto& row : rows) {
    if (row[0] == row[1])
      CHECK(row[2] == 1.0);
    const double d = row[0] - row[1];
    CHECK(oracle::close(row[2], std::exp(-d * d / (w * w)), 1e-10, 1e-300));
  }

  const auto amp = run({"--grid", "5", "--no-walkoff", "density", "--kind", "amplitude"});
  REQUIRE(amp.code == 0);
  CHECK(amp.out.rfind("theta1,theta2,alpha1,alpha2,value\n", 0) == 0);
}

TEST_CASE("schmidt command") {
  const auto analytic = run({"schmidt", "analytic", "--a", "0.3", "--b", "0.3", "--format", "csv"});
  REQUIRE(analytic.code == 0);
  CHECK(analytic.out == "index,weight\n0,1\n");

  const auto numeric = json::parse(run({"schmidt", "numeric", "--a", "50", "--b", "1",
                                        "--points", "2400"})
                                       .out);
  const auto exact = json::parse(run({"schmidt", "analytic", "--a", "50", "--b", "1"}).out);
  CHECK(numeric["schmidt_number"].get<double>() ==
        doctest::Approx(exact["schmidt_number"].get<double>()).epsilon(0.01));

  const auto oam = json::parse(run({"schmidt", "oam"}).out);
  const auto params = json::parse(run({"params"}).out);
  CHECK(oam["references"]["printed_closed_form"].get<double>() ==
        doctest::Approx(params["schmidt"]["K_oam_closed_form"].get<double>()).epsilon(1e-14));
  CHECK(oam["method"] == "oam");
}

TEST_CASE("multichannel command") {
  const auto r = run({"multichannel", "--planes", "4"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["state"]["schmidt_number"].get<double>() == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(j["state"]["entropy_bits"].get<double>() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(j["state"]["collection_efficiency"] == 1.0);
  CHECK(j["state"]["hom_visibility"] == 1.0);

  const auto bad = run({"multichannel", "--planes", "5000"});
  CHECK(bad.code == cli::kInfeasible);
  CHECK(bad.err.find("gap_separation") != std::string::npos);

  // N = 8 at the reference configuration against the packing oracle.
  const auto eight = json::parse(run({"multichannel", "--planes", "8"}).out);
  const auto& layout = eight["layout"];
  const double sep = layout["safety_factor"].get<double>() *
                     std::max(layout["fiber_footprint"].get<double>(),
                              layout["coincidence_width"].get<double>());
  const std::size_t packed = oracle::greedy_packing(oracle::pi, sep);
  CHECK(eight["feasibility"]["feasible"].get<bool>() == (8 <= packed));
  CHECK(eight["max_feasible_planes"].get<std::size_t>() == packed);
}

TEST_CASE("layout file input and file outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "biphoton_cli_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "layout.json");
    f << R"({"plane_azimuths": [-1.0, 0.0, 1.0], "safety_factor": 4})";
  }
  const auto r = run({"--out", (dir / "out").string(), "multichannel", "--layout",
                      (dir / "layout.json").string()});
  REQUIRE(r.code == 0);
  std::ifstream in(dir / "out" / "multichannel.json");
  REQUIRE(in);
  const auto j = json::parse(in);
  CHECK(j["layout"]["planes"] == 3);
  CHECK(j["layout"]["safety_factor"] == 4.0);
  CHECK(j["state"]["schmidt_number"].get<double>() == doctest::Approx(6.0));

  const auto s = run({"--out", (dir / "out").string(), "schmidt", "analytic", "--a", "5",
                      "--b", "1"});
  REQUIRE(s.code == 0);
  CHECK(std::filesystem::exists(dir / "out" / "schmidt_analytic.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "schmidt_analytic.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("commands are deterministic") {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"scan", "np_minus_no"},
        std::vector<std::string>{"--grid", "101", "density", "--window", "0.003"},
        std::vector<std::string>{"schmidt", "analytic", "--format", "csv"},
        std::vector<std::string>{"multichannel", "--planes", "6", "--format", "csv"}}) {
    const auto a = run(args), b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
}
