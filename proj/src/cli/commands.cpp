#include "biphoton/cli.hpp"

#include "biphoton/amplitude.hpp"
#include "biphoton/entanglement.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/export.hpp"
#include "biphoton/multichannel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace biphoton::cli {

namespace {

using nlohmann::json;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::size_t grid = 0;
  int walkoff = 0; // +1 --walkoff, -1 --no-walkoff, 0 unset
  bool exact_paper_constants = false;
  std::string lambda_p, waist, length, phi0, crystal;
};

RunConfig resolve_run_config(const GlobalOptions& g) {
  RunConfig cfg =
      g.config_path.empty() ? reference_config() : load_run_config(g.config_path);
  auto& e = cfg.experiment;
  if (!g.lambda_p.empty())
    e.lambda_p = parse_length(g.lambda_p);
  if (!g.waist.empty())
    e.waist = parse_length(g.waist);
  if (!g.length.empty())
    e.length = parse_length(g.length);
  if (!g.phi0.empty())
    e.phi0 = parse_angle(g.phi0);
  if (!g.crystal.empty())
    e.crystal = resolve_crystal(g.crystal);
  if (!g.out_dir.empty())
    cfg.out_dir = g.out_dir;
  if (!g.format.empty())
    cfg.format = g.format;
  if (g.grid != 0)
    cfg.grid = g.grid;
  if (g.walkoff != 0)
    cfg.include_walkoff = g.walkoff > 0;
  if (g.exact_paper_constants)
    cfg.exact_paper_constants = true;
  e.validate();
  return cfg;
}

double gauss_coefficient(const RunConfig& cfg) {
  return cfg.exact_paper_constants ? kPrintedDensityCoefficient
                                   : kSincGaussCoefficient;
}

// Writes to <out_dir>/<name> when an output directory is set, otherwise to
// the stream.
void emit(const RunConfig& cfg, const std::string& name,
          const std::string& content, std::ostream& out) {
  if (!cfg.out_dir) {
    out << content;
    return;
  }
  std::filesystem::create_directories(*cfg.out_dir);
  const auto path = *cfg.out_dir / name;
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw ConfigError("cannot write " + path.string());
  file << content;
  out << "wrote " << path.string() << '\n';
}

void flatten(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten(value, prefix.empty() ? key : prefix + "." + key, os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      flatten(j[i], prefix + "." + std::to_string(i), os);
  } else if (j.is_number_float()) {
    os << prefix << ',' << format_number(j.get<double>()) << '\n';
  } else if (j.is_string()) {
    os << prefix << ',' << j.get<std::string>() << '\n';
  } else {
    os << prefix << ',' << j.dump() << '\n';
  }
}

std::string render(const RunConfig& cfg, const json& j) {
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "quantity,value\n";
    flatten(j, "", os);
    return os.str();
  }
  return j.dump(2) + "\n";
}

double oam_closed_form(double coincidence_width) {
  return 2.0 * std::sqrt(2.0 * pi) / (pi * coincidence_width);
}

int cmd_params(const RunConfig& cfg, std::ostream& out) {
  const auto& e = cfg.experiment;
  const auto scales = derive_scales(e);
  const auto validity = validity_report(e, scales);
  const auto dist = azimuthal_widths(scales);
  const auto window = collinear_threshold(e.crystal, e.lambda_p);
  const double a = scales.a, b = scales.b;
  json j{{"config", to_json(e)},
         {"scales", to_json(scales)},
         {"noncollinear_window", {{"low", window.low}, {"high", window.high}}},
         {"validity", to_json(validity)},
         {"gauss_coefficient", gauss_coefficient(cfg)},
         {"azimuthal",
          {{"coincidence_width", dist.coincidence_width},
           {"single_width", dist.single_width},
           {"R", r_parameter(dist)}}},
         {"schmidt",
          {{"K_double_gaussian", (a * a + b * b) / (2.0 * a * b)},
           {"K_a_over_2b", a / (2.0 * b)},
           {"K_oam_closed_form", oam_closed_form(dist.coincidence_width)}}}};
  emit(cfg, "params." + cfg.format, render(cfg, j), out);
  return kOk;
}

struct ScanOptions {
  std::string quantity;
  std::optional<double> from, to;
  std::size_t points = 0;
};

int cmd_scan(const RunConfig& cfg, const ScanOptions& opt, std::ostream& out) {
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("unknown format");
  const auto& e = cfg.experiment;
  const std::size_t n = opt.points ? opt.points : cfg.grid;
  if (n < 2)
    throw ConfigError("scan needs at least 2 points");
  double lo = 0.0, hi = pi;
  if (opt.quantity == "sincfit")
    lo = -pi;
  lo = opt.from.value_or(lo);
  hi = opt.to.value_or(hi);
  if (!(hi > lo))
    throw ConfigError("scan range is empty");

  std::ostringstream os;
  const double c = gauss_coefficient(cfg);
  if (opt.quantity == "np_minus_no")
    os << "phi0,np_minus_no\n";
  else if (opt.quantity == "walkoff")
    os << "alpha_p,dnp_dphi\n";
  else
    os << "x,sinc2,gauss\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * double(i) / double(n - 1);
    os << format_number(x) << ',';
    if (opt.quantity == "np_minus_no") {
      os << format_number(index_mismatch(e.crystal, e.lambda_p, x));
    } else if (opt.quantity == "walkoff") {
      os << format_number(pump_index_derivative(e.crystal, e.lambda_p, x, e.phi0));
    } else {
      const double s = sinc(x);
      os << format_number(s * s) << ',' << format_number(std::exp(-c * x * x));
    }
    os << '\n';
  }
  emit(cfg, "scan_" + opt.quantity + ".csv", os.str(), out);
  return kOk;
}

struct DensityOptions {
  std::string kind = "azimuthal";
  std::string window;
  std::string alpha0;
};

int cmd_density(const RunConfig& cfg, const DensityOptions& opt,
                std::ostream& out) {
  const auto scales = derive_scales(cfg.experiment);
  std::ostringstream os;
  if (opt.kind == "azimuthal") {
    const double half = opt.window.empty() ? pi / 2 : parse_angle(opt.window);
    if (!(half > 0.0) || half > pi / 2)
      throw ConfigError("--window must be in (0, pi/2]");
    const auto grid =
        azimuthal_density_grid(azimuthal_widths(scales), cfg.grid, -half, half);
    write_density_csv(os, grid);
    emit(cfg, "density.csv", os.str(), out);
  } else {
    AmplitudeModel model;
    model.kind = cfg.include_walkoff ? ModelKind::Full : ModelKind::NoWalkoff;
    model.scales = scales;
    model.gauss_coefficient = gauss_coefficient(cfg);
    const double a0 = opt.alpha0.empty() ? 0.0 : parse_angle(opt.alpha0);
    write_amplitude_grid_csv(os, model, cfg.grid, cfg.grid, a0, true);
    emit(cfg, "amplitude_density.csv", os.str(), out);
  }
  return kOk;
}

struct SchmidtOptions {
  std::string method;
  std::optional<double> a, b;
  std::size_t n_max = 0;
  std::size_t l_max = 0;
  std::size_t points = 0;
  std::size_t max_points = 4096;
};

int cmd_schmidt(const RunConfig& cfg, const SchmidtOptions& opt,
                std::ostream& out) {
  double a = 0.0, b = 0.0;
  if (opt.a && opt.b) {
    a = *opt.a;
    b = *opt.b;
  } else {
    const auto scales = derive_scales(cfg.experiment);
    a = opt.a.value_or(scales.a);
    b = opt.b.value_or(scales.b);
  }

  SchmidtSpectrum spectrum;
  if (opt.method == "analytic") {
    spectrum = schmidt_analytic(a, b, opt.n_max);
  } else if (opt.method == "numeric") {
    if (!(a > 0.0) || !(b > 0.0))
      throw DomainError("numeric Schmidt decomposition needs a, b > 0");
    KernelGrid grid{-3.0 * a, 3.0 * a, 0, std::min(a, b)};
    const auto required = static_cast<std::size_t>(std::ceil(
        grid.min_points_per_feature * (grid.upper - grid.lower) / grid.feature_width));
    grid.points = opt.points ? opt.points : required;
    if (grid.points > opt.max_points)
      throw ResolutionError(
          "numeric Schmidt decomposition at a/b = " + format_number(a / b) +
              " needs " + std::to_string(required) +
              " grid points, above --max-points " +
              std::to_string(opt.max_points),
          required);
    spectrum = schmidt_numeric(double_gaussian_kernel(a, b), grid).spectrum;
    spectrum.references = {{"double_gaussian", (a * a + b * b) / (2.0 * a * b)}};
  } else {
    AzimuthalDistribution dist;
    dist.coincidence_width = b;
    spectrum = oam_spectrum(dist, opt.l_max);
  }

  json summary = to_json(spectrum);
  summary["a"] = a;
  summary["b"] = b;
  summary["config"] = to_json(cfg.experiment);
  std::ostringstream csv;
  write_spectrum_csv(csv, spectrum);
  if (cfg.out_dir) {
    emit(cfg, "schmidt_" + opt.method + ".json", summary.dump(2) + "\n", out);
    emit(cfg, "schmidt_" + opt.method + ".csv", csv.str(), out);
  } else if (cfg.format == "csv") {
    out << csv.str();
  } else {
    out << summary.dump(2) << '\n';
  }
  return kOk;
}

struct MultichannelOptions {
  std::size_t planes = 4;
  std::string fiber_radius;
  double safety = 3.0;
  std::string layout_path;
};

int cmd_multichannel(const RunConfig& cfg, const MultichannelOptions& opt,
                     std::ostream& out, std::ostream& err) {
  const auto scales = derive_scales(cfg.experiment);
  const double ring = scales.dtheta_L / scales.theta0;
  double radius =
      opt.fiber_radius.empty() ? 2.0 * ring : parse_angle(opt.fiber_radius);
  double safety = opt.safety;

  ChannelLayout layout;
  if (!opt.layout_path.empty()) {
    std::ifstream in(opt.layout_path);
    if (!in)
      throw ConfigError("cannot open layout file " + opt.layout_path);
    json spec;
    try {
      spec = json::parse(in);
      radius = spec.value("fiber_radius", radius);
      safety = spec.value("safety_factor", safety);
      layout.plane_azimuths =
          spec.at("plane_azimuths").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError("layout file " + opt.layout_path + ": " + e.what());
    }
    layout.fiber_radius = radius;
    layout.ring_thickness = ring;
    layout.coincidence_width = scales.b;
    layout.cone_angle = scales.theta0;
    layout.safety_factor = safety;
  } else {
    layout = equally_spaced_layout(opt.planes, radius, ring, scales.b,
                                   scales.theta0, safety);
  }

  const auto report = validate_layout(layout);
  json j{{"layout",
          {{"planes", layout.planes()},
           {"plane_azimuths", layout.plane_azimuths},
           {"fiber_radius", layout.fiber_radius},
           {"fiber_footprint", layout.fiber_footprint()},
           {"ring_thickness", layout.ring_thickness},
           {"coincidence_width", layout.coincidence_width},
           {"safety_factor", layout.safety_factor}}},
         {"feasibility", to_json(report)},
         {"max_feasible_planes",
          max_feasible_planes(radius, ring, scales.b, scales.theta0, safety)}};
  if (report.feasible) {
    const auto state = build_state(layout);
    j["state"] = to_json(state, multichannel_entanglement(state));
  }

  if (cfg.format == "csv") {
    std::ostringstream os;
    write_layout_csv(os, layout, report);
    emit(cfg, "multichannel_layout.csv", os.str(), out);
  } else {
    emit(cfg, "multichannel.json", j.dump(2) + "\n", out);
  }
  if (const auto* failed = report.first_failure()) {
    err << "error: infeasible layout, constraint '" << failed->name
        << "' failed: " << failed->detail << '\n';
    return kInfeasible;
  }
  return kOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Angular entanglement of noncollinear type-I down-conversion",
               "biphoton"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Key-value run configuration");
  app.add_option("--out", g.out_dir, "Directory for output files");
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--grid", g.grid, "Grid points per axis")
      ->check(CLI::Range(std::size_t(2), std::size_t(1) << 20));
  app.add_flag("--walkoff,!--no-walkoff", g.walkoff,
               "Include the walk-off term in amplitude grids");
  app.add_flag("--exact-paper-constants", g.exact_paper_constants,
               "Use 0.395 in the double-Gaussian density");
  app.add_option("--lambda-p", g.lambda_p, "Pump wavelength, e.g. 0.4047um");
  app.add_option("--waist", g.waist, "Pump waist, e.g. 1464um");
  app.add_option("--length", g.length, "Crystal length, e.g. 0.5cm");
  app.add_option("--phi0", g.phi0, "Optic-axis angle, e.g. 0.7rad");
  app.add_option("--crystal", g.crystal, "BBO or a crystal data file");

  auto* params = app.add_subcommand("params", "Derived scales and checks");

  ScanOptions scan_opt;
  auto* scan = app.add_subcommand("scan", "Curves: np_minus_no, walkoff, sincfit");
  scan->add_option("quantity", scan_opt.quantity)
      ->required()
      ->check(CLI::IsMember({"np_minus_no", "walkoff", "sincfit"}));
  scan->add_option("--from", scan_opt.from, "Range start");
  scan->add_option("--to", scan_opt.to, "Range end");
  scan->add_option("--points", scan_opt.points, "Samples (default --grid)");

  DensityOptions dens_opt;
  auto* density = app.add_subcommand("density", "Azimuthal density map");
  density->add_option("--kind", dens_opt.kind)
      ->check(CLI::IsMember({"azimuthal", "amplitude"}));
  density->add_option("--window", dens_opt.window,
                      "Half-width of the azimuth range (default pi/2)");
  density->add_option("--alpha0", dens_opt.alpha0,
                      "Half-sum azimuth for --kind amplitude");

  SchmidtOptions sch_opt;
  auto* schmidt = app.add_subcommand("schmidt", "Schmidt spectra");
  schmidt->add_option("method", sch_opt.method)
      ->required()
      ->check(CLI::IsMember({"analytic", "numeric", "oam"}));
  schmidt->add_option("--a", sch_opt.a, "Sum-variable width, rad");
  schmidt->add_option("--b", sch_opt.b, "Difference-variable width, rad");
  schmidt->add_option("--n-max", sch_opt.n_max, "Minimum analytic modes");
  schmidt->add_option("--l-max", sch_opt.l_max, "Minimum OAM index");
  schmidt->add_option("--points", sch_opt.points, "Numeric grid points");
  schmidt->add_option("--max-points", sch_opt.max_points,
                      "Refuse numeric grids larger than this");

  MultichannelOptions mc_opt;
  auto* multi = app.add_subcommand("multichannel", "Multichannel scheme");
  multi->add_option("--planes", mc_opt.planes, "Number of planes N")
      ->check(CLI::PositiveNumber);
  multi->add_option("--fiber-radius", mc_opt.fiber_radius,
                    "Fiber angular radius (default twice the ring thickness)");
  multi->add_option("--safety", mc_opt.safety, "Gap safety factor")
      ->check(CLI::PositiveNumber);
  multi->add_option("--layout", mc_opt.layout_path, "Layout JSON file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const RunConfig cfg = resolve_run_config(g);
    if (params->parsed())
      return cmd_params(cfg, out);
    if (scan->parsed())
      return cmd_scan(cfg, scan_opt, out);
    if (density->parsed())
      return cmd_density(cfg, dens_opt, out);
    if (schmidt->parsed())
      return cmd_schmidt(cfg, sch_opt, out);
    if (multi->parsed())
      return cmd_multichannel(cfg, mc_opt, out, err);
    return kInternal;
  } catch (const RegimeError& e) {
    err << "error: regime: " << e.what() << '\n';
    return kRegime;
  } catch (const ResolutionError& e) {
    err << "error: resolution: " << e.what() << '\n';
    return kResolution;
  } catch (const LayoutError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

} // namespace biphoton::cli
