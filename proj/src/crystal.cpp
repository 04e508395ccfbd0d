#include "biphoton/crystal.hpp"

#include "biphoton/errors.hpp"
#include "biphoton/numerics.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace biphoton {

namespace {

constexpr std::string_view kBuiltinBbo =
    R"(# beta-barium borate, negative uniaxial
# n^2 = A + B / (lambda^2 - C) - D * lambda^2, lambda in micrometres
format_version = 1
name = BBO
provenance = K. Kato, IEEE J. Quantum Electron. QE-22, 1013 (1986)
lambda_min_um = 0.22
lambda_max_um = 1.06
ordinary.A = 2.7359
ordinary.B = 0.01878
ordinary.C = 0.01822
ordinary.D = 0.01354
extraordinary.A = 2.3753
extraordinary.B = 0.01224
extraordinary.C = 0.01667
extraordinary.D = 0.01516
)";

// Index differences below this are treated as exact phase matching.
constexpr double kIndexTolerance = 1e-13;

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("crystal file: '" + key + "' is not a number: '" +
                      text + "'");
  return value;
}

std::string range_text(const SellmeierSet& crystal) {
  std::ostringstream os;
  os << "[" << crystal.lambda_min() << ", " << crystal.lambda_max() << "] um";
  return os.str();
}

void require_range(const SellmeierSet& crystal, double lambda) {
  if (!std::isfinite(lambda) || !crystal.in_range(lambda)) {
    std::ostringstream os;
    os << "wavelength " << lambda << " um outside the " << crystal.name()
       << " dispersion range " << range_text(crystal);
    throw DomainError(os.str());
  }
}

} // namespace

double SellmeierTerms::index(double lambda) const {
  const double l2 = lambda * lambda;
  return std::sqrt(A + B / (l2 - C) - D * l2);
}

SellmeierSet::SellmeierSet(std::string name, SellmeierTerms ordinary,
                           SellmeierTerms extraordinary, double lambda_min,
                           double lambda_max, std::string provenance)
    : name_(std::move(name)), ordinary_(ordinary),
      extraordinary_(extraordinary), lambda_min_(lambda_min),
      lambda_max_(lambda_max), provenance_(std::move(provenance)) {
  if (!(lambda_min_ > 0.0) || !(lambda_max_ > lambda_min_))
    throw DomainError("crystal '" + name_ + "': invalid validity range");
  constexpr int samples = 256;
  for (int i = 0; i <= samples; ++i) {
    const double lambda =
        lambda_min_ + (lambda_max_ - lambda_min_) * i / double(samples);
    const double no = ordinary_.index(lambda);
    const double ne = extraordinary_.index(lambda);
    if (!std::isfinite(no) || !std::isfinite(ne) || no <= 1.0 || ne <= 1.0)
      throw DomainError("crystal '" + name_ +
                        "': refractive index not real or <= 1 at " +
                        std::to_string(lambda) + " um");
    if (!(ne < no))
      throw DomainError("crystal '" + name_ +
                        "': not negative uniaxial (n_e >= n_o) at " +
                        std::to_string(lambda) + " um");
  }
}

SellmeierSet parse_crystal(std::string_view text) {
  std::map<std::string, std::string> fields;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty())
      continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("crystal file line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (!fields.emplace(key, value).second)
      throw ConfigError("crystal file: duplicate key '" + key + "'");
  }

  static const std::array<std::string_view, 13> known = {
      "format_version",  "name",            "provenance",
      "lambda_min_um",   "lambda_max_um",   "ordinary.A",
      "ordinary.B",      "ordinary.C",      "ordinary.D",
      "extraordinary.A", "extraordinary.B", "extraordinary.C",
      "extraordinary.D"};
  for (const auto& [key, _] : fields)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("crystal file: unknown key '" + key + "'");

  auto get = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end())
      throw ConfigError("crystal file: missing key '" + key + "'");
    return it->second;
  };
  auto number = [&](const std::string& key) {
    return parse_number(key, get(key));
  };
  auto terms = [&](const std::string& prefix) {
    return SellmeierTerms{number(prefix + ".A"), number(prefix + ".B"),
                          number(prefix + ".C"), number(prefix + ".D")};
  };

  if (get("format_version") != "1")
    throw ConfigError("crystal file: unsupported format_version '" +
                      get("format_version") + "'");
  const std::string provenance =
      fields.count("provenance") ? fields.at("provenance") : std::string{};
  return SellmeierSet(get("name"), terms("ordinary"), terms("extraordinary"),
                      number("lambda_min_um"), number("lambda_max_um"),
                      provenance);
}

SellmeierSet load_crystal(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open crystal file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_crystal(buffer.str());
}

std::string_view builtin_bbo_text() { return kBuiltinBbo; }

SellmeierSet resolve_crystal(std::string_view name_or_path) {
  std::string upper(name_or_path);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "BBO")
    return parse_crystal(kBuiltinBbo);
  return load_crystal(std::filesystem::path(name_or_path));
}

double ordinary_index(const SellmeierSet& crystal, double lambda) {
  require_range(crystal, lambda);
  return crystal.ordinary().index(lambda);
}

double extraordinary_index(const SellmeierSet& crystal, double lambda) {
  require_range(crystal, lambda);
  return crystal.extraordinary().index(lambda);
}

double pump_index(const SellmeierSet& crystal, double lambda_p, double phi_p,
                  double alpha_p, double phi0) {
  if (!std::isfinite(phi_p) || !std::isfinite(alpha_p) ||
      !std::isfinite(phi0))
    throw DomainError("pump_index: non-finite angle");
  const double no = ordinary_index(crystal, lambda_p);
  const double ne = extraordinary_index(crystal, lambda_p);

  const double sp = std::sin(phi_p), cp = std::cos(phi_p);
  const double sa = std::sin(alpha_p), ca = std::cos(alpha_p);
  const double s0 = std::sin(phi0), c0 = std::cos(phi0);

  // Squared projections of the unit wave vector across and along the axis.
  const double along_x = sp * c0 * ca + cp * s0;
  const double across = sp * sp * sa * sa + along_x * along_x;
  const double along_axis = cp * c0 - sp * s0 * ca;
  return no * ne /
         std::sqrt(no * no * across + ne * ne * along_axis * along_axis);
}

double walkoff_slope(const SellmeierSet& crystal, double lambda_p,
                     double phi0) {
  const double no = ordinary_index(crystal, lambda_p);
  const double ne = extraordinary_index(crystal, lambda_p);
  const double s0 = std::sin(phi0), c0 = std::cos(phi0);
  const double denom = no * no * s0 * s0 + ne * ne * c0 * c0;
  return no * ne * (no * no - ne * ne) * s0 * c0 /
         (denom * std::sqrt(denom));
}

double pump_index_derivative(const SellmeierSet& crystal, double lambda_p,
                             double alpha_p, double phi0) {
  return -walkoff_slope(crystal, lambda_p, phi0) * std::cos(alpha_p);
}

double index_mismatch(const SellmeierSet& crystal, double lambda_p,
                      double phi0) {
  return pump_index(crystal, lambda_p, 0.0, 0.0, phi0) -
         ordinary_index(crystal, 2.0 * lambda_p);
}

double cone_angle(const SellmeierSet& crystal, double lambda_p, double phi0) {
  const double no = ordinary_index(crystal, 2.0 * lambda_p);
  const double np = pump_index(crystal, lambda_p, 0.0, 0.0, phi0);
  double gap = no - np;
  if (gap < -kIndexTolerance) {
    std::ostringstream os;
    os << "collinear-forbidden regime at phi0 = " << phi0
       << " rad: n_p = " << np << " exceeds n_o(2 lambda_p) = " << no
       << "; no real cone angle";
    throw RegimeError(os.str());
  }
  gap = std::max(gap, 0.0);
  return std::sqrt(2.0 * no * gap);
}

NoncollinearWindow collinear_threshold(const SellmeierSet& crystal,
                                       double lambda_p) {
  constexpr int scan_points = 200;
  auto f = [&](double phi0) { return index_mismatch(crystal, lambda_p, phi0); };

  std::vector<std::pair<double, double>> brackets;
  double prev_x = 0.0;
  double prev_f = f(prev_x);
  for (int i = 1; i < scan_points; ++i) {
    const double x = pi * i / double(scan_points - 1);
    const double fx = f(x);
    if ((prev_f < 0.0) != (fx < 0.0))
      brackets.emplace_back(prev_x, x);
    prev_x = x;
    prev_f = fx;
  }
  if (brackets.empty())
    throw RegimeError("no noncollinear window: n_p(phi0) - n_o(2 lambda_p) "
                      "does not change sign on [0, pi]");
  if (brackets.size() != 2 || f(0.0) < 0.0)
    throw RegimeError("unexpected index-mismatch shape: " +
                      std::to_string(brackets.size()) +
                      " sign changes on [0, pi]");

  auto tol = [](double lo, double hi) { return std::abs(hi - lo) < 1e-14; };
  auto solve = [&](std::pair<double, double> br) {
    auto [lo, hi] = boost::math::tools::bisect(f, br.first, br.second, tol);
    return 0.5 * (lo + hi);
  };
  return {solve(brackets[0]), solve(brackets[1])};
}

void ExperimentConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError(std::string(what) + " must be positive and finite");
  };
  positive(lambda_p, "pump wavelength");
  positive(waist, "pump waist");
  positive(length, "crystal length");
  if (!(phi0 >= 0.0 && phi0 <= pi / 2))
    throw DomainError("optic-axis angle phi0 must lie in [0, pi/2]");
  require_range(crystal, lambda_p);
  require_range(crystal, 2.0 * lambda_p);
}

DerivedScales derive_scales(const ExperimentConfig& config) {
  config.validate();
  DerivedScales s;
  s.lambda_p = config.lambda_p;
  s.waist = config.waist;
  s.length = config.length;
  s.n_o = ordinary_index(config.crystal, 2.0 * config.lambda_p);
  s.n_p0 = pump_index(config.crystal, config.lambda_p, 0.0, 0.0, config.phi0);
  s.theta0 = cone_angle(config.crystal, config.lambda_p, config.phi0);
  if (!(s.theta0 > 0.0))
    throw RegimeError("collinear regime (theta0 = 0): the noncollinear "
                      "model and its linearization do not apply");
  s.zeta = walkoff_slope(config.crystal, config.lambda_p, config.phi0);
  s.dtheta_p = config.lambda_p / (pi * config.waist);
  s.dtheta_L = s.n_o * config.lambda_p / (pi * config.length);
  // L/2 times the constant term -π θ₀² / (n_o λ_p) of the mismatch.
  s.phi_const = -pi * s.theta0 * s.theta0 * config.length /
                (2.0 * s.n_o * config.lambda_p);
  s.a = 2.0 * pi;
  s.b = s.dtheta_p / s.theta0;
  return s;
}

} // namespace biphoton
