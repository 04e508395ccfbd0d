#include "biphoton/amplitude.hpp"

#include "biphoton/errors.hpp"
#include "biphoton/export.hpp"

#include <boost/math/tools/roots.hpp>

#include <ostream>

namespace biphoton {

namespace {

// Pump transverse wave vector k₁⊥ + k₂⊥ in units of π/λ_p. The minus signs
// come from alpha2 being counted from −x.
struct PumpTransverse {
  double x;
  double y;
};

PumpTransverse pump_transverse(const AngularPair& p) {
  const double s1 = std::sin(p.theta1), s2 = std::sin(p.theta2);
  return {s1 * std::cos(p.alpha1) - s2 * std::cos(p.alpha2),
          s1 * std::sin(p.alpha1) - s2 * std::sin(p.alpha2)};
}

double clamp_cos(double c) {
  constexpr double slack = 1e-12;
  if (c > 1.0 && c <= 1.0 + slack)
    return 1.0;
  if (c < -1.0 && c >= -1.0 - slack)
    return -1.0;
  return c;
}

// Linearized walk-off bracket (θ₁ − θ₂) cos α₀ − θ₀ sin α₀ (α₁ − α₂).
double walkoff_bracket(const AngularPair& p, double theta0) {
  const double a0 = p.alpha0();
  return (p.theta1 - p.theta2) * std::cos(a0) -
         theta0 * std::sin(a0) * p.alpha_diff();
}

// Argument of the sinc, L Δ / 2.
double sinc_argument(const AngularPair& p, const DerivedScales& s,
                     bool walkoff) {
  return 0.5 * s.length * phase_mismatch(p, s, walkoff);
}

double pump_exponent(const AngularPair& p, const DerivedScales& s) {
  const double d = p.theta1 - p.theta2;
  const double q = s.theta0 * p.alpha_diff();
  return (d * d + q * q) / (s.dtheta_p * s.dtheta_p);
}

} // namespace

AngularPair AngularPair::transposed() const {
  return {theta2, alpha2 + pi, theta1, alpha1 + pi};
}

TransverseMomenta transverse_sum_diff(const AngularPair& pair, double lambda_p,
                                      double theta0, Geometry geometry) {
  const double scale = (pi / lambda_p) * (pi / lambda_p);
  if (geometry == Geometry::SmallAngle) {
    const double d = pair.theta1 - pair.theta2;
    const double s = pair.theta1 + pair.theta2;
    const double q = theta0 * pair.alpha_diff();
    return {scale * (d * d + q * q), scale * (s * s - q * q)};
  }
  const auto k = pump_transverse(pair);
  const double s1 = std::sin(pair.theta1), s2 = std::sin(pair.theta2);
  const double dx = s1 * std::cos(pair.alpha1) + s2 * std::cos(pair.alpha2);
  const double dy = s1 * std::sin(pair.alpha1) + s2 * std::sin(pair.alpha2);
  return {scale * (k.x * k.x + k.y * k.y), scale * (dx * dx + dy * dy)};
}

double pump_polar_angle(const AngularPair& pair, double lambda_p, double n_p,
                        double theta0, Geometry geometry) {
  const auto m = transverse_sum_diff(pair, lambda_p, theta0, geometry);
  return lambda_p / (2.0 * pi * n_p) * std::sqrt(m.sum_sq);
}

double pump_azimuth_cos(const AngularPair& pair, double theta0,
                        AzimuthMode mode) {
  double num = 0.0, den = 0.0;
  if (mode == AzimuthMode::Exact) {
    const auto k = pump_transverse(pair);
    num = k.x;
    den = std::hypot(k.x, k.y);
  } else {
    num = walkoff_bracket(pair, theta0);
    den = std::hypot(pair.theta1 - pair.theta2, theta0 * pair.alpha_diff());
  }
  if (den == 0.0)
    throw DegenerateGeometryError(
        "back-to-back pair: pump transverse wave vector vanishes, "
        "its azimuth is undefined");
  return clamp_cos(num / den);
}

double pump_azimuth(const AngularPair& pair) {
  const auto k = pump_transverse(pair);
  if (k.x == 0.0 && k.y == 0.0)
    throw DegenerateGeometryError(
        "back-to-back pair: pump azimuth undefined");
  return std::atan2(k.y, k.x);
}

double walkoff_mismatch(const AngularPair& pair, const DerivedScales& scales,
                        AzimuthMode mode) {
  if (mode == AzimuthMode::Linearized)
    return -pi * scales.zeta / (scales.lambda_p * scales.n_p0) *
           walkoff_bracket(pair, scales.theta0);
  const double phi_p =
      pump_polar_angle(pair, scales.lambda_p, scales.n_p0);
  if (phi_p == 0.0)
    return 0.0;
  const double cos_ap = pump_azimuth_cos(pair, scales.theta0, mode);
  return -2.0 * pi / scales.lambda_p * scales.zeta * phi_p * cos_ap;
}

double phase_mismatch(const AngularPair& pair, const DerivedScales& scales,
                      bool include_walkoff) {
  const double polar = pi / (scales.n_o * scales.lambda_p) * scales.theta0 *
                       (pair.theta1 + pair.theta2 - 2.0 * scales.theta0);
  if (!include_walkoff)
    return polar;
  return polar + walkoff_mismatch(pair, scales, AzimuthMode::Linearized);
}

double constant_mismatch(const DerivedScales& scales) {
  return -pi * scales.theta0 * scales.theta0 / (scales.n_o * scales.lambda_p);
}

double amplitude(const AmplitudeModel& model, const AngularPair& pair) {
  const auto& s = model.scales;
  switch (model.kind) {
  case ModelKind::Full:
  case ModelKind::NoWalkoff: {
    const bool walkoff = model.kind == ModelKind::Full;
    return model.normalization * std::exp(-0.5 * pump_exponent(pair, s)) *
           sinc(sinc_argument(pair, s, walkoff));
  }
  case ModelKind::DoubleGaussian:
    return std::sqrt(probability_density(model, pair));
  }
  return 0.0;
}

double probability_density(const AmplitudeModel& model,
                           const AngularPair& pair) {
  if (model.kind != ModelKind::DoubleGaussian) {
    const double psi = amplitude(model, pair);
    return psi * psi;
  }
  const auto& s = model.scales;
  const double x = sinc_argument(pair, s, model.include_walkoff);
  return model.normalization * model.normalization *
         std::exp(-pump_exponent(pair, s) - model.gauss_coefficient * x * x);
}

SincGaussFit fit_gaussian(const std::function<double(double)>& target,
                          double half_range, std::size_t grid_size) {
  if (grid_size < 64)
    throw DomainError("fit_gaussian: grid_size must be >= 64");
  if (!(half_range > 0.0))
    throw DomainError("fit_gaussian: half_range must be positive");

  std::vector<double> x(grid_size), t(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    x[i] = -half_range + 2.0 * half_range * double(i) / double(grid_size - 1);
    t[i] = target(x[i]);
  }
  // Stationarity of the squared residual: Σ (g − t) x² g = 0, g = e^{−c x²}.
  auto gradient = [&](double c) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < grid_size; ++i) {
      const double g = std::exp(-c * x[i] * x[i]);
      acc.add((g - t[i]) * x[i] * x[i] * g);
    }
    return acc.value();
  };
  double lo = 1e-6, hi = 1.0;
  while (gradient(hi) > 0.0 && hi < 1e6)
    hi *= 4.0;
  if (!(gradient(lo) > 0.0) || !(gradient(hi) <= 0.0))
    throw DomainError("fit_gaussian: no least-squares minimum bracketed");
  auto tol = [](double a, double b) {
    return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(b));
  };
  auto [c_lo, c_hi] = boost::math::tools::bisect(gradient, lo, hi, tol);
  const double c = 0.5 * (c_lo + c_hi);

  CompensatedSum sq;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double r = std::exp(-c * x[i] * x[i]) - t[i];
    sq.add(r * r);
  }
  return {c, std::sqrt(sq.value() / double(grid_size))};
}

SincGaussFit sinc_gauss_fit(double half_range, std::size_t grid_size) {
  return fit_gaussian(
      [](double x) {
        const double s = sinc(x);
        return s * s;
      },
      half_range, grid_size);
}

ValidityReport validity_report(const ExperimentConfig& config,
                               const DerivedScales& scales) {
  if (!(scales.theta0 > 0.0))
    throw RegimeError("collinear regime (theta0 = 0): linearization of the "
                      "phase mismatch is impossible");
  auto flag = [](double value) {
    ValidityRatio r;
    r.value = value;
    r.status = value < r.threshold ? ValidityStatus::Pass : ValidityStatus::Warn;
    return r;
  };
  const double L = config.length;
  const double lp = config.lambda_p;
  const double t2 = scales.theta0 * scales.theta0;
  const double rayleigh = pi * config.waist * config.waist / lp;

  ValidityReport report;
  report.diffraction_ratio = flag(L / (8.0 * scales.n_o * rayleigh));
  report.linearization_ratio = flag(scales.n_o * lp / (pi * L * t2));
  report.length_threshold_um = scales.n_o * lp / (pi * t2);
  report.length_threshold_ratio = flag(report.length_threshold_um / L);
  return report;
}

AngularWindow default_window(const DerivedScales& scales) {
  const double polar = 8.0 * scales.dtheta_L / scales.theta0;
  return {scales.theta0 - polar, scales.theta0 + polar,
          8.0 * scales.dtheta_p / scales.theta0};
}

double l2_norm_squared(const AmplitudeModel& model, std::size_t points) {
  if (points < 4)
    throw DomainError("l2_norm_squared: need at least 4 points per axis");
  const auto& s = model.scales;
  // 1σ widths of |Ψ|² in d = θ₁ − θ₂ and δ = α₁ − α₂.
  const double sigma_d = s.dtheta_p / std::sqrt(2.0);
  const double sigma_delta = sigma_d / s.theta0;
  // x = L Δ / 2 = θ₀ s_dev / (2 Δθ_L) + walk-off shift, s_dev = θ₁ + θ₂ − 2θ₀.
  const double ds_dx = 2.0 * s.dtheta_L / s.theta0;

  const bool gaussian = model.kind == ModelKind::DoubleGaussian;
  // The sinc² tail beyond |x| = 64π drops about 0.3% of the mass.
  const double x_max =
      gaussian ? 8.0 / std::sqrt(2.0 * model.gauss_coefficient) : 64.0 * pi;
  const std::size_t s_points = gaussian ? points : 2048;

  const double d_half = 8.0 * sigma_d, delta_half = 8.0 * sigma_delta;
  const double h_d = 2.0 * d_half / double(points);
  const double h_delta = 2.0 * delta_half / double(points);
  const double h_a0 = pi / double(points);
  const double h_x = 2.0 * x_max / double(s_points);

  CompensatedSum total;
  for (std::size_t ia = 0; ia < points; ++ia) {
    const double a0 = -pi / 2 + h_a0 * (ia + 0.5);
    for (std::size_t id = 0; id < points; ++id) {
      const double d = -d_half + h_d * (id + 0.5);
      for (std::size_t iq = 0; iq < points; ++iq) {
        const double delta = -delta_half + h_delta * (iq + 0.5);
        // Center the s-window on the walk-off shift of the sinc argument.
        AngularPair centre{s.theta0 + d / 2, a0 + delta / 2, s.theta0 - d / 2,
                           a0 - delta / 2};
        const bool walkoff = model.kind == ModelKind::Full ||
                             (gaussian && model.include_walkoff);
        const double shift = walkoff ? 0.5 * s.length *
                                           walkoff_mismatch(centre, s)
                                     : 0.0;
        CompensatedSum line;
        for (std::size_t ix = 0; ix < s_points; ++ix) {
          const double x = -x_max + h_x * (ix + 0.5) - shift;
          const double sdev = x * ds_dx;
          AngularPair p{s.theta0 + (sdev + d) / 2, a0 + delta / 2,
                        s.theta0 + (sdev - d) / 2, a0 - delta / 2};
          line.add(probability_density(model, p));
        }
        total.add(line.value() * h_x * ds_dx);
      }
    }
  }
  // dθ₁ dθ₂ = ½ ds dd, dα₁ dα₂ = dα₀ dδ.
  return 0.5 * total.value() * h_d * h_delta * h_a0;
}

AmplitudeModel l2_normalized(AmplitudeModel model, std::size_t points) {
  model.normalization = 1.0;
  model.normalization = 1.0 / std::sqrt(l2_norm_squared(model, points));
  return model;
}

void write_amplitude_grid_csv(std::ostream& out, const AmplitudeModel& model,
                              std::size_t theta_points,
                              std::size_t diff_points, double alpha0,
                              bool density) {
  if (theta_points < 2 || diff_points < 2)
    throw DomainError("amplitude grid needs at least 2 points per axis");
  const auto w = default_window(model.scales);
  out << "theta1,theta2,alpha1,alpha2,value\n";
  for (std::size_t i = 0; i < theta_points; ++i) {
    const double t1 = w.theta_min + (w.theta_max - w.theta_min) * double(i) /
                                         double(theta_points - 1);
    for (std::size_t j = 0; j < theta_points; ++j) {
      const double t2 = w.theta_min + (w.theta_max - w.theta_min) *
                                          double(j) / double(theta_points - 1);
      for (std::size_t k = 0; k < diff_points; ++k) {
        const double delta =
            -w.alpha_diff_half_width +
            2.0 * w.alpha_diff_half_width * double(k) / double(diff_points - 1);
        AngularPair p{t1, alpha0 + delta / 2, t2, alpha0 - delta / 2};
        const double v = density ? probability_density(model, p)
                                 : amplitude(model, p);
        out << format_number(p.theta1) << ',' << format_number(p.theta2) << ','
            << format_number(p.alpha1) << ',' << format_number(p.alpha2) << ','
            << format_number(v) << '\n';
      }
    }
  }
}

} // namespace biphoton
