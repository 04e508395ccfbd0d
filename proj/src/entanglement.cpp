#include "biphoton/entanglement.hpp"

#include "biphoton/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <sstream>

namespace biphoton {

AzimuthalDistribution azimuthal_widths(const DerivedScales& scales) {
  if (!(scales.theta0 > 0.0) || !(scales.dtheta_p > 0.0))
    throw RegimeError("azimuthal widths need theta0 > 0 and dtheta_p > 0");
  return {scales.dtheta_p / scales.theta0, pi};
}

double r_parameter(const AzimuthalDistribution& dist) {
  return dist.single_width / dist.coincidence_width;
}

double azimuthal_density(const AzimuthalDistribution& dist, double alpha1,
                         double alpha2) {
  const double a0 = 0.5 * (alpha1 + alpha2);
  if (a0 > pi / 2 || a0 < -pi / 2)
    return 0.0;
  const double u = (alpha1 - alpha2) / dist.coincidence_width;
  return std::exp(-u * u);
}

double single_particle_density(const AzimuthalDistribution& dist,
                               double alpha1) {
  const double w = dist.coincidence_width;
  return 0.5 * (std::erf((pi / 2 - alpha1) / w) +
                std::erf((alpha1 + pi / 2) / w));
}

DensityGrid azimuthal_density_grid(const AzimuthalDistribution& dist,
                                   std::size_t points, double lo, double hi) {
  if (!(hi > lo))
    throw DomainError("density grid: empty angular range");
  const double span = hi - lo;
  const auto required = static_cast<std::size_t>(
      std::ceil(4.0 * span / dist.coincidence_width)) + 1;
  if (points < 2 || points < required) {
    std::ostringstream os;
    os << "density grid of " << points << " points cannot resolve the "
       << "coincidence width " << dist.coincidence_width
       << " rad (needs 4 samples across it): use at least " << required
       << " points or a narrower angular range";
    throw ResolutionError(os.str(), required);
  }
  DensityGrid grid;
  grid.axis.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    grid.axis[i] = lo + span * double(i) / double(points - 1);
  grid.values.resize(points * points);
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t j = 0; j < points; ++j)
      grid.values[i * points + j] =
          azimuthal_density(dist, grid.axis[i], grid.axis[j]);
  return grid;
}

double SchmidtSpectrum::reference(const std::string& name) const {
  for (const auto& [key, value] : references)
    if (key == name)
      return value;
  throw DomainError("spectrum has no reference named '" + name + "'");
}

double schmidt_number(std::span<const double> weights) {
  CompensatedSum sq;
  for (double w : weights)
    sq.add(w * w);
  return 1.0 / sq.value();
}

double entropy_bits(std::span<const double> weights) {
  CompensatedSum s;
  for (double w : weights)
    if (w > 0.0)
      s.add(-w * std::log2(w));
  return s.value();
}

namespace {

void finish(SchmidtSpectrum& spectrum) {
  spectrum.schmidt_number = schmidt_number(spectrum.weights);
  spectrum.entropy_bits = entropy_bits(spectrum.weights);
}

} // namespace

SchmidtSpectrum schmidt_analytic(double a, double b, std::size_t n_max,
                                 std::size_t cap) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("schmidt_analytic: a and b must be positive and finite");
  if (cap == 0)
    throw DomainError("schmidt_analytic: mode cap must be positive");

  const double q = (a - b) / (a + b);
  const double q2 = q * q;
  SchmidtSpectrum out;
  out.method = SchmidtMethod::AnalyticDoubleGaussian;

  // Tail mass beyond index n is q^{2(n+1)}.
  double weight = 4.0 * a * b / ((a + b) * (a + b));
  double tail = q2;
  out.weights.push_back(weight);
  std::size_t n = 0;
  while ((n < n_max || tail >= kResidualTarget) && out.weights.size() < cap) {
    weight *= q2;
    tail *= q2;
    out.weights.push_back(weight);
    ++n;
  }
  out.highest_index = n;
  out.residual = tail;
  out.truncated = tail >= kResidualTarget;
  finish(out);
  out.references = {{"double_gaussian", (a * a + b * b) / (2.0 * a * b)},
                    {"a_over_2b", a / (2.0 * b)}};
  return out;
}

double hermite_function(std::size_t n, double x) {
  double prev = 0.0;
  double cur = std::exp(-0.5 * x * x) / std::pow(pi, 0.25);
  for (std::size_t k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / double(k + 1)) * x * cur -
                        std::sqrt(double(k) / double(k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double schmidt_mode(std::size_t n, double a, double b, double alpha) {
  const double ab = a * b;
  return std::pow(2.0 / ab, 0.25) *
         hermite_function(n, std::sqrt(2.0) * alpha / std::sqrt(ab));
}

std::function<double(double, double)> double_gaussian_kernel(double a,
                                                             double b) {
  const double norm = std::sqrt(2.0 / (pi * a * b));
  return [=](double x1, double x2) {
    const double s = x1 + x2, d = x1 - x2;
    return norm * std::exp(-s * s / (2.0 * a * a) - d * d / (2.0 * b * b));
  };
}

NumericSchmidt schmidt_numeric(
    const std::function<double(double, double)>& kernel,
    const KernelGrid& grid, bool with_modes) {
  if (!(grid.upper > grid.lower) || !(grid.feature_width > 0.0))
    throw DomainError("schmidt_numeric: invalid grid");
  const double span = grid.upper - grid.lower;
  const auto required = static_cast<std::size_t>(
      std::ceil(grid.min_points_per_feature * span / grid.feature_width));
  if (grid.points < required || grid.points < 2) {
    std::ostringstream os;
    os << "schmidt_numeric: " << grid.points << " grid points put "
       << grid.feature_width / grid.spacing() << " samples across the "
       << "narrowest feature; need " << grid.min_points_per_feature
       << ", i.e. at least " << required << " points";
    throw ResolutionError(os.str(), required);
  }

  const std::size_t m = grid.points;
  const double h = grid.spacing();
  NumericSchmidt out;
  out.nodes.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    out.nodes[i] = grid.node(i);

  Eigen::MatrixXd A(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i)
      A(Eigen::Index(i), Eigen::Index(j)) = h * kernel(out.nodes[i], out.nodes[j]);

  const unsigned options =
      with_modes ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, options);
  const Eigen::VectorXd sigma = svd.singularValues();

  CompensatedSum total;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    total.add(sigma[i] * sigma[i]);
  auto& spec = out.spectrum;
  spec.method = SchmidtMethod::NumericSvd;
  spec.weights.resize(std::size_t(sigma.size()));
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    spec.weights[std::size_t(i)] = sigma[i] * sigma[i] / total.value();
  spec.highest_index = m - 1;
  finish(spec);

  if (with_modes) {
    out.left_modes = svd.matrixU() / std::sqrt(h);
    out.right_modes = svd.matrixV() / std::sqrt(h);
  }
  return out;
}

SchmidtSpectrum oam_spectrum(const AzimuthalDistribution& dist,
                             std::size_t l_max, std::size_t cap) {
  const double w = dist.coincidence_width;
  if (!(w > 0.0) || !(w < 0.1))
    throw RegimeError("OAM spectrum needs a narrow coincidence width "
                      "(0 < dalpha_c < 0.1 rad), got " + std::to_string(w));
  if (cap == 0)
    throw DomainError("oam_spectrum: mode cap must be positive");
  const double w2 = w * w;
  const double approx_total = std::sqrt(pi) / w;

  // Bound on the mass of both parities beyond l: geometric majorant.
  auto tail_after = [&](double l) {
    const double first = std::exp(-(l + 1) * (l + 1) * w2);
    const double ratio = std::exp(-(2 * l + 3) * w2);
    return 2.0 * first / (1.0 - ratio);
  };

  std::size_t l = 0;
  while ((l < l_max || tail_after(double(l)) >= kResidualTarget * approx_total) &&
         2 * (l + 1) + 1 <= cap)
    ++l;

  SchmidtSpectrum out;
  out.method = SchmidtMethod::Oam;
  std::vector<double> raw;
  raw.reserve(2 * l + 1);
  raw.push_back(1.0);
  out.oam_labels.push_back({0, OamParity::Cos});
  for (std::size_t k = 1; k <= l; ++k) {
    const double e = std::exp(-double(k) * double(k) * w2);
    raw.push_back(e);
    raw.push_back(e);
    out.oam_labels.push_back({int(k), OamParity::Cos});
    out.oam_labels.push_back({int(k), OamParity::Sin});
  }
  const double stored = compensated_sum(raw);
  const double tail = tail_after(double(l));
  out.weights.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out.weights[i] = raw[i] / stored;
  out.highest_index = l;
  out.residual = tail / (stored + tail);
  out.truncated = tail >= kResidualTarget * approx_total;
  finish(out);

  const double printed_prefactor = w / (2.0 * std::sqrt(pi));
  out.references = {
      {"printed_closed_form", 2.0 * std::sqrt(2.0 * pi) / (pi * w)},
      {"continuum_limit", std::sqrt(2.0 * pi) / w},
      {"printed_normalization_sum", printed_prefactor * stored}};
  return out;
}

double oam_mode(int l, OamParity parity, double alpha) {
  if (l < 0)
    throw DomainError("oam_mode: l must be >= 0");
  if (std::abs(alpha) > pi / 2 + 1e-12)
    throw DomainError("oam_mode: alpha outside [-pi/2, pi/2]");
  const double c = std::sqrt(2.0 / pi);
  return parity == OamParity::Cos ? c * std::cos(l * alpha)
                                  : c * std::sin(l * alpha);
}

Eigen::MatrixXd oam_gram_matrix(int l_max) {
  if (l_max < 0)
    throw DomainError("oam_gram_matrix: l_max must be >= 0");
  std::vector<OamLabel> labels{{0, OamParity::Cos}};
  for (int l = 1; l <= l_max; ++l) {
    labels.push_back({l, OamParity::Cos});
    labels.push_back({l, OamParity::Sin});
  }
  const auto n = Eigen::Index(labels.size());
  Eigen::MatrixXd gram(n, n);
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const auto li = labels[std::size_t(i)], lj = labels[std::size_t(j)];
      auto f = [&](double x) {
        return oam_mode(li.l, li.parity, x) * oam_mode(lj.l, lj.parity, x);
      };
      gram(i, j) = gram(j, i) = Quad::integrate(f, -pi / 2, pi / 2, 15, 1e-14);
    }
  return gram;
}

CoefficientCheck coefficient_check(const AzimuthalDistribution& dist,
                                   int l_max) {
  if (l_max < 0)
    throw DomainError("coefficient_check: l_max must be >= 0");
  const double w = dist.coincidence_width;
  const double half = std::min(pi, 14.0 * w);
  const double h_target =
      std::min(w / 16.0, pi / (16.0 * std::max(1, l_max)));
  const auto intervals =
      static_cast<std::size_t>(std::ceil(2.0 * half / h_target));
  const double h = 2.0 * half / double(intervals);

  std::vector<double> delta(intervals + 1), gauss(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    delta[k] = -half + h * double(k);
    const double u = delta[k] / w;
    gauss[k] = std::exp(-0.5 * u * u) * ((k == 0 || k == intervals) ? 0.5 : 1.0);
  }

  CoefficientCheck out;
  std::vector<double> re(std::size_t(l_max) + 1), im(std::size_t(l_max) + 1);
  for (int l = 0; l <= l_max; ++l) {
    CompensatedSum sr, si;
    for (std::size_t k = 0; k <= intervals; ++k) {
      sr.add(gauss[k] * std::cos(l * delta[k]));
      si.add(-gauss[k] * std::sin(l * delta[k]));
    }
    re[std::size_t(l)] = sr.value() * h;
    im[std::size_t(l)] = si.value() * h;
  }
  out.coefficients.resize(re.size());
  for (std::size_t l = 0; l < re.size(); ++l) {
    out.coefficients[l] = re[l] / re[0];
    out.max_imaginary = std::max(out.max_imaginary, std::abs(im[l]) / re[0]);
    const double expected = std::exp(-0.5 * double(l * l) * w * w);
    out.max_relative_deviation =
        std::max(out.max_relative_deviation,
                 std::abs(out.coefficients[l] - expected) / expected);
  }
  return out;
}

} // namespace biphoton
