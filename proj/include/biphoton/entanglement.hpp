#pragma once

// Azimuthal entanglement: width ratio R, the analytic double-Gaussian
// Schmidt spectrum, the OAM spectrum, and a discretized-kernel SVD oracle.

#include "biphoton/crystal.hpp"
#include "biphoton/numerics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace biphoton {

/// Azimuthal coincidence and single-particle widths.
///
/// The biphoton azimuthal density exp[−(α₁ − α₂)² / Δα_c²] on the square
/// |α₁|, |α₂| ≤ π/2 is a narrow ridge of unit height along the diagonal. A
/// coincidence scan (α₂ fixed, α₁ scanned) sees the ridge cross-section,
/// 1/e half-width Δα_c; a single-detector scan integrates over α₂ and sees
/// a flat distribution of full width π.
struct AzimuthalDistribution {
  double coincidence_width = 0.0; ///< Δα_c = Δθ_p / θ₀, rad
  double single_width = pi;       ///< Δα_s, rad
};

AzimuthalDistribution azimuthal_widths(const DerivedScales& scales);

/// R = Δα_s / Δα_c.
double r_parameter(const AzimuthalDistribution& dist);

/// Joint density exp[−(α₁ − α₂)² / Δα_c²], zero outside |α₀| ≤ π/2.
double azimuthal_density(const AzimuthalDistribution& dist, double alpha1,
                         double alpha2);

/// Unconditional density of α₁: the joint density integrated over
/// α₂ ∈ [−π/2, π/2], divided by its value deep inside the interval.
double single_particle_density(const AzimuthalDistribution& dist,
                               double alpha1);

struct DensityGrid {
  std::vector<double> axis;   ///< shared α₁ / α₂ sample points
  std::vector<double> values; ///< row-major, values[i * n + j] at (α₁ᵢ, α₂ⱼ)
};

/// Samples the joint density on points × points over [lo, hi]².
/// Throws ResolutionError if fewer than 4 samples span Δα_c.
DensityGrid azimuthal_density_grid(const AzimuthalDistribution& dist,
                                   std::size_t points, double lo = -pi / 2,
                                   double hi = pi / 2);

enum class SchmidtMethod { AnalyticDoubleGaussian, NumericSvd, Oam };

enum class OamParity { Cos, Sin };

struct OamLabel {
  int l = 0;
  OamParity parity = OamParity::Cos;
};

/// Schmidt weights plus derived entanglement measures.
///
/// For the analytic and numeric methods the weights are in descending
/// order. For OAM the modes are (0, cos), (1, cos), (1, sin), (2, cos), ...
/// with labels in `oam_labels`.
struct SchmidtSpectrum {
  SchmidtMethod method = SchmidtMethod::AnalyticDoubleGaussian;
  std::vector<double> weights;
  std::vector<OamLabel> oam_labels;
  double schmidt_number = 0.0; ///< 1 / Σλ², from the stored weights
  double entropy_bits = 0.0;   ///< −Σ λ log₂ λ
  double residual = 0.0;       ///< weight mass beyond the stored modes
  std::size_t highest_index = 0; ///< n_max or l_max actually used
  bool truncated = false;        ///< mode cap reached before the residual target
  /// Named closed-form references for comparison (method dependent).
  std::vector<std::pair<std::string, double>> references;

  double reference(const std::string& name) const;
};

double schmidt_number(std::span<const double> weights);
double entropy_bits(std::span<const double> weights);

inline constexpr double kResidualTarget = 1e-9;
inline constexpr std::size_t kModeCap = 1'000'000;

/// λ_n = 4ab/(a+b)² ((a−b)/(a+b))^{2n} for the double Gaussian
/// exp[−(α₁+α₂)²/2a²] exp[−(α₁−α₂)²/2b²]. Modes 0..n_max are kept, and
/// n_max is extended until the tail mass drops below kResidualTarget or
/// `cap` modes are stored. References: "double_gaussian" (a²+b²)/2ab and
/// "a_over_2b". Throws DomainError for nonpositive a or b.
SchmidtSpectrum schmidt_analytic(double a, double b, std::size_t n_max = 0,
                                 std::size_t cap = kModeCap);

/// Normalized Hermite function u_n(x) by the stable three-term recurrence.
double hermite_function(std::size_t n, double x);

/// Schmidt mode ψ_n(α) = (2/ab)^{1/4} u_n(√2 α / √(ab)).
double schmidt_mode(std::size_t n, double a, double b, double alpha);

/// The normalized double-Gaussian kernel with N = sqrt(2 / (π a b)).
std::function<double(double, double)> double_gaussian_kernel(double a,
                                                             double b);

/// Symmetric midpoint grid on [lower, upper] for both arguments.
struct KernelGrid {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t points = 0;
  double feature_width = 0.0; ///< narrowest kernel feature, rad
  double min_points_per_feature = 8.0;

  double spacing() const { return (upper - lower) / double(points); }
  double node(std::size_t i) const { return lower + spacing() * (i + 0.5); }
};

struct NumericSchmidt {
  SchmidtSpectrum spectrum;
  std::vector<double> nodes;
  /// Singular vectors (columns) scaled back to mode values at the nodes;
  /// empty unless requested.
  Eigen::MatrixXd left_modes;
  Eigen::MatrixXd right_modes;
};

/// SVD of the quadrature-weighted kernel matrix h·K(αᵢ, αⱼ). Weights are
/// the normalized squared singular values.
/// Throws ResolutionError naming the required point count if the grid puts
/// fewer than min_points_per_feature samples across feature_width.
NumericSchmidt schmidt_numeric(
    const std::function<double(double, double)>& kernel,
    const KernelGrid& grid, bool with_modes = false);

/// OAM Schmidt spectrum of the azimuthal Gaussian: λ_l ∝ exp(−l² Δα_c²),
/// with explicit (l, parity) modes and l = 0 stored once. l_max is
/// auto-extended like n_max in schmidt_analytic. References:
/// "printed_closed_form" 2√(2π) θ₀ w / λ_p = 2√(2π) / (π Δα_c),
/// "continuum_limit" √(2π) / Δα_c (the same sum done as an integral),
/// "printed_normalization_sum" Σ over stored modes of Δα_c/(2√π) e^{−l²Δα_c²}.
/// Requires Δα_c < 0.1 (RegimeError otherwise).
SchmidtSpectrum oam_spectrum(const AzimuthalDistribution& dist,
                             std::size_t l_max = 0,
                             std::size_t cap = kModeCap);

/// √(2/π) cos lα or √(2/π) sin lα on |α| ≤ π/2 (DomainError outside).
double oam_mode(int l, OamParity parity, double alpha);

/// Gram matrix of the OAM modes (0,cos), (1,cos), (1,sin), ... up to l_max on
/// [−π/2, π/2] by adaptive Gauss–Kronrod quadrature. These modes are not an
/// orthonormal set there: the l = 0 mode has norm² 2 and cos/cos pairs with
/// odd l − m overlap.
Eigen::MatrixXd oam_gram_matrix(int l_max);

struct CoefficientCheck {
  std::vector<double> coefficients; ///< Re C_l / C_0, l = 0..l_max
  double max_imaginary = 0.0;       ///< max |Im C_l| / C_0
  double max_relative_deviation = 0.0;
};

/// Fourier coefficients C_l = ∫ exp(−δ²/2Δα_c²) e^{−ilδ} dδ by trapezoidal
/// quadrature, compared with exp(−l² Δα_c² / 2).
CoefficientCheck coefficient_check(const AzimuthalDistribution& dist,
                                   int l_max);

} // namespace biphoton
