#pragma once

// Angular two-photon amplitude of noncollinear type-I down-conversion.

#include "biphoton/crystal.hpp"
#include "biphoton/numerics.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

namespace biphoton {

/// Free-space (post-crystal) photon directions.
///
/// Polar angles are measured from the pump axis z and are always
/// non-negative. alpha1 is counted from +x and alpha2 from −x, so a pair
/// sitting at opposite ends of a ring diameter has alpha1 ≈ alpha2.
/// Because of this convention, exchanging the two photons means swapping
/// (theta1, alpha1) with (theta2, alpha2) *and* shifting both azimuths by
/// π; see transposed(). The half-sum alpha0 is taken in (−π/2, π/2] in the
/// azimuthal analysis.
struct AngularPair {
  double theta1 = 0.0;
  double alpha1 = 0.0;
  double theta2 = 0.0;
  double alpha2 = 0.0;

  double alpha0() const { return 0.5 * (alpha1 + alpha2); }
  double alpha_diff() const { return alpha1 - alpha2; }
  AngularPair transposed() const;
};

enum class Geometry { Exact, SmallAngle };

/// |k₁⊥ + k₂⊥|² and |k₁⊥ − k₂⊥|² in μm⁻².
struct TransverseMomenta {
  double sum_sq = 0.0;
  double diff_sq = 0.0;
};

/// theta0 enters only the small-angle form.
TransverseMomenta transverse_sum_diff(const AngularPair& pair, double lambda_p,
                                      double theta0, Geometry geometry);

/// Polar angle of the pump wave vector inside the crystal, from continuity
/// of the tangential components: φ_p = λ_p |k₁⊥ + k₂⊥| / (2π n_p).
double pump_polar_angle(const AngularPair& pair, double lambda_p, double n_p,
                        double theta0 = 0.0,
                        Geometry geometry = Geometry::Exact);

enum class AzimuthMode { Exact, Linearized };

/// cos α_p of the pump transverse wave vector k₁⊥ + k₂⊥. The linearized
/// form keeps first order in θ₁ − θ₂ and α₁ − α₂. The result is clamped to
/// [−1, 1] when it overshoots by at most 1e-12.
/// Throws DegenerateGeometryError when k₁⊥ + k₂⊥ = 0.
double pump_azimuth_cos(const AngularPair& pair, double theta0,
                        AzimuthMode mode);

/// α_p itself (exact geometry), via atan2 of the pump transverse components.
double pump_azimuth(const AngularPair& pair);

/// Walk-off contribution (μm⁻¹) to the phase mismatch, −(2π/λ_p) ζ φ_p cos α_p.
/// Linearized mode is the first-order expression used in the amplitude;
/// exact mode multiplies the exact φ_p and cos α_p and returns 0 for a
/// back-to-back pair, where φ_p vanishes.
double walkoff_mismatch(const AngularPair& pair, const DerivedScales& scales,
                        AzimuthMode mode = AzimuthMode::Linearized);

/// Phase mismatch Δ in μm⁻¹: the linearized no-walk-off part
/// (π / n_o λ_p) θ₀ (θ₁ + θ₂ − 2θ₀), plus the linearized walk-off term when
/// requested.
double phase_mismatch(const AngularPair& pair, const DerivedScales& scales,
                      bool include_walkoff);

/// Constant part Δ₀ of the mismatch (μm⁻¹); L Δ₀ / 2 == scales.phi_const.
double constant_mismatch(const DerivedScales& scales);

/// Best-fit coefficient c in sinc²(x) ≈ exp(−c x²).
inline constexpr double kSincGaussCoefficient = 0.359;
/// Coefficient as printed in the double-Gaussian density formula.
inline constexpr double kPrintedDensityCoefficient = 0.395;

enum class ModelKind { Full, NoWalkoff, DoubleGaussian };

/// All models are peak-normalized: amplitude 1 for an on-cone pair with
/// α₁ = α₂. `normalization` rescales that (see l2_norm_squared).
struct AmplitudeModel {
  ModelKind kind = ModelKind::Full;
  DerivedScales scales;
  double gauss_coefficient = kSincGaussCoefficient;
  bool include_walkoff = true; ///< used by DoubleGaussian only
  double normalization = 1.0;
};

/// Full: Gaussian pump factor × sinc(L Δ / 2) with walk-off.
/// NoWalkoff: the same with ζ = 0.
/// DoubleGaussian: the Gaussian-modeled amplitude, sqrt of the density.
double amplitude(const AmplitudeModel& model, const AngularPair& pair);

/// |Ψ|². For DoubleGaussian this is the double-Gaussian density with the
/// sinc² → exp(−c x²) replacement; otherwise the squared amplitude.
double probability_density(const AmplitudeModel& model,
                           const AngularPair& pair);

struct SincGaussFit {
  double coefficient = 0.0;
  double rms_residual = 0.0;
};

/// Least-squares fit of exp(−c x²) to `target` on a uniform grid over
/// [−half_range, half_range]. Requires grid_size >= 64.
SincGaussFit fit_gaussian(const std::function<double(double)>& target,
                          double half_range, std::size_t grid_size);

/// fit_gaussian applied to sinc²(x).
SincGaussFit sinc_gauss_fit(double half_range = pi,
                            std::size_t grid_size = 2049);

enum class ValidityStatus { Pass, Warn };

struct ValidityRatio {
  double value = 0.0;
  double threshold = 0.1;
  ValidityStatus status = ValidityStatus::Pass;
};

/// Dimensionless checks of the linear-mismatch model.
struct ValidityReport {
  /// Dropped azimuthal quadratic term, L / (8 n_o L_D), L_D = π w² / λ_p.
  ValidityRatio diffraction_ratio;
  /// Dropped polar quadratic term, n_o λ_p / (π L θ₀²).
  ValidityRatio linearization_ratio;
  /// Crystal length the linearization needs to exceed, n_o λ_p / (π θ₀²), μm.
  double length_threshold_um = 0.0;
  /// length_threshold_um / L, flagged at the same 0.1 threshold.
  ValidityRatio length_threshold_ratio;
};

/// Throws RegimeError if θ₀ = 0 (collinear: the mismatch cannot be
/// linearized).
ValidityReport validity_report(const ExperimentConfig& config,
                               const DerivedScales& scales);

/// Sampling window for amplitude grids:
/// θ ∈ θ₀ ± 8 Δθ_L/θ₀ and α₁ − α₂ ∈ ±8 Δθ_p/θ₀.
struct AngularWindow {
  double theta_min = 0.0;
  double theta_max = 0.0;
  double alpha_diff_half_width = 0.0;
};
AngularWindow default_window(const DerivedScales& scales);

/// ∫|Ψ|² dθ₁ dθ₂ dα₁ dα₂ by midpoint quadrature over 8σ windows in the sum
/// and difference variables, with α₀ over (−π/2, π/2]. `points` per axis.
double l2_norm_squared(const AmplitudeModel& model, std::size_t points = 48);

/// Returns `model` with normalization set so that l2_norm_squared is 1.
AmplitudeModel l2_normalized(AmplitudeModel model, std::size_t points = 48);

/// Writes a CSV slice with header theta1,theta2,alpha1,alpha2,value over
/// the default window: theta_points² polar pairs × diff_points azimuth
/// differences at the fixed half-sum alpha0. `density` selects |Ψ|².
void write_amplitude_grid_csv(std::ostream& out, const AmplitudeModel& model,
                              std::size_t theta_points,
                              std::size_t diff_points, double alpha0,
                              bool density);

} // namespace biphoton
