#pragma once

// Dispersion and birefringence of a uniaxial crystal pumped for type-I
// (e -> o + o) frequency-degenerate down-conversion.
//
// Units: wavelengths and lengths in micrometres, angles in radians.

#include <filesystem>
#include <string>
#include <string_view>

namespace biphoton {

/// n^2(λ) = A + B / (λ² − C) − D λ², λ in μm (B, C in μm², D in μm⁻²).
struct SellmeierTerms {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;

  double index(double lambda) const;
};

/// Immutable dispersion data for a negative uniaxial crystal.
///
/// Construction checks that both indices are real, above 1, and that
/// n_e < n_o everywhere on the declared validity range.
class SellmeierSet {
public:
  SellmeierSet(std::string name, SellmeierTerms ordinary,
               SellmeierTerms extraordinary, double lambda_min,
               double lambda_max, std::string provenance);

  const std::string& name() const noexcept { return name_; }
  const std::string& provenance() const noexcept { return provenance_; }
  const SellmeierTerms& ordinary() const noexcept { return ordinary_; }
  const SellmeierTerms& extraordinary() const noexcept {
    return extraordinary_;
  }
  double lambda_min() const noexcept { return lambda_min_; }
  double lambda_max() const noexcept { return lambda_max_; }
  bool in_range(double lambda) const noexcept {
    return lambda >= lambda_min_ && lambda <= lambda_max_;
  }

private:
  std::string name_;
  SellmeierTerms ordinary_;
  SellmeierTerms extraordinary_;
  double lambda_min_;
  double lambda_max_;
  std::string provenance_;
};

/// Parses the key-value crystal format (see data/crystals/bbo.crystal).
SellmeierSet parse_crystal(std::string_view text);
SellmeierSet load_crystal(const std::filesystem::path& path);
/// Text of the built-in BBO data set; identical to data/crystals/bbo.crystal.
std::string_view builtin_bbo_text();
/// "BBO" (case-insensitive) yields the built-in set, anything else is read
/// as a file path.
SellmeierSet resolve_crystal(std::string_view name_or_path);

/// Throws DomainError naming the validity range.
double ordinary_index(const SellmeierSet& crystal, double lambda);
double extraordinary_index(const SellmeierSet& crystal, double lambda);

/// Extraordinary index for a pump wave vector at polar angle phi_p (inside
/// the crystal) and azimuth alpha_p, the optic axis lying in the xz plane at
/// angle phi0 from z. No small-angle expansion.
double pump_index(const SellmeierSet& crystal, double lambda_p, double phi_p,
                  double alpha_p, double phi0);

/// ζ(λ_p, φ₀) with ∂n_p/∂φ_p at φ_p = 0 equal to −ζ cos α_p. Closed form.
double walkoff_slope(const SellmeierSet& crystal, double lambda_p, double phi0);

/// ∂n_p/∂φ_p at φ_p = 0, i.e. −ζ cos α_p.
double pump_index_derivative(const SellmeierSet& crystal, double lambda_p,
                             double alpha_p, double phi0);

/// n_p(λ_p, 0, 0, φ₀) − n_o(2λ_p); negative inside the noncollinear window.
double index_mismatch(const SellmeierSet& crystal, double lambda_p,
                      double phi0);

/// θ₀ = sqrt(2 n_o (n_o − n_p)). Throws RegimeError when n_p > n_o.
double cone_angle(const SellmeierSet& crystal, double lambda_p, double phi0);

struct NoncollinearWindow {
  double low = 0.0;  ///< collinear phase-matching angle
  double high = 0.0; ///< its mirror image past π/2
};

/// Roots of index_mismatch on [0, π]. Throws RegimeError if there is no
/// sign change.
NoncollinearWindow collinear_threshold(const SellmeierSet& crystal,
                                       double lambda_p);

struct ExperimentConfig {
  double lambda_p = 0.0; ///< pump wavelength, μm
  double waist = 0.0;    ///< pump waist w, μm
  double length = 0.0;   ///< crystal length L, μm
  double phi0 = 0.0;     ///< optic-axis angle to the pump axis, rad
  SellmeierSet crystal;

  /// Throws DomainError on nonpositive lengths, phi0 outside [0, π/2], or
  /// λ_p / 2λ_p outside the dispersion range.
  void validate() const;
};

/// The quantities every downstream formula reuses.
struct DerivedScales {
  double lambda_p = 0.0; ///< echo of the config, μm
  double waist = 0.0;    ///< echo, μm
  double length = 0.0;   ///< echo, μm
  double n_o = 0.0;      ///< n_o(2λ_p)
  double n_p0 = 0.0;     ///< n_p(λ_p, 0, 0, φ₀)
  double theta0 = 0.0;   ///< cone opening angle, rad
  double zeta = 0.0;     ///< walk-off slope
  double dtheta_p = 0.0; ///< λ_p / (π w), rad
  double dtheta_L = 0.0; ///< n_o λ_p / (π L), rad
  double phi_const = 0.0; ///< L Δ₀ / 2, constant part of the sinc argument
  double a = 0.0;         ///< 2π
  double b = 0.0;         ///< Δθ_p / θ₀, rad
};

/// Throws RegimeError outside the noncollinear regime (θ₀ must be > 0).
DerivedScales derive_scales(const ExperimentConfig& config);

} // namespace biphoton
