#pragma once

// Multichannel channelization of the down-conversion ring: N diametric
// fiber-pair planes, each pair merged on a beam splitter into two channels.

#include <cstddef>
#include <string>
#include <vector>

namespace biphoton {

struct ChannelLayout {
  std::vector<double> plane_azimuths; ///< α⁽ⁿ⁾, strictly increasing in (−π/2, π/2]
  double fiber_radius = 0.0;      ///< angular radius of a receiving fiber, rad
  double ring_thickness = 0.0;    ///< Δθ_L / θ₀, rad
  double coincidence_width = 0.0; ///< Δα_c, rad
  double cone_angle = 0.0;        ///< θ₀, converts fiber size to azimuth
  double safety_factor = 3.0;     ///< how much "much larger" means

  std::size_t planes() const { return plane_azimuths.size(); }
  /// Azimuthal extent of one fiber on the ring, 2 r / θ₀.
  double fiber_footprint() const;
  /// The size a gap between planes has to beat (before the safety factor).
  double required_separation() const;
};

/// α⁽ⁿ⁾ = −π/2 + π n / N, n = 1..N.
ChannelLayout equally_spaced_layout(std::size_t planes, double fiber_radius,
                                    double ring_thickness,
                                    double coincidence_width,
                                    double cone_angle,
                                    double safety_factor = 3.0);

struct ConstraintResult {
  std::string name;
  bool passed = false;
  double margin = 0.0; ///< measured value minus its bound; > 0 when passed
  std::string detail;
};

struct FeasibilityReport {
  bool feasible = false;
  std::vector<ConstraintResult> constraints;
  /// gaps[n] is the azimuth from plane n to plane n+1, the last one
  /// wrapping around through π.
  std::vector<double> gaps;
  double min_gap = 0.0;
  double crosstalk = 0.0;

  /// First failed constraint, or nullptr.
  const ConstraintResult* first_failure() const;
};

/// Checks, each reported with a margin:
///   "plane_count"      at least one plane;
///   "plane_order"      azimuths strictly increasing inside (−π/2, π/2];
///   "inputs_positive"  positive widths and safety factor;
///   "fiber_covers_ring" fiber radius > ring thickness;
///   "gap_separation"   every gap > safety · max(footprint, Δα_c).
FeasibilityReport validate_layout(const ChannelLayout& layout);

/// Largest N whose equally spaced layout passes validate_layout (0 if the
/// fiber cannot cover the ring).
std::size_t max_feasible_planes(double fiber_radius, double ring_thickness,
                                double coincidence_width, double cone_angle,
                                double safety_factor = 3.0);

/// Mass of the coincidence ridge exp(−δ²/Δα_c²) lying at least `gap` away
/// on one side, (1/2) erfc(gap / Δα_c): the share of partners reaching the
/// neighbouring plane.
double channel_crosstalk(double gap, double coincidence_width);

struct MultichannelState {
  std::size_t planes = 0;
  /// Before the beam splitters: one pair amplitude 1/√N per plane.
  std::vector<double> pair_amplitudes;
  /// After: (up, down) per plane, ±1/√(2N).
  std::vector<double> amplitudes;
  /// Squared amplitudes, 1/2N each.
  std::vector<double> weights;
};

/// Throws DomainError for N = 0.
MultichannelState make_multichannel_state(std::size_t planes);

/// Throws LayoutError naming the first failed constraint.
MultichannelState build_state(const ChannelLayout& layout);

struct MultichannelEntanglement {
  double schmidt_number = 0.0; ///< 1 / Σλ²
  double entropy_bits = 0.0;   ///< −Σ λ log₂ λ
};

MultichannelEntanglement multichannel_entanglement(
    const MultichannelState& state);

} // namespace biphoton
