#include "biphoton/multichannel.hpp"

#include "biphoton/entanglement.hpp"
#include "biphoton/errors.hpp"
#include "biphoton/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace biphoton {

double ChannelLayout::fiber_footprint() const {
  return 2.0 * fiber_radius / cone_angle;
}

double ChannelLayout::required_separation() const {
  return std::max(fiber_footprint(), coincidence_width);
}

ChannelLayout equally_spaced_layout(std::size_t planes, double fiber_radius,
                                    double ring_thickness,
                                    double coincidence_width,
                                    double cone_angle, double safety_factor) {
  ChannelLayout layout;
  layout.fiber_radius = fiber_radius;
  layout.ring_thickness = ring_thickness;
  layout.coincidence_width = coincidence_width;
  layout.cone_angle = cone_angle;
  layout.safety_factor = safety_factor;
  layout.plane_azimuths.reserve(planes);
  for (std::size_t n = 1; n <= planes; ++n)
    layout.plane_azimuths.push_back(-pi / 2 + pi * double(n) / double(planes));
  return layout;
}

const ConstraintResult* FeasibilityReport::first_failure() const {
  for (const auto& c : constraints)
    if (!c.passed)
      return &c;
  return nullptr;
}

FeasibilityReport validate_layout(const ChannelLayout& layout) {
  FeasibilityReport report;
  const auto& az = layout.plane_azimuths;
  const std::size_t n = az.size();

  report.constraints.push_back(
      {"plane_count", n >= 1, double(n) - 1.0, "need at least one plane"});

  double order_margin = std::numeric_limits<double>::infinity();
  std::string order_detail = "azimuths strictly increasing in (-pi/2, pi/2]";
  for (std::size_t i = 0; i < n; ++i) {
    order_margin = std::min({order_margin, az[i] + pi / 2, pi / 2 - az[i] + 1e-15});
    if (i > 0)
      order_margin = std::min(order_margin, az[i] - az[i - 1]);
  }
  const bool ordered = n == 0 || (order_margin > 0.0 && std::isfinite(order_margin));
  report.constraints.push_back(
      {"plane_order", ordered, n == 0 ? 0.0 : order_margin, order_detail});

  const bool positive = layout.fiber_radius > 0.0 &&
                        layout.ring_thickness > 0.0 &&
                        layout.coincidence_width > 0.0 &&
                        layout.cone_angle > 0.0 && layout.safety_factor > 0.0;
  report.constraints.push_back(
      {"inputs_positive", positive, 0.0,
       "fiber radius, ring thickness, coincidence width, cone angle and "
       "safety factor must be positive"});

  report.constraints.push_back(
      {"fiber_covers_ring", layout.fiber_radius > layout.ring_thickness,
       layout.fiber_radius - layout.ring_thickness,
       "fiber radius must exceed the ring thickness"});

  if (n >= 1) {
    for (std::size_t i = 0; i + 1 < n; ++i)
      report.gaps.push_back(az[i + 1] - az[i]);
    report.gaps.push_back(az.front() + pi - az.back());
    report.min_gap = *std::min_element(report.gaps.begin(), report.gaps.end());
  }
  if (positive && n >= 1) {
    const double bound = layout.safety_factor * layout.required_separation();
    std::ostringstream os;
    os << "every gap must exceed " << layout.safety_factor
       << " x max(fiber footprint " << layout.fiber_footprint()
       << ", coincidence width " << layout.coincidence_width << ") = "
       << bound << " rad; smallest gap is " << report.min_gap;
    report.constraints.push_back({"gap_separation", report.min_gap > bound,
                                  report.min_gap - bound, os.str()});
    report.crosstalk = channel_crosstalk(report.min_gap, layout.coincidence_width);
  } else {
    report.constraints.push_back(
        {"gap_separation", false, 0.0, "not evaluated"});
  }

  report.feasible = report.first_failure() == nullptr;
  return report;
}

std::size_t max_feasible_planes(double fiber_radius, double ring_thickness,
                                double coincidence_width, double cone_angle,
                                double safety_factor) {
  if (!(fiber_radius > ring_thickness) || !(cone_angle > 0.0) ||
      !(coincidence_width > 0.0) || !(safety_factor > 0.0))
    return 0;
  const double bound = safety_factor *
                       std::max(2.0 * fiber_radius / cone_angle, coincidence_width);
  // Equally spaced gaps are π/N; the constraint is strict.
  auto count = static_cast<std::size_t>(std::floor(pi / bound));
  while (count > 0 && !(pi / double(count) > bound))
    --count;
  return count;
}

double channel_crosstalk(double gap, double coincidence_width) {
  return 0.5 * std::erfc(gap / coincidence_width);
}

MultichannelState make_multichannel_state(std::size_t planes) {
  if (planes == 0)
    throw DomainError("multichannel state needs at least one plane");
  MultichannelState state;
  state.planes = planes;
  state.pair_amplitudes.assign(planes, 1.0 / std::sqrt(double(planes)));
  const double c = 1.0 / std::sqrt(2.0 * double(planes));
  state.amplitudes.reserve(2 * planes);
  for (std::size_t n = 0; n < planes; ++n) {
    state.amplitudes.push_back(c);
    state.amplitudes.push_back(-c);
  }
  state.weights.assign(2 * planes, 1.0 / (2.0 * double(planes)));
  return state;
}

MultichannelState build_state(const ChannelLayout& layout) {
  const auto report = validate_layout(layout);
  if (const auto* failed = report.first_failure())
    throw LayoutError("infeasible layout, constraint '" + failed->name +
                      "' failed: " + failed->detail);
  return make_multichannel_state(layout.planes());
}

MultichannelEntanglement multichannel_entanglement(
    const MultichannelState& state) {
  return {schmidt_number(state.weights), entropy_bits(state.weights)};
}

} // namespace biphoton
