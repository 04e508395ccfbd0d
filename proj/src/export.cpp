#include "biphoton/export.hpp"

#include <array>
#include <charconv>
#include <ostream>

namespace biphoton {

using nlohmann::json;

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string to_string(SchmidtMethod method) {
  switch (method) {
  case SchmidtMethod::AnalyticDoubleGaussian:
    return "analytic";
  case SchmidtMethod::NumericSvd:
    return "numeric";
  case SchmidtMethod::Oam:
    return "oam";
  }
  return "unknown";
}

std::string to_string(ValidityStatus status) {
  return status == ValidityStatus::Pass ? "pass" : "warn";
}

json to_json(const DerivedScales& s) {
  return {{"lambda_p_um", s.lambda_p}, {"waist_um", s.waist},
          {"length_um", s.length},     {"n_o", s.n_o},
          {"n_p0", s.n_p0},            {"theta0", s.theta0},
          {"zeta", s.zeta},            {"dtheta_p", s.dtheta_p},
          {"dtheta_L", s.dtheta_L},    {"phi_const", s.phi_const},
          {"a", s.a},                  {"b", s.b}};
}

json to_json(const ValidityRatio& r) {
  return {{"value", r.value},
          {"threshold", r.threshold},
          {"status", to_string(r.status)}};
}

json to_json(const ValidityReport& r) {
  return {{"diffraction_ratio", to_json(r.diffraction_ratio)},
          {"linearization_ratio", to_json(r.linearization_ratio)},
          {"length_threshold_um", r.length_threshold_um},
          {"length_threshold_ratio", to_json(r.length_threshold_ratio)}};
}

json to_json(const ExperimentConfig& c) {
  return {{"lambda_p_um", c.lambda_p},
          {"waist_um", c.waist},
          {"length_um", c.length},
          {"phi0", c.phi0},
          {"crystal", c.crystal.name()},
          {"crystal_provenance", c.crystal.provenance()}};
}

json to_json(const SchmidtSpectrum& s) {
  json refs = json::object();
  for (const auto& [name, value] : s.references)
    refs[name] = value;
  return {{"method", to_string(s.method)},
          {"schmidt_number", s.schmidt_number},
          {"entropy_bits", s.entropy_bits},
          {"residual", s.residual},
          {"modes", s.weights.size()},
          {"highest_index", s.highest_index},
          {"truncated", s.truncated},
          {"references", refs}};
}

json to_json(const FeasibilityReport& r) {
  json constraints = json::array();
  for (const auto& c : r.constraints)
    constraints.push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"margin", c.margin},
                           {"detail", c.detail}});
  return {{"feasible", r.feasible},
          {"constraints", constraints},
          {"gaps", r.gaps},
          {"min_gap", r.min_gap},
          {"crosstalk", r.crosstalk}};
}

json to_json(const MultichannelState& state,
             const MultichannelEntanglement& e) {
  return {{"planes", state.planes},
          {"channels", state.amplitudes.size()},
          {"amplitudes", state.amplitudes},
          {"schmidt_number", e.schmidt_number},
          {"entropy_bits", e.entropy_bits},
          {"collection_efficiency", 1.0},
          {"hom_visibility", 1.0}};
}

void write_spectrum_csv(std::ostream& out, const SchmidtSpectrum& s) {
  const bool oam = s.method == SchmidtMethod::Oam;
  out << (oam ? "index,l,parity,weight\n" : "index,weight\n");
  for (std::size_t i = 0; i < s.weights.size(); ++i) {
    out << i << ',';
    if (oam)
      out << s.oam_labels[i].l << ','
          << (s.oam_labels[i].parity == OamParity::Cos ? "cos" : "sin") << ',';
    out << format_number(s.weights[i]) << '\n';
  }
}

void write_density_csv(std::ostream& out, const DensityGrid& grid) {
  const std::size_t n = grid.axis.size();
  out << "alpha1,alpha2,density\n";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out << format_number(grid.axis[i]) << ',' << format_number(grid.axis[j])
          << ',' << format_number(grid.values[i * n + j]) << '\n';
}

void write_layout_csv(std::ostream& out, const ChannelLayout& layout,
                      const FeasibilityReport& report) {
  const double bound = layout.safety_factor * layout.required_separation();
  out << "plane,alpha,gap_to_next,gap_margin\n";
  for (std::size_t i = 0; i < layout.plane_azimuths.size(); ++i) {
    const double gap = i < report.gaps.size() ? report.gaps[i] : 0.0;
    out << i << ',' << format_number(layout.plane_azimuths[i]) << ','
        << format_number(gap) << ',' << format_number(gap - bound) << '\n';
  }
}

} // namespace biphoton
