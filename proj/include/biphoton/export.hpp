#pragma once

// CSV and JSON serialization of reports, spectra and grids.

#include "biphoton/amplitude.hpp"
#include "biphoton/crystal.hpp"
#include "biphoton/entanglement.hpp"
#include "biphoton/multichannel.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace biphoton {

/// Shortest round-trip decimal representation ('.' separator).
std::string format_number(double value);

std::string to_string(SchmidtMethod method);
std::string to_string(ValidityStatus status);

nlohmann::json to_json(const DerivedScales& scales);
nlohmann::json to_json(const ValidityRatio& ratio);
nlohmann::json to_json(const ValidityReport& report);
nlohmann::json to_json(const ExperimentConfig& config);
/// Summary only: method, K, entropy, residual, mode count, references.
nlohmann::json to_json(const SchmidtSpectrum& spectrum);
nlohmann::json to_json(const FeasibilityReport& report);
/// Ideal-channel flags (collection efficiency, beam-splitter visibility)
/// are included, fixed at 1.
nlohmann::json to_json(const MultichannelState& state,
                       const MultichannelEntanglement& entanglement);

/// index,weight (plus l,parity columns for OAM spectra).
void write_spectrum_csv(std::ostream& out, const SchmidtSpectrum& spectrum);
/// alpha1,alpha2,density.
void write_density_csv(std::ostream& out, const DensityGrid& grid);
/// plane,alpha,gap_to_next,gap_margin.
void write_layout_csv(std::ostream& out, const ChannelLayout& layout,
                      const FeasibilityReport& report);

} // namespace biphoton
