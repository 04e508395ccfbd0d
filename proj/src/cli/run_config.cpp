#include "biphoton/cli.hpp"

#include "biphoton/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

namespace biphoton::cli {

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && is_space(s.back()))
    s.remove_suffix(1);
  return std::string(s);
}

// Splits "1.5 cm" / "1.5cm" into the number and the unit suffix.
std::pair<double, std::string> split_quantity(std::string_view text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || t.empty())
    throw ConfigError("not a number: '" + t + "'");
  const std::string unit =
      trim(std::string_view(res.ptr, std::size_t(t.data() + t.size() - res.ptr)));
  if (!std::isfinite(value))
    throw ConfigError("not a finite number: '" + t + "'");
  return {value, unit};
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1")
    return true;
  if (v == "false" || v == "off" || v == "no" || v == "0")
    return false;
  throw ConfigError("key '" + key + "' expects true/false, got '" + v + "'");
}

} // namespace

RunConfig reference_config() {
  return RunConfig{
      ExperimentConfig{0.4047, 1464.0, 5000.0, 0.7, resolve_crystal("BBO")},
      std::nullopt, "json", 201, true, false};
}

double parse_length(std::string_view text) {
  const auto [value, unit] = split_quantity(text);
  static const std::array<std::pair<std::string_view, double>, 7> units{{
      {"um", 1.0}, {"mkm", 1.0}, {"\xce\xbcm", 1.0}, {"nm", 1e-3},
      {"mm", 1e3}, {"cm", 1e4},  {"m", 1e6},
  }};
  if (unit.empty())
    return value;
  for (const auto& [name, scale] : units)
    if (unit == name)
      return value * scale;
  throw ConfigError("unknown length unit '" + unit +
                    "' (use um, mkm, nm, mm, cm or m)");
}

double parse_angle(std::string_view text) {
  const auto [value, unit] = split_quantity(text);
  if (unit.empty() || unit == "rad")
    return value;
  if (unit == "deg")
    return value * std::numbers::pi / 180.0;
  throw ConfigError("unknown angle unit '" + unit + "' (use rad or deg)");
}

RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir) {
  RunConfig cfg = reference_config();
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    try {
      if (key == "lambda_p")
        cfg.experiment.lambda_p = parse_length(value);
      else if (key == "w" || key == "waist")
        cfg.experiment.waist = parse_length(value);
      else if (key == "L" || key == "length")
        cfg.experiment.length = parse_length(value);
      else if (key == "phi0")
        cfg.experiment.phi0 = parse_angle(value);
      else if (key == "crystal") {
        std::filesystem::path p = value;
        std::string lower = value;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        const bool builtin = lower == "bbo";
        if (!builtin && p.is_relative() && !base_dir.empty())
          p = base_dir / p;
        cfg.experiment.crystal = resolve_crystal(builtin ? value : p.string());
      } else if (key == "out")
        cfg.out_dir = std::filesystem::path(value);
      else if (key == "format") {
        if (value != "csv" && value != "json")
          throw ConfigError("format must be csv or json");
        cfg.format = value;
      } else if (key == "grid") {
        const auto [g, unit] = split_quantity(value);
        if (!unit.empty() || g < 2 || g != std::floor(g))
          throw ConfigError("grid must be an integer >= 2");
        cfg.grid = std::size_t(g);
      } else if (key == "walkoff")
        cfg.include_walkoff = parse_bool(key, value);
      else if (key == "exact_paper_constants")
        cfg.exact_paper_constants = parse_bool(key, value);
      else
        throw ConfigError("unknown key '" + key + "'");
    } catch (const Error& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

} // namespace biphoton::cli
