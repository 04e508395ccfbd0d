#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biphoton {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (wavelength out of the
/// dispersion range, nonpositive length, angle out of range, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// The configuration is not in the noncollinear type-I regime the model
/// is built for.
class RegimeError : public Error {
public:
  using Error::Error;
};

/// A sampling grid is too coarse to resolve the narrowest feature.
class ResolutionError : public Error {
public:
  ResolutionError(const std::string& what, std::size_t required_points)
      : Error(what), required_points_(required_points) {}

  std::size_t required_points() const noexcept { return required_points_; }

private:
  std::size_t required_points_;
};

/// Exactly back-to-back photons: the pump transverse wave vector vanishes
/// and its azimuth is undefined.
class DegenerateGeometryError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// Multichannel layout violates one of its feasibility constraints.
class LayoutError : public Error {
public:
  using Error::Error;
};

} // namespace biphoton
