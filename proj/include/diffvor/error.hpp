#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace diffvor {

// Base type for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent user input: CLI flags, config files, loss setup.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or guarded numeric singularities on the tape.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Geometric degeneracy: duplicate or collinear sites, vanishing
// denominators. Carries the site indices involved when known.
class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& msg, std::vector<int> sites = {})
      : Error(msg), sites_(std::move(sites)) {}
  const std::vector<int>& sites() const noexcept { return sites_; }

 private:
  std::vector<int> sites_;
};

// A triangle of the cached triangulation inverted under the current
// coordinates; the caller must retriangulate before building a diagram.
class StaleTopologyError : public Error {
 public:
  explicit StaleTopologyError(const std::string& msg, int triangle = -1)
      : Error(msg), triangle_(triangle) {}
  int triangle() const noexcept { return triangle_; }

 private:
  int triangle_;
};

// Clipping produced an empty polygon: the cell lies outside the window.
class EmptyCellError : public Error {
 public:
  using Error::Error;
};

}  // namespace diffvor
