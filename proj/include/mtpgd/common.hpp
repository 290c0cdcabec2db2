// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mtpgd {

// Error taxonomy. The CLI front end maps these onto process exit codes
// (config -> 2, convergence -> 3, io -> 4).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class ArgumentError : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class GeometricError : public Error {
public:
  using Error::Error;
};

class NumericError : public Error {
public:
  using Error::Error;
};

// Unconstrained (or under-constrained) system: stiffness has rigid-body modes
// in its kernel and cannot be factorized.
class RigidBodyError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Carries the residual trace of the failed iteration so callers can report
// diagnostics instead of just a message.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& msg, std::vector<double> residuals = {})
      : Error(msg), residual_history(std::move(residuals)) {}

  std::vector<double> residual_history;
};

}  // namespace mtpgd
