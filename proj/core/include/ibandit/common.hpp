#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ib {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using EdgeId = std::int64_t;
using NodeId = std::int64_t;

/// Every stochastic component draws from its own explicitly seeded engine.
using Rng = std::mt19937_64;

/// Base of all library errors. The CLI maps ConfigError to exit code 1 and
/// everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration (bad parameter, unknown key, wrong mode).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or non-finite input data (CSV rows, feature vectors).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A policy or the simulator broke the round protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Generated environment is degenerate (e.g. all linear scores equal).
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

/// A design or information matrix could not be inverted.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

}  // namespace ib
