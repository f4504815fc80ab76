#pragma once

#include <armadillo>
#include <complex>
#include <stdexcept>
#include <string>

namespace ristrack {

using arma::cx_double;
using arma::cx_mat;
using arma::cx_vec;
using arma::mat;
using arma::uvec;
using arma::uword;
using arma::vec;

inline constexpr double kSpeedOfLight = 3.0e8;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

// dBm <-> linear milliwatt. All internal math runs in linear mW; dBm values
// exist only at the config boundary.
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

// Configuration that fails validation (bad bounds, bad dims, unknown keys).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A user channel too weak to beamform towards (norm below numerical floor).
class DegenerateUserError : public std::runtime_error {
 public:
  explicit DegenerateUserError(const std::string& what)
      : std::runtime_error(what) {}
};

// Iterative solver failed to reach its tolerance within the sweep budget.
class IterationLimitError : public std::runtime_error {
 public:
  IterationLimitError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Checkpoint container problems (corruption, version or shape mismatch).
class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace ristrack
