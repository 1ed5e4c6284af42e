#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace zapsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Spectrum = std::vector<std::complex<double>>;

using Index = Eigen::Index;

// Named failure modes. All derive from std::runtime_error so callers that
// don't care about the distinction can catch one type.
struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct NotHurwitz : std::runtime_error {
  explicit NotHurwitz(const std::string& what) : std::runtime_error(what) {}
};
struct ConvergenceFailure : std::runtime_error {
  explicit ConvergenceFailure(const std::string& what) : std::runtime_error(what) {}
};
struct NumericBreakdown : std::runtime_error {
  explicit NumericBreakdown(const std::string& what) : std::runtime_error(what) {}
};
struct NotStochastic : std::runtime_error {
  explicit NotStochastic(const std::string& what) : std::runtime_error(what) {}
};
struct Reducible : std::runtime_error {
  explicit Reducible(const std::string& what) : std::runtime_error(what) {}
};
struct InfeasibleAction : std::runtime_error {
  explicit InfeasibleAction(const std::string& what) : std::runtime_error(what) {}
};
struct NonUniqueOptimalPolicy : std::runtime_error {
  explicit NonUniqueOptimalPolicy(const std::string& what) : std::runtime_error(what) {}
};
struct ZeroStationaryMass : std::runtime_error {
  explicit ZeroStationaryMass(const std::string& what) : std::runtime_error(what) {}
};
struct SingularJacobian : std::runtime_error {
  explicit SingularJacobian(const std::string& what) : std::runtime_error(what) {}
};
struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};
struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};
struct SnapshotMissing : std::runtime_error {
  explicit SnapshotMissing(const std::string& what) : std::runtime_error(what) {}
};
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace zapsa
