#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgw {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Violated input contract: bad sizes, unnormalized weights, wrong gauge kind.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative solver failed to reach its tolerance or hit a numerical wall.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double violation = 0.0)
      : std::runtime_error(what), violation_(violation) {}
  double violation() const { return violation_; }

 private:
  double violation_;
};

// File could not be read, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

// Checks nonnegativity and that the entries sum to one within `tol`.
void require_probability(std::span<const double> weights, const std::string& what,
                         double tol = 1e-10);

// True when every entry is identical up to `tol`.
bool is_uniform(std::span<const double> weights, double tol = 1e-14);

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace tgw
