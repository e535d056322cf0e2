#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace commutree {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSimplex : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class PointOutside : public Error {
 public:
  using Error::Error;
};

class InadmissibleCommutation : public Error {
 public:
  using Error::Error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class IterationCapExceeded : public Error {
 public:
  using Error::Error;
};

class OutsideTheta : public Error {
 public:
  using Error::Error;
};

class RiccatiDivergence : public Error {
 public:
  using Error::Error;
};

class NoInvariantBoxFound : public Error {
 public:
  using Error::Error;
};

class HorizonInfeasible : public Error {
 public:
  using Error::Error;
};

/// Raised when the barycenter of an open cell admits no feasible commutation.
class ThetaExceedsFeasibleSet : public Error {
 public:
  explicit ThetaExceedsFeasibleSet(Eigen::VectorXd witness);
  const Eigen::VectorXd& witness() const noexcept { return witness_; }

 private:
  Eigen::VectorXd witness_;
};

/// Parse/validation failure in a text file; line is 1-based (0 = whole file).
class FormatError : public Error {
 public:
  FormatError(int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace commutree
