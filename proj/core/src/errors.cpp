#include "commutree/errors.hpp"

#include <sstream>

namespace commutree {

namespace {

std::string describe_witness(const Eigen::VectorXd& w) {
  std::ostringstream os;
  os.precision(17);
  os << "parameter set exceeds the feasible set; infeasible at theta = (";
  for (Eigen::Index i = 0; i < w.size(); ++i) os << (i ? ", " : "") << w[i];
  os << ")";
  return os.str();
}

}  // namespace

ThetaExceedsFeasibleSet::ThetaExceedsFeasibleSet(Eigen::VectorXd witness)
    : Error(describe_witness(witness)), witness_(std::move(witness)) {}

FormatError::FormatError(int line, const std::string& what)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

}  // namespace commutree
