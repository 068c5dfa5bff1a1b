#ifndef DIDA_TYPES_HPP
#define DIDA_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dida {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Runtime failure (IO, malformed resources, numerical blowup).  Maps to
// process exit code 1 at the CLI boundary.
struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or usage.  Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dida

#endif
