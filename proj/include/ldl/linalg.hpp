#pragma once

#include <Eigen/Dense>

namespace ldl {

// Row-major so that per-item rows (and per-cue rows of a weight matrix) are
// contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace ldl
