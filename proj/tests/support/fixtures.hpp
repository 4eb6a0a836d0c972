#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "ldl/linalg.hpp"
#include "ldl/random.hpp"
#include "support/oracles.hpp"

namespace fixtures {

inline ldl::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, ldl::Rng& rng) {
  ldl::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian(0.0, 1.0);
  return m;
}

inline oracle::Grid to_grid(const ldl::Matrix& m) {
  oracle::Grid g(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return g;
}

inline ldl::Matrix from_grid(const oracle::Grid& g) {
  ldl::Matrix m(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.empty() ? 0 : g[0].size()));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g[i][j];
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ldl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
