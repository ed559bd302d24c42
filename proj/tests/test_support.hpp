#pragma once

#include "noisegate/dataset.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing {

inline std::filesystem::path data_file(const std::string& name) {
  return std::filesystem::path(NOISEGATE_DATA_DIR) / name;
}

inline noisegate::Dataset fixture(const std::string& name) {
  const auto manifest = noisegate::load_manifest(data_file(name + ".manifest"));
  return noisegate::load_csv(data_file(name + ".csv"), manifest);
}

inline noisegate::RealMatrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> dist;
  noisegate::RealMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
  return m;
}

inline noisegate::RealVector random_vector(std::mt19937_64& gen, Eigen::Index n) {
  return random_matrix(gen, n, 1).col(0);
}

}  // namespace testing
