#pragma once

#include <cstddef>
#include <vector>

namespace mixclust {

// Minimal dense column-major matrix used for working values, variances
// and latent effects inside the sampler.
struct ColMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  ColMatrix() = default;
  ColMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int i, int j) {
    return data[static_cast<std::size_t>(j) * rows + i];
  }
  double at(int i, int j) const {
    return data[static_cast<std::size_t>(j) * rows + i];
  }
  const double* col(int j) const {
    return data.data() + static_cast<std::size_t>(j) * rows;
  }
  double* col(int j) {
    return data.data() + static_cast<std::size_t>(j) * rows;
  }
};

}  // namespace mixclust
