// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "mtpgd/common.hpp"

namespace mtpgd {

// Dense row-major matrix used for snapshots and residual workspaces. Rows are
// contiguous so per-sample time trajectories can be handed to the compute
// kernels directly.
struct RowMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  RowMatrix() = default;
  RowMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }

  RowMatrix slice_cols(std::size_t c0, std::size_t c1) const {
    if (c0 > c1 || c1 > cols) throw ShapeError("slice_cols: bad column range");
    RowMatrix out(rows, c1 - c0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = c0; c < c1; ++c) out(r, c - c0) = (*this)(r, c);
    return out;
  }

  RowMatrix gather_rows(const std::vector<int>& idx) const {
    RowMatrix out(idx.size(), cols);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] < 0 || static_cast<std::size_t>(idx[r]) >= rows)
        throw ArgumentError("gather_rows: index out of range");
      for (std::size_t c = 0; c < cols; ++c) out(r, c) = (*this)(idx[r], c);
    }
    return out;
  }
};

}  // namespace mtpgd
