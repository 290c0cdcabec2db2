// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mtpgd/row_matrix.hpp"
#include "mtpgd/sep/time_grid.hpp"

namespace mtpgd::sep {

// Rank-m sum of spatial x microtime x macrotime modes:
//   v(p, i, J) = sum_k spatial_k[p] * micro_k[i] * macro_k[J].
// Decompositions store micro/macro factors with unit norm (amplitude in the
// spatial factor) and a deterministic sign (largest-|entry| positive);
// forecast/corrected fields keep raw factors via append_mode_raw.
struct SeparatedField {
  int n_micro = 0;
  int n_macro = 0;
  std::vector<Eigen::VectorXd> spatial;
  std::vector<Eigen::VectorXd> micro;
  std::vector<Eigen::VectorXd> macro;

  SeparatedField() = default;
  SeparatedField(int nm, int nM) : n_micro(nm), n_macro(nM) {}

  int rank() const { return static_cast<int>(spatial.size()); }
  std::size_t n_rows() const {
    return spatial.empty() ? 0 : static_cast<std::size_t>(spatial[0].size());
  }
  int n_instants() const { return n_micro * n_macro; }

  // Normalizing append: time factors scaled to unit norm with the
  // deterministic sign convention, amplitude absorbed into the spatial mode.
  // A zero time factor drops the mode (returns false).
  bool append_mode(Eigen::VectorXd x, Eigen::VectorXd tau, Eigen::VectorXd T);
  void append_mode_raw(Eigen::VectorXd x, Eigen::VectorXd tau,
                       Eigen::VectorXd T);

  double evaluate(std::size_t row, int i, int j_macro) const;
  // Dense reconstruction, rows x (n_micro * n_macro), flat time index
  // j = J * n_micro + i.
  RowMatrix reconstruct() const;
  RowMatrix reconstruct_rows(const std::vector<int>& rows) const;
  SeparatedField subset_rows(const std::vector<int>& rows) const;

  // Frobenius norm of the reconstruction, computed in separated form.
  double norm() const;
};

// Frobenius inner product <a, b> of two fields on the same grid/rows.
double field_dot(const SeparatedField& a, const SeparatedField& b);
// || a - b ||_F computed in separated form.
double field_diff_norm(const SeparatedField& a, const SeparatedField& b);

// Reshape between flat time (length N_t) and the (micro x macro) matrix:
// entry (i, J) = signal[J * N_tau + i]. Exact inverse of flatten_time.
Eigen::MatrixXd reshape_time(const Eigen::VectorXd& signal,
                             const TimeGrid& grid);
Eigen::VectorXd flatten_time(const Eigen::MatrixXd& m, const TimeGrid& grid);

}  // namespace mtpgd::sep
