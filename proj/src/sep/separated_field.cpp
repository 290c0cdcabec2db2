// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/sep/separated_field.hpp"

#include <cmath>

#include "mtpgd/kernels/kernels.hpp"

namespace mtpgd::sep {

namespace {

// Unit norm + sign convention: entry of largest absolute value positive
// (first such index on ties). Returns the applied scale (norm * sign), 0 for
// a zero vector.
double normalize_signed(Eigen::VectorXd& v) {
  const double n = std::sqrt(kernels::nrm2sq(v.data(), v.size()));
  if (n == 0.0) return 0.0;
  int imax = 0;
  double amax = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  const double s = (v[imax] < 0.0) ? -n : n;
  v /= s;
  return s;
}

void check_mode_shapes(const SeparatedField& f, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& tau, const Eigen::VectorXd& T) {
  if (tau.size() != f.n_micro || T.size() != f.n_macro)
    throw ShapeError("separated field: time factor length mismatch");
  if (f.rank() > 0 && x.size() != f.spatial[0].size())
    throw ShapeError("separated field: spatial mode length mismatch");
}

}  // namespace

bool SeparatedField::append_mode(Eigen::VectorXd x, Eigen::VectorXd tau,
                                 Eigen::VectorXd T) {
  check_mode_shapes(*this, x, tau, T);
  const double st = normalize_signed(tau);
  const double sT = normalize_signed(T);
  if (st == 0.0 || sT == 0.0) return false;
  x *= st * sT;
  spatial.push_back(std::move(x));
  micro.push_back(std::move(tau));
  macro.push_back(std::move(T));
  return true;
}

void SeparatedField::append_mode_raw(Eigen::VectorXd x, Eigen::VectorXd tau,
                                     Eigen::VectorXd T) {
  check_mode_shapes(*this, x, tau, T);
  spatial.push_back(std::move(x));
  micro.push_back(std::move(tau));
  macro.push_back(std::move(T));
}

double SeparatedField::evaluate(std::size_t row, int i, int j_macro) const {
  double v = 0.0;
  for (int k = 0; k < rank(); ++k)
    v += spatial[k][row] * micro[k][i] * macro[k][j_macro];
  return v;
}

RowMatrix SeparatedField::reconstruct() const {
  RowMatrix out(n_rows(), static_cast<std::size_t>(n_instants()));
  std::vector<double> lambda(out.cols);
  for (int k = 0; k < rank(); ++k) {
    for (int J = 0; J < n_macro; ++J)
      for (int i = 0; i < n_micro; ++i)
        lambda[static_cast<std::size_t>(J) * n_micro + i] =
            micro[k][i] * macro[k][J];
    for (std::size_t r = 0; r < out.rows; ++r)
      kernels::axpy(spatial[k][r], lambda.data(), out.row(r), out.cols);
  }
  return out;
}

RowMatrix SeparatedField::reconstruct_rows(const std::vector<int>& rows) const {
  return subset_rows(rows).reconstruct();
}

SeparatedField SeparatedField::subset_rows(const std::vector<int>& rows) const {
  SeparatedField f(n_micro, n_macro);
  for (int k = 0; k < rank(); ++k) {
    Eigen::VectorXd x(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r] < 0 || static_cast<std::size_t>(rows[r]) >= n_rows())
        throw ArgumentError("separated field: row index out of range");
      x[r] = spatial[k][rows[r]];
    }
    f.append_mode_raw(std::move(x), micro[k], macro[k]);
  }
  return f;
}

double SeparatedField::norm() const { return std::sqrt(field_dot(*this, *this)); }

double field_dot(const SeparatedField& a, const SeparatedField& b) {
  if (a.n_micro != b.n_micro || a.n_macro != b.n_macro)
    throw ShapeError("field_dot: grid mismatch");
  if (a.rank() > 0 && b.rank() > 0 && a.n_rows() != b.n_rows())
    throw ShapeError("field_dot: row count mismatch");
  double s = 0.0;
  for (int k = 0; k < a.rank(); ++k)
    for (int l = 0; l < b.rank(); ++l)
      s += kernels::dot(a.spatial[k].data(), b.spatial[l].data(),
                        a.spatial[k].size()) *
           kernels::dot(a.micro[k].data(), b.micro[l].data(), a.n_micro) *
           kernels::dot(a.macro[k].data(), b.macro[l].data(), a.n_macro);
  return s;
}

double field_diff_norm(const SeparatedField& a, const SeparatedField& b) {
  const double d2 =
      field_dot(a, a) - 2.0 * field_dot(a, b) + field_dot(b, b);
  return std::sqrt(std::max(0.0, d2));
}

Eigen::MatrixXd reshape_time(const Eigen::VectorXd& signal,
                             const TimeGrid& grid) {
  if (signal.size() != grid.n_total())
    throw ShapeError("reshape_time: signal length != N_tau * N_T");
  Eigen::MatrixXd m(grid.n_micro, grid.n_macro);
  for (int J = 0; J < grid.n_macro; ++J)
    for (int i = 0; i < grid.n_micro; ++i)
      m(i, J) = signal[static_cast<std::size_t>(J) * grid.n_micro + i];
  return m;
}

Eigen::VectorXd flatten_time(const Eigen::MatrixXd& m, const TimeGrid& grid) {
  if (m.rows() != grid.n_micro || m.cols() != grid.n_macro)
    throw ShapeError("flatten_time: matrix shape mismatch");
  Eigen::VectorXd v(grid.n_total());
  for (int J = 0; J < grid.n_macro; ++J)
    for (int i = 0; i < grid.n_micro; ++i)
      v[static_cast<std::size_t>(J) * grid.n_micro + i] = m(i, J);
  return v;
}

}  // namespace mtpgd::sep
