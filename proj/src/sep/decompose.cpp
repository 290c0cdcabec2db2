// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/sep/decompose.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "mtpgd/kernels/kernels.hpp"
#include "mtpgd/row_matrix.hpp"

namespace mtpgd::sep {

namespace {

// Unit norm with the largest-|entry|-positive sign convention shared with
// SeparatedField::append_mode.  Returns false for a zero vector.
bool normalize_signed(double* v, std::size_t n) {
  const double nrm = std::sqrt(kernels::nrm2sq(v, n));
  if (nrm == 0.0) return false;
  std::size_t imax = 0;
  double amax = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(v[i]);
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  const double s = (v[imax] < 0.0) ? -nrm : nrm;
  kernels::scal(1.0 / s, v, n);
  return true;
}

void build_lambda(const Eigen::VectorXd& tau, const Eigen::VectorXd& T,
                  std::vector<double>& lambda) {
  const int nm = static_cast<int>(tau.size());
  for (int J = 0; J < T.size(); ++J)
    for (int i = 0; i < nm; ++i)
      lambda[static_cast<std::size_t>(J) * nm + i] = tau[i] * T[J];
}

double diff_norm(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

DecomposeResult mtpgd_decompose(const double* data, std::size_t n_rows,
                                const TimeGrid& grid,
                                const DecomposeOptions& options) {
  grid.validate();
  if (n_rows == 0) throw ShapeError("mtpgd_decompose: empty input");
  const std::size_t n_t = static_cast<std::size_t>(grid.n_total());
  const int nm = grid.n_micro;
  const int nM = grid.n_macro;

  RowMatrix residual(n_rows, n_t);
  std::memcpy(residual.data.data(), data, n_rows * n_t * sizeof(double));
  const double norm_input =
      std::sqrt(kernels::nrm2sq(residual.data.data(), residual.data.size()));

  DecomposeResult result;
  result.field = SeparatedField(nm, nM);
  if (norm_input == 0.0) return result;

  std::vector<double> lambda(n_t);
  std::vector<double> y(n_t);
  Eigen::VectorXd x(n_rows), tau(nm), T(nM);
  Eigen::VectorXd x_prev(n_rows), tau_prev(nm), T_prev(nM);

  double rel_residual = 1.0;
  while (result.field.rank() < options.max_rank) {
    tau.setConstant(1.0 / std::sqrt(static_cast<double>(nm)));
    T.setConstant(1.0 / std::sqrt(static_cast<double>(nM)));
    x_prev.setZero();
    tau_prev.setZero();
    T_prev.setZero();

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      build_lambda(tau, T, lambda);
      for (std::size_t r = 0; r < n_rows; ++r)
        x[r] = kernels::dot(residual.row(r), lambda.data(), n_t);
      if (x.norm() == 0.0) {
        if (sweep == 0) {
          // Uniform time factors happen to be orthogonal to the residual;
          // restart from the row norms, which cannot vanish while R != 0.
          for (std::size_t r = 0; r < n_rows; ++r)
            x[r] = std::sqrt(kernels::nrm2sq(residual.row(r), n_t));
        } else {
          throw NumericError("mtpgd_decompose: rank-1 update collapsed");
        }
      }

      std::memset(y.data(), 0, n_t * sizeof(double));
      for (std::size_t r = 0; r < n_rows; ++r)
        kernels::axpy(x[r], residual.row(r), y.data(), n_t);

      tau.setZero();
      for (int J = 0; J < nM; ++J)
        kernels::axpy(T[J], y.data() + static_cast<std::size_t>(J) * nm,
                      tau.data(), nm);
      if (!normalize_signed(tau.data(), nm))
        throw NumericError("mtpgd_decompose: micro-time factor vanished");

      for (int J = 0; J < nM; ++J)
        T[J] = kernels::dot(y.data() + static_cast<std::size_t>(J) * nm,
                            tau.data(), nm);
      if (!normalize_signed(T.data(), nM))
        throw NumericError("mtpgd_decompose: macro-time factor vanished");

      const double xn = std::max(x.norm(), 1e-300);
      const double delta = std::max({diff_norm(x, x_prev) / xn,
                                     diff_norm(tau, tau_prev),
                                     diff_norm(T, T_prev)});
      x_prev = x;
      tau_prev = tau;
      T_prev = T;
      if (delta < options.stagnation_tol) break;
    }

    // Final amplitude for the frozen time factors, then deflate. The sweep
    // cap is a regular stop: a triad is kept as long as it makes progress.
    build_lambda(tau, T, lambda);
    for (std::size_t r = 0; r < n_rows; ++r)
      x[r] = kernels::dot(residual.row(r), lambda.data(), n_t);
    for (std::size_t r = 0; r < n_rows; ++r)
      kernels::axpy(-x[r], lambda.data(), residual.row(r), n_t);

    const double next =
        std::sqrt(kernels::nrm2sq(residual.data.data(), residual.data.size())) /
        norm_input;
    if (!(next < rel_residual))
      throw DecomposeError(
          "mtpgd_decompose: rank-1 enrichment made no progress at rank " +
              std::to_string(result.field.rank() + 1) +
              " (relative residual " + std::to_string(rel_residual) + ")",
          result.residual_history, result.field);
    if (!result.field.append_mode(x, tau, T))
      throw NumericError("mtpgd_decompose: degenerate mode");
    rel_residual = next;
    result.residual_history.push_back(rel_residual);
    if (rel_residual <= options.tol) break;
  }
  result.relative_error = rel_residual;
  return result;
}

std::array<DecomposeResult, 3> decompose_components(
    const plast::HistorySnapshot& snapshot, const TimeGrid& grid,
    const DecomposeOptions& options) {
  if (snapshot.m.cols != static_cast<std::size_t>(grid.n_total()))
    throw ShapeError("decompose_components: snapshot/grid instant mismatch");
  const std::size_t block_len = snapshot.n_points * snapshot.m.cols;
  std::array<double, 3> block_norm{};
  double norm_max = 0.0;
  for (int c = 0; c < plast::HistorySnapshot::kComponents; ++c) {
    const double* block = snapshot.m.row(snapshot.component_row(c, 0));
    block_norm[c] = std::sqrt(kernels::nrm2sq(block, block_len));
    norm_max = std::max(norm_max, block_norm[c]);
  }
  std::array<DecomposeResult, 3> out;
  for (int c = 0; c < plast::HistorySnapshot::kComponents; ++c) {
    // A component below the decomposition tolerance of the dominant one
    // (e.g. solver-noise plastic shear in a uniaxially loaded bar) carries
    // nothing the pooled representation can resolve; decomposing it would
    // produce a large rank of meaningless modes.  Report it as zero.
    if (block_norm[c] <= options.tol * norm_max) {
      out[c].field = SeparatedField(grid.n_micro, grid.n_macro);
      continue;
    }
    const double* block = snapshot.m.row(snapshot.component_row(c, 0));
    out[c] = mtpgd_decompose(block, snapshot.n_points, grid, options);
  }
  return out;
}

}  // namespace mtpgd::sep
