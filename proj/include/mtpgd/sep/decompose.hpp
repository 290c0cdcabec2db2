// SPDX-License-Identifier: Apache-2.0
//
// Greedy rank-1 alternating-least-squares decomposition of a space x time
// history into the separated form sum_k X_k(x) * tau_k(micro) * T_k(macro).
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mtpgd/common.hpp"
#include "mtpgd/plast/plasticity.hpp"
#include "mtpgd/sep/separated_field.hpp"
#include "mtpgd/sep/time_grid.hpp"

namespace mtpgd::sep {

struct DecomposeOptions {
  double tol = 1e-6;             // target relative Frobenius residual
  int max_rank = 50;             // enrichment budget
  double stagnation_tol = 1e-8;  // ALS fixed-point stagnation threshold
  int max_sweeps = 50;           // ALS sweep budget per mode
};

struct DecomposeResult {
  SeparatedField field;
  std::vector<double> residual_history;  // relative residual after each mode
  double relative_error = 0.0;           // final relative residual
};

// Thrown when a rank-1 enrichment fails to reduce the residual.  The sweep
// budget itself is a regular stop: a triad produced at the cap is kept as
// long as it makes progress.  Carries the modes accepted before the failure.
class DecomposeError : public ConvergenceError {
 public:
  DecomposeError(const std::string& msg, std::vector<double> history,
                 SeparatedField best)
      : ConvergenceError(msg, std::move(history)), best_field(std::move(best)) {}

  SeparatedField best_field;
};

// Decomposes a row-major matrix (n_rows x grid.n_total(), instant index
// j = J * n_micro + i) into separated modes.  Stops when the relative
// residual drops below options.tol; returns with the achieved residual if the
// rank budget is exhausted first.
DecomposeResult mtpgd_decompose(const double* data, std::size_t n_rows,
                                const TimeGrid& grid,
                                const DecomposeOptions& options = {});

// Convenience overload: one decomposition per strain component block of a
// plastic-history snapshot (order 11, 12, 22).  A block whose norm is below
// options.tol of the largest block is unresolvable at the decomposition
// tolerance (typically solver noise) and yields a rank-0 field.
std::array<DecomposeResult, 3> decompose_components(
    const plast::HistorySnapshot& snapshot, const TimeGrid& grid,
    const DecomposeOptions& options = {});

}  // namespace mtpgd::sep
