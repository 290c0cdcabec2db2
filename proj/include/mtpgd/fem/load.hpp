// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mtpgd/common.hpp"
#include "mtpgd/sep/time_grid.hpp"

namespace mtpgd::fem {

// Cyclic Dirichlet load program: a piecewise-linear load-unload-load triangle
// of amplitude u_max per cycle, plus an optional linear drift of the average.
//   u_D(t) = amplitude * w(t mod T_1 / T_1) + drift_slope * t
// with w: 0 -> +1 at T_1/4 -> -1 at 3T_1/4 -> 0 at T_1.
struct LoadProgram {
  double amplitude = 0.0;       // u_D^max (mm)
  double cycle_duration = 0.0;  // T_1 (s)
  int cycle_count = 0;
  double drift_slope = 0.0;     // mm/s, 0 for the constant-amplitude case

  // Unit triangle waveform on s in [0, 1].
  static double unit_waveform(double s);

  void validate() const;

  double value(double t) const;
  // Sample-exact value at grid index (i, J) — evaluates through the same
  // expressions as separated_parts so both agree bit for bit.
  double value_at(const sep::TimeGrid& grid, int i, int j_macro) const;

  // Exact separation of u_D over the grid samples: u_D(i, J) =
  // sum_p micro_p(i) * macro_p(J). One part for the cyclic waveform and, when
  // drift is present, two more (in-cycle ramp and per-cycle offset).
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> separated_parts(
      const sep::TimeGrid& grid) const;
};

}  // namespace mtpgd::fem
