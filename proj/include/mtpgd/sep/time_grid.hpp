// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "mtpgd/common.hpp"

namespace mtpgd::sep {

// Two-scale time discretization: N_tau micro steps per cycle, N_T cycles,
// N_t = N_tau * N_T. Samples live at the step ends: the flat index
// j = J*N_tau + i (0-based) corresponds to
//   t = t_origin + J*T_1 + (i+1)*dt.
// The initial instant t = t_origin itself is not sampled; histories start
// from a known state there. t_origin is nonzero for forecast grids that
// continue a training window.
struct TimeGrid {
  int n_micro = 0;            // N_tau
  int n_macro = 0;            // N_T
  double cycle_duration = 0;  // T_1 (s)
  double t_origin = 0.0;

  int n_total() const { return n_micro * n_macro; }
  double dt_micro() const { return cycle_duration / n_micro; }

  double time_at(int i, int j_macro) const {
    return t_origin + j_macro * cycle_duration + (i + 1) * dt_micro();
  }
  double time_flat(int j) const {
    return time_at(j % n_micro, j / n_micro);
  }

  void validate() const {
    if (n_micro <= 0 || n_macro <= 0)
      throw ConfigError("time grid: N_tau and N_T must be positive");
    if (!(cycle_duration > 0.0))
      throw ConfigError("time grid: cycle duration must be > 0");
  }

  // Grid continuing this one for `cycles` further cycles.
  TimeGrid continuation(int cycles) const {
    TimeGrid g = *this;
    g.n_macro = cycles;
    g.t_origin = t_origin + n_macro * cycle_duration;
    return g;
  }
};

}  // namespace mtpgd::sep
