// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/fem/load.hpp"

#include <cmath>

namespace mtpgd::fem {

double LoadProgram::unit_waveform(double s) {
  if (s < 0.25) return 4.0 * s;
  if (s < 0.75) return 2.0 - 4.0 * s;
  return 4.0 * s - 4.0;
}

void LoadProgram::validate() const {
  if (!(cycle_duration > 0.0))
    throw ConfigError("load: cycle duration must be > 0");
  if (cycle_count < 1) throw ConfigError("load: cycle count must be >= 1");
  if (!std::isfinite(amplitude) || !std::isfinite(drift_slope))
    throw ConfigError("load: non-finite amplitude or drift");
}

double LoadProgram::value(double t) const {
  const double s = t / cycle_duration - std::floor(t / cycle_duration);
  return amplitude * unit_waveform(s) + drift_slope * t;
}

double LoadProgram::value_at(const sep::TimeGrid& grid, int i,
                             int j_macro) const {
  const double tau = (i + 1) * grid.dt_micro();
  const double w = amplitude * unit_waveform((i + 1) / double(grid.n_micro));
  return w + drift_slope * tau +
         drift_slope * (grid.t_origin + j_macro * grid.cycle_duration);
}

std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>
LoadProgram::separated_parts(const sep::TimeGrid& grid) const {
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> parts;
  const int nm = grid.n_micro, nM = grid.n_macro;

  Eigen::VectorXd wave(nm);
  for (int i = 0; i < nm; ++i)
    wave[i] = amplitude * unit_waveform((i + 1) / double(nm));
  parts.emplace_back(wave, Eigen::VectorXd::Ones(nM));

  if (drift_slope != 0.0) {
    Eigen::VectorXd ramp(nm);
    for (int i = 0; i < nm; ++i) ramp[i] = drift_slope * (i + 1) * grid.dt_micro();
    parts.emplace_back(ramp, Eigen::VectorXd::Ones(nM));

    Eigen::VectorXd offsets(nM);
    for (int j = 0; j < nM; ++j)
      offsets[j] = drift_slope * (grid.t_origin + j * grid.cycle_duration);
    parts.emplace_back(Eigen::VectorXd::Ones(nm), offsets);
  }
  return parts;
}

}  // namespace mtpgd::fem
