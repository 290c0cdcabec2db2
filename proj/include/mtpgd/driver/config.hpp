// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include "mtpgd/fem/load.hpp"
#include "mtpgd/fem/material.hpp"
#include "mtpgd/sep/time_grid.hpp"

namespace mtpgd::driver {

// Flat run configuration. File format: one `key = value` per line, '#'
// comments; keys are exactly the snake_case names below. CLI flags override
// file values.
struct RunConfig {
  // Mesh: either a mesh file or generator parameters.
  std::string mesh_file;
  std::string mesh_kind = "bar";  // bar | dogbone
  double mesh_length = 100.0;     // mm
  double mesh_height = 20.0;      // mm (end height for dogbone)
  double mesh_mid_height = 10.0;  // mm (dogbone waist)
  int mesh_nx = 25;
  int mesh_ny = 2;

  fem::Material material{210000.0, 0.3, 205.0, 2000.0};

  // Cyclic Dirichlet program.
  double amplitude = 0.18;      // u_D^max (mm)
  double cycle_duration = 1.0;  // T_1 (s)
  double drift_slope = 0.0;     // mm/s

  // Two-scale time grid and horizons.
  int n_micro = 200;        // N_tau
  int training_cycles = 20;  // K
  int target_cycles = 60;    // N

  // PGD (decomposition and equilibrium solves).
  double decompose_tol = 1e-6;
  int decompose_max_rank = 50;
  double solve_tol = 1e-6;
  // Equilibrium solves over the forecast horizon carry forecast-level input
  // error, so they target a looser residual than the training solves.
  double horizon_solve_tol = 1e-4;
  int solve_max_rank = 250;
  double stagnation_tol = 1e-8;
  int max_sweeps = 50;
  double outer_tol = 1e-4;
  int max_outer = 30;

  // HODMD forecasting.
  int hodmd_d = 10;  // 0 selects the lag on a held-out tail
  double hodmd_tol_svd = 1e-8;
  double hodmd_tol_spectral = 1e-6;
  double growth_guard = 0.05;
  int hodmd_resample_stride = 0;  // 0 = off

  // Sparse correction.
  int reference_elements = 4;  // J
  double correction_tol = 1e-6;
  int max_extra_rank = 10;
  std::string correction_extension = "zero";  // zero | gappy

  std::string output_dir;
  unsigned seed = 12345;

  void validate() const;  // throws ConfigError

  sep::TimeGrid training_grid() const;
  sep::TimeGrid forecast_grid() const;  // continuation over (T_K, T_N]
  sep::TimeGrid full_grid() const;      // (0, T_N]
  fem::LoadProgram load_program(int cycles) const;
};

RunConfig load_config(const std::string& path);
// Applies `key` = `value`; throws ConfigError on unknown keys or bad values.
void apply_override(RunConfig& config, const std::string& key,
                    const std::string& value);
void write_config(std::ostream& os, const RunConfig& config);
void save_config(const std::string& path, const RunConfig& config);

}  // namespace mtpgd::driver
