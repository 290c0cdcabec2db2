// SPDX-License-Identifier: Apache-2.0
//
// Galerkin multi-time PGD solver for quasi-static equilibrium
//   K u(t) = F(t),  F(t) = sum_j F_j * tau_j(micro) * T_j(macro)
// over the free dofs of an ElasticSystem.  The operator is block-diagonal in
// time, so every spatial step reuses the factorized stiffness; the solver
// only performs one K-solve per distinct right-hand-side spatial vector.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mtpgd/common.hpp"
#include "mtpgd/fem/elastic_system.hpp"
#include "mtpgd/sep/separated_field.hpp"
#include "mtpgd/sep/time_grid.hpp"

namespace mtpgd::sep {

// One separated right-hand-side term: spatial vector over free dofs times a
// micro-time and a macro-time factor.
struct Triad {
  Eigen::VectorXd x;
  Eigen::VectorXd micro;
  Eigen::VectorXd macro;
};

struct SolveOptions {
  double tol = 1e-6;             // target relative residual over the grid
  int max_rank = 50;             // enrichment budget
  double stagnation_tol = 1e-8;  // ALS fixed-point stagnation threshold
  int max_sweeps = 50;           // ALS sweep budget per enrichment
  double stall_ratio = 1.0 - 1e-9;  // improvement below this counts as stall
  int max_stalls = 5;            // consecutive stalled enrichments tolerated
};

struct SolveResult {
  SeparatedField u;                      // free-dof displacement modes
  std::vector<double> residual_history;  // relative residual per enrichment
  double relative_residual = 0.0;
};

SolveResult mtpgd_solve(const fem::ElasticSystem& system,
                        const std::vector<Triad>& rhs, const TimeGrid& grid,
                        const SolveOptions& options = {});

}  // namespace mtpgd::sep
