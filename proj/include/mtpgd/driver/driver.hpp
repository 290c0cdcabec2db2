// SPDX-License-Identifier: Apache-2.0
//
// Run orchestration.  run_reference executes the fixed-point elasto-plastic
// MT-PGD scheme over the training window (0, T_K]; run_datadriven extends a
// trained run to (T_K, T_N] via decomposition, HODMD forecasting, sparse
// correction at reference points, and a final equilibrium solve;
// compare_runs measures the data-driven result against an extended reference
// run on the same configuration.
#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mtpgd/correct/corrector.hpp"
#include "mtpgd/driver/config.hpp"
#include "mtpgd/driver/report.hpp"
#include "mtpgd/fem/elastic_system.hpp"
#include "mtpgd/fem/mesh.hpp"
#include "mtpgd/plast/plasticity.hpp"
#include "mtpgd/row_matrix.hpp"
#include "mtpgd/sep/separated_field.hpp"

namespace mtpgd::driver {

struct ReferenceRun {
  RunConfig config;
  fem::Mesh mesh;
  sep::SeparatedField displacement;  // full-dof modes over (0, T_K]
  plast::HistorySnapshot plastic;    // consistent with `displacement`
  plast::PlasticState state;         // at T_K
  RunReport report;
};

struct DatadrivenRun {
  RunConfig config;
  correct::ReferenceSet refs;
  std::array<sep::SeparatedField, 3> predictor;  // over Ihat, all points
  std::array<sep::SeparatedField, 3> corrected;  // update + enrichment
  sep::SeparatedField displacement;              // full-dof modes over Ihat
  RowMatrix truth_refs;  // sparse constitutive truth, 3R x N_t(Ihat)
  RunReport report;
};

ReferenceRun run_reference(const RunConfig& config);
DatadrivenRun run_datadriven(const RunConfig& config,
                             const ReferenceRun& training);
ComparisonReport compare_runs(const ReferenceRun& extended,
                              const DatadrivenRun& dd);

// Mesh from the config (generator parameters or mesh_file).
fem::Mesh make_mesh(const RunConfig& config);

// Full-dof separated displacement: free-dof solution modes expanded with
// zeros at constrained dofs plus one lift mode per separated load part.
sep::SeparatedField expand_displacement(
    const fem::ElasticSystem& system, const sep::SeparatedField& free_modes,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& load_parts);

// Gauss-point strain history of a full-dof separated displacement field
// (tensor shear components).
std::shared_ptr<plast::SeparatedStrainHistory> strain_history(
    const fem::Mesh& mesh, const sep::SeparatedField& displacement);

// Persistence: one directory per run (manifest.json, config.txt, binary
// fields, CSV diagnostics).
void save_reference_run(const std::string& dir, const ReferenceRun& run);
ReferenceRun load_reference_run(const std::string& dir);
void save_datadriven_run(const std::string& dir, const DatadrivenRun& run);
DatadrivenRun load_datadriven_run(const std::string& dir);

}  // namespace mtpgd::driver
