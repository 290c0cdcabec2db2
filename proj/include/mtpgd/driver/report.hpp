// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mtpgd::driver {

// Everything a run records: iteration history, evaluation counts, ranks,
// error metrics at the reference points, and per-phase wall clock.  All
// fields except the timings are deterministic for a given config.
struct RunReport {
  std::string method;  // "reference" | "datadriven"
  int cycles = 0;      // macro cycles covered by the run
  int n_points = 0;    // Gauss points of the mesh

  int outer_iterations = 0;
  std::vector<double> outer_residuals;  // relative displacement change

  std::vector<std::uint64_t> integration_calls;  // per full integration pass
  std::uint64_t sparse_calls = 0;  // reference-point return-map evaluations
  std::uint64_t total_calls = 0;

  std::array<int, 3> rank_base{};       // m per component (11, 12, 22)
  std::array<int, 3> rank_corrected{};  // m* per component
  int displacement_rank = 0;

  double equilibrium_residual = 0.0;  // final MT-PGD relative residual
  double error_refs_before = 0.0;     // predictor error on Omega_r x Ihat
  double error_refs_after = 0.0;      // corrected error on Omega_r x Ihat
  double orthogonality_defect = 0.0;  // after the macro-mode update

  bool growth_warning = false;
  bool elastic_fallback = false;
  bool enrich_stagnation = false;
  bool rank_deficient_update = false;

  std::vector<int> reference_elements;
  std::vector<std::pair<std::string, double>> phase_seconds;

  void write_csv(std::ostream& os) const;
  // Field-by-field equality ignoring the wall-clock entries.
  bool same_results(const RunReport& other) const;
};

void save_report(const std::string& path, const RunReport& report);
RunReport load_report(const std::string& path);

// Output of compare_runs: error metrics against the extended reference truth
// plus the evaluation-count and wall-clock accounting.
struct ComparisonReport {
  double error_before = 0.0;  // predictor vs truth on Omega x Ihat
  double error_after = 0.0;   // corrected vs truth on Omega x Ihat
  double error_refs_before = 0.0;
  double error_refs_after = 0.0;
  std::uint64_t sparse_calls = 0;
  std::uint64_t reference_calls_per_pass = 0;
  double call_ratio = 0.0;  // sparse_calls / reference_calls_per_pass
  double speedup_overall = 0.0;
  double speedup_nonlinear = 0.0;
  double ref_equilibrium = 0.0;
  double dd_equilibrium = 0.0;

  void write_csv(std::ostream& os) const;
};

}  // namespace mtpgd::driver
