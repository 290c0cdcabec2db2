// SPDX-License-Identifier: Apache-2.0
//
// Sparse-sampling correction of the forecast nonlinear term: reference-point
// selection, the predictor field over the forecast window, the macro-mode
// Galerkin update assembled on the sampled subdomain, rank enrichment on the
// sampled residual, and the relative error metrics.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mtpgd/common.hpp"
#include "mtpgd/fem/mesh.hpp"
#include "mtpgd/forecast/hodmd.hpp"
#include "mtpgd/plast/plasticity.hpp"
#include "mtpgd/row_matrix.hpp"
#include "mtpgd/sep/separated_field.hpp"
#include "mtpgd/sep/time_grid.hpp"

namespace mtpgd::correct {

// Elements with the largest accumulated plastic strain, expanded to their
// Gauss points (ids usable as rows of a snapshot component block).
struct ReferenceSet {
  std::vector<int> elements;     // ranking order (ties: lowest index first)
  std::vector<int> points;       // Gauss-point ids, element-major
  bool elastic_fallback = false; // ranking fell back to the elastic metric
};

// Ranks elements by the maximum of state.ebar over their Gauss points.  When
// the plastic strain is identically zero the fallback metric (a per-Gauss-
// point scalar, e.g. elastic von Mises stress) is used instead and the
// fallback flag is set.  Requires 1 <= count < n_elements.
ReferenceSet select_reference_points(
    const fem::Mesh& mesh, const plast::PlasticState& state, int count,
    const std::vector<double>& fallback_metric = {});

struct Prediction {
  sep::SeparatedField field;  // over the forecast window
  bool growth_warning = false;
};

// Reuses the spatial and micro modes of the trained decomposition and swaps
// the macro modes for their forecasts over the next `horizon` macro steps.
Prediction predict_nonlinear(const sep::SeparatedField& base,
                             const std::vector<forecast::HodmdModel>& models,
                             int horizon,
                             double growth_guard = forecast::kDefaultGrowthGuard);

// Galerkin normal equations of the macro-mode update on the sampled
// subdomain: a_kl = (sum_r w_r X_k X_l)(dt sum_i tau_k tau_l) and
// b_k(T_J) = dt sum_i (sum_r w_r X_k e_riJ) tau_ki with e = predictor - truth.
// Piecewise-linear macro elements with nodal quadrature decouple the update
// node by node.
struct GalerkinSystem {
  Eigen::MatrixXd a;  // m x m
  Eigen::MatrixXd b;  // m x n_macro
  double dt_micro = 0.0;
};

// base_refs carries the spatial modes restricted to the reference rows plus
// the shared micro modes (its macro factors are not used).  truth_refs and
// predictor_refs are dense on reference rows x forecast instants.
GalerkinSystem build_galerkin_system(const sep::SeparatedField& base_refs,
                                     const std::vector<double>& weights,
                                     const RowMatrix& truth_refs,
                                     const RowMatrix& predictor_refs,
                                     const sep::TimeGrid& grid);

struct CorrectionUpdate {
  Eigen::MatrixXd delta;          // m x n_macro macro-mode updates
  bool rank_deficient = false;    // fell back to the minimum-norm solve
  double condition = 0.0;         // singular-value ratio of a
  double max_rel_residual = 0.0;  // worst per-node solve residual
};

CorrectionUpdate correct_update(const GalerkinSystem& system);

// Corrected predictor: macro modes become forecast - delta (the update is
// assembled from e = predictor - truth, so it is subtracted).
sep::SeparatedField apply_update(const sep::SeparatedField& predictor,
                                 const Eigen::MatrixXd& delta);

struct EnrichmentTriad {
  Eigen::VectorXd x;  // over the reference rows
  Eigen::VectorXd micro;
  Eigen::VectorXd macro;
};

struct EnrichmentResult {
  std::vector<EnrichmentTriad> triads;
  std::vector<double> residual_history;  // weighted residual / scale
  double relative_residual = 0.0;
  bool stagnation = false;  // a fixed point failed to settle; best kept
};

// Greedy weighted rank-1 enrichment of the sampled residual (truth minus the
// updated predictor).  Stops at tol (relative to `scale`, typically the
// weighted truth norm) or after max_extra_rank triads; a triad that fails to
// lower the residual is dropped and the loop stops.
EnrichmentResult correct_enrich(const RowMatrix& residual,
                                const std::vector<double>& weights,
                                const sep::TimeGrid& grid, double tol,
                                int max_extra_rank, double scale);

// Zero extension of a sampled spatial mode to the full point set.
Eigen::VectorXd extend_spatial_mode(const Eigen::VectorXd& x_refs,
                                    const std::vector<int>& rows,
                                    std::size_t n_rows);

// Gappy extension: weighted least-squares fit of the sampled values in the
// span of full-length basis modes (e.g. the training spatial modes).
Eigen::VectorXd extend_spatial_mode_gappy(
    const Eigen::VectorXd& x_refs, const std::vector<int>& rows,
    const std::vector<double>& weights,
    const std::vector<Eigen::VectorXd>& basis);

// Relative weighted L2 error ||candidate - truth||_w / ||truth||_w over
// aligned rows; +inf when the truth norm vanishes.
double prediction_error(const RowMatrix& candidate, const RowMatrix& truth,
                        const std::vector<double>& row_weights);

// Accumulates the same metric across several blocks (e.g. the three strain
// components).
struct ErrorAccum {
  double num2 = 0.0;
  double den2 = 0.0;
  void add(const RowMatrix& candidate, const RowMatrix& truth,
           const std::vector<double>& row_weights);
  double value() const;
};

// Largest normalized projection of the residual onto the update test space
// {X_k tau_k phi_J}; ~0 after correct_update (Galerkin orthogonality).
double orthogonality_defect(const sep::SeparatedField& base_refs,
                            const std::vector<double>& weights,
                            const RowMatrix& residual,
                            const sep::TimeGrid& grid);

}  // namespace mtpgd::correct
