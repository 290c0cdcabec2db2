// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mtpgd/fem/material.hpp"
#include "mtpgd/kernels/kernels.hpp"
#include "mtpgd/row_matrix.hpp"

namespace mtpgd::plast {

// Per-Gauss-point plastic state, structure-of-arrays. Shear components are
// tensor components (not engineering). p33 is stored explicitly so the
// deviatoric-flow invariant tr(eps_p) ~ 0 is checkable.
struct PlasticState {
  std::vector<double> p11, p22, p33, p12, ebar;

  std::size_t size() const { return p11.size(); }
  void resize_zero(std::size_t n) {
    p11.assign(n, 0.0);
    p22.assign(n, 0.0);
    p33.assign(n, 0.0);
    p12.assign(n, 0.0);
    ebar.assign(n, 0.0);
  }
};

PlasticState restrict_state(const PlasticState& full,
                            const std::vector<int>& points);

struct PointStrain {
  double e11 = 0, e22 = 0, e12 = 0;  // tensor shear
};
struct PointStress {
  double s11 = 0, s22 = 0, s33 = 0, s12 = 0;
};

// One radial-return step at a single point. `state` must have size 1 and is
// updated in place. Throws NumericError on non-finite input.
PointStress return_map_point(const PointStrain& eps_trial, PlasticState& state,
                             const fem::Material& material);

// Abstract time-ordered strain history over a set of points, queried one
// instant at a time (tensor shear components). Implementations must be pure
// so integration can re-read instants and subsets reproduce full rows
// bit for bit.
class StrainHistory {
 public:
  virtual ~StrainHistory() = default;
  virtual std::size_t n_points() const = 0;
  virtual std::size_t n_instants() const = 0;
  virtual void instant(std::size_t j, double* e11, double* e22,
                       double* e12) const = 0;
  virtual std::unique_ptr<StrainHistory> subset(
      const std::vector<int>& points) const = 0;
};

// Dense instant-major storage (used by tests and small cases).
class DenseStrainHistory final : public StrainHistory {
 public:
  // Each matrix is n_instants x n_points (instant-major).
  DenseStrainHistory(RowMatrix e11, RowMatrix e22, RowMatrix e12);
  std::size_t n_points() const override { return e11_.cols; }
  std::size_t n_instants() const override { return e11_.rows; }
  void instant(std::size_t j, double* e11, double* e22,
               double* e12) const override;
  std::unique_ptr<StrainHistory> subset(
      const std::vector<int>& points) const override;

 private:
  RowMatrix e11_, e22_, e12_;
};

// Strain history of a separated displacement field: a list of per-point
// strain modes combined with per-instant coefficients micro[i] * macro[J].
// This is how solver iterates (and the Dirichlet lift) feed the constitutive
// integration without ever materializing the dense history.
class SeparatedStrainHistory final : public StrainHistory {
 public:
  struct Mode {
    Eigen::VectorXd e11, e22, e12;  // per point, tensor shear
    Eigen::VectorXd micro, macro;
  };
  SeparatedStrainHistory(std::vector<Mode> modes, int n_micro, int n_macro);
  std::size_t n_points() const override { return n_points_; }
  std::size_t n_instants() const override {
    return static_cast<std::size_t>(n_micro_) * n_macro_;
  }
  void instant(std::size_t j, double* e11, double* e22,
               double* e12) const override;
  std::unique_ptr<StrainHistory> subset(
      const std::vector<int>& points) const override;

 private:
  std::vector<Mode> modes_;
  std::size_t n_points_ = 0;
  int n_micro_ = 0, n_macro_ = 0;
};

// Histories glued along the time axis (training window followed by the
// forecast window).
class ConcatStrainHistory final : public StrainHistory {
 public:
  explicit ConcatStrainHistory(
      std::vector<std::shared_ptr<const StrainHistory>> parts);
  std::size_t n_points() const override;
  std::size_t n_instants() const override;
  void instant(std::size_t j, double* e11, double* e22,
               double* e12) const override;
  std::unique_ptr<StrainHistory> subset(
      const std::vector<int>& points) const override;

 private:
  std::vector<std::shared_ptr<const StrainHistory>> parts_;
};

// Plastic strain trajectories: 3 component blocks stacked row-wise in the
// order (eps11, eps12, eps22); block c spans rows [c*P, (c+1)*P). One column
// per time instant.
struct HistorySnapshot {
  static constexpr int kComponents = 3;
  std::size_t n_points = 0;  // P
  RowMatrix m;               // 3P x N_t

  std::size_t component_row(int c, std::size_t p) const {
    return static_cast<std::size_t>(c) * n_points + p;
  }
  const double* component_block(int c) const {
    return m.row(static_cast<std::size_t>(c) * n_points);
  }
  std::size_t n_instants() const { return m.cols; }
};

struct IntegrateResult {
  HistorySnapshot snapshot;
  PlasticState final_state;
  std::uint64_t call_count = 0;  // return-mapping evaluations
};

// Sequential constitutive integration of the whole history at every point of
// the provider, starting from `initial`. The per-point time loop is strictly
// sequential; the point dimension is data-parallel.
IntegrateResult integrate_history(const fem::Material& material,
                                  const StrainHistory& history,
                                  const PlasticState& initial);

// Same integration restricted to `points` (indices into the provider's point
// set). Rows equal the corresponding rows of the full integration bit for
// bit, at a cost of |points| * N_t evaluations. Throws ArgumentError on an
// empty or out-of-range point set.
IntegrateResult integrate_history_sparse(const fem::Material& material,
                                         const StrainHistory& history,
                                         const PlasticState& initial_full,
                                         const std::vector<int>& points);

}  // namespace mtpgd::plast
