// SPDX-License-Identifier: Apache-2.0
//
// Higher-order dynamic mode decomposition (DMD-d) for scalar macro-time mode
// series: stack d-lagged snapshots, extract the reduced Koopman spectrum via
// a truncated SVD, fit complex mode amplitudes by least squares on the
// training window, and extrapolate v_j = Re sum_i a_i mu_i^j.
#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "mtpgd/common.hpp"

namespace mtpgd::forecast {

struct HodmdModel {
  int d = 1;                     // lag depth of the stacked snapshots
  int rank = 0;                  // retained spectral modes
  Eigen::VectorXcd eigenvalues;  // mu_i, one per retained mode
  Eigen::VectorXcd amplitudes;   // a_i, least-squares fit on the window
  int train_length = 0;          // N_T of the fitted series
  double t_origin = 0.0;         // metadata: time of sample j = 0
  double t_step = 1.0;           // metadata: spacing between samples
  double train_error = 0.0;      // relative l2 misfit on the training window
  bool rank_deficient = false;   // SVD dropped directions below tolerance
};

struct Forecast {
  Eigen::VectorXd values;
  bool growth_warning = false;     // some |mu_i| > 1 + growth_guard
  double max_eigen_modulus = 0.0;  // max |mu_i| of the retained spectrum
  double max_imag = 0.0;  // largest |Im| of the complex sums before Re
};

inline constexpr double kDefaultTolSvd = 1e-8;
inline constexpr double kDefaultTolSpectral = 1e-6;
inline constexpr double kDefaultGrowthGuard = 0.05;

// Fits a DMD-d model to a scalar series of length N_T.  Requires N_T > 2d;
// throws ArgumentError otherwise.  Spectral modes whose amplitude falls below
// tol_spectral relative to the largest are dropped (conjugate pairs kept or
// dropped together) and the amplitudes refit.
HodmdModel hodmd_fit(const Eigen::VectorXd& series, int d,
                     double tol_svd = kDefaultTolSvd,
                     double tol_spectral = kDefaultTolSpectral);

// Re sum_i a_i mu_i^j for one sample index (training or beyond).
double hodmd_value(const HodmdModel& model, int j);

// Model evaluation on indices 0..n-1 (training-window reconstruction).
Eigen::VectorXd hodmd_reconstruct(const HodmdModel& model, int n);

// Extrapolates indices train_length .. train_length + horizon - 1.
Forecast hodmd_forecast(const HodmdModel& model, int horizon,
                        double growth_guard = kDefaultGrowthGuard);

// Picks the lag from candidate_ds minimizing the forecast error on a held-out
// tail (round(validation_fraction * N) samples, at least one).  Errors within
// 1e-9 of the best tie toward the smallest lag.  Candidates that do not
// satisfy the fit precondition on the head are skipped; throws ArgumentError
// when none is feasible.
int select_lag(const Eigen::VectorXd& series,
               const std::vector<int>& candidate_ds,
               double validation_fraction = 0.2,
               double tol_svd = kDefaultTolSvd,
               double tol_spectral = kDefaultTolSpectral);

// Coarse-grained variant: subsamples the series with the given stride, fits
// on the shorter series, forecasts on the coarse grid, and maps back to the
// full-resolution horizon with a natural cubic spline.
Forecast hodmd_forecast_resampled(const Eigen::VectorXd& series, int horizon,
                                  int d, int stride,
                                  double tol_svd = kDefaultTolSvd,
                                  double tol_spectral = kDefaultTolSpectral,
                                  double growth_guard = kDefaultGrowthGuard);

// Diagnostic dump: one CSV row (Re mu, Im mu, |mu|, Re a, Im a) per mode.
void write_model_csv(std::ostream& os, const HodmdModel& model);

}  // namespace mtpgd::forecast
