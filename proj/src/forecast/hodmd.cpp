// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/forecast/hodmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace mtpgd::forecast {

namespace {

using Complex = std::complex<double>;

// Vandermonde matrix Phi(j, i) = mu_i^j on indices 0..n-1.
Eigen::MatrixXcd vandermonde(const Eigen::VectorXcd& mu, int n) {
  Eigen::MatrixXcd phi(n, mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    Complex p = 1.0;
    for (int j = 0; j < n; ++j) {
      phi(j, i) = p;
      p *= mu[i];
    }
  }
  return phi;
}

Eigen::VectorXcd fit_amplitudes(const Eigen::VectorXcd& mu,
                                const Eigen::VectorXd& series) {
  const Eigen::MatrixXcd phi = vandermonde(mu, static_cast<int>(series.size()));
  return phi.colPivHouseholderQr().solve(series.cast<Complex>().eval());
}

double relative_misfit(const Eigen::VectorXcd& mu, const Eigen::VectorXcd& a,
                       const Eigen::VectorXd& series) {
  const Eigen::MatrixXcd phi = vandermonde(mu, static_cast<int>(series.size()));
  const Eigen::VectorXd rec = (phi * a).real();
  const double denom = series.norm();
  return denom == 0.0 ? rec.norm() : (rec - series).norm() / denom;
}

}  // namespace

HodmdModel hodmd_fit(const Eigen::VectorXd& series, int d, double tol_svd,
                     double tol_spectral) {
  const int n = static_cast<int>(series.size());
  if (d < 1) throw ArgumentError("hodmd_fit: lag depth must be >= 1");
  if (n <= 2 * d)
    throw ArgumentError("hodmd_fit: need more than 2*d = " +
                        std::to_string(2 * d) + " samples, got " +
                        std::to_string(n));
  if (!series.allFinite()) throw NumericError("hodmd_fit: non-finite series");

  HodmdModel model;
  model.d = d;
  model.train_length = n;
  if (series.norm() == 0.0) {
    model.rank_deficient = true;
    return model;  // rank 0: the zero model is exact
  }

  // Stacked d-lagged snapshots z_j = (v_j, ..., v_{j+d-1}).
  const int cols = n - d;
  Eigen::MatrixXd x(d, cols), y(d, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < d; ++i) {
      x(i, j) = series[j + i];
      y(i, j) = series[j + 1 + i];
    }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  int r = 0;
  while (r < sv.size() && sv[r] > tol_svd * sv[0]) ++r;
  model.rank_deficient = (r < std::min(d, cols));
  if (r == 0) return model;

  const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
  const Eigen::MatrixXd v = svd.matrixV().leftCols(r);
  const Eigen::MatrixXd reduced =
      u.transpose() * y * v * sv.head(r).cwiseInverse().asDiagonal();

  Eigen::EigenSolver<Eigen::MatrixXd> eig(reduced);
  if (eig.info() != Eigen::Success)
    throw NumericError("hodmd_fit: eigensolver failed");
  Eigen::VectorXcd mu = eig.eigenvalues();
  Eigen::VectorXcd a = fit_amplitudes(mu, series);

  // Amplitude-based spectral truncation; conjugate pairs stay together.
  const double qmax = a.cwiseAbs().maxCoeff();
  std::vector<bool> keep(mu.size(), false);
  for (int i = 0; i < mu.size(); ++i)
    if (std::abs(a[i]) > tol_spectral * qmax) keep[i] = true;
  for (int i = 0; i < mu.size(); ++i) {
    if (!keep[i] || mu[i].imag() == 0.0) continue;
    int partner = -1;
    double best = 1e300;
    for (int j = 0; j < mu.size(); ++j) {
      if (j == i) continue;
      const double dist = std::abs(mu[j] - std::conj(mu[i]));
      if (dist < best) {
        best = dist;
        partner = j;
      }
    }
    if (partner >= 0 && best <= 1e-8 * (1.0 + std::abs(mu[i])))
      keep[partner] = true;
  }
  int kept = static_cast<int>(std::count(keep.begin(), keep.end(), true));
  if (kept < mu.size()) {
    Eigen::VectorXcd mu_kept(kept);
    for (int i = 0, k = 0; i < mu.size(); ++i)
      if (keep[i]) mu_kept[k++] = mu[i];
    mu = mu_kept;
    a = fit_amplitudes(mu, series);
  }

  // Deterministic mode order: by descending amplitude, then eigenvalue.
  std::vector<int> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const double qi = std::abs(a[i]), qj = std::abs(a[j]);
    if (qi != qj) return qi > qj;
    if (mu[i].real() != mu[j].real()) return mu[i].real() > mu[j].real();
    return mu[i].imag() > mu[j].imag();
  });
  model.eigenvalues.resize(mu.size());
  model.amplitudes.resize(mu.size());
  for (int k = 0; k < mu.size(); ++k) {
    model.eigenvalues[k] = mu[order[k]];
    model.amplitudes[k] = a[order[k]];
  }
  model.rank = static_cast<int>(mu.size());
  model.train_error = relative_misfit(model.eigenvalues, model.amplitudes,
                                      series);
  return model;
}

double hodmd_value(const HodmdModel& model, int j) {
  Complex s = 0.0;
  for (int i = 0; i < model.rank; ++i)
    s += model.amplitudes[i] *
         std::pow(model.eigenvalues[i], static_cast<double>(j));
  return s.real();
}

Eigen::VectorXd hodmd_reconstruct(const HodmdModel& model, int n) {
  if (n < 0) throw ArgumentError("hodmd_reconstruct: negative length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  Eigen::VectorXcd p = Eigen::VectorXcd::Ones(model.rank);
  for (int j = 0; j < n; ++j) {
    Complex s = 0.0;
    for (int i = 0; i < model.rank; ++i) {
      s += model.amplitudes[i] * p[i];
      p[i] *= model.eigenvalues[i];
    }
    out[j] = s.real();
  }
  return out;
}

Forecast hodmd_forecast(const HodmdModel& model, int horizon,
                        double growth_guard) {
  if (horizon < 0) throw ArgumentError("hodmd_forecast: negative horizon");
  Forecast fc;
  fc.values = Eigen::VectorXd::Zero(horizon);
  for (int i = 0; i < model.rank; ++i)
    fc.max_eigen_modulus =
        std::max(fc.max_eigen_modulus, std::abs(model.eigenvalues[i]));
  fc.growth_warning = fc.max_eigen_modulus > 1.0 + growth_guard;

  Eigen::VectorXcd p(model.rank);
  for (int i = 0; i < model.rank; ++i)
    p[i] = std::pow(model.eigenvalues[i],
                    static_cast<double>(model.train_length));
  for (int j = 0; j < horizon; ++j) {
    Complex s = 0.0;
    for (int i = 0; i < model.rank; ++i) {
      s += model.amplitudes[i] * p[i];
      p[i] *= model.eigenvalues[i];
    }
    fc.values[j] = s.real();
    fc.max_imag = std::max(fc.max_imag, std::abs(s.imag()));
  }
  return fc;
}

int select_lag(const Eigen::VectorXd& series,
               const std::vector<int>& candidate_ds, double validation_fraction,
               double tol_svd, double tol_spectral) {
  const int n = static_cast<int>(series.size());
  if (validation_fraction <= 0.0 || validation_fraction >= 1.0)
    throw ArgumentError("select_lag: validation fraction must be in (0,1)");
  const int holdout = std::max(
      1, static_cast<int>(std::floor(validation_fraction * n + 0.5)));
  const int head = n - holdout;

  std::vector<int> ds = candidate_ds;
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());

  const Eigen::VectorXd head_series = series.head(head);
  const Eigen::VectorXd tail = series.tail(holdout);
  const double tail_norm = tail.norm();

  int best_d = -1;
  double best_err = 1e300;
  constexpr double kTie = 1e-9;  // errors this close prefer the smaller lag
  for (int d : ds) {
    if (d < 1 || head <= 2 * d) continue;
    const HodmdModel model = hodmd_fit(head_series, d, tol_svd, tol_spectral);
    const Forecast fc = hodmd_forecast(model, holdout);
    const double err = tail_norm == 0.0 ? fc.values.norm()
                                        : (fc.values - tail).norm() / tail_norm;
    if (err < best_err - kTie) {
      best_err = err;
      best_d = d;
    }
  }
  if (best_d < 0)
    throw ArgumentError("select_lag: no feasible lag candidate for series of "
                        "length " +
                        std::to_string(n));
  return best_d;
}

namespace {

// Natural cubic spline through (xs, ys); evaluated at query points.  Knots
// are strictly increasing.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    const int n = static_cast<int>(xs_.size());
    m_.assign(n, 0.0);
    if (n < 3) return;  // degenerates to linear interpolation
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
    diag[0] = diag[n - 1] = 1.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double h0 = xs_[i] - xs_[i - 1];
      const double h1 = xs_[i + 1] - xs_[i];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0);
    }
    // Thomas sweep; first and last rows pin the natural end conditions.
    for (int i = 2; i + 1 < n; ++i) {
      const double w = (xs_[i] - xs_[i - 1]) / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (int i = n - 2; i >= 1; --i)
      m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
  }

  double operator()(double x) const {
    const int n = static_cast<int>(xs_.size());
    int lo = 0;
    int hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (xs_[mid] <= x ? lo : hi) = mid;
    }
    const double h = xs_[hi] - xs_[lo];
    const double t0 = (xs_[hi] - x) / h;
    const double t1 = (x - xs_[lo]) / h;
    return t0 * ys_[lo] + t1 * ys_[hi] +
           ((t0 * t0 * t0 - t0) * m_[lo] + (t1 * t1 * t1 - t1) * m_[hi]) *
               (h * h) / 6.0;
  }

 private:
  std::vector<double> xs_, ys_, m_;
};

}  // namespace

Forecast hodmd_forecast_resampled(const Eigen::VectorXd& series, int horizon,
                                  int d, int stride, double tol_svd,
                                  double tol_spectral, double growth_guard) {
  if (stride < 2)
    throw ArgumentError("hodmd_forecast_resampled: stride must be >= 2");
  if (horizon < 0)
    throw ArgumentError("hodmd_forecast_resampled: negative horizon");
  const int n = static_cast<int>(series.size());
  const int n_coarse = (n - 1) / stride + 1;
  Eigen::VectorXd coarse(n_coarse);
  for (int k = 0; k < n_coarse; ++k) coarse[k] = series[k * stride];

  const HodmdModel model = hodmd_fit(coarse, d, tol_svd, tol_spectral);

  // Knots must bracket the full fine horizon; one extra knot keeps the last
  // queried interval interior.
  const int last_fine = n + horizon - 1;
  const int k_end = (last_fine + stride - 1) / stride + 1;
  const Forecast tail =
      hodmd_forecast(model, k_end + 1 - n_coarse, growth_guard);

  std::vector<double> xs(k_end + 1), ys(k_end + 1);
  for (int k = 0; k <= k_end; ++k) {
    xs[k] = static_cast<double>(k) * stride;
    ys[k] = k < n_coarse ? coarse[k] : tail.values[k - n_coarse];
  }
  const CubicSpline spline(std::move(xs), std::move(ys));

  Forecast fc;
  fc.values = Eigen::VectorXd::Zero(horizon);
  for (int j = 0; j < horizon; ++j)
    fc.values[j] = spline(static_cast<double>(n + j));
  fc.growth_warning = tail.growth_warning;
  fc.max_eigen_modulus = tail.max_eigen_modulus;
  fc.max_imag = tail.max_imag;
  return fc;
}

void write_model_csv(std::ostream& os, const HodmdModel& model) {
  os << "re_mu,im_mu,abs_mu,re_a,im_a\n";
  os.precision(17);
  for (int i = 0; i < model.rank; ++i)
    os << model.eigenvalues[i].real() << ',' << model.eigenvalues[i].imag()
       << ',' << std::abs(model.eigenvalues[i]) << ','
       << model.amplitudes[i].real() << ',' << model.amplitudes[i].imag()
       << '\n';
}

}  // namespace mtpgd::forecast
