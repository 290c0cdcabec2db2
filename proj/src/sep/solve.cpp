// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/sep/solve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtpgd/kernels/kernels.hpp"

namespace mtpgd::sep {

namespace {

bool normalize_signed(Eigen::VectorXd& v) {
  const double nrm = std::sqrt(kernels::nrm2sq(v.data(), v.size()));
  if (nrm == 0.0) return false;
  int imax = 0;
  double amax = -1.0;
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  v /= (v[imax] < 0.0) ? -nrm : nrm;
  return true;
}

double vdot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return kernels::dot(a.data(), b.data(), a.size());
}

// Separated residual norm: || sum_j F_j l_j - sum_k (K X_k) l_k || over the
// time grid, evaluated through Gram products of the triad factors.
double residual_norm(const std::vector<Triad>& rhs,
                     const std::vector<Eigen::VectorXd>& kx,
                     const SeparatedField& u) {
  const std::size_t n = rhs.size() + kx.size();
  std::vector<const Eigen::VectorXd*> sx(n), sm(n), sM(n);
  std::vector<double> sign(n);
  for (std::size_t j = 0; j < rhs.size(); ++j) {
    sx[j] = &rhs[j].x;
    sm[j] = &rhs[j].micro;
    sM[j] = &rhs[j].macro;
    sign[j] = 1.0;
  }
  for (std::size_t k = 0; k < kx.size(); ++k) {
    const std::size_t a = rhs.size() + k;
    sx[a] = &kx[k];
    sm[a] = &u.micro[k];
    sM[a] = &u.macro[k];
    sign[a] = -1.0;
  }
  double s = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      s += sign[a] * sign[b] * vdot(*sx[a], *sx[b]) * vdot(*sm[a], *sm[b]) *
           vdot(*sM[a], *sM[b]);
  return std::sqrt(std::max(0.0, s));
}

}  // namespace

SolveResult mtpgd_solve(const fem::ElasticSystem& system,
                        const std::vector<Triad>& rhs, const TimeGrid& grid,
                        const SolveOptions& options) {
  grid.validate();
  const int nf = system.n_free();
  for (const Triad& t : rhs) {
    if (t.x.size() != nf) throw ShapeError("mtpgd_solve: rhs spatial size");
    if (t.micro.size() != grid.n_micro || t.macro.size() != grid.n_macro)
      throw ShapeError("mtpgd_solve: rhs time factor size");
  }

  SolveResult result;
  result.u = SeparatedField(grid.n_micro, grid.n_macro);

  const std::vector<Eigen::VectorXd> no_kx;
  const double f_norm = residual_norm(rhs, no_kx, result.u);
  if (f_norm == 0.0) return result;

  // One stiffness solve per rhs term; everything else is scalar algebra.
  std::vector<Eigen::VectorXd> w(rhs.size());
  for (std::size_t j = 0; j < rhs.size(); ++j)
    w[j] = system.solve_reduced(rhs[j].x);

  // Largest-amplitude rhs term seeds the time factors of each enrichment.
  std::size_t j_seed = 0;
  double best_amp = -1.0;
  for (std::size_t j = 0; j < rhs.size(); ++j) {
    const double amp = std::sqrt(kernels::nrm2sq(rhs[j].x.data(), nf)) *
                       rhs[j].micro.norm() * rhs[j].macro.norm();
    if (amp > best_amp) {
      best_amp = amp;
      j_seed = j;
    }
  }

  std::vector<Eigen::VectorXd> kx;  // K * X_k per accepted mode
  Eigen::VectorXd X(nf), tau(grid.n_micro), T(grid.n_macro);
  Eigen::VectorXd X_prev(nf), tau_prev(grid.n_micro), T_prev(grid.n_macro);

  double res = 1.0;
  double prev_res = 1.0;
  int stalls = 0;
  while (result.u.rank() < options.max_rank) {
    tau = rhs[j_seed].micro;
    T = rhs[j_seed].macro;
    if (!normalize_signed(tau)) tau.setConstant(1.0 / std::sqrt(grid.n_micro));
    if (!normalize_signed(T)) T.setConstant(1.0 / std::sqrt(grid.n_macro));
    X_prev.setZero();
    tau_prev.setZero();
    T_prev.setZero();

    auto spatial_step = [&](Eigen::VectorXd& out) {
      out.setZero();
      for (std::size_t j = 0; j < rhs.size(); ++j) {
        const double cm = vdot(tau, rhs[j].micro) * vdot(T, rhs[j].macro);
        kernels::axpy(cm, w[j].data(), out.data(), nf);
      }
      for (int k = 0; k < result.u.rank(); ++k) {
        const double dm =
            vdot(tau, result.u.micro[k]) * vdot(T, result.u.macro[k]);
        kernels::axpy(-dm, result.u.spatial[k].data(), out.data(), nf);
      }
    };

    bool mode_dead = false;
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      spatial_step(X);
      if (X.norm() == 0.0 && sweep == 0) {
        // Seed happened to null the projection: restart from the aggregate
        // direction before giving up on this enrichment.
        X.setZero();
        for (std::size_t j = 0; j < rhs.size(); ++j)
          kernels::axpy(1.0, w[j].data(), X.data(), nf);
        for (int k = 0; k < result.u.rank(); ++k)
          kernels::axpy(-1.0, result.u.spatial[k].data(), X.data(), nf);
      }
      if (X.norm() == 0.0) {
        mode_dead = true;
        break;
      }

      const Eigen::VectorXd kxc = system.reduced_stiffness() * X;
      std::vector<double> fd(rhs.size()), ud(result.u.rank());
      for (std::size_t j = 0; j < rhs.size(); ++j) fd[j] = vdot(X, rhs[j].x);
      for (int k = 0; k < result.u.rank(); ++k) ud[k] = vdot(X, kx[k]);

      tau.setZero();
      for (std::size_t j = 0; j < rhs.size(); ++j)
        kernels::axpy(fd[j] * vdot(T, rhs[j].macro), rhs[j].micro.data(),
                      tau.data(), grid.n_micro);
      for (int k = 0; k < result.u.rank(); ++k)
        kernels::axpy(-ud[k] * vdot(T, result.u.macro[k]),
                      result.u.micro[k].data(), tau.data(), grid.n_micro);
      if (!normalize_signed(tau)) {
        mode_dead = true;
        break;
      }

      T.setZero();
      for (std::size_t j = 0; j < rhs.size(); ++j)
        kernels::axpy(fd[j] * vdot(tau, rhs[j].micro), rhs[j].macro.data(),
                      T.data(), grid.n_macro);
      for (int k = 0; k < result.u.rank(); ++k)
        kernels::axpy(-ud[k] * vdot(tau, result.u.micro[k]),
                      result.u.macro[k].data(), T.data(), grid.n_macro);
      if (!normalize_signed(T)) {
        mode_dead = true;
        break;
      }

      const double xn = std::max(X.norm(), 1e-300);
      const double delta =
          std::max({(X - X_prev).norm() / xn, (tau - tau_prev).norm(),
                    (T - T_prev).norm()});
      X_prev = X;
      tau_prev = tau;
      T_prev = T;
      if (delta < options.stagnation_tol) break;
    }

    if (!mode_dead) {
      spatial_step(X);  // amplitude consistent with the final time factors
      if (X.norm() == 0.0) mode_dead = true;
    }
    if (mode_dead) {
      if (res <= options.tol) break;
      throw ConvergenceError(
          "mtpgd_solve: enrichment collapsed at relative residual " +
              std::to_string(res),
          result.residual_history);
    }

    kx.push_back(system.reduced_stiffness() * X);
    if (!result.u.append_mode(X, tau, T)) {
      kx.pop_back();
      throw ConvergenceError("mtpgd_solve: degenerate enrichment",
                             result.residual_history);
    }

    res = residual_norm(rhs, kx, result.u) / f_norm;
    result.residual_history.push_back(res);
    if (res <= options.tol) break;

    if (res > prev_res * options.stall_ratio) {
      if (++stalls >= options.max_stalls)
        throw ConvergenceError(
            "mtpgd_solve: residual stalled at " + std::to_string(res) +
                " after " + std::to_string(result.u.rank()) + " modes",
            result.residual_history);
    } else {
      stalls = 0;
    }
    prev_res = res;
  }

  result.relative_residual = res;
  if (res > options.tol)
    throw ConvergenceError(
        "mtpgd_solve: rank budget exhausted at relative residual " +
            std::to_string(res),
        result.residual_history);
  return result;
}

}  // namespace mtpgd::sep
