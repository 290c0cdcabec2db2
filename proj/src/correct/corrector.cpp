// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/correct/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>

#include "mtpgd/kernels/kernels.hpp"

namespace mtpgd::correct {

namespace {

constexpr int kGaussPerElement = 4;

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

double weighted_sq_norm(const RowMatrix& m, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r)
    s += w[r] * kernels::nrm2sq(m.row(r), m.cols);
  return s;
}

}  // namespace

ReferenceSet select_reference_points(const fem::Mesh& mesh,
                                     const plast::PlasticState& state,
                                     int count,
                                     const std::vector<double>& fallback_metric) {
  const int ne = static_cast<int>(mesh.n_elements());
  if (count < 1 || count >= ne)
    throw ArgumentError("select_reference_points: count must satisfy 1 <= J < "
                        "n_elements, got " +
                        std::to_string(count));
  if (state.size() != static_cast<std::size_t>(mesh.n_gauss_points()))
    throw ShapeError("select_reference_points: state size mismatch");

  auto element_max = [&](const double* values) {
    std::vector<double> m(ne, 0.0);
    for (int e = 0; e < ne; ++e)
      for (int q = 0; q < kGaussPerElement; ++q)
        m[e] = std::max(m[e], std::abs(values[kGaussPerElement * e + q]));
    return m;
  };

  ReferenceSet set;
  std::vector<double> metric = element_max(state.ebar.data());
  if (*std::max_element(metric.begin(), metric.end()) == 0.0) {
    if (fallback_metric.size() !=
        static_cast<std::size_t>(mesh.n_gauss_points()))
      throw ArgumentError(
          "select_reference_points: plastic strain is identically zero and no "
          "elastic fallback metric was supplied");
    metric = element_max(fallback_metric.data());
    set.elastic_fallback = true;
  }

  std::vector<int> order(ne);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (metric[a] != metric[b]) return metric[a] > metric[b];
    return a < b;
  });
  set.elements.assign(order.begin(), order.begin() + count);
  for (int e : set.elements)
    for (int q = 0; q < kGaussPerElement; ++q)
      set.points.push_back(kGaussPerElement * e + q);
  return set;
}

Prediction predict_nonlinear(const sep::SeparatedField& base,
                             const std::vector<forecast::HodmdModel>& models,
                             int horizon, double growth_guard) {
  if (horizon <= 0) throw ArgumentError("predict_nonlinear: horizon <= 0");
  if (static_cast<int>(models.size()) != base.rank())
    throw ShapeError("predict_nonlinear: need one model per macro mode");
  Prediction out;
  out.field = sep::SeparatedField(base.n_micro, horizon);
  for (int k = 0; k < base.rank(); ++k) {
    if (models[k].train_length != base.n_macro)
      throw ShapeError("predict_nonlinear: model " + std::to_string(k) +
                       " was fit on a different macro window");
    forecast::Forecast fc =
        forecast::hodmd_forecast(models[k], horizon, growth_guard);
    out.growth_warning = out.growth_warning || fc.growth_warning;
    out.field.append_mode_raw(base.spatial[k], base.micro[k],
                              std::move(fc.values));
  }
  return out;
}

GalerkinSystem build_galerkin_system(const sep::SeparatedField& base_refs,
                                     const std::vector<double>& weights,
                                     const RowMatrix& truth_refs,
                                     const RowMatrix& predictor_refs,
                                     const sep::TimeGrid& grid) {
  const int m = base_refs.rank();
  const std::size_t nr = weights.size();
  if (base_refs.n_rows() != nr && m > 0)
    throw ShapeError("build_galerkin_system: weights/modes row mismatch");
  if (truth_refs.rows != nr || predictor_refs.rows != nr)
    throw ShapeError("build_galerkin_system: sampled field row mismatch");
  if (truth_refs.cols != static_cast<std::size_t>(grid.n_total()) ||
      predictor_refs.cols != truth_refs.cols)
    throw ShapeError("build_galerkin_system: sampled field column mismatch");
  if (base_refs.n_micro != grid.n_micro)
    throw ShapeError("build_galerkin_system: micro grid mismatch");

  GalerkinSystem sys;
  sys.dt_micro = grid.dt_micro();
  sys.a.resize(m, m);
  sys.b = Eigen::MatrixXd::Zero(m, grid.n_macro);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      double sx = 0.0;
      for (std::size_t r = 0; r < nr; ++r)
        sx += weights[r] * base_refs.spatial[k][r] * base_refs.spatial[l][r];
      sys.a(k, l) = sx * sys.dt_micro *
                    kernels::dot(base_refs.micro[k].data(),
                                 base_refs.micro[l].data(), grid.n_micro);
    }

  // b_k(T_J) = dt * sum_i (sum_r w_r X_k e(r,i,J)) tau_k(i),
  // e = predictor - truth.
  Eigen::VectorXd proj(grid.n_micro);
  for (int k = 0; k < m; ++k)
    for (int J = 0; J < grid.n_macro; ++J) {
      proj.setZero();
      for (std::size_t r = 0; r < nr; ++r) {
        const double wx = weights[r] * base_refs.spatial[k][r];
        const double* et = truth_refs.row(r);
        const double* ep = predictor_refs.row(r);
        const std::size_t off = static_cast<std::size_t>(J) * grid.n_micro;
        for (int i = 0; i < grid.n_micro; ++i)
          proj[i] += wx * (ep[off + i] - et[off + i]);
      }
      sys.b(k, J) = sys.dt_micro * kernels::dot(proj.data(),
                                                base_refs.micro[k].data(),
                                                grid.n_micro);
    }
  return sys;
}

CorrectionUpdate correct_update(const GalerkinSystem& system) {
  const int m = static_cast<int>(system.a.rows());
  CorrectionUpdate upd;
  upd.delta = Eigen::MatrixXd::Zero(m, system.b.cols());
  if (m == 0) return upd;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system.a);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(m - 1);
  upd.condition = smin > 0.0 ? smax / smin
                             : std::numeric_limits<double>::infinity();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(system.a);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  bool have_cod = false;
  // A couple of refinement passes keep the Galerkin residual near machine
  // precision even when the Gram matrix is poorly conditioned; the defect
  // check downstream compares it against the (small) corrected residual.
  const auto refine = [&](const auto& solver, const Eigen::VectorXd& rhs,
                          Eigen::VectorXd& x) {
    double best = (system.a * x - rhs).norm();
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd dx = solver.solve(rhs - system.a * x);
      if (!dx.allFinite()) break;
      const Eigen::VectorXd xn = x + dx;
      const double rn = (system.a * xn - rhs).norm();
      if (!(rn < best)) break;
      x = xn;
      best = rn;
    }
    return best;
  };
  for (int J = 0; J < system.b.cols(); ++J) {
    const Eigen::VectorXd rhs = system.b.col(J);
    Eigen::VectorXd x = ldlt.solve(rhs);
    double rel = refine(ldlt, rhs, x);
    const double bn = rhs.norm();
    if (bn > 0.0) rel /= bn;
    if (!(rel <= 1e-10)) {
      // Singular or ill-conditioned node: minimum-norm least squares.
      if (!have_cod) {
        cod.compute(system.a);
        have_cod = true;
      }
      x = cod.solve(rhs);
      upd.rank_deficient = true;
      rel = refine(cod, rhs, x);
      if (bn > 0.0) rel /= bn;
    }
    upd.delta.col(J) = x;
    if (std::isfinite(rel)) upd.max_rel_residual = std::max(upd.max_rel_residual, rel);
  }
  return upd;
}

sep::SeparatedField apply_update(const sep::SeparatedField& predictor,
                                 const Eigen::MatrixXd& delta) {
  if (delta.rows() != predictor.rank() || delta.cols() != predictor.n_macro)
    throw ShapeError("apply_update: delta shape mismatch");
  sep::SeparatedField out = predictor;
  for (int k = 0; k < out.rank(); ++k)
    out.macro[k] -= delta.row(k).transpose();
  return out;
}

EnrichmentResult correct_enrich(const RowMatrix& residual,
                                const std::vector<double>& weights,
                                const sep::TimeGrid& grid, double tol,
                                int max_extra_rank, double scale) {
  if (residual.rows != weights.size())
    throw ShapeError("correct_enrich: residual/weights row mismatch");
  if (residual.cols != static_cast<std::size_t>(grid.n_total()))
    throw ShapeError("correct_enrich: residual/grid column mismatch");
  if (scale <= 0.0) throw ArgumentError("correct_enrich: scale must be > 0");

  constexpr double kStagnationTol = 1e-8;
  constexpr int kMaxSweeps = 50;

  EnrichmentResult out;
  RowMatrix e = residual;
  const std::size_t nr = e.rows;
  const int nm = grid.n_micro;
  const int nM = grid.n_macro;

  double res = std::sqrt(weighted_sq_norm(e, weights)) / scale;
  out.relative_residual = res;
  while (res > tol && static_cast<int>(out.triads.size()) < max_extra_rank) {
    Eigen::VectorXd x(nr), tau(nm), T(nM);
    Eigen::VectorXd tau_prev(nm), T_prev(nM);
    tau.setConstant(1.0 / std::sqrt(static_cast<double>(nm)));
    T.setConstant(1.0 / std::sqrt(static_cast<double>(nM)));
    tau_prev.setZero();
    T_prev.setZero();
    Eigen::VectorXd x_prev = Eigen::VectorXd::Zero(nr);

    std::vector<double> lambda(e.cols), y(e.cols);
    bool settled = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      for (int J = 0; J < nM; ++J)
        for (int i = 0; i < nm; ++i)
          lambda[static_cast<std::size_t>(J) * nm + i] = tau[i] * T[J];
      for (std::size_t r = 0; r < nr; ++r)
        x[r] = kernels::dot(e.row(r), lambda.data(), e.cols);
      if (x.norm() == 0.0 && sweep == 0)
        for (std::size_t r = 0; r < nr; ++r)
          x[r] = std::sqrt(kernels::nrm2sq(e.row(r), e.cols));
      if (x.norm() == 0.0) break;  // nothing separable left

      // Weighted time updates: y = sum_r w_r x_r e(r,:).
      std::memset(y.data(), 0, y.size() * sizeof(double));
      for (std::size_t r = 0; r < nr; ++r)
        kernels::axpy(weights[r] * x[r], e.row(r), y.data(), e.cols);
      tau.setZero();
      for (int J = 0; J < nM; ++J)
        kernels::axpy(T[J], y.data() + static_cast<std::size_t>(J) * nm,
                      tau.data(), nm);
      if (!normalize_signed(tau)) break;
      for (int J = 0; J < nM; ++J)
        T[J] = kernels::dot(y.data() + static_cast<std::size_t>(J) * nm,
                            tau.data(), nm);
      if (!normalize_signed(T)) break;

      const double xn = std::max(x.norm(), 1e-300);
      const double delta = std::max({(x - x_prev).norm() / xn,
                                     (tau - tau_prev).norm(),
                                     (T - T_prev).norm()});
      x_prev = x;
      tau_prev = tau;
      T_prev = T;
      if (delta < kStagnationTol) {
        settled = true;
        break;
      }
    }
    if (!settled) out.stagnation = true;

    for (int J = 0; J < nM; ++J)
      for (int i = 0; i < nm; ++i)
        lambda[static_cast<std::size_t>(J) * nm + i] = tau[i] * T[J];
    for (std::size_t r = 0; r < nr; ++r)
      x[r] = kernels::dot(e.row(r), lambda.data(), e.cols);
    if (x.norm() == 0.0) break;

    for (std::size_t r = 0; r < nr; ++r)
      kernels::axpy(-x[r], lambda.data(), e.row(r), e.cols);
    const double next = std::sqrt(weighted_sq_norm(e, weights)) / scale;
    if (next >= res) {  // no progress: drop the triad and stop
      out.stagnation = true;
      break;
    }
    out.triads.push_back({std::move(x), tau, T});
    out.residual_history.push_back(next);
    res = next;
    out.relative_residual = res;
  }
  return out;
}

Eigen::VectorXd extend_spatial_mode(const Eigen::VectorXd& x_refs,
                                    const std::vector<int>& rows,
                                    std::size_t n_rows) {
  if (x_refs.size() != static_cast<Eigen::Index>(rows.size()))
    throw ShapeError("extend_spatial_mode: rows/values mismatch");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n_rows);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || static_cast<std::size_t>(rows[r]) >= n_rows)
      throw ArgumentError("extend_spatial_mode: row index out of range");
    full[rows[r]] = x_refs[r];
  }
  return full;
}

Eigen::VectorXd extend_spatial_mode_gappy(
    const Eigen::VectorXd& x_refs, const std::vector<int>& rows,
    const std::vector<double>& weights,
    const std::vector<Eigen::VectorXd>& basis) {
  if (basis.empty())
    throw ArgumentError("extend_spatial_mode_gappy: empty basis");
  if (x_refs.size() != static_cast<Eigen::Index>(rows.size()) ||
      weights.size() != rows.size())
    throw ShapeError("extend_spatial_mode_gappy: rows/values mismatch");
  const int nb = static_cast<int>(basis.size());
  Eigen::MatrixXd phi(rows.size(), nb);
  Eigen::VectorXd rhs(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double sw = std::sqrt(weights[r]);
    for (int k = 0; k < nb; ++k) phi(r, k) = sw * basis[k][rows[r]];
    rhs[r] = sw * x_refs[r];
  }
  const Eigen::VectorXd c =
      phi.completeOrthogonalDecomposition().solve(rhs);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(basis[0].size());
  for (int k = 0; k < nb; ++k) full += c[k] * basis[k];
  return full;
}

double prediction_error(const RowMatrix& candidate, const RowMatrix& truth,
                        const std::vector<double>& row_weights) {
  ErrorAccum acc;
  acc.add(candidate, truth, row_weights);
  return acc.value();
}

void ErrorAccum::add(const RowMatrix& candidate, const RowMatrix& truth,
                     const std::vector<double>& row_weights) {
  if (candidate.rows != truth.rows || candidate.cols != truth.cols)
    throw ShapeError("prediction_error: field shape mismatch");
  if (row_weights.size() != truth.rows)
    throw ShapeError("prediction_error: weights mismatch");
  for (std::size_t r = 0; r < truth.rows; ++r) {
    const double* c = candidate.row(r);
    const double* t = truth.row(r);
    double dn = 0.0;
    for (std::size_t j = 0; j < truth.cols; ++j) {
      const double d = c[j] - t[j];
      dn += d * d;
    }
    num2 += row_weights[r] * dn;
    den2 += row_weights[r] * kernels::nrm2sq(t, truth.cols);
  }
}

double ErrorAccum::value() const {
  if (den2 == 0.0)
    return num2 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num2 / den2);
}

double orthogonality_defect(const sep::SeparatedField& base_refs,
                            const std::vector<double>& weights,
                            const RowMatrix& residual,
                            const sep::TimeGrid& grid) {
  const int m = base_refs.rank();
  const std::size_t nr = weights.size();
  if (residual.rows != nr)
    throw ShapeError("orthogonality_defect: row mismatch");
  const double dt = grid.dt_micro();

  double defect = 0.0;
  Eigen::VectorXd proj(grid.n_micro);
  for (int k = 0; k < m; ++k) {
    double akk = 0.0;
    for (std::size_t r = 0; r < nr; ++r)
      akk += weights[r] * base_refs.spatial[k][r] * base_refs.spatial[k][r];
    akk *= dt * kernels::nrm2sq(base_refs.micro[k].data(), grid.n_micro);
    if (akk == 0.0) continue;
    for (int J = 0; J < grid.n_macro; ++J) {
      proj.setZero();
      double e_sq = 0.0;
      const std::size_t off = static_cast<std::size_t>(J) * grid.n_micro;
      for (std::size_t r = 0; r < nr; ++r) {
        const double* e = residual.row(r) + off;
        kernels::axpy(weights[r] * base_refs.spatial[k][r], e, proj.data(),
                      grid.n_micro);
        e_sq += weights[r] * kernels::nrm2sq(e, grid.n_micro);
      }
      e_sq *= dt;
      if (e_sq == 0.0) continue;
      const double bkj = dt * kernels::dot(proj.data(),
                                           base_refs.micro[k].data(),
                                           grid.n_micro);
      defect = std::max(defect,
                        std::abs(bkj) / (std::sqrt(akk) * std::sqrt(e_sq)));
    }
  }
  return defect;
}

}  // namespace mtpgd::correct
