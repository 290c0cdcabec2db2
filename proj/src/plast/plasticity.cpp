// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/plast/plasticity.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace mtpgd::plast {

PlasticState restrict_state(const PlasticState& full,
                            const std::vector<int>& points) {
  PlasticState s;
  s.resize_zero(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int p = points[i];
    if (p < 0 || static_cast<std::size_t>(p) >= full.size())
      throw ArgumentError("restrict_state: point index out of range");
    s.p11[i] = full.p11[p];
    s.p22[i] = full.p22[p];
    s.p33[i] = full.p33[p];
    s.p12[i] = full.p12[p];
    s.ebar[i] = full.ebar[p];
  }
  return s;
}

PointStress return_map_point(const PointStrain& eps_trial, PlasticState& state,
                             const fem::Material& material) {
  if (state.size() != 1)
    throw ArgumentError("return_map_point: state must hold exactly one point");
  if (!std::isfinite(eps_trial.e11) || !std::isfinite(eps_trial.e22) ||
      !std::isfinite(eps_trial.e12))
    throw NumericError("return_map_point: non-finite trial strain");
  material.validate();
  const auto c = kernels::PlasticConstants::from_material(
      material.young_modulus, material.poisson_ratio,
      material.yield_stress_initial, material.hardening_modulus);
  PointStress s;
  kernels::radial_return_batch(c, 1, &eps_trial.e11, &eps_trial.e22,
                               &eps_trial.e12, state.p11.data(),
                               state.p22.data(), state.p33.data(),
                               state.p12.data(), state.ebar.data(), &s.s11,
                               &s.s22, &s.s33, &s.s12);
  return s;
}

DenseStrainHistory::DenseStrainHistory(RowMatrix e11, RowMatrix e22,
                                       RowMatrix e12)
    : e11_(std::move(e11)), e22_(std::move(e22)), e12_(std::move(e12)) {
  if (e22_.rows != e11_.rows || e22_.cols != e11_.cols ||
      e12_.rows != e11_.rows || e12_.cols != e11_.cols)
    throw ShapeError("dense strain history: component shape mismatch");
}

void DenseStrainHistory::instant(std::size_t j, double* e11, double* e22,
                                 double* e12) const {
  std::memcpy(e11, e11_.row(j), e11_.cols * sizeof(double));
  std::memcpy(e22, e22_.row(j), e22_.cols * sizeof(double));
  std::memcpy(e12, e12_.row(j), e12_.cols * sizeof(double));
}

std::unique_ptr<StrainHistory> DenseStrainHistory::subset(
    const std::vector<int>& points) const {
  RowMatrix a(e11_.rows, points.size()), b(e11_.rows, points.size()),
      c(e11_.rows, points.size());
  for (std::size_t j = 0; j < e11_.rows; ++j)
    for (std::size_t k = 0; k < points.size(); ++k) {
      const int p = points[k];
      if (p < 0 || static_cast<std::size_t>(p) >= e11_.cols)
        throw ArgumentError("strain history subset: point out of range");
      a(j, k) = e11_(j, p);
      b(j, k) = e22_(j, p);
      c(j, k) = e12_(j, p);
    }
  return std::make_unique<DenseStrainHistory>(std::move(a), std::move(b),
                                              std::move(c));
}

SeparatedStrainHistory::SeparatedStrainHistory(std::vector<Mode> modes,
                                               int n_micro, int n_macro)
    : modes_(std::move(modes)), n_micro_(n_micro), n_macro_(n_macro) {
  if (n_micro_ <= 0 || n_macro_ <= 0)
    throw ShapeError("separated strain history: bad grid");
  if (!modes_.empty()) n_points_ = modes_[0].e11.size();
  for (const auto& m : modes_) {
    if (static_cast<std::size_t>(m.e11.size()) != n_points_ ||
        static_cast<std::size_t>(m.e22.size()) != n_points_ ||
        static_cast<std::size_t>(m.e12.size()) != n_points_)
      throw ShapeError("separated strain history: mode size mismatch");
    if (m.micro.size() != n_micro_ || m.macro.size() != n_macro_)
      throw ShapeError("separated strain history: time factor size mismatch");
  }
}

void SeparatedStrainHistory::instant(std::size_t j, double* e11, double* e22,
                                     double* e12) const {
  const int i = static_cast<int>(j % n_micro_);
  const int jm = static_cast<int>(j / n_micro_);
  std::memset(e11, 0, n_points_ * sizeof(double));
  std::memset(e22, 0, n_points_ * sizeof(double));
  std::memset(e12, 0, n_points_ * sizeof(double));
  for (const auto& m : modes_) {
    const double c = m.micro[i] * m.macro[jm];
    kernels::axpy(c, m.e11.data(), e11, n_points_);
    kernels::axpy(c, m.e22.data(), e22, n_points_);
    kernels::axpy(c, m.e12.data(), e12, n_points_);
  }
}

std::unique_ptr<StrainHistory> SeparatedStrainHistory::subset(
    const std::vector<int>& points) const {
  std::vector<Mode> sub;
  sub.reserve(modes_.size());
  for (const auto& m : modes_) {
    Mode s;
    s.micro = m.micro;
    s.macro = m.macro;
    s.e11.resize(points.size());
    s.e22.resize(points.size());
    s.e12.resize(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
      const int p = points[k];
      if (p < 0 || static_cast<std::size_t>(p) >= n_points_)
        throw ArgumentError("strain history subset: point out of range");
      s.e11[k] = m.e11[p];
      s.e22[k] = m.e22[p];
      s.e12[k] = m.e12[p];
    }
    sub.push_back(std::move(s));
  }
  auto out = std::make_unique<SeparatedStrainHistory>(std::move(sub), n_micro_,
                                                      n_macro_);
  out->n_points_ = points.size();  // also correct when the mode list is empty
  return out;
}

ConcatStrainHistory::ConcatStrainHistory(
    std::vector<std::shared_ptr<const StrainHistory>> parts)
    : parts_(std::move(parts)) {
  if (parts_.empty()) throw ShapeError("concat strain history: no parts");
  for (const auto& p : parts_)
    if (p->n_points() != parts_[0]->n_points())
      throw ShapeError("concat strain history: point count mismatch");
}

std::size_t ConcatStrainHistory::n_points() const {
  return parts_[0]->n_points();
}

std::size_t ConcatStrainHistory::n_instants() const {
  std::size_t n = 0;
  for (const auto& p : parts_) n += p->n_instants();
  return n;
}

void ConcatStrainHistory::instant(std::size_t j, double* e11, double* e22,
                                  double* e12) const {
  for (const auto& p : parts_) {
    if (j < p->n_instants()) {
      p->instant(j, e11, e22, e12);
      return;
    }
    j -= p->n_instants();
  }
  throw ArgumentError("concat strain history: instant out of range");
}

std::unique_ptr<StrainHistory> ConcatStrainHistory::subset(
    const std::vector<int>& points) const {
  std::vector<std::shared_ptr<const StrainHistory>> sub;
  sub.reserve(parts_.size());
  for (const auto& p : parts_) sub.emplace_back(p->subset(points));
  return std::make_unique<ConcatStrainHistory>(std::move(sub));
}

namespace {

void check_state_size(const PlasticState& s, std::size_t n) {
  if (s.size() != n)
    throw ShapeError("integrate_history: initial state size " +
                     std::to_string(s.size()) + " != point count " +
                     std::to_string(n));
}

}  // namespace

IntegrateResult integrate_history(const fem::Material& material,
                                  const StrainHistory& history,
                                  const PlasticState& initial) {
  material.validate();
  const std::size_t np = history.n_points();
  const std::size_t nt = history.n_instants();
  check_state_size(initial, np);
  const auto c = kernels::PlasticConstants::from_material(
      material.young_modulus, material.poisson_ratio,
      material.yield_stress_initial, material.hardening_modulus);

  IntegrateResult out;
  out.final_state = initial;
  out.snapshot.n_points = np;
  out.snapshot.m = RowMatrix(3 * np, nt);

  std::vector<double> e11(np), e22(np), e12(np);
  std::vector<double> s11(np), s22(np), s33(np), s12(np);
  PlasticState& st = out.final_state;
  for (std::size_t j = 0; j < nt; ++j) {
    history.instant(j, e11.data(), e22.data(), e12.data());
    kernels::radial_return_batch(c, np, e11.data(), e22.data(), e12.data(),
                                 st.p11.data(), st.p22.data(), st.p33.data(),
                                 st.p12.data(), st.ebar.data(), s11.data(),
                                 s22.data(), s33.data(), s12.data());
    out.call_count += np;
    // component order: 11, 12, 22
    for (std::size_t p = 0; p < np; ++p) {
      out.snapshot.m(p, j) = st.p11[p];
      out.snapshot.m(np + p, j) = st.p12[p];
      out.snapshot.m(2 * np + p, j) = st.p22[p];
    }
  }
  return out;
}

IntegrateResult integrate_history_sparse(const fem::Material& material,
                                         const StrainHistory& history,
                                         const PlasticState& initial_full,
                                         const std::vector<int>& points) {
  if (points.empty())
    throw ArgumentError("integrate_history_sparse: empty point set");
  check_state_size(initial_full, history.n_points());
  const auto sub_history = history.subset(points);
  const PlasticState sub_state = restrict_state(initial_full, points);
  return integrate_history(material, *sub_history, sub_state);
}

}  // namespace mtpgd::plast
