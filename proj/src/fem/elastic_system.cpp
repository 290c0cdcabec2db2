// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/fem/elastic_system.hpp"

#include <Eigen/IterativeLinearSolvers>

#include "mtpgd/common.hpp"
#include "mtpgd/fem/assembly.hpp"

namespace mtpgd::fem {

ElasticSystem::ElasticSystem(const Mesh& mesh, const Material& material,
                             bool iterative)
    : mesh_(&mesh), iterative_(iterative) {
  mesh.validate();
  bool any_fixed = false;
  for (const auto& d : mesh.dirichlet)
    any_fixed = any_fixed || d.fixed[0] || d.fixed[1];
  if (!any_fixed)
    throw RigidBodyError(
        "elastic system: no Dirichlet constraints, stiffness is singular");

  k_full_ = assemble_stiffness(mesh, material);

  const int n = mesh.n_dofs();
  std::vector<bool> constrained(n, false);
  lift_ = Eigen::VectorXd::Zero(n);
  for (const auto& d : mesh.dirichlet)
    for (int c = 0; c < 2; ++c)
      if (d.fixed[c]) {
        constrained[2 * d.node + c] = true;
        lift_[2 * d.node + c] = d.factor[c];
      }

  full_to_free_.assign(n, -1);
  for (int i = 0; i < n; ++i)
    if (!constrained[i]) {
      full_to_free_[i] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(i);
    }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(k_full_.nonZeros());
  for (int col = 0; col < k_full_.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(k_full_, col); it;
         ++it) {
      const int fr = full_to_free_[it.row()];
      const int fc = full_to_free_[it.col()];
      if (fr >= 0 && fc >= 0) trips.emplace_back(fr, fc, it.value());
    }
  k_ff_.resize(n_free(), n_free());
  k_ff_.setFromTriplets(trips.begin(), trips.end());

  k_lift_free_ = restrict_to_free(k_full_ * lift_);

  if (!iterative_) {
    llt_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(
        k_ff_);
    if (llt_->info() != Eigen::Success)
      throw NumericError("elastic system: Cholesky factorization failed");
  }
}

Eigen::VectorXd ElasticSystem::restrict_to_free(
    const Eigen::VectorXd& full) const {
  Eigen::VectorXd r(n_free());
  for (int i = 0; i < n_free(); ++i) r[i] = full[free_dofs_[i]];
  return r;
}

Eigen::VectorXd ElasticSystem::expand(const Eigen::VectorXd& free_part,
                                      double amplitude) const {
  Eigen::VectorXd full = amplitude * lift_;
  for (int i = 0; i < n_free(); ++i) full[free_dofs_[i]] = free_part[i];
  return full;
}

Eigen::VectorXd ElasticSystem::reduce_rhs(const Eigen::VectorXd& rhs,
                                          double amplitude) const {
  return restrict_to_free(rhs) - amplitude * k_lift_free_;
}

Eigen::VectorXd ElasticSystem::solve_reduced(
    const Eigen::VectorXd& rhs_f) const {
  if (iterative_) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        cg(k_ff_);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(10 * k_ff_.rows() + 100);
    Eigen::VectorXd x = cg.solve(rhs_f);
    if (cg.info() != Eigen::Success)
      throw NumericError("elastic system: CG did not converge");
    return x;
  }
  Eigen::VectorXd x = llt_->solve(rhs_f);
  if (llt_->info() != Eigen::Success)
    throw NumericError("elastic system: Cholesky solve failed");
  return x;
}

Eigen::VectorXd ElasticSystem::solve(const Eigen::VectorXd& rhs,
                                     double amplitude) const {
  return expand(solve_reduced(reduce_rhs(rhs, amplitude)), amplitude);
}

Eigen::VectorXd solve_elastic(const ElasticSystem& system,
                              const Eigen::VectorXd& rhs, double amplitude) {
  return system.solve(rhs, amplitude);
}

}  // namespace mtpgd::fem
