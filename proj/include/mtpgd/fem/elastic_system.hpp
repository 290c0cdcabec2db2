// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "mtpgd/fem/material.hpp"
#include "mtpgd/fem/mesh.hpp"

namespace mtpgd::fem {

// Constrained elastic problem: assembles the stiffness, eliminates Dirichlet
// dofs (row/column removal with lifting) and caches a sparse Cholesky
// factorization of the free-free block. Time dependence enters only through
// the scalar Dirichlet amplitude g(t): prescribed values are factor * g.
class ElasticSystem {
 public:
  // iterative = true swaps the direct factorization for conjugate gradients
  // (same interface; tolerance 1e-12).
  ElasticSystem(const Mesh& mesh, const Material& material,
                bool iterative = false);

  const Mesh& mesh() const { return *mesh_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return k_full_; }
  const Eigen::SparseMatrix<double>& reduced_stiffness() const { return k_ff_; }

  int n_free() const { return static_cast<int>(free_dofs_.size()); }
  const std::vector<int>& free_dofs() const { return free_dofs_; }

  // Unit-amplitude lift vector (full size): factor at constrained dofs, 0 at
  // free dofs; and K * lift restricted to the free dofs (the separated-load
  // spatial factor of the lifting term).
  const Eigen::VectorXd& lift() const { return lift_; }
  const Eigen::VectorXd& lift_force() const { return k_lift_free_; }

  Eigen::VectorXd restrict_to_free(const Eigen::VectorXd& full) const;
  // Free part + amplitude * lift at constrained dofs.
  Eigen::VectorXd expand(const Eigen::VectorXd& free_part,
                         double amplitude) const;

  // rhs_f = restrict(rhs) - amplitude * lift_force
  Eigen::VectorXd reduce_rhs(const Eigen::VectorXd& rhs,
                             double amplitude) const;
  // K_ff^{-1} rhs_f; throws NumericError if the solver fails.
  Eigen::VectorXd solve_reduced(const Eigen::VectorXd& rhs_f) const;

  // Full elastic solve: displacement with prescribed dofs set exactly.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double amplitude) const;

 private:
  const Mesh* mesh_;
  Eigen::SparseMatrix<double> k_full_;
  Eigen::SparseMatrix<double> k_ff_;
  std::vector<int> free_dofs_;          // free index -> full dof
  std::vector<int> full_to_free_;       // full dof -> free index or -1
  Eigen::VectorXd lift_;                // full size
  Eigen::VectorXd k_lift_free_;         // size n_free
  bool iterative_ = false;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

// Convenience wrapper matching the rest of the assembly API.
Eigen::VectorXd solve_elastic(const ElasticSystem& system,
                              const Eigen::VectorXd& rhs, double amplitude);

}  // namespace mtpgd::fem
