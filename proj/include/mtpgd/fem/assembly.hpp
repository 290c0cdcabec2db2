// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <span>
#include <vector>

#include "mtpgd/fem/material.hpp"
#include "mtpgd/fem/mesh.hpp"

namespace mtpgd::fem {

// Per-Gauss-point strain in engineering Voigt components (e11, e22,
// gamma12 = 2*e12), one entry per global Gauss point (4 per element, index
// 4e + q; q enumerates (xi, eta) = (-g,-g), (+g,-g), (-g,+g), (+g,+g)).
struct StrainField {
  std::vector<double> e11, e22, g12;
  std::size_t size() const { return e11.size(); }
  void resize(std::size_t n) {
    e11.assign(n, 0.0);
    e22.assign(n, 0.0);
    g12.assign(n, 0.0);
  }
};

// Raw (unconstrained) plane-strain stiffness, 2x2 Gauss quadrature. The
// matrix is exactly symmetric; Dirichlet elimination happens in
// ElasticSystem. Throws GeometricError on singular element Jacobians.
Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh,
                                               const Material& material);

// Nodal force vector of the plastic term, ∫ ε(v) : C : ε^p dx. The input
// carries the in-plane tensor components (p12 is the tensor shear); the
// out-of-plane component is completed deviatorically, p33 = -(p11 + p22),
// so C : ε^p reduces to 2G ε^p in-plane. Throws ShapeError when the spans
// do not match the mesh quadrature layout.
Eigen::VectorXd assemble_plastic_force(const Mesh& mesh,
                                       const Material& material,
                                       std::span<const double> p11,
                                       std::span<const double> p22,
                                       std::span<const double> p12);

// Nodal forces of the Neumann tractions stored on the mesh (constant per
// edge) and of a constant body force (N/mm^3 per unit thickness).
Eigen::VectorXd assemble_traction(const Mesh& mesh);
Eigen::VectorXd assemble_body_force(const Mesh& mesh, double fx, double fy);

// Strain at every Gauss point from a nodal displacement vector.
StrainField evaluate_strain(const Mesh& mesh, const Eigen::VectorXd& u);

// Integration weight w_g = detJ * gauss weight per global Gauss point; used
// for all spatial L2 inner products on Gauss-point fields.
std::vector<double> quadrature_weights(const Mesh& mesh);

// Gauss-point centroid coordinates (diagnostics, point selection exports).
std::vector<std::array<double, 2>> gauss_point_coordinates(const Mesh& mesh);

// Elastic von Mises stress per Gauss point for a nodal displacement
// (plane strain: sigma33 = nu * (sigma11 + sigma22)).
std::vector<double> von_mises_stress(const Mesh& mesh, const Material& material,
                                     const Eigen::VectorXd& u);

}  // namespace mtpgd::fem
