// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

namespace mtpgd::fem {

// Dirichlet datum on a single node: per-component constrained flags and lift
// factors. The prescribed value at time t is factor * u_D(t), so factor = 0
// pins the component and factor = ±1 applies the load amplitude.
struct DirichletNode {
  int node = -1;
  std::array<bool, 2> fixed{false, false};
  std::array<double, 2> factor{0.0, 0.0};
};

// Boundary edge carrying a constant traction (N/mm per unit thickness).
struct NeumannEdge {
  int n0 = -1;
  int n1 = -1;
  std::array<double, 2> traction{0.0, 0.0};
};

// 2D bilinear quadrilateral mesh. Element connectivity is counter-clockwise;
// coordinates in mm. Two dofs per node, dof(n, c) = 2n + c.
struct Mesh {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 4>> elements;
  std::vector<DirichletNode> dirichlet;
  std::vector<NeumannEdge> neumann;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_dofs() const { return 2 * n_nodes(); }
  // 2x2 Gauss quadrature: 4 points per element, global index 4e + q.
  int n_gauss_points() const { return 4 * n_elements(); }

  // Throws ShapeError on bad connectivity, GeometricError on non-positive
  // Jacobians or overlapping Dirichlet/Neumann tagging.
  void validate() const;
};

// Plain-text mesh file:
//   nodes <count>      followed by "x y" lines
//   elements <count>   followed by four 0-based node ids per line
//   dirichlet <count>  followed by "node maskx masky factorx factory"
//   neumann <count>    followed by "n0 n1 tx ty"
// The dirichlet/neumann blocks are optional. '#' starts a comment.
Mesh read_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, const std::string& path);

// Rectangular bar on [0, L] x [-h/2, h/2], nx-by-ny elements. Left edge is
// held (u_x = 0, plus u_y = 0 at the lower-left corner); the right edge gets
// u_x = u_D(t) (factor 1).
Mesh make_bar_mesh(double length, double height, int nx, int ny);

// Dog-bone specimen centred at the origin: x in [-L/2, L/2], full end height
// h_end tapering smoothly to h_mid over the middle half of the length. Both
// ends are pulled symmetrically (u_x factors -1 / +1); the mid-height nodes
// of both ends pin u_y. ny must be even so those nodes exist on y = 0.
Mesh make_dogbone_mesh(double length, double end_height, double mid_height,
                       int nx, int ny);

}  // namespace mtpgd::fem
