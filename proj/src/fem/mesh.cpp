// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/fem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mtpgd/common.hpp"
#include "quad_shape.hpp"

namespace mtpgd::fem {

void Mesh::validate() const {
  const int nn = n_nodes();
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& conn = elements[e];
    for (int a = 0; a < 4; ++a) {
      if (conn[a] < 0 || conn[a] >= nn)
        throw ShapeError("mesh: element " + std::to_string(e) +
                         " references node " + std::to_string(conn[a]));
      for (int b = a + 1; b < 4; ++b)
        if (conn[a] == conn[b])
          throw ShapeError("mesh: element " + std::to_string(e) +
                           " has repeated nodes");
    }
    Eigen::Matrix<double, 4, 2> xe;
    for (int a = 0; a < 4; ++a)
      xe.row(a) << nodes[conn[a]][0], nodes[conn[a]][1];
    for (int q = 0; q < 4; ++q) {
      const auto [xi, eta] = detail::gauss_point(q);
      if (detail::jacobian(xe, xi, eta).determinant() <= 0.0)
        throw GeometricError("mesh: non-positive Jacobian in element " +
                             std::to_string(e));
    }
  }
  for (const auto& d : dirichlet)
    if (d.node < 0 || d.node >= nn)
      throw ShapeError("mesh: dirichlet node out of range");
  for (const auto& ne : neumann) {
    if (ne.n0 < 0 || ne.n0 >= nn || ne.n1 < 0 || ne.n1 >= nn)
      throw ShapeError("mesh: neumann edge node out of range");
    // Dirichlet and Neumann must not overlap per component: an edge applying
    // a traction component on a node whose displacement component is
    // prescribed is a tagging error.
    for (const auto& d : dirichlet)
      for (int c = 0; c < 2; ++c)
        if (d.fixed[c] && ne.traction[c] != 0.0 &&
            (d.node == ne.n0 || d.node == ne.n1))
          throw GeometricError(
              "mesh: node " + std::to_string(d.node) +
              " is both Dirichlet-constrained and loaded by a traction in "
              "component " +
              std::to_string(c));
  }
}

namespace {

// Next non-comment, non-blank line; false at EOF.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void parse_fail(const std::string& path, int lineno,
                             const std::string& what) {
  throw IoError("mesh file " + path + ":" + std::to_string(lineno) + ": " +
                what);
}

}  // namespace

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  Mesh mesh;
  std::string line;
  int lineno = 0;
  while (next_line(in, line, lineno)) {
    std::istringstream hdr(line);
    std::string block;
    long count = 0;
    if (!(hdr >> block >> count) || count < 0)
      parse_fail(path, lineno, "expected '<block> <count>'");
    for (long i = 0; i < count; ++i) {
      if (!next_line(in, line, lineno))
        parse_fail(path, lineno, "unexpected end of file in block " + block);
      std::istringstream row(line);
      if (block == "nodes") {
        double x, y;
        if (!(row >> x >> y)) parse_fail(path, lineno, "bad node line");
        mesh.nodes.push_back({x, y});
      } else if (block == "elements") {
        std::array<int, 4> c{};
        if (!(row >> c[0] >> c[1] >> c[2] >> c[3]))
          parse_fail(path, lineno, "bad element line");
        mesh.elements.push_back(c);
      } else if (block == "dirichlet") {
        DirichletNode d;
        int mx, my;
        if (!(row >> d.node >> mx >> my >> d.factor[0] >> d.factor[1]))
          parse_fail(path, lineno, "bad dirichlet line");
        d.fixed = {mx != 0, my != 0};
        mesh.dirichlet.push_back(d);
      } else if (block == "neumann") {
        NeumannEdge ne;
        if (!(row >> ne.n0 >> ne.n1 >> ne.traction[0] >> ne.traction[1]))
          parse_fail(path, lineno, "bad neumann line");
        mesh.neumann.push_back(ne);
      } else {
        parse_fail(path, lineno, "unknown block '" + block + "'");
      }
    }
  }
  mesh.validate();
  return mesh;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file: " + path);
  out.precision(17);
  out << "nodes " << mesh.nodes.size() << "\n";
  for (const auto& n : mesh.nodes) out << n[0] << " " << n[1] << "\n";
  out << "elements " << mesh.elements.size() << "\n";
  for (const auto& e : mesh.elements)
    out << e[0] << " " << e[1] << " " << e[2] << " " << e[3] << "\n";
  if (!mesh.dirichlet.empty()) {
    out << "dirichlet " << mesh.dirichlet.size() << "\n";
    for (const auto& d : mesh.dirichlet)
      out << d.node << " " << (d.fixed[0] ? 1 : 0) << " "
          << (d.fixed[1] ? 1 : 0) << " " << d.factor[0] << " " << d.factor[1]
          << "\n";
  }
  if (!mesh.neumann.empty()) {
    out << "neumann " << mesh.neumann.size() << "\n";
    for (const auto& ne : mesh.neumann)
      out << ne.n0 << " " << ne.n1 << " " << ne.traction[0] << " "
          << ne.traction[1] << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

namespace {

// Structured nx-by-ny grid with node id j*(nx+1) + i and a caller-supplied
// coordinate map.
template <typename Coord>
Mesh structured_grid(int nx, int ny, Coord&& coord) {
  if (nx < 1 || ny < 1)
    throw ConfigError("mesh generator: nx and ny must be >= 1");
  Mesh mesh;
  mesh.nodes.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.nodes.push_back(coord(i, j));
  mesh.elements.reserve(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int n0 = j * (nx + 1) + i;
      mesh.elements.push_back(
          {n0, n0 + 1, n0 + nx + 2, n0 + nx + 1});  // counter-clockwise
    }
  return mesh;
}

}  // namespace

Mesh make_bar_mesh(double length, double height, int nx, int ny) {
  if (!(length > 0.0) || !(height > 0.0))
    throw ConfigError("mesh generator: bar dimensions must be positive");
  Mesh mesh = structured_grid(nx, ny, [&](int i, int j) {
    return std::array<double, 2>{length * i / nx,
                                 height * (double(j) / ny - 0.5)};
  });
  for (int j = 0; j <= ny; ++j) {
    const int left = j * (nx + 1);
    const int right = left + nx;
    DirichletNode dl;
    dl.node = left;
    dl.fixed[0] = true;  // u_x = 0
    if (j == 0) dl.fixed[1] = true;  // pin u_y once to remove rigid motion
    mesh.dirichlet.push_back(dl);
    DirichletNode dr;
    dr.node = right;
    dr.fixed[0] = true;
    dr.factor[0] = 1.0;  // u_x = u_D(t)
    mesh.dirichlet.push_back(dr);
  }
  mesh.validate();
  return mesh;
}

Mesh make_dogbone_mesh(double length, double end_height, double mid_height,
                       int nx, int ny) {
  if (!(length > 0.0) || !(end_height > 0.0) || !(mid_height > 0.0))
    throw ConfigError("mesh generator: dog-bone dimensions must be positive");
  if (mid_height > end_height)
    throw ConfigError("mesh generator: mid height must not exceed end height");
  if (ny % 2 != 0)
    throw ConfigError("mesh generator: dog-bone needs even ny (y = 0 nodes)");
  // Half-height profile: gauge section over the middle half, smoothstep
  // shoulders towards the ends.
  const auto half_height = [&](double x) {
    const double s = (std::abs(x) - 0.25 * length) / (0.25 * length);
    const double c = std::clamp(s, 0.0, 1.0);
    const double blend = c * c * (3.0 - 2.0 * c);
    return 0.5 * (mid_height + (end_height - mid_height) * blend);
  };
  Mesh mesh = structured_grid(nx, ny, [&](int i, int j) {
    const double x = length * (double(i) / nx - 0.5);
    const double y = half_height(x) * (2.0 * j / ny - 1.0);
    return std::array<double, 2>{x, y};
  });
  for (int j = 0; j <= ny; ++j) {
    const int left = j * (nx + 1);
    const int right = left + nx;
    DirichletNode dl;
    dl.node = left;
    dl.fixed[0] = true;
    dl.factor[0] = -1.0;  // pulled symmetrically on both sides
    if (j == ny / 2) dl.fixed[1] = true;
    mesh.dirichlet.push_back(dl);
    DirichletNode dr;
    dr.node = right;
    dr.fixed[0] = true;
    dr.factor[0] = 1.0;
    if (j == ny / 2) dr.fixed[1] = true;
    mesh.dirichlet.push_back(dr);
  }
  mesh.validate();
  return mesh;
}

}  // namespace mtpgd::fem
