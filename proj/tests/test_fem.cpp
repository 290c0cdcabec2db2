// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "mtpgd/common.hpp"
#include "mtpgd/fem/assembly.hpp"
#include "mtpgd/fem/elastic_system.hpp"
#include "mtpgd/fem/load.hpp"
#include "mtpgd/fem/mesh.hpp"
#include "oracles.hpp"

using namespace mtpgd;
namespace fs = std::filesystem;

namespace {

const fem::Material kSteel{210000.0, 0.3, 205.0, 2000.0};

std::string temp_path(const char* name) {
  return (fs::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("bar mesh generator: counts, bounds, validation") {
  const fem::Mesh mesh = fem::make_bar_mesh(100.0, 20.0, 5, 2);
  CHECK(mesh.n_nodes() == 6 * 3);
  CHECK(mesh.n_elements() == 10);
  CHECK(mesh.n_gauss_points() == 40);
  CHECK_NOTHROW(mesh.validate());
  for (const auto& n : mesh.nodes) {
    CHECK(n[0] >= 0.0);
    CHECK(n[0] <= 100.0);
    CHECK(std::abs(n[1]) <= 10.0);
  }
  // One u_y pin plus u_x on both vertical edges.
  int fixed_x = 0, fixed_y = 0, loaded = 0;
  for (const auto& d : mesh.dirichlet) {
    fixed_x += d.fixed[0];
    fixed_y += d.fixed[1];
    loaded += d.factor[0] != 0.0;
  }
  CHECK(fixed_x == 6);
  CHECK(fixed_y == 1);
  CHECK(loaded == 3);

  CHECK_THROWS_AS(fem::make_bar_mesh(0.0, 20.0, 5, 2), ConfigError);
  CHECK_THROWS_AS(fem::make_bar_mesh(100.0, 20.0, 0, 2), ConfigError);
}

TEST_CASE("dog-bone generator: symmetric waist, even-ny requirement") {
  const fem::Mesh mesh = fem::make_dogbone_mesh(100.0, 20.0, 10.0, 8, 4);
  CHECK_NOTHROW(mesh.validate());
  double min_h = 1e30;
  for (const auto& n : mesh.nodes) min_h = std::min(min_h, 10.0 - n[1]);
  const auto w = fem::quadrature_weights(mesh);
  double area = 0.0;
  for (double x : w) area += x;
  CHECK(area < 100.0 * 20.0);
  CHECK(area > 100.0 * 10.0);
  CHECK_THROWS_AS(fem::make_dogbone_mesh(100.0, 20.0, 10.0, 8, 3),
                  ConfigError);
  CHECK_THROWS_AS(fem::make_dogbone_mesh(100.0, 10.0, 20.0, 8, 4),
                  ConfigError);
}

TEST_CASE("mesh validate flags bad connectivity and inverted elements") {
  fem::Mesh mesh = fem::make_bar_mesh(10.0, 2.0, 2, 1);
  fem::Mesh bad = mesh;
  bad.elements[0][2] = 999;
  CHECK_THROWS_AS(bad.validate(), ShapeError);
  bad = mesh;
  std::swap(bad.elements[0][1], bad.elements[0][3]);  // clockwise
  CHECK_THROWS_AS(bad.validate(), GeometricError);
  bad = mesh;
  bad.dirichlet.push_back({999, {true, false}, {0.0, 0.0}});
  CHECK_THROWS_AS(bad.validate(), ShapeError);
}

TEST_CASE("mesh file round-trip and parse errors") {
  fem::Mesh mesh = fem::make_bar_mesh(25.0, 5.0, 3, 2);
  // Top-edge segment away from the constrained left/right columns.
  mesh.neumann.push_back({9, 10, {0.0, -2.5}});
  const std::string path = temp_path("mtpgd_mesh_roundtrip.txt");
  fem::write_mesh(mesh, path);
  const fem::Mesh back = fem::read_mesh(path);
  REQUIRE(back.n_nodes() == mesh.n_nodes());
  REQUIRE(back.n_elements() == mesh.n_elements());
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    CHECK(back.nodes[n][0] == mesh.nodes[n][0]);
    CHECK(back.nodes[n][1] == mesh.nodes[n][1]);
  }
  for (int e = 0; e < mesh.n_elements(); ++e)
    CHECK(back.elements[e] == mesh.elements[e]);
  REQUIRE(back.dirichlet.size() == mesh.dirichlet.size());
  for (std::size_t i = 0; i < mesh.dirichlet.size(); ++i) {
    CHECK(back.dirichlet[i].node == mesh.dirichlet[i].node);
    CHECK(back.dirichlet[i].fixed == mesh.dirichlet[i].fixed);
    CHECK(back.dirichlet[i].factor == mesh.dirichlet[i].factor);
  }
  REQUIRE(back.neumann.size() == 1);
  CHECK(back.neumann[0].traction[1] == -2.5);
  fs::remove(path);

  CHECK_THROWS_AS(fem::read_mesh(temp_path("mtpgd_no_such_mesh.txt")),
                  IoError);
  const std::string bad = temp_path("mtpgd_bad_mesh.txt");
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("nodes 2\n0 0\nnot-a-number 1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(fem::read_mesh(bad), IoError);
  fs::remove(bad);
}

TEST_CASE("stiffness is exactly symmetric and vanishes on rigid motions") {
  const fem::Mesh mesh = fem::make_bar_mesh(40.0, 10.0, 4, 2);
  const Eigen::SparseMatrix<double> k = fem::assemble_stiffness(mesh, kSteel);
  const Eigen::MatrixXd kd(k);
  CHECK((kd - kd.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // Translations and the linearized rotation are in the kernel of the raw
  // (unconstrained) stiffness.
  Eigen::VectorXd tx = Eigen::VectorXd::Zero(mesh.n_dofs());
  Eigen::VectorXd ty = Eigen::VectorXd::Zero(mesh.n_dofs());
  Eigen::VectorXd rot = Eigen::VectorXd::Zero(mesh.n_dofs());
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    tx[2 * n] = 1.0;
    ty[2 * n + 1] = 1.0;
    rot[2 * n] = -mesh.nodes[n][1];
    rot[2 * n + 1] = mesh.nodes[n][0];
  }
  const double scale = kd.cwiseAbs().maxCoeff();
  CHECK((kd * tx).cwiseAbs().maxCoeff() < 1e-12 * scale);
  CHECK((kd * ty).cwiseAbs().maxCoeff() < 1e-12 * scale);
  CHECK((kd * rot).cwiseAbs().maxCoeff() < 1e-10 * scale);
}

TEST_CASE("patch test: linear fields give exact constant strain") {
  const fem::Mesh mesh = fem::make_bar_mesh(7.0, 3.0, 3, 2);
  // u = (a + b x + c y, d + e x + f y)
  const double a = 0.1, b = 2e-3, c = -1e-3, d = -0.2, e = 5e-4, f = 3e-3;
  Eigen::VectorXd u(mesh.n_dofs());
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const double x = mesh.nodes[n][0], y = mesh.nodes[n][1];
    u[2 * n] = a + b * x + c * y;
    u[2 * n + 1] = d + e * x + f * y;
  }
  const fem::StrainField s = fem::evaluate_strain(mesh, u);
  REQUIRE(s.size() == static_cast<std::size_t>(mesh.n_gauss_points()));
  for (std::size_t q = 0; q < s.size(); ++q) {
    CHECK(s.e11[q] == doctest::Approx(b).epsilon(1e-12));
    CHECK(s.e22[q] == doctest::Approx(f).epsilon(1e-12));
    CHECK(s.g12[q] == doctest::Approx(c + e).epsilon(1e-12));
  }
}

TEST_CASE("uniaxial bar reproduces the closed-form plane-strain state") {
  const double length = 50.0, height = 10.0, amp = 0.05;
  const fem::Mesh mesh = fem::make_bar_mesh(length, height, 10, 2);
  const fem::ElasticSystem sys(mesh, kSteel);
  const Eigen::VectorXd u =
      sys.solve(Eigen::VectorXd::Zero(mesh.n_dofs()), amp);

  const double e11 = amp / length;
  const double nu = kSteel.poisson_ratio;
  const double e22 = -nu / (1.0 - nu) * e11;  // sigma22 = 0 on free edges
  const fem::StrainField s = fem::evaluate_strain(mesh, u);
  for (std::size_t q = 0; q < s.size(); ++q) {
    CHECK(s.e11[q] == doctest::Approx(e11).epsilon(1e-9));
    CHECK(s.e22[q] == doctest::Approx(e22).epsilon(1e-9));
    CHECK(s.g12[q] == doctest::Approx(0.0).scale(e11).epsilon(1e-9));
  }

  // sigma11 from the plane-strain law, sigma33 = nu * sigma11.
  const double sig11 =
      kSteel.young_modulus / ((1.0 + nu) * (1.0 - 2.0 * nu)) *
      ((1.0 - nu) * e11 + nu * e22);
  const std::vector<double> vm = fem::von_mises_stress(mesh, kSteel, u);
  const double q_expect = oracle::vm_q(sig11, 0.0, nu * sig11, 0.0);
  for (double v : vm) CHECK(v == doctest::Approx(q_expect).epsilon(1e-8));
}

TEST_CASE("elastic system: lift, restriction, residual, CG parity") {
  const fem::Mesh mesh = fem::make_bar_mesh(30.0, 12.0, 5, 3);
  const fem::ElasticSystem sys(mesh, kSteel);

  // lift carries the Dirichlet factors and vanishes on free dofs.
  for (const auto& d : mesh.dirichlet)
    for (int c = 0; c < 2; ++c)
      if (d.fixed[c]) CHECK(sys.lift()[2 * d.node + c] == d.factor[c]);
  CHECK(sys.restrict_to_free(sys.lift()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sys.n_free() + static_cast<int>(mesh.dirichlet.size()) >=
        mesh.n_dofs() / 2);  // sanity: most dofs are free

  std::mt19937 rng(42);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd rhs(mesh.n_dofs());
  for (int i = 0; i < rhs.size(); ++i) rhs[i] = g(rng);

  const double amp = 0.3;
  const Eigen::VectorXd u = sys.solve(rhs, amp);
  // Prescribed values are exact; free-dof equilibrium holds.
  for (const auto& d : mesh.dirichlet)
    for (int c = 0; c < 2; ++c)
      if (d.fixed[c]) CHECK(u[2 * d.node + c] == amp * d.factor[c]);
  const Eigen::VectorXd res =
      sys.restrict_to_free(sys.stiffness() * u - rhs);
  CHECK(res.cwiseAbs().maxCoeff() < 1e-8);

  const fem::ElasticSystem cg(mesh, kSteel, true);
  const Eigen::VectorXd u2 = cg.solve(rhs, amp);
  CHECK((u2 - u).cwiseAbs().maxCoeff() < 1e-7 * u.cwiseAbs().maxCoeff());

  // expand/restrict round trip.
  Eigen::VectorXd free_part(sys.n_free());
  for (int i = 0; i < free_part.size(); ++i) free_part[i] = g(rng);
  CHECK(sys.restrict_to_free(sys.expand(free_part, amp)) == free_part);
}

TEST_CASE("a fully unconstrained mesh raises RigidBodyError") {
  fem::Mesh mesh = fem::make_bar_mesh(10.0, 5.0, 2, 1);
  mesh.dirichlet.clear();
  CHECK_THROWS_AS(fem::ElasticSystem(mesh, kSteel), RigidBodyError);
}

TEST_CASE("plastic force satisfies the virtual-work identity") {
  const fem::Mesh mesh = fem::make_bar_mesh(20.0, 8.0, 4, 2);
  const std::size_t np = mesh.n_gauss_points();
  std::mt19937 rng(7);
  std::normal_distribution<double> g(0.0, 1e-3);
  std::vector<double> p11(np), p22(np), p12(np);
  for (std::size_t q = 0; q < np; ++q) {
    p11[q] = g(rng);
    p22[q] = g(rng);
    p12[q] = g(rng);
  }
  const Eigen::VectorXd f =
      fem::assemble_plastic_force(mesh, kSteel, p11, p22, p12);

  const std::vector<double> w = fem::quadrature_weights(mesh);
  const double two_g = 2.0 * kSteel.shear_modulus();
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd v(mesh.n_dofs());
    for (int i = 0; i < v.size(); ++i) v[i] = g(rng) * 1e3;
    const fem::StrainField s = fem::evaluate_strain(mesh, v);
    double work = 0.0;
    for (std::size_t q = 0; q < np; ++q)
      work += w[q] * two_g *
              (s.e11[q] * p11[q] + s.e22[q] * p22[q] + s.g12[q] * p12[q]);
    CHECK(v.dot(f) == doctest::Approx(work).epsilon(1e-10));
  }

  std::vector<double> short_p(np - 1);
  CHECK_THROWS_AS(
      fem::assemble_plastic_force(mesh, kSteel, short_p, p22, p12),
      ShapeError);
}

TEST_CASE("traction and body-force resultants") {
  fem::Mesh mesh = fem::make_bar_mesh(10.0, 4.0, 5, 2);
  // Constant downward traction on the full top edge (y = +2).
  for (int i = 0; i < 5; ++i) {
    const int n0 = 2 * 6 + i, n1 = 2 * 6 + i + 1;  // top row nodes
    CHECK(mesh.nodes[n0][1] == doctest::Approx(2.0));
    mesh.neumann.push_back({n0, n1, {0.0, -3.0}});
  }
  CHECK_NOTHROW(mesh.validate());
  const Eigen::VectorXd ft = fem::assemble_traction(mesh);
  double fy = 0.0;
  for (int n = 0; n < mesh.n_nodes(); ++n) fy += ft[2 * n + 1];
  CHECK(fy == doctest::Approx(-3.0 * 10.0).epsilon(1e-12));

  const Eigen::VectorXd fb = fem::assemble_body_force(mesh, 0.0, -9.0);
  double fby = 0.0;
  for (int n = 0; n < mesh.n_nodes(); ++n) fby += fb[2 * n + 1];
  CHECK(fby == doctest::Approx(-9.0 * 40.0).epsilon(1e-12));
}

TEST_CASE("gauss point data: weights sum to the area, points inside") {
  const fem::Mesh mesh = fem::make_bar_mesh(12.0, 6.0, 3, 2);
  const auto w = fem::quadrature_weights(mesh);
  REQUIRE(w.size() == static_cast<std::size_t>(mesh.n_gauss_points()));
  double area = 0.0;
  for (double x : w) {
    CHECK(x > 0.0);
    area += x;
  }
  CHECK(area == doctest::Approx(72.0).epsilon(1e-12));
  const auto pts = fem::gauss_point_coordinates(mesh);
  REQUIRE(pts.size() == w.size());
  for (const auto& p : pts) {
    CHECK(p[0] > 0.0);
    CHECK(p[0] < 12.0);
    CHECK(std::abs(p[1]) < 3.0);
  }
}

TEST_CASE("load program: waveform shape and separated identity") {
  fem::LoadProgram load{0.18, 1.0, 20, 0.002};
  CHECK_NOTHROW(load.validate());
  CHECK(fem::LoadProgram::unit_waveform(0.0) == 0.0);
  CHECK(fem::LoadProgram::unit_waveform(0.25) == doctest::Approx(1.0));
  CHECK(fem::LoadProgram::unit_waveform(0.5) == doctest::Approx(0.0));
  CHECK(fem::LoadProgram::unit_waveform(0.75) == doctest::Approx(-1.0));
  CHECK(fem::LoadProgram::unit_waveform(1.0) == doctest::Approx(0.0));

  const sep::TimeGrid grid{25, 6, 1.0, 0.0};
  const auto parts = load.separated_parts(grid);
  REQUIRE(!parts.empty());
  REQUIRE(parts.size() <= 3);
  for (int jm = 0; jm < grid.n_macro; ++jm) {
    for (int i = 0; i < grid.n_micro; ++i) {
      double sum = 0.0;
      for (const auto& part : parts) sum += part.first[i] * part.second[jm];
      CHECK(sum == load.value_at(grid, i, jm));  // bit-exact by contract
      CHECK(load.value_at(grid, i, jm) ==
            doctest::Approx(load.value(grid.time_at(i, jm))).epsilon(1e-12));
    }
  }

  fem::LoadProgram bad = load;
  bad.cycle_duration = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = load;
  bad.cycle_count = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
