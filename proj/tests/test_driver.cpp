// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mtpgd/common.hpp"
#include "mtpgd/driver/config.hpp"
#include "mtpgd/driver/driver.hpp"
#include "mtpgd/driver/report.hpp"
#include "mtpgd/fem/mesh.hpp"
#include "mtpgd/sep/field_io.hpp"

using namespace mtpgd;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config_text(const driver::RunConfig& cfg) {
  std::ostringstream os;
  driver::write_config(os, cfg);
  return os.str();
}

// Small bar used by the solver-level tests: 4 elements, 16 Gauss points.
driver::RunConfig small_config() {
  driver::RunConfig cfg;
  cfg.mesh_length = 10.0;
  cfg.mesh_height = 2.0;
  cfg.mesh_nx = 4;
  cfg.mesh_ny = 1;
  cfg.amplitude = 0.015;  // peak strain 1.5e-3, past first yield
  cfg.n_micro = 12;
  cfg.training_cycles = 6;
  cfg.target_cycles = 10;
  cfg.hodmd_d = 2;
  cfg.reference_elements = 2;
  return cfg;
}

bool same_field(const sep::SeparatedField& a, const sep::SeparatedField& b) {
  if (a.rank() != b.rank() || a.n_micro != b.n_micro ||
      a.n_macro != b.n_macro)
    return false;
  for (int k = 0; k < a.rank(); ++k)
    if (a.spatial[k] != b.spatial[k] || a.micro[k] != b.micro[k] ||
        a.macro[k] != b.macro[k])
      return false;
  return true;
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(MTPGD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config files round-trip every key") {
  driver::RunConfig cfg;
  cfg.mesh_file = "custom.mesh";
  cfg.mesh_kind = "dogbone";
  cfg.mesh_length = 80.0;
  cfg.mesh_height = 24.0;
  cfg.mesh_mid_height = 12.0;
  cfg.mesh_nx = 18;
  cfg.mesh_ny = 4;
  cfg.material = {70000.0, 0.33, 95.0, 1200.0};
  cfg.amplitude = 0.27;
  cfg.cycle_duration = 2.5;
  cfg.drift_slope = 0.003;
  cfg.n_micro = 64;
  cfg.training_cycles = 11;
  cfg.target_cycles = 31;
  cfg.decompose_tol = 2e-7;
  cfg.decompose_max_rank = 17;
  cfg.solve_tol = 3e-7;
  cfg.horizon_solve_tol = 2e-5;
  cfg.solve_max_rank = 19;
  cfg.stagnation_tol = 1e-9;
  cfg.max_sweeps = 41;
  cfg.outer_tol = 2e-4;
  cfg.max_outer = 13;
  cfg.hodmd_d = 3;
  cfg.hodmd_tol_svd = 1e-9;
  cfg.hodmd_tol_spectral = 1e-7;
  cfg.growth_guard = 0.08;
  cfg.hodmd_resample_stride = 4;
  cfg.reference_elements = 6;
  cfg.correction_tol = 2e-6;
  cfg.max_extra_rank = 7;
  cfg.correction_extension = "gappy";
  cfg.output_dir = "out/dir";
  cfg.seed = 777;

  const fs::path dir = fresh_dir("mtpgd_test_cfg");
  const std::string path = (dir / "run.cfg").string();
  driver::save_config(path, cfg);
  const driver::RunConfig back = driver::load_config(path);
  CHECK(config_text(back) == config_text(cfg));

  SUBCASE("missing files and malformed lines are reported") {
    CHECK_THROWS_AS(driver::load_config((dir / "nope.cfg").string()),
                    IoError);
    std::ofstream((dir / "bad.cfg").string())
        << "amplitude = 0.1\nthis line has no equals sign\n";
    CHECK_THROWS_AS(driver::load_config((dir / "bad.cfg").string()),
                    ConfigError);
    std::ofstream((dir / "bad2.cfg").string()) << "amplitude = not-a-number\n";
    CHECK_THROWS_AS(driver::load_config((dir / "bad2.cfg").string()),
                    ConfigError);
  }
}

TEST_CASE("config overrides and validation") {
  driver::RunConfig cfg;
  driver::apply_override(cfg, "amplitude", "0.25");
  CHECK(cfg.amplitude == 0.25);
  driver::apply_override(cfg, "mesh_kind", "dogbone");
  CHECK(cfg.mesh_kind == "dogbone");
  driver::apply_override(cfg, "training_cycles", "7");
  CHECK(cfg.training_cycles == 7);
  driver::apply_override(cfg, "seed", "42");
  CHECK(cfg.seed == 42u);

  CHECK_THROWS_AS(driver::apply_override(cfg, "no_such_key", "1"),
                  ConfigError);
  CHECK_THROWS_AS(driver::apply_override(cfg, "n_micro", "lots"),
                  ConfigError);

  SUBCASE("validate rejects inconsistent settings") {
    driver::RunConfig bad;
    bad.target_cycles = bad.training_cycles;  // no forecast window
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    driver::RunConfig stride;
    stride.hodmd_resample_stride = 1;  // 0 = off, otherwise >= 2
    CHECK_THROWS_AS(stride.validate(), ConfigError);

    driver::RunConfig kind;
    kind.mesh_kind = "triangle";
    CHECK_THROWS_AS(kind.validate(), ConfigError);

    driver::RunConfig micro;
    micro.n_micro = 0;
    CHECK_THROWS_AS(micro.validate(), ConfigError);

    driver::RunConfig ok;
    CHECK_NOTHROW(ok.validate());
  }
}

TEST_CASE("run reports round-trip and compare ignoring wall clock") {
  driver::RunReport rep;
  rep.method = "reference";
  rep.cycles = 12;
  rep.n_points = 56;
  rep.outer_iterations = 3;
  rep.outer_residuals = {0.5, 2e-3, 4e-5};
  rep.integration_calls = {1000, 1000, 1000, 1000};
  rep.sparse_calls = 0;
  rep.total_calls = 4000;
  rep.rank_base = {3, 2, 3};
  rep.rank_corrected = {4, 2, 3};
  rep.displacement_rank = 6;
  rep.equilibrium_residual = 3.2e-7;
  rep.error_refs_before = 0.12;
  rep.error_refs_after = 0.013;
  rep.orthogonality_defect = 2.5e-12;
  rep.growth_warning = true;
  rep.elastic_fallback = false;
  rep.enrich_stagnation = true;
  rep.rank_deficient_update = false;
  rep.reference_elements = {7, 2, 11};
  rep.phase_seconds = {{"setup", 0.01}, {"total", 1.5}};

  const fs::path dir = fresh_dir("mtpgd_test_report");
  const std::string path = (dir / "report.csv").string();
  driver::save_report(path, rep);
  const driver::RunReport back = driver::load_report(path);
  CHECK(back.same_results(rep));
  CHECK(back.method == rep.method);
  CHECK(back.outer_residuals == rep.outer_residuals);
  CHECK(back.integration_calls == rep.integration_calls);
  CHECK(back.reference_elements == rep.reference_elements);
  CHECK(back.growth_warning);
  CHECK(back.enrich_stagnation);

  driver::RunReport timed = rep;
  timed.phase_seconds = {{"setup", 99.0}};
  CHECK(timed.same_results(rep));  // timings are not results

  driver::RunReport other = rep;
  other.total_calls += 1;
  CHECK_FALSE(other.same_results(rep));

  CHECK_THROWS_AS(driver::load_report((dir / "nope.csv").string()), IoError);
}

TEST_CASE("make_mesh honours generator parameters and mesh files") {
  driver::RunConfig cfg = small_config();
  const fem::Mesh bar = driver::make_mesh(cfg);
  CHECK(bar.n_elements() == 4);
  CHECK(bar.n_nodes() == 10);

  driver::RunConfig dog = cfg;
  dog.mesh_kind = "dogbone";
  dog.mesh_mid_height = 1.0;
  dog.mesh_nx = 2;
  dog.mesh_ny = 2;  // the dog-bone generator needs a mid-height node row
  CHECK(driver::make_mesh(dog).n_elements() == 4);

  const fs::path dir = fresh_dir("mtpgd_test_mesh");
  const std::string path = (dir / "bar.mesh").string();
  fem::write_mesh(bar, path);
  driver::RunConfig from_file;
  from_file.mesh_file = path;
  const fem::Mesh back = driver::make_mesh(from_file);
  CHECK(back.n_nodes() == bar.n_nodes());
  CHECK(back.n_elements() == bar.n_elements());
}

TEST_CASE("an elastic loading program converges in one outer iteration") {
  driver::RunConfig cfg = small_config();
  cfg.amplitude = 0.004;  // peak strain 4e-4, well below first yield
  cfg.n_micro = 8;
  cfg.training_cycles = 3;

  const driver::ReferenceRun run = driver::run_reference(cfg);
  CHECK(run.report.method == "reference");
  CHECK(run.report.cycles == 3);
  CHECK(run.report.n_points == 16);
  CHECK(run.report.outer_iterations == 1);
  REQUIRE(run.report.outer_residuals.size() == 1);
  CHECK(run.report.outer_residuals[0] < cfg.outer_tol);

  // One integration pass per outer iteration plus the final consistency
  // pass, each touching every Gauss point at every instant.
  const std::uint64_t per_pass = 16ull * 8ull * 3ull;
  REQUIRE(run.report.integration_calls.size() == 2);
  CHECK(run.report.integration_calls[0] == per_pass);
  CHECK(run.report.integration_calls[1] == per_pass);
  CHECK(run.report.total_calls == 2 * per_pass);

  // No plastic flow anywhere.
  double max_abs = 0.0;
  for (double v : run.plastic.m.data) max_abs = std::max(max_abs, std::abs(v));
  CHECK(max_abs == 0.0);
  for (double e : run.state.ebar) CHECK(e == 0.0);

  CHECK(run.report.equilibrium_residual <= cfg.solve_tol);
  CHECK(run.displacement.rank() >= 1);
}

TEST_CASE("reference runs are deterministic") {
  driver::RunConfig cfg = small_config();
  cfg.training_cycles = 3;
  cfg.target_cycles = 5;

  const driver::ReferenceRun a = driver::run_reference(cfg);
  const driver::ReferenceRun b = driver::run_reference(cfg);
  CHECK(a.report.same_results(b.report));
  CHECK(same_field(a.displacement, b.displacement));
  CHECK(a.plastic.m.data == b.plastic.m.data);
  CHECK(a.state.ebar == b.state.ebar);

  // The cyclic load drives the bar past yield, so the run is genuinely
  // elasto-plastic.
  double max_ebar = 0.0;
  for (double e : a.state.ebar) max_ebar = std::max(max_ebar, e);
  CHECK(max_ebar > 1e-4);
  CHECK(a.report.outer_iterations > 1);
}

TEST_CASE("data-driven continuation against an extended reference") {
  const driver::RunConfig cfg = small_config();
  const driver::ReferenceRun training = driver::run_reference(cfg);

  const driver::DatadrivenRun dd = driver::run_datadriven(cfg, training);
  CHECK(dd.report.method == "datadriven");
  CHECK(dd.report.cycles == cfg.target_cycles - cfg.training_cycles);

  // Two reference elements -> eight Gauss rows, integrated over the whole
  // horizon (0, T_N].
  REQUIRE(dd.refs.elements.size() == 2);
  REQUIRE(dd.refs.points.size() == 8);
  const std::uint64_t n_t_full =
      static_cast<std::uint64_t>(cfg.target_cycles) * cfg.n_micro;
  CHECK(dd.report.sparse_calls == 8ull * n_t_full);

  const int n_hat = cfg.target_cycles - cfg.training_cycles;
  for (int c = 0; c < 3; ++c) {
    CHECK(dd.predictor[c].n_macro == n_hat);
    CHECK(dd.corrected[c].n_macro == n_hat);
    CHECK(dd.corrected[c].rank() >= dd.predictor[c].rank());
  }
  CHECK(dd.displacement.n_macro == n_hat);
  CHECK(dd.truth_refs.rows == 3 * 8);
  CHECK(dd.truth_refs.cols ==
        static_cast<std::size_t>(n_hat) * cfg.n_micro);

  // The sparse correction must not make things worse at the sampled rows.
  CHECK(dd.report.error_refs_after <=
        dd.report.error_refs_before + 1e-12);
  CHECK(dd.report.orthogonality_defect <= 1e-8);
  CHECK(dd.report.equilibrium_residual <= cfg.horizon_solve_tol);

  SUBCASE("comparison accounting is exact") {
    driver::RunConfig ext_cfg = cfg;
    ext_cfg.training_cycles = cfg.target_cycles;
    ext_cfg.target_cycles = cfg.target_cycles + 1;
    const driver::ReferenceRun extended = driver::run_reference(ext_cfg);

    const driver::ComparisonReport cmp = driver::compare_runs(extended, dd);
    CHECK(cmp.sparse_calls == dd.report.sparse_calls);
    CHECK(cmp.reference_calls_per_pass == 16ull * n_t_full);
    CHECK(cmp.call_ratio == 8.0 / 16.0);
    CHECK(cmp.error_before > 0.0);
    CHECK(std::isfinite(cmp.error_after));
    CHECK(cmp.error_refs_after <= cmp.error_refs_before + 1e-12);
    CHECK(cmp.dd_equilibrium == dd.report.equilibrium_residual);
    CHECK(cmp.ref_equilibrium == extended.report.equilibrium_residual);

    // The comparison requires matching horizons: the training run only
    // covers the training window.
    CHECK_THROWS_AS(driver::compare_runs(training, dd), ArgumentError);
  }

  SUBCASE("physics mismatches are rejected") {
    driver::RunConfig other = cfg;
    other.amplitude *= 2.0;
    CHECK_THROWS_AS(driver::run_datadriven(other, training), ArgumentError);
  }

  SUBCASE("runs persist and reload bitwise") {
    const fs::path rdir = fresh_dir("mtpgd_test_refrun");
    driver::save_reference_run(rdir.string(), training);
    const driver::ReferenceRun rback =
        driver::load_reference_run(rdir.string());
    CHECK(config_text(rback.config) == config_text(training.config));
    CHECK(rback.report.same_results(training.report));
    CHECK(same_field(rback.displacement, training.displacement));
    CHECK(rback.plastic.m.data == training.plastic.m.data);
    CHECK(rback.state.ebar == training.state.ebar);
    CHECK(rback.state.p12 == training.state.p12);
    CHECK(rback.mesh.n_nodes() == training.mesh.n_nodes());

    const fs::path ddir = fresh_dir("mtpgd_test_ddrun");
    driver::save_datadriven_run(ddir.string(), dd);
    const driver::DatadrivenRun dback =
        driver::load_datadriven_run(ddir.string());
    CHECK(config_text(dback.config) == config_text(dd.config));
    CHECK(dback.report.same_results(dd.report));
    CHECK(dback.refs.elements == dd.refs.elements);
    CHECK(dback.refs.points == dd.refs.points);
    for (int c = 0; c < 3; ++c) {
      CHECK(same_field(dback.predictor[c], dd.predictor[c]));
      CHECK(same_field(dback.corrected[c], dd.corrected[c]));
    }
    CHECK(same_field(dback.displacement, dd.displacement));
    CHECK(dback.truth_refs.data == dd.truth_refs.data);

    // Kind tagging keeps the two directory layouts apart.
    CHECK_THROWS_AS(driver::load_datadriven_run(rdir.string()), IoError);
    CHECK_THROWS_AS(driver::load_reference_run(ddir.string()), IoError);
    CHECK_THROWS_AS(
        driver::load_reference_run((rdir / "missing").string()), IoError);
  }
}

TEST_CASE("command line interface round-trips") {
  const fs::path dir = fresh_dir("mtpgd_test_cli");

  SUBCASE("generate-mesh writes a readable mesh") {
    const std::string out = (dir / "mesh.txt").string();
    CHECK(run_cli("generate-mesh --output " + out +
                  " --set mesh_nx=3 --set mesh_ny=1") == 0);
    const fem::Mesh mesh = fem::read_mesh(out);
    CHECK(mesh.n_elements() == 3);
  }

  SUBCASE("unknown settings exit with the configuration code") {
    const std::string out = (dir / "mesh2.txt").string();
    CHECK(run_cli("generate-mesh --output " + out + " --set nope=1") == 2);
    CHECK(run_cli("generate-mesh --output " + out + " --set amplitude") == 2);
  }

  SUBCASE("missing inputs exit with the io code") {
    CHECK(run_cli("run-reference --config " + (dir / "nope.cfg").string() +
                  " --output " + (dir / "run").string()) == 4);
    CHECK(run_cli("forecast --input " + (dir / "nope.csv").string()) == 4);
  }

  SUBCASE("forecast fits and extends a series file") {
    const std::string in = (dir / "series.csv").string();
    {
      std::ofstream os(in);
      os << "index,value\n";
      for (int i = 0; i < 40; ++i)
        os << i << ',' << 2.0 * std::pow(0.9, i) << '\n';
    }
    const std::string out = (dir / "fc.csv").string();
    const std::string model = (dir / "model.csv").string();
    CHECK(run_cli("forecast --input " + in + " --lag 1 --horizon 5" +
                  " --series-output " + out + " --model-output " + model) ==
          0);

    std::ifstream is(out);
    REQUIRE(is.good());
    std::string header;
    std::getline(is, header);
    CHECK(header == "index,value");
    int index = 0;
    char comma = 0;
    double value = 0.0;
    for (int i = 0; i < 5; ++i) {
      REQUIRE((is >> index >> comma >> value));
      CHECK(index == 40 + i);
      CHECK(value ==
            doctest::Approx(2.0 * std::pow(0.9, 40 + i)).epsilon(1e-6));
    }

    std::ifstream ms(model);
    REQUIRE(ms.good());
    std::string mline;
    std::getline(ms, mline);
    CHECK(mline.find("re_mu") != std::string::npos);
  }

  SUBCASE("export-modes writes factor tables") {
    sep::SeparatedField field(4, 3);
    Eigen::VectorXd x(2), tau(4), T(3);
    x << 1.0, -2.0;
    tau << 0.5, 0.5, 0.5, 0.5;
    T << 1.0, 0.5, 0.25;
    field.append_mode_raw(x, tau, T);
    const std::string fpath = (dir / "field.mtpf").string();
    sep::save_field(fpath, field);

    const std::string out = (dir / "modes").string();
    CHECK(run_cli("export-modes --field " + fpath + " --output " + out) == 0);
    CHECK(fs::exists(fs::path(out) / "spatial.csv"));
    CHECK(fs::exists(fs::path(out) / "micro.csv"));
    CHECK(fs::exists(fs::path(out) / "macro.csv"));

    CHECK(run_cli("export-modes --output " + out) == 2);
  }
}
