// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: mesh generation, reference and data-driven runs,
// HODMD diagnostics on sampled series, run comparison and CSV export of
// stored artifacts.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "mtpgd/common.hpp"
#include "mtpgd/driver/config.hpp"
#include "mtpgd/driver/driver.hpp"
#include "mtpgd/driver/report.hpp"
#include "mtpgd/fem/mesh.hpp"
#include "mtpgd/forecast/hodmd.hpp"
#include "mtpgd/plast/snapshot_io.hpp"
#include "mtpgd/sep/field_io.hpp"

namespace {

using namespace mtpgd;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double wall_total(const driver::RunReport& r) {
  for (const auto& [name, seconds] : r.phase_seconds)
    if (name == "total") return seconds;
  return 0.0;
}

void apply_sets(driver::RunConfig& cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    driver::apply_override(cfg, trim(kv.substr(0, eq)),
                           trim(kv.substr(eq + 1)));
  }
}

// One sample per line; '#' comments; for "index,value" CSV exports the last
// comma-separated field is taken and a leading header line is skipped.
Eigen::VectorXd read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open series file: " + path);
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto comma = line.find_last_of(',');
    const std::string tok =
        trim(comma == std::string::npos ? line : line.substr(comma + 1));
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      values.push_back(v);
    } catch (const std::exception&) {
      if (values.empty()) continue;  // header line
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": not a number: " + tok);
    }
  }
  if (values.empty()) throw IoError(path + ": no numeric samples");
  return Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_modes_csv(const std::string& path,
                     const std::vector<Eigen::VectorXd>& modes) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os.precision(17);
  for (std::size_t k = 0; k < modes.size(); ++k)
    os << (k ? "," : "") << "mode_" << k;
  os << '\n';
  const Eigen::Index rows = modes.empty() ? 0 : modes[0].size();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < modes.size(); ++k)
      os << (k ? "," : "") << modes[k][i];
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

std::string ranks(const std::array<int, 3>& r) {
  return std::to_string(r[0]) + "/" + std::to_string(r[1]) + "/" +
         std::to_string(r[2]);
}

void print_reference_summary(const driver::RunReport& r,
                             const std::string& dir) {
  std::cout << "reference run: " << r.cycles << " cycles, " << r.n_points
            << " Gauss points\n"
            << "  outer iterations: " << r.outer_iterations;
  if (!r.outer_residuals.empty())
    std::cout << " (final change " << sci(r.outer_residuals.back()) << ")";
  std::cout << "\n  plastic ranks (11/12/22): " << ranks(r.rank_base)
            << "\n  displacement rank: " << r.displacement_rank
            << "\n  equilibrium residual: " << sci(r.equilibrium_residual)
            << "\n  return-map evaluations: " << r.total_calls
            << "\n  wall: " << sci(wall_total(r)) << " s"
            << "\n  written to: " << dir << '\n';
}

void print_datadriven_summary(const driver::RunReport& r, int training_cycles,
                              const std::string& dir) {
  std::cout << "data-driven run: " << r.cycles << " cycles (training "
            << training_cycles << "), " << r.n_points << " Gauss points\n"
            << "  plastic ranks (11/12/22): " << ranks(r.rank_base)
            << " -> corrected " << ranks(r.rank_corrected)
            << "\n  error at reference points: " << sci(r.error_refs_before)
            << " -> corrected " << sci(r.error_refs_after)
            << "\n  orthogonality defect: " << sci(r.orthogonality_defect)
            << "\n  sparse return-map evaluations: " << r.sparse_calls
            << "\n  displacement rank: " << r.displacement_rank
            << "\n  equilibrium residual: " << sci(r.equilibrium_residual);
  std::string flags;
  if (r.growth_warning) flags += " growth-warning";
  if (r.elastic_fallback) flags += " elastic-fallback";
  if (r.enrich_stagnation) flags += " enrichment-stagnation";
  if (r.rank_deficient_update) flags += " rank-deficient-update";
  if (!flags.empty()) std::cout << "\n  flags:" << flags;
  std::cout << "\n  wall: " << sci(wall_total(r)) << " s"
            << "\n  written to: " << dir << '\n';
}

std::string pick_output(const std::string& flag, const driver::RunConfig& cfg,
                        const char* what) {
  const std::string out = flag.empty() ? cfg.output_dir : flag;
  if (out.empty())
    throw ConfigError(std::string(what) +
                      ": no output directory (use --output or set "
                      "output_dir in the configuration)");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Two-scale PGD simulation of quasi-static cyclic elasto-plasticity "
      "with HODMD cycle forecasting and sparse-sampling correction"};
  app.set_version_flag("--version", "mtpgd 1.0.0");
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path,
                 "configuration file (key = value lines)");
  app.add_option("--set", sets,
                 "override one configuration key (key=value, repeatable)")
      ->allow_extra_args(false);

  auto* gen = app.add_subcommand("generate-mesh",
                                 "write the configured mesh to a file");
  gen->fallthrough();
  std::string gen_output;
  gen->add_option("--output", gen_output, "mesh file to write")->required();

  auto* ref = app.add_subcommand(
      "run-reference", "reference two-scale elasto-plastic solve");
  ref->fallthrough();
  std::string ref_output;
  int ref_cycles = 0;
  ref->add_option("--output", ref_output,
                  "run directory (default: output_dir)");
  ref->add_option("--cycles", ref_cycles,
                  "override the number of simulated cycles");

  auto* dd = app.add_subcommand(
      "run-datadriven",
      "forecast + correction run continuing a trained reference run");
  dd->fallthrough();
  std::string dd_training, dd_output;
  dd->add_option("--training", dd_training,
                 "training reference run directory")
      ->required();
  dd->add_option("--output", dd_output, "run directory (default: output_dir)");

  auto* fc = app.add_subcommand(
      "forecast", "fit a high-order DMD model to a sampled series");
  fc->fallthrough();
  std::string fc_input, fc_model_out, fc_series_out;
  int fc_d = 0, fc_horizon = 0;
  fc->add_option("--input", fc_input, "series file, one sample per line")
      ->required();
  fc->add_option("--lag", fc_d,
                 "delay-embedding depth d (0 = select on a held-out tail)");
  fc->add_option("--horizon", fc_horizon,
                 "forecast steps past the end of the series");
  fc->add_option("--model-output", fc_model_out,
                 "write eigenvalues and amplitudes as CSV");
  fc->add_option("--series-output", fc_series_out,
                 "write the forecast samples as CSV");

  auto* cmp = app.add_subcommand(
      "compare", "error and cost metrics of a data-driven run against an "
                 "extended reference run");
  cmp->fallthrough();
  std::string cmp_ref, cmp_dd, cmp_out;
  cmp->add_option("--reference", cmp_ref,
                  "extended reference run directory")
      ->required();
  cmp->add_option("--datadriven", cmp_dd, "data-driven run directory")
      ->required();
  cmp->add_option("--output", cmp_out, "also write the comparison CSV here");

  auto* ex = app.add_subcommand(
      "export-modes", "export separated fields or snapshots as CSV");
  ex->fallthrough();
  std::string ex_field, ex_snap, ex_out;
  ex->add_option("--field", ex_field, "separated field file (.mtpf)");
  ex->add_option("--snapshot", ex_snap, "history snapshot file (.snap)");
  ex->add_option("--output", ex_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    driver::RunConfig cfg;
    if (!config_path.empty()) cfg = driver::load_config(config_path);
    apply_sets(cfg, sets);

    if (*gen) {
      const fem::Mesh mesh = driver::make_mesh(cfg);
      fem::write_mesh(mesh, gen_output);
      std::cout << "mesh: " << mesh.n_nodes() << " nodes, "
                << mesh.n_elements() << " elements -> " << gen_output << '\n';
    } else if (*ref) {
      if (ref_cycles > 0) {
        cfg.training_cycles = ref_cycles;
        if (cfg.target_cycles <= cfg.training_cycles)
          cfg.target_cycles = cfg.training_cycles + 1;
      }
      const std::string out = pick_output(ref_output, cfg, "run-reference");
      const driver::ReferenceRun run = driver::run_reference(cfg);
      driver::save_reference_run(out, run);
      print_reference_summary(run.report, out);
    } else if (*dd) {
      const driver::ReferenceRun training =
          driver::load_reference_run(dd_training);
      if (config_path.empty()) {
        // No explicit configuration: continue the training run's.
        cfg = training.config;
        apply_sets(cfg, sets);
      }
      const std::string out = pick_output(dd_output, cfg, "run-datadriven");
      const driver::DatadrivenRun run = driver::run_datadriven(cfg, training);
      driver::save_datadriven_run(out, run);
      print_datadriven_summary(run.report, cfg.training_cycles, out);
    } else if (*fc) {
      const Eigen::VectorXd series = read_series(fc_input);
      int d = fc_d;
      if (d <= 0)
        d = forecast::select_lag(series, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                                 0.2, cfg.hodmd_tol_svd,
                                 cfg.hodmd_tol_spectral);
      const forecast::HodmdModel model = forecast::hodmd_fit(
          series, d, cfg.hodmd_tol_svd, cfg.hodmd_tol_spectral);
      std::cout << "series: " << series.size() << " samples\n"
                << "  lag d = " << model.d << ", spectral rank "
                << model.rank << (model.rank_deficient ? " (truncated)" : "")
                << "\n  training misfit: " << sci(model.train_error) << '\n';
      if (fc_model_out.empty()) {
        forecast::write_model_csv(std::cout, model);
      } else {
        std::ofstream os(fc_model_out);
        if (!os) throw IoError("cannot write " + fc_model_out);
        forecast::write_model_csv(os, model);
        if (!os) throw IoError("write failed: " + fc_model_out);
      }
      if (fc_horizon > 0) {
        const forecast::Forecast f =
            forecast::hodmd_forecast(model, fc_horizon, cfg.growth_guard);
        std::cout << "forecast: " << fc_horizon << " steps, max |mu| "
                  << sci(f.max_eigen_modulus)
                  << (f.growth_warning ? " (growth warning)" : "") << '\n';
        if (!fc_series_out.empty()) {
          std::ofstream os(fc_series_out);
          if (!os) throw IoError("cannot write " + fc_series_out);
          os.precision(17);
          os << "index,value\n";
          for (int i = 0; i < fc_horizon; ++i)
            os << model.train_length + i << ',' << f.values[i] << '\n';
          if (!os) throw IoError("write failed: " + fc_series_out);
        }
      }
    } else if (*cmp) {
      const driver::ReferenceRun extended =
          driver::load_reference_run(cmp_ref);
      const driver::DatadrivenRun ddrun = driver::load_datadriven_run(cmp_dd);
      const driver::ComparisonReport report =
          driver::compare_runs(extended, ddrun);
      report.write_csv(std::cout);
      if (!cmp_out.empty()) {
        std::ofstream os(cmp_out);
        if (!os) throw IoError("cannot write " + cmp_out);
        report.write_csv(os);
        if (!os) throw IoError("write failed: " + cmp_out);
      }
    } else if (*ex) {
      if (ex_field.empty() && ex_snap.empty())
        throw ArgumentError("export-modes: provide --field and/or --snapshot");
      std::filesystem::create_directories(ex_out);
      const std::filesystem::path out(ex_out);
      if (!ex_field.empty()) {
        const sep::SeparatedField field = sep::load_field(ex_field);
        write_modes_csv((out / "spatial.csv").string(), field.spatial);
        write_modes_csv((out / "micro.csv").string(), field.micro);
        write_modes_csv((out / "macro.csv").string(), field.macro);
        std::cout << "field: rank " << field.rank() << ", " << field.n_rows()
                  << " rows -> " << ex_out << '\n';
      }
      if (!ex_snap.empty()) {
        const plast::HistorySnapshot snap = plast::load_snapshot(ex_snap);
        plast::export_snapshot_csv(snap, (out / "snapshot.csv").string());
        std::cout << "snapshot: " << snap.n_points << " points x "
                  << snap.n_instants() << " instants -> " << ex_out << '\n';
      }
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const GeometricError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const RigidBodyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const double r : e.residual_history)
      std::cerr << "  residual " << sci(r) << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
