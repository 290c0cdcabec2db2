// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/driver/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>

#include "json.hpp"
#include "mtpgd/fem/assembly.hpp"
#include "mtpgd/forecast/hodmd.hpp"
#include "mtpgd/plast/snapshot_io.hpp"
#include "mtpgd/sep/decompose.hpp"
#include "mtpgd/sep/field_io.hpp"
#include "mtpgd/sep/solve.hpp"

namespace mtpgd::driver {

namespace {

namespace fs = std::filesystem;

// Tags errors with the pipeline phase they occurred in, preserving the type
// so exit-code mapping still works.
template <typename F>
auto phase(const char* tag, F&& f) -> decltype(f()) {
  const auto wrap = [tag](const char* msg) {
    return std::string(tag) + ": " + msg;
  };
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(wrap(e.what()));
  } catch (const ArgumentError& e) {
    throw ArgumentError(wrap(e.what()));
  } catch (const ShapeError& e) {
    throw ShapeError(wrap(e.what()));
  } catch (const GeometricError& e) {
    throw GeometricError(wrap(e.what()));
  } catch (const RigidBodyError& e) {
    throw RigidBodyError(wrap(e.what()));
  } catch (const IoError& e) {
    throw IoError(wrap(e.what()));
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(wrap(e.what()), e.residual_history);
  } catch (const NumericError& e) {
    throw NumericError(wrap(e.what()));
  }
}

class PhaseTimer {
 public:
  explicit PhaseTimer(std::vector<std::pair<std::string, double>>& out)
      : out_(&out), start_(clock::now()), last_(start_) {}

  void mark(const std::string& name) {
    const auto now = clock::now();
    out_->emplace_back(name, seconds(last_, now));
    last_ = now;
  }
  void total() {
    out_->emplace_back("total", seconds(start_, clock::now()));
  }

 private:
  using clock = std::chrono::steady_clock;
  static double seconds(clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  }
  std::vector<std::pair<std::string, double>>* out_;
  clock::time_point start_, last_;
};

sep::SolveOptions solve_options(const RunConfig& cfg) {
  sep::SolveOptions o;
  o.tol = cfg.solve_tol;
  o.max_rank = cfg.solve_max_rank;
  o.stagnation_tol = cfg.stagnation_tol;
  o.max_sweeps = cfg.max_sweeps;
  return o;
}

sep::DecomposeOptions decompose_options(const RunConfig& cfg) {
  sep::DecomposeOptions o;
  o.tol = cfg.decompose_tol;
  o.max_rank = cfg.decompose_max_rank;
  o.stagnation_tol = cfg.stagnation_tol;
  o.max_sweeps = cfg.max_sweeps;
  return o;
}

// Separated right-hand side of the equilibrium problem: Dirichlet lifting
// terms (one per separated load part) plus constant Neumann tractions.
std::vector<sep::Triad> load_triads(
    const fem::ElasticSystem& system,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& parts,
    const sep::TimeGrid& grid) {
  std::vector<sep::Triad> rhs;
  for (const auto& part : parts)
    rhs.push_back({-system.lift_force(), part.first, part.second});
  const Eigen::VectorXd traction = fem::assemble_traction(system.mesh());
  if (traction.cwiseAbs().maxCoeff() > 0.0)
    rhs.push_back({system.restrict_to_free(traction),
                   Eigen::VectorXd::Ones(grid.n_micro),
                   Eigen::VectorXd::Ones(grid.n_macro)});
  return rhs;
}

// One force triad per plastic mode: component c of the separated plastic
// strain drives ∫ ε(v) : 2G ε^p with the other components zero.
void add_plastic_triads(std::vector<sep::Triad>& rhs,
                        const fem::ElasticSystem& system,
                        const fem::Material& material,
                        const std::array<sep::SeparatedField, 3>& comps) {
  const fem::Mesh& mesh = system.mesh();
  const std::size_t np = mesh.n_gauss_points();
  const std::vector<double> zero(np, 0.0);
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < comps[c].rank(); ++k) {
      const Eigen::VectorXd& x = comps[c].spatial[k];
      if (static_cast<std::size_t>(x.size()) != np)
        throw ShapeError("plastic mode size does not match the mesh");
      const std::span<const double> mode(x.data(), np);
      // Component order of the snapshot blocks: 11, 12, 22.
      const std::span<const double> p11 = c == 0 ? mode : zero;
      const std::span<const double> p12 = c == 1 ? mode : zero;
      const std::span<const double> p22 = c == 2 ? mode : zero;
      const Eigen::VectorXd f =
          fem::assemble_plastic_force(mesh, material, p11, p22, p12);
      rhs.push_back({system.restrict_to_free(f), comps[c].micro[k],
                     comps[c].macro[k]});
    }
  }
}

std::array<sep::SeparatedField, 3> component_fields(
    const std::array<sep::DecomposeResult, 3>& comps) {
  return {comps[0].field, comps[1].field, comps[2].field};
}

bool same_physics(const RunConfig& a, const RunConfig& b) {
  return a.mesh_file == b.mesh_file && a.mesh_kind == b.mesh_kind &&
         a.mesh_length == b.mesh_length && a.mesh_height == b.mesh_height &&
         a.mesh_mid_height == b.mesh_mid_height && a.mesh_nx == b.mesh_nx &&
         a.mesh_ny == b.mesh_ny &&
         a.material.young_modulus == b.material.young_modulus &&
         a.material.poisson_ratio == b.material.poisson_ratio &&
         a.material.yield_stress_initial == b.material.yield_stress_initial &&
         a.material.hardening_modulus == b.material.hardening_modulus &&
         a.amplitude == b.amplitude &&
         a.cycle_duration == b.cycle_duration &&
         a.drift_slope == b.drift_slope && a.n_micro == b.n_micro;
}

RowMatrix subtract(const RowMatrix& a, const RowMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw ShapeError("matrix difference: shape mismatch");
  RowMatrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = a.data[i] - b.data[i];
  return out;
}

double phase_wall(const RunReport& report, const std::string& name) {
  for (const auto& [n, s] : report.phase_seconds)
    if (n == name) return s;
  return 0.0;
}

}  // namespace

fem::Mesh make_mesh(const RunConfig& cfg) {
  fem::Mesh mesh;
  if (!cfg.mesh_file.empty()) {
    mesh = fem::read_mesh(cfg.mesh_file);
  } else if (cfg.mesh_kind == "dogbone") {
    mesh = fem::make_dogbone_mesh(cfg.mesh_length, cfg.mesh_height,
                                  cfg.mesh_mid_height, cfg.mesh_nx,
                                  cfg.mesh_ny);
  } else {
    mesh = fem::make_bar_mesh(cfg.mesh_length, cfg.mesh_height, cfg.mesh_nx,
                              cfg.mesh_ny);
  }
  mesh.validate();
  return mesh;
}

sep::SeparatedField expand_displacement(
    const fem::ElasticSystem& system, const sep::SeparatedField& free_modes,
    const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>&
        load_parts) {
  sep::SeparatedField out(free_modes.n_micro, free_modes.n_macro);
  for (int k = 0; k < free_modes.rank(); ++k)
    out.append_mode_raw(system.expand(free_modes.spatial[k], 0.0),
                        free_modes.micro[k], free_modes.macro[k]);
  for (const auto& part : load_parts)
    out.append_mode_raw(system.lift(), part.first, part.second);
  return out;
}

std::shared_ptr<plast::SeparatedStrainHistory> strain_history(
    const fem::Mesh& mesh, const sep::SeparatedField& displacement) {
  std::vector<plast::SeparatedStrainHistory::Mode> modes;
  modes.reserve(displacement.rank());
  for (int k = 0; k < displacement.rank(); ++k) {
    const fem::StrainField s =
        fem::evaluate_strain(mesh, displacement.spatial[k]);
    plast::SeparatedStrainHistory::Mode mode;
    const std::size_t np = s.size();
    mode.e11 = Eigen::Map<const Eigen::VectorXd>(s.e11.data(), np);
    mode.e22 = Eigen::Map<const Eigen::VectorXd>(s.e22.data(), np);
    mode.e12 = 0.5 * Eigen::Map<const Eigen::VectorXd>(s.g12.data(), np);
    mode.micro = displacement.micro[k];
    mode.macro = displacement.macro[k];
    modes.push_back(std::move(mode));
  }
  return std::make_shared<plast::SeparatedStrainHistory>(
      std::move(modes), displacement.n_micro, displacement.n_macro);
}

ReferenceRun run_reference(const RunConfig& cfg) {
  cfg.validate();
  ReferenceRun run;
  run.config = cfg;
  RunReport& rep = run.report;
  rep.method = "reference";
  rep.cycles = cfg.training_cycles;
  PhaseTimer timer(rep.phase_seconds);

  run.mesh = make_mesh(cfg);
  rep.n_points = static_cast<int>(run.mesh.n_gauss_points());
  const sep::TimeGrid grid = cfg.training_grid();
  const fem::LoadProgram load = cfg.load_program(cfg.training_cycles);
  load.validate();
  const fem::ElasticSystem system(run.mesh, cfg.material);
  const auto parts = load.separated_parts(grid);
  const auto rhs_load = load_triads(system, parts, grid);
  const auto sopt = solve_options(cfg);
  const auto dopt = decompose_options(cfg);
  timer.mark("setup");

  // Elastic iterate u^0.
  sep::SolveResult sol = phase(
      "solve", [&] { return sep::mtpgd_solve(system, rhs_load, grid, sopt); });
  sep::SeparatedField u_full = expand_displacement(system, sol.u, parts);
  timer.mark("elastic_solve");

  plast::PlasticState zero_state;
  zero_state.resize_zero(run.mesh.n_gauss_points());

  double wall_integrate = 0.0, wall_decompose = 0.0, wall_solve = 0.0;
  const auto now = [] { return std::chrono::steady_clock::now(); };
  const auto accum = [&](double& acc, auto t0) {
    acc += std::chrono::duration<double>(now() - t0).count();
  };

  plast::IntegrateResult integ;
  std::array<sep::DecomposeResult, 3> comps;
  bool converged = false;
  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    const auto hist = strain_history(run.mesh, u_full);
    auto t0 = now();
    integ = phase("integrate", [&] {
      return plast::integrate_history(cfg.material, *hist, zero_state);
    });
    accum(wall_integrate, t0);
    rep.integration_calls.push_back(integ.call_count);

    t0 = now();
    comps = phase("decompose", [&] {
      return sep::decompose_components(integ.snapshot, grid, dopt);
    });
    accum(wall_decompose, t0);

    auto rhs = rhs_load;
    add_plastic_triads(rhs, system, cfg.material, component_fields(comps));
    t0 = now();
    sol = phase("solve",
                [&] { return sep::mtpgd_solve(system, rhs, grid, sopt); });
    accum(wall_solve, t0);

    sep::SeparatedField u_new = expand_displacement(system, sol.u, parts);
    const double denom = u_new.norm();
    const double rel =
        denom == 0.0 ? 0.0 : sep::field_diff_norm(u_new, u_full) / denom;
    rep.outer_residuals.push_back(rel);
    rep.outer_iterations = outer;
    u_full = std::move(u_new);
    if (rel < cfg.outer_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError(
        "run_reference: outer fixed point did not converge within " +
            std::to_string(cfg.max_outer) + " iterations",
        rep.outer_residuals);

  // One more constitutive pass so the stored history matches the converged
  // displacement exactly.
  {
    const auto hist = strain_history(run.mesh, u_full);
    const auto t0 = now();
    integ = phase("integrate", [&] {
      return plast::integrate_history(cfg.material, *hist, zero_state);
    });
    accum(wall_integrate, t0);
    rep.integration_calls.push_back(integ.call_count);
  }
  rep.phase_seconds.emplace_back("integration", wall_integrate);
  rep.phase_seconds.emplace_back("decomposition", wall_decompose);
  rep.phase_seconds.emplace_back("solves", wall_solve);

  run.displacement = std::move(u_full);
  run.plastic = std::move(integ.snapshot);
  run.state = std::move(integ.final_state);
  for (int c = 0; c < 3; ++c) rep.rank_base[c] = comps[c].field.rank();
  rep.displacement_rank = sol.u.rank();
  rep.equilibrium_residual = sol.relative_residual;
  rep.total_calls = std::accumulate(rep.integration_calls.begin(),
                                    rep.integration_calls.end(),
                                    std::uint64_t{0});
  timer.total();
  return run;
}

DatadrivenRun run_datadriven(const RunConfig& cfg,
                             const ReferenceRun& training) {
  cfg.validate();
  if (!same_physics(cfg, training.config) ||
      cfg.training_cycles != training.config.training_cycles)
    throw ArgumentError(
        "run_datadriven: training artifacts come from a different "
        "configuration");
  if (training.plastic.n_points !=
          static_cast<std::size_t>(training.mesh.n_gauss_points()) ||
      training.plastic.n_instants() !=
          static_cast<std::size_t>(cfg.training_grid().n_total()))
    throw ShapeError("run_datadriven: training snapshot shape mismatch");

  DatadrivenRun run;
  run.config = cfg;
  RunReport& rep = run.report;
  rep.method = "datadriven";
  rep.cycles = cfg.target_cycles - cfg.training_cycles;
  const fem::Mesh& mesh = training.mesh;
  rep.n_points = static_cast<int>(mesh.n_gauss_points());
  PhaseTimer timer(rep.phase_seconds);

  const int horizon = cfg.target_cycles - cfg.training_cycles;
  const sep::TimeGrid grid_k = cfg.training_grid();
  const sep::TimeGrid grid_hat = cfg.forecast_grid();
  const fem::ElasticSystem system(mesh, cfg.material);
  auto sopt = solve_options(cfg);
  sopt.tol = cfg.horizon_solve_tol;
  timer.mark("setup");

  // Decompose the trained plastic history per strain component.
  const auto comps = phase("decompose", [&] {
    return sep::decompose_components(training.plastic, grid_k,
                                     decompose_options(cfg));
  });
  for (int c = 0; c < 3; ++c) rep.rank_base[c] = comps[c].field.rank();
  timer.mark("decomposition");

  // Fit one HODMD model per macro mode and forecast over the horizon.  The
  // lag is capped so the training window satisfies N_T > 2d, and reduced
  // mode by mode while the fitted spectrum exceeds the growth guard: a short
  // window overfits deep recurrences, and a spuriously unstable mode ruins
  // the entire extrapolation at points the sparse correction never samples.
  // An order-1 fit is kept regardless of its modulus, so genuinely growing
  // series (drifting mean load) still forecast growth and carry the warning.
  const int d_cap = (cfg.training_cycles - 1) / 2;
  const auto stable_fit = [&](const Eigen::VectorXd& series, int d) {
    forecast::HodmdModel model;
    for (;; --d) {
      model = forecast::hodmd_fit(series, d, cfg.hodmd_tol_svd,
                                  cfg.hodmd_tol_spectral);
      double radius = 0.0;
      for (int i = 0; i < model.rank; ++i)
        radius = std::max(radius, std::abs(model.eigenvalues[i]));
      if (d <= 1 || radius <= 1.0 + cfg.growth_guard) break;
    }
    return model;
  };
  std::array<sep::SeparatedField, 3> predictor;
  phase("forecast", [&] {
    for (int c = 0; c < 3; ++c) {
      const sep::SeparatedField& base = comps[c].field;
      predictor[c] = sep::SeparatedField(base.n_micro, horizon);
      if (cfg.hodmd_resample_stride >= 2) {
        for (int k = 0; k < base.rank(); ++k) {
          int d = std::max(1, std::min(cfg.hodmd_d == 0 ? 10 : cfg.hodmd_d,
                                       d_cap));
          forecast::Forecast fc;
          for (;; --d) {
            fc = forecast::hodmd_forecast_resampled(
                base.macro[k], horizon, d, cfg.hodmd_resample_stride,
                cfg.hodmd_tol_svd, cfg.hodmd_tol_spectral, cfg.growth_guard);
            if (d <= 1 || !fc.growth_warning) break;
          }
          rep.growth_warning = rep.growth_warning || fc.growth_warning;
          predictor[c].append_mode_raw(base.spatial[k], base.micro[k],
                                       fc.values);
        }
        continue;
      }
      std::vector<forecast::HodmdModel> models;
      for (int k = 0; k < base.rank(); ++k) {
        int d = cfg.hodmd_d;
        if (d == 0) {
          d = forecast::select_lag(base.macro[k],
                                   {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 0.2,
                                   cfg.hodmd_tol_svd, cfg.hodmd_tol_spectral);
        }
        models.push_back(stable_fit(base.macro[k],
                                    std::max(1, std::min(d, d_cap))));
      }
      correct::Prediction pred = correct::predict_nonlinear(
          base, models, horizon, cfg.growth_guard);
      rep.growth_warning = rep.growth_warning || pred.growth_warning;
      predictor[c] = std::move(pred.field);
    }
    return 0;
  });
  timer.mark("forecast");

  // Equilibrium pre-solve over the forecast window driven by the predictor;
  // its displacement supplies the strain iterate at the reference points.
  const fem::LoadProgram load = cfg.load_program(cfg.target_cycles);
  load.validate();
  const auto parts_hat = load.separated_parts(grid_hat);
  auto rhs_hat = load_triads(system, parts_hat, grid_hat);
  add_plastic_triads(rhs_hat, system, cfg.material, predictor);
  const sep::SolveResult presolve = phase("pre-solve", [&] {
    return sep::mtpgd_solve(system, rhs_hat, grid_hat, sopt);
  });
  const sep::SeparatedField u_hat =
      expand_displacement(system, presolve.u, parts_hat);
  timer.mark("presolve");

  // Reference points by accumulated plastic strain at T_K (elastic von Mises
  // fallback for a fully elastic training phase).
  const std::vector<double> vm = fem::von_mises_stress(
      mesh, cfg.material,
      system.solve(Eigen::VectorXd::Zero(mesh.n_dofs()), cfg.amplitude));
  run.refs = phase("select-points", [&] {
    return correct::select_reference_points(mesh, training.state,
                                            cfg.reference_elements, vm);
  });
  rep.reference_elements = run.refs.elements;
  rep.elastic_fallback = run.refs.elastic_fallback;

  // Sparse constitutive truth over the whole horizon (0, T_N] from a zero
  // state: training strain from the stored displacement, forecast strain
  // from the pre-solve.  Exactly J_points * N_t(N) evaluations.
  plast::ConcatStrainHistory full_history(
      {strain_history(mesh, training.displacement),
       strain_history(mesh, u_hat)});
  plast::PlasticState zero_state;
  zero_state.resize_zero(mesh.n_gauss_points());
  const plast::IntegrateResult sparse = phase("sparse-integrate", [&] {
    return plast::integrate_history_sparse(cfg.material, full_history,
                                           zero_state, run.refs.points);
  });
  rep.sparse_calls = sparse.call_count;
  rep.total_calls = sparse.call_count;
  const int n_hat0 = grid_k.n_total();
  run.truth_refs = sparse.snapshot.m.slice_cols(
      n_hat0, n_hat0 + static_cast<std::size_t>(grid_hat.n_total()));
  timer.mark("sparse_integration");

  // Macro-mode Galerkin update and rank enrichment, per component.
  const std::vector<double> weights_full = fem::quadrature_weights(mesh);
  const std::size_t n_refs = run.refs.points.size();
  std::vector<double> w_r(n_refs);
  for (std::size_t r = 0; r < n_refs; ++r)
    w_r[r] = weights_full[run.refs.points[r]];

  correct::ErrorAccum err_before, err_after;
  phase("correct", [&] {
    // Weighted truth energy per component, so a component below the
    // decomposition tolerance of the dominant one (solver-noise plastic
    // shear under uniaxial cycling) is passed through instead of having
    // its noise "corrected".
    std::array<RowMatrix, 3> truth_comp;
    std::array<double, 3> scale2{};
    double scale2_max = 0.0;
    for (int c = 0; c < 3; ++c) {
      std::vector<int> truth_rows(n_refs);
      for (std::size_t r = 0; r < n_refs; ++r)
        truth_rows[r] = static_cast<int>(c * n_refs + r);
      truth_comp[c] = run.truth_refs.gather_rows(truth_rows);
      for (std::size_t r = 0; r < n_refs; ++r)
        scale2[c] +=
            w_r[r] * kernels::nrm2sq(truth_comp[c].row(r), truth_comp[c].cols);
      scale2_max = std::max(scale2_max, scale2[c]);
    }
    const double floor2 =
        cfg.decompose_tol * cfg.decompose_tol * scale2_max;
    for (int c = 0; c < 3; ++c) {
      const RowMatrix& truth_c = truth_comp[c];
      if (scale2[c] <= floor2) {
        rep.rank_corrected[c] = predictor[c].rank();
        run.predictor[c] = predictor[c];
        run.corrected[c] = predictor[c];
        continue;
      }

      const sep::SeparatedField base_refs =
          predictor[c].subset_rows(run.refs.points);
      const RowMatrix predictor_refs =
          base_refs.rank() > 0 ? base_refs.reconstruct()
                               : RowMatrix(n_refs, truth_c.cols);
      err_before.add(predictor_refs, truth_c, w_r);

      const correct::GalerkinSystem sys = correct::build_galerkin_system(
          base_refs, w_r, truth_c, predictor_refs, grid_hat);
      const correct::CorrectionUpdate upd = correct::correct_update(sys);
      rep.rank_deficient_update =
          rep.rank_deficient_update || upd.rank_deficient;
      sep::SeparatedField corrected =
          correct::apply_update(predictor[c], upd.delta);

      const RowMatrix updated_refs =
          corrected.rank() > 0
              ? corrected.subset_rows(run.refs.points).reconstruct()
              : RowMatrix(n_refs, truth_c.cols);
      const RowMatrix residual = subtract(truth_c, updated_refs);
      rep.orthogonality_defect =
          std::max(rep.orthogonality_defect,
                   correct::orthogonality_defect(base_refs, w_r, residual,
                                                 grid_hat));

      const correct::EnrichmentResult enr = correct::correct_enrich(
          residual, w_r, grid_hat, cfg.correction_tol, cfg.max_extra_rank,
          std::sqrt(scale2[c]));
      rep.enrich_stagnation = rep.enrich_stagnation || enr.stagnation;
      for (const correct::EnrichmentTriad& triad : enr.triads) {
        const bool gappy = cfg.correction_extension == "gappy" &&
                           !comps[c].field.spatial.empty();
        Eigen::VectorXd x_full =
            gappy ? correct::extend_spatial_mode_gappy(
                        triad.x, run.refs.points, w_r, comps[c].field.spatial)
                  : correct::extend_spatial_mode(triad.x, run.refs.points,
                                                 mesh.n_gauss_points());
        corrected.append_mode_raw(std::move(x_full), triad.micro,
                                  triad.macro);
      }
      rep.rank_corrected[c] = corrected.rank();
      err_after.add(corrected.rank() > 0
                        ? corrected.subset_rows(run.refs.points).reconstruct()
                        : RowMatrix(n_refs, truth_c.cols),
                    truth_c, w_r);
      run.predictor[c] = predictor[c];
      run.corrected[c] = std::move(corrected);
    }
    return 0;
  });
  rep.error_refs_before = err_before.value();
  rep.error_refs_after = err_after.value();
  timer.mark("correction");

  // Final equilibrium solve over the forecast window with the corrected
  // plastic term.
  auto rhs_final = load_triads(system, parts_hat, grid_hat);
  add_plastic_triads(rhs_final, system, cfg.material, run.corrected);
  const sep::SolveResult final_solve = phase("final-solve", [&] {
    return sep::mtpgd_solve(system, rhs_final, grid_hat, sopt);
  });
  run.displacement = expand_displacement(system, final_solve.u, parts_hat);
  rep.displacement_rank = final_solve.u.rank();
  rep.equilibrium_residual = final_solve.relative_residual;
  timer.mark("final_solve");
  timer.total();
  return run;
}

ComparisonReport compare_runs(const ReferenceRun& extended,
                              const DatadrivenRun& dd) {
  if (!same_physics(extended.config, dd.config))
    throw ArgumentError("compare_runs: runs use different configurations");
  if (extended.config.training_cycles != dd.config.target_cycles)
    throw ArgumentError(
        "compare_runs: the reference run must cover the data-driven horizon "
        "(its training_cycles must equal the data-driven target_cycles)");

  const int nm = dd.config.n_micro;
  const std::size_t np = extended.mesh.n_gauss_points();
  const std::size_t col0 =
      static_cast<std::size_t>(dd.config.training_cycles) * nm;
  const std::size_t col1 =
      static_cast<std::size_t>(dd.config.target_cycles) * nm;
  if (extended.plastic.n_points != np ||
      extended.plastic.n_instants() < col1)
    throw ShapeError("compare_runs: extended snapshot shape mismatch");

  const std::vector<double> weights = fem::quadrature_weights(extended.mesh);
  correct::ErrorAccum before, after;
  for (int c = 0; c < 3; ++c) {
    std::vector<int> rows(np);
    for (std::size_t p = 0; p < np; ++p)
      rows[p] = static_cast<int>(extended.plastic.component_row(c, p));
    const RowMatrix truth_c =
        extended.plastic.m.gather_rows(rows).slice_cols(col0, col1);
    // A rank-0 component (below the decomposition tolerance in training)
    // predicts zero everywhere.
    const auto dense_or_zero = [&](const sep::SeparatedField& f) {
      if (f.rank() == 0) return RowMatrix(np, truth_c.cols);
      if (f.n_rows() != np)
        throw ShapeError("compare_runs: data-driven field row mismatch");
      return f.reconstruct();
    };
    before.add(dense_or_zero(dd.predictor[c]), truth_c, weights);
    after.add(dense_or_zero(dd.corrected[c]), truth_c, weights);
  }

  ComparisonReport cr;
  cr.error_before = before.value();
  cr.error_after = after.value();
  cr.error_refs_before = dd.report.error_refs_before;
  cr.error_refs_after = dd.report.error_refs_after;
  cr.sparse_calls = dd.report.sparse_calls;
  cr.reference_calls_per_pass = extended.report.integration_calls.empty()
                                    ? 0
                                    : extended.report.integration_calls[0];
  cr.call_ratio = cr.reference_calls_per_pass == 0
                      ? 0.0
                      : static_cast<double>(cr.sparse_calls) /
                            static_cast<double>(cr.reference_calls_per_pass);
  const double ref_total = phase_wall(extended.report, "total");
  const double dd_total = phase_wall(dd.report, "total");
  cr.speedup_overall = dd_total > 0.0 ? ref_total / dd_total : 0.0;
  const double ref_integration = phase_wall(extended.report, "integration");
  const double dd_sparse = phase_wall(dd.report, "sparse_integration");
  cr.speedup_nonlinear =
      dd_sparse > 0.0 ? ref_integration / dd_sparse : 0.0;
  cr.ref_equilibrium = extended.report.equilibrium_residual;
  cr.dd_equilibrium = dd.report.equilibrium_residual;
  return cr;
}

namespace {

constexpr int kManifestVersion = 1;

void write_manifest(const std::string& dir, const nlohmann::json& extra) {
  nlohmann::json j = extra;
  j["format"] = "mtpgd-run";
  j["version"] = kManifestVersion;
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("manifest write failed in " + dir);
}

nlohmann::json read_manifest(const std::string& dir,
                             const std::string& expected_kind) {
  const fs::path path = fs::path(dir) / "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "mtpgd-run" ||
      j.value("version", 0) != kManifestVersion)
    throw IoError("unsupported run directory format: " + dir);
  if (j.value("kind", "") != expected_kind)
    throw IoError("run directory " + dir + " holds a '" +
                  j.value("kind", std::string("?")) + "' run, expected '" +
                  expected_kind + "'");
  return j;
}

std::string at(const fs::path& dir, const char* name) {
  return (dir / name).string();
}

}  // namespace

void save_reference_run(const std::string& dir, const ReferenceRun& run) {
  fs::create_directories(dir);
  const fs::path d(dir);
  save_config(at(d, "config.txt"), run.config);
  fem::write_mesh(run.mesh, at(d, "mesh.txt"));
  sep::save_field(at(d, "displacement.mtpf"), run.displacement);
  plast::save_snapshot(run.plastic, at(d, "plastic.snap"));
  plast::save_state_csv(run.state, at(d, "state.csv"));
  save_report(at(d, "report.csv"), run.report);
  write_manifest(dir, {{"kind", "reference"}});
}

ReferenceRun load_reference_run(const std::string& dir) {
  read_manifest(dir, "reference");
  const fs::path d(dir);
  ReferenceRun run;
  run.config = load_config(at(d, "config.txt"));
  run.mesh = fem::read_mesh(at(d, "mesh.txt"));
  run.displacement = sep::load_field(at(d, "displacement.mtpf"));
  run.plastic = plast::load_snapshot(at(d, "plastic.snap"));
  run.state = plast::load_state_csv(at(d, "state.csv"));
  run.report = load_report(at(d, "report.csv"));
  return run;
}

void save_datadriven_run(const std::string& dir, const DatadrivenRun& run) {
  fs::create_directories(dir);
  const fs::path d(dir);
  save_config(at(d, "config.txt"), run.config);
  for (int c = 0; c < 3; ++c) {
    const std::string suffix = std::to_string(c) + ".mtpf";
    sep::save_field(at(d, ("predictor_" + suffix).c_str()), run.predictor[c]);
    sep::save_field(at(d, ("corrected_" + suffix).c_str()), run.corrected[c]);
  }
  sep::save_field(at(d, "displacement.mtpf"), run.displacement);
  plast::HistorySnapshot truth;
  truth.n_points = run.refs.points.size();
  truth.m = run.truth_refs;
  plast::save_snapshot(truth, at(d, "truth_refs.snap"));
  save_report(at(d, "report.csv"), run.report);
  write_manifest(dir, {{"kind", "datadriven"},
                       {"reference_elements", run.refs.elements},
                       {"reference_points", run.refs.points},
                       {"elastic_fallback", run.refs.elastic_fallback}});
}

DatadrivenRun load_datadriven_run(const std::string& dir) {
  const nlohmann::json j = read_manifest(dir, "datadriven");
  const fs::path d(dir);
  DatadrivenRun run;
  run.config = load_config(at(d, "config.txt"));
  try {
    run.refs.elements = j.at("reference_elements").get<std::vector<int>>();
    run.refs.points = j.at("reference_points").get<std::vector<int>>();
    run.refs.elastic_fallback = j.at("elastic_fallback").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest in " + dir + ": " + e.what());
  }
  for (int c = 0; c < 3; ++c) {
    const std::string suffix = std::to_string(c) + ".mtpf";
    run.predictor[c] = sep::load_field(at(d, ("predictor_" + suffix).c_str()));
    run.corrected[c] = sep::load_field(at(d, ("corrected_" + suffix).c_str()));
  }
  run.displacement = sep::load_field(at(d, "displacement.mtpf"));
  run.truth_refs = plast::load_snapshot(at(d, "truth_refs.snap")).m;
  run.report = load_report(at(d, "report.csv"));
  return run;
}

}  // namespace mtpgd::driver
