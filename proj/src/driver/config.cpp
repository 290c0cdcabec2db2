// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/driver/config.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "mtpgd/common.hpp"

namespace mtpgd::driver {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad integer '" + value +
                      "'");
  }
}

}  // namespace

void apply_override(RunConfig& c, const std::string& key,
                    const std::string& value) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"mesh_file", [](RunConfig& r, const std::string& v) { r.mesh_file = v; }},
      {"mesh_kind", [](RunConfig& r, const std::string& v) { r.mesh_kind = v; }},
      {"mesh_length", [](RunConfig& r, const std::string& v) { r.mesh_length = parse_double("mesh_length", v); }},
      {"mesh_height", [](RunConfig& r, const std::string& v) { r.mesh_height = parse_double("mesh_height", v); }},
      {"mesh_mid_height", [](RunConfig& r, const std::string& v) { r.mesh_mid_height = parse_double("mesh_mid_height", v); }},
      {"mesh_nx", [](RunConfig& r, const std::string& v) { r.mesh_nx = parse_int("mesh_nx", v); }},
      {"mesh_ny", [](RunConfig& r, const std::string& v) { r.mesh_ny = parse_int("mesh_ny", v); }},
      {"young_modulus", [](RunConfig& r, const std::string& v) { r.material.young_modulus = parse_double("young_modulus", v); }},
      {"poisson_ratio", [](RunConfig& r, const std::string& v) { r.material.poisson_ratio = parse_double("poisson_ratio", v); }},
      {"yield_stress", [](RunConfig& r, const std::string& v) { r.material.yield_stress_initial = parse_double("yield_stress", v); }},
      {"hardening_modulus", [](RunConfig& r, const std::string& v) { r.material.hardening_modulus = parse_double("hardening_modulus", v); }},
      {"amplitude", [](RunConfig& r, const std::string& v) { r.amplitude = parse_double("amplitude", v); }},
      {"cycle_duration", [](RunConfig& r, const std::string& v) { r.cycle_duration = parse_double("cycle_duration", v); }},
      {"drift_slope", [](RunConfig& r, const std::string& v) { r.drift_slope = parse_double("drift_slope", v); }},
      {"n_micro", [](RunConfig& r, const std::string& v) { r.n_micro = parse_int("n_micro", v); }},
      {"training_cycles", [](RunConfig& r, const std::string& v) { r.training_cycles = parse_int("training_cycles", v); }},
      {"target_cycles", [](RunConfig& r, const std::string& v) { r.target_cycles = parse_int("target_cycles", v); }},
      {"decompose_tol", [](RunConfig& r, const std::string& v) { r.decompose_tol = parse_double("decompose_tol", v); }},
      {"decompose_max_rank", [](RunConfig& r, const std::string& v) { r.decompose_max_rank = parse_int("decompose_max_rank", v); }},
      {"solve_tol", [](RunConfig& r, const std::string& v) { r.solve_tol = parse_double("solve_tol", v); }},
      {"horizon_solve_tol", [](RunConfig& r, const std::string& v) { r.horizon_solve_tol = parse_double("horizon_solve_tol", v); }},
      {"solve_max_rank", [](RunConfig& r, const std::string& v) { r.solve_max_rank = parse_int("solve_max_rank", v); }},
      {"stagnation_tol", [](RunConfig& r, const std::string& v) { r.stagnation_tol = parse_double("stagnation_tol", v); }},
      {"max_sweeps", [](RunConfig& r, const std::string& v) { r.max_sweeps = parse_int("max_sweeps", v); }},
      {"outer_tol", [](RunConfig& r, const std::string& v) { r.outer_tol = parse_double("outer_tol", v); }},
      {"max_outer", [](RunConfig& r, const std::string& v) { r.max_outer = parse_int("max_outer", v); }},
      {"hodmd_d", [](RunConfig& r, const std::string& v) { r.hodmd_d = parse_int("hodmd_d", v); }},
      {"hodmd_tol_svd", [](RunConfig& r, const std::string& v) { r.hodmd_tol_svd = parse_double("hodmd_tol_svd", v); }},
      {"hodmd_tol_spectral", [](RunConfig& r, const std::string& v) { r.hodmd_tol_spectral = parse_double("hodmd_tol_spectral", v); }},
      {"growth_guard", [](RunConfig& r, const std::string& v) { r.growth_guard = parse_double("growth_guard", v); }},
      {"hodmd_resample_stride", [](RunConfig& r, const std::string& v) { r.hodmd_resample_stride = parse_int("hodmd_resample_stride", v); }},
      {"reference_elements", [](RunConfig& r, const std::string& v) { r.reference_elements = parse_int("reference_elements", v); }},
      {"correction_tol", [](RunConfig& r, const std::string& v) { r.correction_tol = parse_double("correction_tol", v); }},
      {"max_extra_rank", [](RunConfig& r, const std::string& v) { r.max_extra_rank = parse_int("max_extra_rank", v); }},
      {"correction_extension", [](RunConfig& r, const std::string& v) { r.correction_extension = v; }},
      {"output_dir", [](RunConfig& r, const std::string& v) { r.output_dir = v; }},
      {"seed", [](RunConfig& r, const std::string& v) { r.seed = static_cast<unsigned>(parse_int("seed", v)); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end())
    throw ConfigError("unknown config key '" + key + "'");
  it->second(c, value);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    apply_override(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

void RunConfig::validate() const {
  if (mesh_kind != "bar" && mesh_kind != "dogbone")
    throw ConfigError("mesh_kind must be 'bar' or 'dogbone'");
  if (!mesh_file.empty() && !std::filesystem::exists(mesh_file))
    throw ConfigError("mesh_file does not exist: " + mesh_file);
  if (mesh_nx < 1 || mesh_ny < 1)
    throw ConfigError("mesh_nx and mesh_ny must be >= 1");
  try {
    material.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("material: ") + e.what());
  }
  if (!(amplitude >= 0.0)) throw ConfigError("amplitude must be >= 0");
  if (!(cycle_duration > 0.0)) throw ConfigError("cycle_duration must be > 0");
  if (n_micro < 2) throw ConfigError("n_micro must be >= 2");
  if (training_cycles < 1) throw ConfigError("training_cycles must be >= 1");
  if (target_cycles <= training_cycles)
    throw ConfigError("target_cycles must exceed training_cycles");
  for (const auto& [name, tol] :
       {std::pair<const char*, double>{"decompose_tol", decompose_tol},
        {"solve_tol", solve_tol},
        {"horizon_solve_tol", horizon_solve_tol},
        {"stagnation_tol", stagnation_tol},
        {"outer_tol", outer_tol},
        {"hodmd_tol_svd", hodmd_tol_svd},
        {"hodmd_tol_spectral", hodmd_tol_spectral},
        {"correction_tol", correction_tol}})
    if (!(tol > 0.0))
      throw ConfigError(std::string(name) + " must be > 0");
  if (decompose_max_rank < 1 || solve_max_rank < 1 || max_extra_rank < 0)
    throw ConfigError("rank budgets must be positive");
  if (max_sweeps < 1 || max_outer < 1)
    throw ConfigError("iteration budgets must be positive");
  if (hodmd_d < 0) throw ConfigError("hodmd_d must be >= 0 (0 = auto)");
  if (hodmd_resample_stride < 0 || hodmd_resample_stride == 1)
    throw ConfigError("hodmd_resample_stride must be 0 (off) or >= 2");
  if (growth_guard < 0.0) throw ConfigError("growth_guard must be >= 0");
  if (reference_elements < 1)
    throw ConfigError("reference_elements must be >= 1");
  if (correction_extension != "zero" && correction_extension != "gappy")
    throw ConfigError("correction_extension must be 'zero' or 'gappy'");
}

sep::TimeGrid RunConfig::training_grid() const {
  return {n_micro, training_cycles, cycle_duration, 0.0};
}

sep::TimeGrid RunConfig::forecast_grid() const {
  return training_grid().continuation(target_cycles - training_cycles);
}

sep::TimeGrid RunConfig::full_grid() const {
  return {n_micro, target_cycles, cycle_duration, 0.0};
}

fem::LoadProgram RunConfig::load_program(int cycles) const {
  return {amplitude, cycle_duration, cycles, drift_slope};
}

void write_config(std::ostream& os, const RunConfig& c) {
  os.precision(17);
  os << "mesh_file = " << c.mesh_file << '\n'
     << "mesh_kind = " << c.mesh_kind << '\n'
     << "mesh_length = " << c.mesh_length << '\n'
     << "mesh_height = " << c.mesh_height << '\n'
     << "mesh_mid_height = " << c.mesh_mid_height << '\n'
     << "mesh_nx = " << c.mesh_nx << '\n'
     << "mesh_ny = " << c.mesh_ny << '\n'
     << "young_modulus = " << c.material.young_modulus << '\n'
     << "poisson_ratio = " << c.material.poisson_ratio << '\n'
     << "yield_stress = " << c.material.yield_stress_initial << '\n'
     << "hardening_modulus = " << c.material.hardening_modulus << '\n'
     << "amplitude = " << c.amplitude << '\n'
     << "cycle_duration = " << c.cycle_duration << '\n'
     << "drift_slope = " << c.drift_slope << '\n'
     << "n_micro = " << c.n_micro << '\n'
     << "training_cycles = " << c.training_cycles << '\n'
     << "target_cycles = " << c.target_cycles << '\n'
     << "decompose_tol = " << c.decompose_tol << '\n'
     << "decompose_max_rank = " << c.decompose_max_rank << '\n'
     << "solve_tol = " << c.solve_tol << '\n'
     << "horizon_solve_tol = " << c.horizon_solve_tol << '\n'
     << "solve_max_rank = " << c.solve_max_rank << '\n'
     << "stagnation_tol = " << c.stagnation_tol << '\n'
     << "max_sweeps = " << c.max_sweeps << '\n'
     << "outer_tol = " << c.outer_tol << '\n'
     << "max_outer = " << c.max_outer << '\n'
     << "hodmd_d = " << c.hodmd_d << '\n'
     << "hodmd_tol_svd = " << c.hodmd_tol_svd << '\n'
     << "hodmd_tol_spectral = " << c.hodmd_tol_spectral << '\n'
     << "growth_guard = " << c.growth_guard << '\n'
     << "hodmd_resample_stride = " << c.hodmd_resample_stride << '\n'
     << "reference_elements = " << c.reference_elements << '\n'
     << "correction_tol = " << c.correction_tol << '\n'
     << "max_extra_rank = " << c.max_extra_rank << '\n'
     << "correction_extension = " << c.correction_extension << '\n'
     << "output_dir = " << c.output_dir << '\n'
     << "seed = " << c.seed << '\n';
}

void save_config(const std::string& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config: " + path);
  write_config(out, config);
  if (!out) throw IoError("config write failed: " + path);
}

}  // namespace mtpgd::driver
