// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/driver/report.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "mtpgd/common.hpp"

namespace mtpgd::driver {

namespace {

void row(std::ostream& os, const std::string& field, const std::string& value,
         const std::string& unit) {
  os << field << ',' << value << ',' << unit << '\n';
}

template <typename T>
std::string num(T v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

void RunReport::write_csv(std::ostream& os) const {
  os << "field,value,unit\n";
  row(os, "method", method, "-");
  row(os, "cycles", num(cycles), "cycles");
  row(os, "n_points", num(n_points), "points");
  row(os, "outer_iterations", num(outer_iterations), "iterations");
  for (std::size_t i = 0; i < outer_residuals.size(); ++i)
    row(os, "outer_residual[" + num(i) + "]", num(outer_residuals[i]), "rel");
  for (std::size_t i = 0; i < integration_calls.size(); ++i)
    row(os, "integration_calls[" + num(i) + "]", num(integration_calls[i]),
        "evals");
  row(os, "sparse_calls", num(sparse_calls), "evals");
  row(os, "total_calls", num(total_calls), "evals");
  for (int c = 0; c < 3; ++c)
    row(os, "rank_base[" + num(c) + "]", num(rank_base[c]), "modes");
  for (int c = 0; c < 3; ++c)
    row(os, "rank_corrected[" + num(c) + "]", num(rank_corrected[c]), "modes");
  row(os, "displacement_rank", num(displacement_rank), "modes");
  row(os, "equilibrium_residual", num(equilibrium_residual), "rel");
  row(os, "error_refs_before", num(error_refs_before), "rel");
  row(os, "error_refs_after", num(error_refs_after), "rel");
  row(os, "orthogonality_defect", num(orthogonality_defect), "rel");
  row(os, "growth_warning", num(static_cast<int>(growth_warning)), "flag");
  row(os, "elastic_fallback", num(static_cast<int>(elastic_fallback)), "flag");
  row(os, "enrich_stagnation", num(static_cast<int>(enrich_stagnation)),
      "flag");
  row(os, "rank_deficient_update", num(static_cast<int>(rank_deficient_update)),
      "flag");
  for (std::size_t i = 0; i < reference_elements.size(); ++i)
    row(os, "reference_element[" + num(i) + "]", num(reference_elements[i]),
        "element");
  for (const auto& [name, seconds] : phase_seconds)
    row(os, "wall_" + name, num(seconds), "s");
}

bool RunReport::same_results(const RunReport& o) const {
  return method == o.method && cycles == o.cycles && n_points == o.n_points &&
         outer_iterations == o.outer_iterations &&
         outer_residuals == o.outer_residuals &&
         integration_calls == o.integration_calls &&
         sparse_calls == o.sparse_calls && total_calls == o.total_calls &&
         rank_base == o.rank_base && rank_corrected == o.rank_corrected &&
         displacement_rank == o.displacement_rank &&
         equilibrium_residual == o.equilibrium_residual &&
         error_refs_before == o.error_refs_before &&
         error_refs_after == o.error_refs_after &&
         orthogonality_defect == o.orthogonality_defect &&
         growth_warning == o.growth_warning &&
         elastic_fallback == o.elastic_fallback &&
         enrich_stagnation == o.enrich_stagnation &&
         rank_deficient_update == o.rank_deficient_update &&
         reference_elements == o.reference_elements;
}

void save_report(const std::string& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  report.write_csv(out);
  if (!out) throw IoError("report write failed: " + path);
}

RunReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report: " + path);
  RunReport r;
  std::string line;
  if (!std::getline(in, line) || line != "field,value,unit")
    throw IoError("not a report file: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.rfind(',');
    if (c1 == std::string::npos || c2 <= c1)
      throw IoError("malformed report row in " + path + ": " + line);
    const std::string field = line.substr(0, c1);
    const std::string value = line.substr(c1 + 1, c2 - c1 - 1);
    auto as_d = [&] { return std::stod(value); };
    auto as_i = [&] { return std::stoi(value); };
    auto as_u = [&] { return static_cast<std::uint64_t>(std::stoull(value)); };
    auto indexed = [&](const std::string& prefix) {
      return field.rfind(prefix + "[", 0) == 0;
    };
    try {
      if (field == "method") r.method = value;
      else if (field == "cycles") r.cycles = as_i();
      else if (field == "n_points") r.n_points = as_i();
      else if (field == "outer_iterations") r.outer_iterations = as_i();
      else if (indexed("outer_residual")) r.outer_residuals.push_back(as_d());
      else if (indexed("integration_calls")) r.integration_calls.push_back(as_u());
      else if (field == "sparse_calls") r.sparse_calls = as_u();
      else if (field == "total_calls") r.total_calls = as_u();
      else if (indexed("rank_base")) {
        const int c = std::stoi(field.substr(10));
        r.rank_base[c] = as_i();
      } else if (indexed("rank_corrected")) {
        const int c = std::stoi(field.substr(15));
        r.rank_corrected[c] = as_i();
      } else if (field == "displacement_rank") r.displacement_rank = as_i();
      else if (field == "equilibrium_residual") r.equilibrium_residual = as_d();
      else if (field == "error_refs_before") r.error_refs_before = as_d();
      else if (field == "error_refs_after") r.error_refs_after = as_d();
      else if (field == "orthogonality_defect") r.orthogonality_defect = as_d();
      else if (field == "growth_warning") r.growth_warning = as_i() != 0;
      else if (field == "elastic_fallback") r.elastic_fallback = as_i() != 0;
      else if (field == "enrich_stagnation") r.enrich_stagnation = as_i() != 0;
      else if (field == "rank_deficient_update") r.rank_deficient_update = as_i() != 0;
      else if (indexed("reference_element")) r.reference_elements.push_back(as_i());
      else if (field.rfind("wall_", 0) == 0)
        r.phase_seconds.emplace_back(field.substr(5), as_d());
      else throw IoError("unknown report field in " + path + ": " + field);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      throw IoError("malformed report value in " + path + ": " + line);
    }
  }
  return r;
}

void ComparisonReport::write_csv(std::ostream& os) const {
  os << "field,value,unit\n";
  row(os, "error_before", num(error_before), "rel");
  row(os, "error_after", num(error_after), "rel");
  row(os, "error_refs_before", num(error_refs_before), "rel");
  row(os, "error_refs_after", num(error_refs_after), "rel");
  row(os, "sparse_calls", num(sparse_calls), "evals");
  row(os, "reference_calls_per_pass", num(reference_calls_per_pass), "evals");
  row(os, "call_ratio", num(call_ratio), "ratio");
  row(os, "speedup_overall", num(speedup_overall), "ratio");
  row(os, "speedup_nonlinear", num(speedup_nonlinear), "ratio");
  row(os, "ref_equilibrium", num(ref_equilibrium), "rel");
  row(os, "dd_equilibrium", num(dd_equilibrium), "rel");
}

}  // namespace mtpgd::driver
