// Command-line front end: run (single ensemble simulation), converge
// (dt-halving ladder with rates), probe (derivative-weight truncation
// constants and time-consistency instruments).
#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "ensnse/harness.hpp"

namespace {

using ensnse::RunConfig;

void apply_json_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ensnse::ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ensnse::ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("problem", cfg.problem);
  get("nu", cfg.nu);
  get("dt", cfg.dt);
  get("tfinal", cfg.tfinal);
  get("grid_n", cfg.grid_n);
  get("members", cfg.members);
  get("epsilon", cfg.epsilon);
  get("scheme", cfg.scheme);
  get("gamma", cfg.gamma);
  get("grad_div", cfg.grad_div);
  get("startup", cfg.startup);
  get("cfl_threshold", cfg.cfl_threshold);
  get("out", cfg.out);
  get("format", cfg.format);
}

// Writes to cfg.out when set, stdout otherwise.
void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out);
  if (!out) throw ensnse::ConfigError("config: cannot open output '" + cfg.out + "'");
  out << text;
}

std::string probe_report(const std::string& format) {
  const double gammas[] = {0.5, 0.75, 1.0};
  std::vector<std::array<double, 4>> trunc;  // per gamma, degrees 0..3
  for (double g : gammas) {
    std::array<double, 4> row{};
    for (int d = 0; d < 4; ++d) row[d] = ensnse::truncation_probe(g, d);
    trunc.push_back(row);
  }

  // Consistency instruments on the decaying vortex flow, mid-interval.
  const ensnse::AnalyticProblem problem = ensnse::green_taylor(0.01);
  const ensnse::Mesh mesh = ensnse::unit_square_mesh(16);
  const double dts[] = {0.05, 0.025, 0.0125};
  std::vector<ensnse::ConsistencyReport> reports;
  for (double dt : dts)
    reports.push_back(ensnse::consistency_check(problem.base, mesh, 0.5, dt));

  if (format == "json") {
    nlohmann::json j;
    j["truncation"] = nlohmann::json::array();
    for (std::size_t i = 0; i < trunc.size(); ++i)
      j["truncation"].push_back({{"gamma", gammas[i]}, {"by_degree", trunc[i]}});
    j["consistency"] = nlohmann::json::array();
    for (const auto& r : reports)
      j["consistency"].push_back({{"t_n", r.t_n},
                                  {"dt", r.dt},
                                  {"lhs1", r.lhs1},
                                  {"rhs1", r.rhs1},
                                  {"rhs1_grad", r.rhs1_grad},
                                  {"lhs2", r.lhs2},
                                  {"rhs2", r.rhs2},
                                  {"pass1", r.pass1},
                                  {"pass2", r.pass2}});
    return j.dump(2) + "\n";
  }

  std::ostringstream out;
  out << std::scientific << std::setprecision(16);
  out << "# truncation errors of the blended derivative weights on t^degree\n";
  out << "gamma,degree0,degree1,degree2,degree3\n";
  for (std::size_t i = 0; i < trunc.size(); ++i) {
    out << gammas[i];
    for (double v : trunc[i]) out << "," << v;
    out << "\n";
  }
  out << "# consistency instruments, decaying vortex at t_n=0.5, grid n=16\n";
  out << "t_n,dt,lhs1,rhs1,rhs1_grad,lhs2,rhs2,pass1,pass2\n";
  for (const auto& r : reports)
    out << r.t_n << "," << r.dt << "," << r.lhs1 << "," << r.rhs1 << "," << r.rhs1_grad
        << "," << r.lhs2 << "," << r.rhs2 << "," << (r.pass1 ? 1 : 0) << ","
        << (r.pass2 ? 1 : 0) << "\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble solver for time-dependent incompressible flow"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  int rows = 4;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem, "Problem id (green-taylor)");
    sub->add_option("--nu", cfg.nu, "Kinematic viscosity");
    sub->add_option("--dt", cfg.dt, "Time step");
    sub->add_option("--tfinal", cfg.tfinal, "Final time");
    sub->add_option("--grid-n", cfg.grid_n, "Grid cells per side (0 derives 1/(2 dt))");
    sub->add_option("--members", cfg.members, "Ensemble size J");
    sub->add_option("--epsilon", cfg.epsilon, "Member perturbations, comma separated")
        ->delimiter(',');
    sub->add_option("--scheme", cfg.scheme, "Timestepping scheme (blended | bdf2)");
    sub->add_option("--gamma", cfg.gamma, "Blend parameter in [0.5, 1]");
    sub->add_option("--grad-div", cfg.grad_div, "Grad-div stabilization weight");
    sub->add_option("--startup", cfg.startup, "Startup mode (exact | cn)");
    sub->add_option("--cfl-threshold", cfg.cfl_threshold, "Advisory CFL flag threshold");
    sub->add_option("--out", cfg.out, "Output path (default stdout)");
    sub->add_option("--format", cfg.format, "Output format (csv | json)");
    sub->add_option("--config", config_path, "JSON config file; flags override it");
  };

  CLI::App* run = app.add_subcommand("run", "Run one ensemble simulation");
  add_common(run);
  CLI::App* converge = app.add_subcommand("converge", "Run a dt-halving convergence ladder");
  add_common(converge);
  converge->add_option("--rows", rows, "Ladder length (dt halves per row)");
  CLI::App* probe = app.add_subcommand("probe", "Print truncation and consistency probes");
  probe->add_option("--format", cfg.format, "Output format (csv | json)");
  probe->add_option("--out", cfg.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);

    // File config first, then replay the flags the user actually passed.
    if (!config_path.empty()) {
      RunConfig file_cfg;
      apply_json_config(config_path, file_cfg);
      CLI::App* sub = app.get_subcommands().front();
      auto keep = [&](const std::string& flag, auto& live, auto& from_file) {
        if (sub->count(flag) == 0) live = from_file;
      };
      keep("--problem", cfg.problem, file_cfg.problem);
      keep("--nu", cfg.nu, file_cfg.nu);
      keep("--dt", cfg.dt, file_cfg.dt);
      keep("--tfinal", cfg.tfinal, file_cfg.tfinal);
      keep("--grid-n", cfg.grid_n, file_cfg.grid_n);
      keep("--members", cfg.members, file_cfg.members);
      keep("--epsilon", cfg.epsilon, file_cfg.epsilon);
      keep("--scheme", cfg.scheme, file_cfg.scheme);
      keep("--gamma", cfg.gamma, file_cfg.gamma);
      keep("--grad-div", cfg.grad_div, file_cfg.grad_div);
      keep("--startup", cfg.startup, file_cfg.startup);
      keep("--cfl-threshold", cfg.cfl_threshold, file_cfg.cfl_threshold);
      keep("--out", cfg.out, file_cfg.out);
      keep("--format", cfg.format, file_cfg.format);
    }

    if (run->parsed()) {
      ensnse::RunResult result = ensnse::run_simulation(cfg);
      if (cfg.format == "json") {
        emit(cfg, ensnse::run_json(result) + "\n");
      } else {
        std::ostringstream os;
        ensnse::write_run_csv(result, os);
        emit(cfg, os.str());
      }
    } else if (converge->parsed()) {
      if (rows < 1) throw ensnse::ConfigError("config: rows must be >= 1");
      std::vector<double> dts;
      for (int i = 0; i < rows; ++i) dts.push_back(cfg.dt / double(1 << i));
      ensnse::ConvergenceTable table = ensnse::run_convergence(cfg, dts);
      if (cfg.format == "json") {
        emit(cfg, ensnse::convergence_json(table) + "\n");
      } else {
        std::ostringstream os;
        ensnse::write_convergence_csv(table, os);
        emit(cfg, os.str());
      }
    } else if (probe->parsed()) {
      if (cfg.format != "csv" && cfg.format != "json")
        throw ensnse::ConfigError("config: format must be 'csv' or 'json'");
      emit(cfg, probe_report(cfg.format));
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ensnse::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ensnse::BlowupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ensnse::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
