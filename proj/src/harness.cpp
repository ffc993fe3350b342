#include "ensnse/harness.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

namespace ensnse {

namespace {

std::vector<double> default_epsilons(int members) {
  if (members == 1) return {0.0};
  std::vector<double> eps(members);
  // Paired +/- perturbations keep the ensemble mean on the base flow.
  for (int j = 0; j < members; ++j) eps[j] = (j % 2 == 0 ? 1.0 : -1.0) * 1e-3;
  return eps;
}

std::vector<double> resolve_epsilons(const RunConfig& c) {
  if (c.epsilon.empty()) return default_epsilons(c.members);
  return c.epsilon;
}

}  // namespace

ValidatedConfig validate_config(const RunConfig& c) {
  if (c.problem != "green-taylor")
    throw ConfigError("config: unknown problem '" + c.problem + "' (supported: green-taylor)");
  if (!(c.nu > 0.0)) throw ConfigError("config: nu must be positive");
  if (!(c.dt > 0.0)) throw ConfigError("config: dt must be positive");
  if (!(c.tfinal > 0.0)) throw ConfigError("config: tfinal must be positive");

  ValidatedConfig v;
  double steps = c.tfinal / c.dt;
  v.n_steps = static_cast<int>(std::llround(steps));
  if (v.n_steps < 2 || std::abs(v.n_steps * c.dt - c.tfinal) > 1e-12)
    throw ConfigError("config: dt must divide tfinal into at least 2 steps");

  if (c.grid_n < 0) throw ConfigError("config: grid_n must be positive (or 0 to derive)");
  v.grid_n = c.grid_n != 0 ? c.grid_n : static_cast<int>(std::llround(1.0 / (2.0 * c.dt)));
  if (v.grid_n < 1) throw ConfigError("config: derived grid_n < 1; pass grid_n explicitly");

  if (c.members < 1) throw ConfigError("config: members must be >= 1");
  if (!c.epsilon.empty() && static_cast<int>(c.epsilon.size()) != c.members)
    throw ConfigError("config: epsilon list length must equal members");
  if (c.scheme != "blended" && c.scheme != "bdf2")
    throw ConfigError("config: scheme must be 'blended' or 'bdf2'");
  if (!(c.gamma >= 0.5 && c.gamma <= 1.0))
    throw ConfigError("config: gamma must lie in [0.5, 1]");
  if (c.grad_div < 0.0) throw ConfigError("config: grad_div must be >= 0");
  if (c.startup != "exact" && c.startup != "cn")
    throw ConfigError("config: startup must be 'exact' or 'cn'");
  if (!(c.cfl_threshold > 0.0)) throw ConfigError("config: cfl_threshold must be positive");
  if (c.format != "csv" && c.format != "json")
    throw ConfigError("config: format must be 'csv' or 'json'");
  return v;
}

RunResult run_simulation(const RunConfig& config) {
  const ValidatedConfig v = validate_config(config);
  const std::vector<double> eps = resolve_epsilons(config);
  const int J = static_cast<int>(eps.size());

  const AnalyticProblem problem = green_taylor(config.nu);
  auto space = std::make_shared<const TaylorHoodSpace>(unit_square_mesh(v.grid_n));
  const SchemeCoefficients scheme =
      config.scheme == "blended" ? bdf_coefficients(config.gamma) : en_bdf2_coefficients();
  const StartupMode mode =
      config.startup == "exact" ? StartupMode::Exact : StartupMode::CrankNicolson;

  EnsembleState state = startup(space, problem, eps, scheme, config.dt, 0.0, mode,
                                config.grad_div, config.cfl_threshold);

  RunResult result;
  result.config = config;
  result.h = space->mesh().h;
  result.errors.resize(J);
  result.summary.resize(J);
  for (auto& es : result.errors) {
    es.dt = config.dt;
    es.h = result.h;
  }

  std::vector<FlowField> member_fields;
  member_fields.reserve(J);
  for (int j = 0; j < J; ++j) member_fields.push_back(problem.member(eps[j]));

  auto record_level = [&](int j, int level, const Eigen::VectorXd& u,
                          const Eigen::VectorXd* p) {
    const double t = level * config.dt;
    auto& es = result.errors[j];
    es.t.push_back(t);
    es.velocity_l2.push_back(l2_error(*space, u, member_fields[j].velocity, t));
    es.velocity_h1.push_back(h1_semi_error(*space, u, member_fields[j].velocity_gradient, t));
    if (p != nullptr)
      es.pressure_l2.push_back(pressure_l2_error(*space, *p, member_fields[j].pressure, t));
    else {
      // Startup levels before a pressure exists: record the interpolation
      // error of the analytic pressure, the data the startup carries.
      Eigen::VectorXd pi =
          interpolate_pressure(*space, member_fields[j].pressure, t).values;
      es.pressure_l2.push_back(pressure_l2_error(*space, pi, member_fields[j].pressure, t));
    }
  };

  // The exact counterpart of the discrete beta-extrapolated ensemble mean at
  // level n: average of (1 + eps_j) rescalings = (1 + mean eps) base.
  double sbar = 0.0;
  for (double e : eps) sbar += 1.0 + e;
  sbar /= J;
  auto record_mean_level = [&](void) {
    const double tn = state.time();
    const double dt = config.dt;
    const auto beta = scheme.beta;
    Eigen::VectorXd mean_h = ensemble_mean(state);
    VectorField exact_mean = [&, tn, dt, beta](double x, double y, double) {
      Vec2 a = problem.base.velocity(x, y, tn);
      Vec2 b = problem.base.velocity(x, y, tn - dt);
      Vec2 c = problem.base.velocity(x, y, tn - 2.0 * dt);
      return Vec2{sbar * (beta[0] * a.x + beta[1] * b.x + beta[2] * c.x),
                  sbar * (beta[0] * a.y + beta[1] * b.y + beta[2] * c.y)};
    };
    TensorField exact_mean_grad = [&, tn, dt, beta](double x, double y, double) {
      Eigen::Matrix2d g = beta[0] * problem.base.velocity_gradient(x, y, tn) +
                          beta[1] * problem.base.velocity_gradient(x, y, tn - dt) +
                          beta[2] * problem.base.velocity_gradient(x, y, tn - 2.0 * dt);
      return Eigen::Matrix2d(sbar * g);
    };
    result.mean_velocity_l2.push_back(l2_error(*space, mean_h, exact_mean, 0.0));
    result.mean_velocity_h1.push_back(h1_semi_error(*space, mean_h, exact_mean_grad, 0.0));
  };

  for (int j = 0; j < J; ++j) {
    record_level(j, 0, state.velocity[j][0], nullptr);
    record_level(j, 1, state.velocity[j][1], nullptr);
    record_level(j, 2, state.velocity[j][2],
                 mode == StartupMode::Exact ? &state.pressure[j] : nullptr);
  }
  record_mean_level();

  if (config.record_trace) {
    result.traces.resize(J);
    for (int j = 0; j < J; ++j) {
      auto& tr = result.traces[j];
      tr.dt = config.dt;
      tr.nu = config.nu;
      tr.homogeneous_bc = state.homogeneous_bc;
      for (int lvl = 0; lvl < 3; ++lvl) {
        tr.velocity.push_back(state.velocity[j][lvl]);
        tr.forcing_l2.push_back(field_l2_norm(space->mesh(), member_fields[j].forcing,
                                              lvl * config.dt));
      }
    }
  }

  const int advances = v.n_steps - 2;
  for (int s = 0; s < advances; ++s) {
    StepReport rep = advance(state);
    result.reports.push_back(rep);
    for (int j = 0; j < J; ++j) {
      record_level(j, rep.step_index, state.velocity[j][2], &state.pressure[j]);
      if (config.record_trace) {
        result.traces[j].velocity.push_back(state.velocity[j][2]);
        result.traces[j].forcing_l2.push_back(
            field_l2_norm(space->mesh(), member_fields[j].forcing, rep.time));
      }
    }
    record_mean_level();
  }

  for (int j = 0; j < J; ++j) {
    auto& sm = result.summary[j];
    sm.eps = eps[j];
    sm.velocity_inf0 = discrete_norm_inf0(result.errors[j].velocity_l2);
    sm.gradient_20 = discrete_norm_20(result.errors[j].velocity_h1, config.dt);
    sm.pressure_inf0 = discrete_norm_inf0(result.errors[j].pressure_l2);
    double max_cfl = 0.0;
    for (const auto& rep : result.reports)
      max_cfl = std::max(max_cfl, rep.members[j].cfl);
    sm.max_cfl = max_cfl;
    sm.final_kinetic_energy =
        result.reports.empty() ? 0.0 : result.reports.back().members[j].kinetic_energy;
  }
  result.mean_inf0 = discrete_norm_inf0(result.mean_velocity_l2);
  result.mean_grad_20 = discrete_norm_20(result.mean_velocity_h1, config.dt);
  return result;
}

ConvergenceTable run_convergence(const RunConfig& base, const std::vector<double>& dts) {
  if (dts.empty()) throw ConfigError("run_convergence: empty dt ladder");
  ConvergenceTable table;
  table.scheme = base.scheme;
  table.gamma = base.scheme == "bdf2" ? 1.0 : base.gamma;
  if (base.grid_n != 0) table.pairing = "grid_n pinned by config";

  for (double dt : dts) {
    RunConfig cfg = base;
    cfg.dt = dt;
    RunResult res = run_simulation(cfg);

    ConvergenceRow row;
    row.dt = dt;
    row.h = res.h;
    row.grid_n = validate_config(cfg).grid_n;
    for (const auto& sm : res.summary) {
      row.velocity_inf0.push_back(sm.velocity_inf0);
      row.gradient_20.push_back(sm.gradient_20);
    }
    row.mean_inf0 = res.mean_inf0;
    row.mean_grad_20 = res.mean_grad_20;

    if (table.rows.empty()) {
      row.rate_inf0.assign(row.velocity_inf0.size(), std::nan(""));
      row.rate_20.assign(row.velocity_inf0.size(), std::nan(""));
    } else {
      const auto& prev = table.rows.back();
      for (std::size_t j = 0; j < row.velocity_inf0.size(); ++j) {
        row.rate_inf0.push_back(convergence_rate(prev.velocity_inf0[j], row.velocity_inf0[j]));
        row.rate_20.push_back(convergence_rate(prev.gradient_20[j], row.gradient_20[j]));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

void write_double(std::ostream& out, double v) {
  out << std::scientific << std::setprecision(16) << v;
}

}  // namespace

void write_convergence_csv(const ConvergenceTable& table, std::ostream& out) {
  out << "# scheme=" << table.scheme << " gamma=" << table.gamma
      << " sampling=" << table.sampling << " pairing=\"" << table.pairing << "\"\n";
  out << "dt,h,grid_n,member,velocity_inf0,rate_inf0,gradient_20,rate_20,mean_inf0,mean_"
         "grad_20\n";
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.velocity_inf0.size(); ++j) {
      write_double(out, row.dt);
      out << ",";
      write_double(out, row.h);
      out << "," << row.grid_n << "," << (j + 1) << ",";
      write_double(out, row.velocity_inf0[j]);
      out << ",";
      write_double(out, row.rate_inf0[j]);
      out << ",";
      write_double(out, row.gradient_20[j]);
      out << ",";
      write_double(out, row.rate_20[j]);
      out << ",";
      write_double(out, row.mean_inf0);
      out << ",";
      write_double(out, row.mean_grad_20);
      out << "\n";
    }
  }
}

ConvergenceTable read_convergence_csv(std::istream& in) {
  ConvergenceTable table;
  std::string line;

  if (!std::getline(in, line) || line.rfind("# scheme=", 0) != 0)
    throw std::runtime_error("convergence csv: missing metadata line");
  {
    std::istringstream meta(line.substr(2));
    std::string tok;
    while (meta >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "scheme") table.scheme = val;
      else if (key == "gamma") table.gamma = std::stod(val);
      else if (key == "sampling") table.sampling = val;
      else if (key == "pairing") {
        // Quoted value may contain spaces; recover the rest of the line.
        std::string rest;
        std::getline(meta, rest);
        std::string full = val + rest;
        if (full.size() >= 2 && full.front() == '"' && full.back() == '"')
          full = full.substr(1, full.size() - 2);
        table.pairing = full;
      }
    }
  }
  if (!std::getline(in, line) || line.rfind("dt,", 0) != 0)
    throw std::runtime_error("convergence csv: missing header line");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw std::runtime_error("convergence csv: bad row");

    double dt = std::stod(cells[0]);
    int member = std::stoi(cells[3]);
    if (table.rows.empty() || std::abs(table.rows.back().dt - dt) > 1e-15 * std::abs(dt)) {
      ConvergenceRow row;
      row.dt = dt;
      row.h = std::stod(cells[1]);
      row.grid_n = std::stoi(cells[2]);
      row.mean_inf0 = std::stod(cells[8]);
      row.mean_grad_20 = std::stod(cells[9]);
      table.rows.push_back(std::move(row));
    }
    auto& row = table.rows.back();
    if (member != static_cast<int>(row.velocity_inf0.size()) + 1)
      throw std::runtime_error("convergence csv: member rows out of order");
    row.velocity_inf0.push_back(std::stod(cells[4]));
    row.rate_inf0.push_back(std::stod(cells[5]));
    row.gradient_20.push_back(std::stod(cells[6]));
    row.rate_20.push_back(std::stod(cells[7]));
  }
  return table;
}

std::string convergence_json(const ConvergenceTable& table) {
  nlohmann::json j;
  j["scheme"] = table.scheme;
  j["gamma"] = table.gamma;
  j["sampling"] = table.sampling;
  j["pairing"] = table.pairing;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r;
    r["dt"] = row.dt;
    r["h"] = row.h;
    r["grid_n"] = row.grid_n;
    r["velocity_inf0"] = row.velocity_inf0;
    r["gradient_20"] = row.gradient_20;
    auto rates = [](const std::vector<double>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (double x : v) {
        if (std::isnan(x)) a.push_back(nullptr);
        else a.push_back(x);
      }
      return a;
    };
    r["rate_inf0"] = rates(row.rate_inf0);
    r["rate_20"] = rates(row.rate_20);
    r["mean_inf0"] = row.mean_inf0;
    r["mean_grad_20"] = row.mean_grad_20;
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2);
}

void write_run_csv(const RunResult& result, std::ostream& out) {
  out << "# problem=" << result.config.problem << " scheme=" << result.config.scheme
      << " gamma=" << result.config.gamma << " dt=" << result.config.dt
      << " tfinal=" << result.config.tfinal << " h=" << result.h
      << " members=" << result.summary.size() << "\n";
  out << "member,eps,velocity_inf0,gradient_20,pressure_inf0,max_cfl,final_kinetic_energy\n";
  for (std::size_t j = 0; j < result.summary.size(); ++j) {
    const auto& sm = result.summary[j];
    out << (j + 1) << ",";
    write_double(out, sm.eps);
    out << ",";
    write_double(out, sm.velocity_inf0);
    out << ",";
    write_double(out, sm.gradient_20);
    out << ",";
    write_double(out, sm.pressure_inf0);
    out << ",";
    write_double(out, sm.max_cfl);
    out << ",";
    write_double(out, sm.final_kinetic_energy);
    out << "\n";
  }
  out << "member,level,t,velocity_l2,velocity_h1,pressure_l2\n";
  for (std::size_t j = 0; j < result.errors.size(); ++j) {
    const auto& es = result.errors[j];
    for (std::size_t n = 0; n < es.t.size(); ++n) {
      out << (j + 1) << "," << n << ",";
      write_double(out, es.t[n]);
      out << ",";
      write_double(out, es.velocity_l2[n]);
      out << ",";
      write_double(out, es.velocity_h1[n]);
      out << ",";
      write_double(out, es.pressure_l2[n]);
      out << "\n";
    }
  }
}

std::string run_json(const RunResult& result) {
  nlohmann::json j;
  j["problem"] = result.config.problem;
  j["scheme"] = result.config.scheme;
  j["gamma"] = result.config.gamma;
  j["dt"] = result.config.dt;
  j["tfinal"] = result.config.tfinal;
  j["nu"] = result.config.nu;
  j["h"] = result.h;
  j["members"] = nlohmann::json::array();
  for (std::size_t m = 0; m < result.summary.size(); ++m) {
    const auto& sm = result.summary[m];
    nlohmann::json mj;
    mj["eps"] = sm.eps;
    mj["velocity_inf0"] = sm.velocity_inf0;
    mj["gradient_20"] = sm.gradient_20;
    mj["pressure_inf0"] = sm.pressure_inf0;
    mj["max_cfl"] = sm.max_cfl;
    mj["final_kinetic_energy"] = sm.final_kinetic_energy;
    mj["t"] = result.errors[m].t;
    mj["velocity_l2"] = result.errors[m].velocity_l2;
    mj["velocity_h1"] = result.errors[m].velocity_h1;
    mj["pressure_l2"] = result.errors[m].pressure_l2;
    j["members"].push_back(std::move(mj));
  }
  j["mean_inf0"] = result.mean_inf0;
  j["mean_grad_20"] = result.mean_grad_20;
  return j.dump(2);
}

}  // namespace ensnse
