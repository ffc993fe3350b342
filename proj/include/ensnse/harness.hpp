#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ensnse/analytics.hpp"
#include "ensnse/stepper.hpp"

namespace ensnse {

// Errors that map to process exit codes: config 2, blowup 3 (from stepper),
// solver failure 4 (from stepper).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything a run needs; JSON config files mirror these field names and CLI
// flags override file values.
struct RunConfig {
  std::string problem = "green-taylor";
  double nu = 0.01;
  double dt = 0.05;
  double tfinal = 1.0;
  int grid_n = 0;  // 0 derives n = round(1 / (2 dt)), the h = 2 dt pairing
  int members = 2;
  std::vector<double> epsilon;  // defaults to +/- 1e-3 for two members
  std::string scheme = "blended";
  double gamma = 0.5;
  double grad_div = 0.0;
  std::string startup = "exact";
  double cfl_threshold = 1.0;
  std::string out;              // empty = stdout
  std::string format = "csv";
  bool record_trace = false;    // keep full velocity history (ledger runs)
};

// Throws ConfigError with the offending field named. Returns the derived
// grid size and step count.
struct ValidatedConfig {
  int grid_n = 0;
  int n_steps = 0;  // total time levels N_T = tfinal / dt
};
ValidatedConfig validate_config(const RunConfig& config);

struct MemberSummary {
  double eps = 0.0;
  double velocity_inf0 = 0.0;   // max_n L2 velocity error
  double gradient_20 = 0.0;     // sqrt(sum_n ||grad e||^2 dt)
  double pressure_inf0 = 0.0;
  double max_cfl = 0.0;
  double final_kinetic_energy = 0.0;
};

struct RunResult {
  RunConfig config;
  double h = 0.0;
  std::vector<ErrorSeries> errors;       // per member, every level 0..N_T
  std::vector<MemberSummary> summary;    // per member
  std::vector<StepReport> reports;       // per advance
  std::vector<MemberTrace> traces;       // filled when record_trace
  // Mean-error series: the beta-extrapolated ensemble mean against the same
  // combination of the true member solutions, levels 2..N_T.
  std::vector<double> mean_velocity_l2;
  std::vector<double> mean_velocity_h1;
  double mean_inf0 = 0.0;
  double mean_grad_20 = 0.0;
};

RunResult run_simulation(const RunConfig& config);

struct ConvergenceRow {
  double dt = 0.0;
  double h = 0.0;
  int grid_n = 0;
  std::vector<double> velocity_inf0;  // per member
  std::vector<double> gradient_20;    // per member
  std::vector<double> rate_inf0;      // per member, NaN on the first row
  std::vector<double> rate_20;
  double mean_inf0 = 0.0;
  double mean_grad_20 = 0.0;
};

struct ConvergenceTable {
  std::string scheme;
  double gamma = 0.0;
  std::string sampling = "every-step-including-startup";
  std::string pairing = "grid_n = 1/(2 dt) unless overridden";
  std::vector<ConvergenceRow> rows;
};

// One run per dt; grid_n rederived per row unless the base config pins it.
ConvergenceTable run_convergence(const RunConfig& base, const std::vector<double>& dts);

// Serialization. CSV carries >= 6 significant digits in scientific notation
// and round-trips through read_convergence_csv.
void write_convergence_csv(const ConvergenceTable& table, std::ostream& out);
ConvergenceTable read_convergence_csv(std::istream& in);
std::string convergence_json(const ConvergenceTable& table);

void write_run_csv(const RunResult& result, std::ostream& out);
std::string run_json(const RunResult& result);

}  // namespace ensnse
