#include <cmath>
#include <doctest.h>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "ensnse/harness.hpp"

using namespace ensnse;

TEST_SUITE("harness") {

TEST_CASE("config validation derives sizes and rejects bad fields") {
  RunConfig c;  // defaults: dt = 0.05, tfinal = 1, grid_n derived
  ValidatedConfig v = validate_config(c);
  CHECK(v.grid_n == 10);
  CHECK(v.n_steps == 20);

  RunConfig pinned = c;
  pinned.grid_n = 7;
  CHECK(validate_config(pinned).grid_n == 7);

  auto rejects = [](auto&& mutate) {
    RunConfig bad;
    mutate(bad);
    CHECK_THROWS_AS((void)validate_config(bad), ConfigError);
  };
  rejects([](RunConfig& b) { b.problem = "lid-cavity"; });
  rejects([](RunConfig& b) { b.nu = 0.0; });
  rejects([](RunConfig& b) { b.dt = -0.1; });
  rejects([](RunConfig& b) { b.tfinal = 0.0; });
  rejects([](RunConfig& b) { b.dt = 0.3; });            // 1/0.3 not integral
  rejects([](RunConfig& b) { b.tfinal = b.dt; });       // single step
  rejects([](RunConfig& b) { b.grid_n = -2; });
  rejects([](RunConfig& b) { b.members = 0; });
  rejects([](RunConfig& b) { b.epsilon = {1e-3}; });    // wrong length for 2
  rejects([](RunConfig& b) { b.scheme = "bdf3"; });
  rejects([](RunConfig& b) { b.gamma = 0.49; });
  rejects([](RunConfig& b) { b.gamma = 1.01; });
  rejects([](RunConfig& b) { b.grad_div = -1.0; });
  rejects([](RunConfig& b) { b.startup = "spin"; });
  rejects([](RunConfig& b) { b.cfl_threshold = 0.0; });
  rejects([](RunConfig& b) { b.format = "xml"; });
}

TEST_CASE("a short run populates every series") {
  RunConfig c;
  c.dt = 0.125;
  c.tfinal = 0.5;       // 4 steps, grid_n derives to 4
  c.record_trace = true;
  RunResult r = run_simulation(c);

  CHECK(r.h == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].t.size() == 5);       // levels 0..4
  CHECK(r.errors[0].dt == 0.125);
  CHECK(r.reports.size() == 2);           // advances beyond the start levels
  CHECK(r.mean_velocity_l2.size() == 3);  // levels 2..4
  REQUIRE(r.traces.size() == 2);
  CHECK(r.traces[0].velocity.size() == 5);

  REQUIRE(r.summary.size() == 2);
  CHECK(r.summary[0].eps == 1e-3);        // default two-member perturbations
  CHECK(r.summary[1].eps == -1e-3);
  for (const auto& sm : r.summary) {
    CHECK(std::isfinite(sm.velocity_inf0));
    CHECK(sm.velocity_inf0 > 0.0);
    CHECK(sm.gradient_20 > 0.0);
    CHECK(sm.max_cfl >= 0.0);
    CHECK(sm.final_kinetic_energy > 0.0);
  }
  CHECK(r.mean_inf0 > 0.0);
  CHECK(r.mean_grad_20 > 0.0);

  // Level 0 of the decaying vortex is the zero state: zero error there.
  CHECK(r.errors[0].velocity_l2[0] <= 1e-14);

  RunConfig solo = c;
  solo.members = 1;
  solo.record_trace = false;
  RunResult rs = run_simulation(solo);
  CHECK(rs.summary.size() == 1);
  CHECK(rs.summary[0].eps == 0.0);

  RunConfig trio = c;
  trio.members = 3;
  trio.record_trace = false;
  RunResult rt = run_simulation(trio);
  CHECK(rt.summary[0].eps == 1e-3);
  CHECK(rt.summary[1].eps == -1e-3);
  CHECK(rt.summary[2].eps == 1e-3);
}

TEST_CASE("convergence table round-trips through CSV exactly") {
  RunConfig base;
  base.dt = 0.125;
  base.tfinal = 0.5;
  ConvergenceTable t = run_convergence(base, {0.125, 0.0625});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].grid_n == 4);
  CHECK(t.rows[1].grid_n == 8);
  CHECK(std::isnan(t.rows[0].rate_inf0[0]));
  CHECK(std::isnan(t.rows[0].rate_20[1]));
  // Loose sanity on the measured rates of the tiny ladder.
  for (int j = 0; j < 2; ++j) {
    CHECK(t.rows[1].rate_inf0[j] > 1.0);
    CHECK(t.rows[1].rate_inf0[j] < 3.0);
  }

  std::stringstream buf;
  write_convergence_csv(t, buf);
  ConvergenceTable back = read_convergence_csv(buf);
  CHECK(back.scheme == t.scheme);
  CHECK(back.gamma == t.gamma);
  CHECK(back.sampling == t.sampling);
  CHECK(back.pairing == t.pairing);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto &a = t.rows[i], &b = back.rows[i];
    CHECK(a.dt == b.dt);
    CHECK(a.h == b.h);
    CHECK(a.grid_n == b.grid_n);
    REQUIRE(a.velocity_inf0.size() == b.velocity_inf0.size());
    for (std::size_t j = 0; j < a.velocity_inf0.size(); ++j) {
      CHECK(a.velocity_inf0[j] == b.velocity_inf0[j]);
      CHECK(a.gradient_20[j] == b.gradient_20[j]);
      if (std::isnan(a.rate_inf0[j])) {
        CHECK(std::isnan(b.rate_inf0[j]));
      } else {
        CHECK(a.rate_inf0[j] == b.rate_inf0[j]);
      }
      if (std::isnan(a.rate_20[j])) {
        CHECK(std::isnan(b.rate_20[j]));
      } else {
        CHECK(a.rate_20[j] == b.rate_20[j]);
      }
    }
    CHECK(a.mean_inf0 == b.mean_inf0);
    CHECK(a.mean_grad_20 == b.mean_grad_20);
  }

  std::stringstream junk("not,a,table\n1,2,3\n");
  CHECK_THROWS_AS((void)read_convergence_csv(junk), std::runtime_error);
}

TEST_CASE("JSON serializations parse and carry the right shapes") {
  RunConfig c;
  c.dt = 0.125;
  c.tfinal = 0.5;
  RunResult r = run_simulation(c);
  nlohmann::json j = nlohmann::json::parse(run_json(r));
  CHECK(j["problem"] == "green-taylor");
  CHECK(j["scheme"] == "blended");
  REQUIRE(j["members"].size() == 2);
  CHECK(j["members"][0]["velocity_inf0"].get<double>() ==
        doctest::Approx(r.summary[0].velocity_inf0));
  CHECK(j["members"][1]["t"].size() == 5);
  CHECK(j["mean_inf0"].get<double>() == doctest::Approx(r.mean_inf0));

  ConvergenceTable t = run_convergence(c, {0.125, 0.0625});
  nlohmann::json cj = nlohmann::json::parse(convergence_json(t));
  REQUIRE(cj["rows"].size() == 2);
  CHECK(cj["rows"][0]["rate_inf0"][0].is_null());
  CHECK(cj["rows"][1]["rate_inf0"][0].get<double>() ==
        doctest::Approx(t.rows[1].rate_inf0[0]));
  CHECK(cj["rows"][1]["grid_n"] == 8);
  CHECK(cj["pairing"].get<std::string>() == t.pairing);
}

TEST_CASE("run CSV lists summaries then per-level errors") {
  RunConfig c;
  c.dt = 0.125;
  c.tfinal = 0.5;
  RunResult r = run_simulation(c);
  std::stringstream buf;
  write_run_csv(r, buf);
  std::string text = buf.str();
  CHECK(text.find("velocity_inf0") != std::string::npos);
  CHECK(text.find("member,level,t,") != std::string::npos);
  // One summary row per member plus one error row per (member, level).
  int lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == 1 + 1 + 2 + 1 + 2 * 5);
}

TEST_CASE("bdf2 scheme routes through the same pipeline") {
  RunConfig c;
  c.dt = 0.125;
  c.tfinal = 0.5;
  c.scheme = "bdf2";
  RunResult r = run_simulation(c);
  CHECK(r.summary[0].velocity_inf0 > 0.0);
  ConvergenceTable t = run_convergence(c, {0.125});
  CHECK(t.scheme == "bdf2");
  CHECK(t.gamma == 1.0);
}

}  // TEST_SUITE
