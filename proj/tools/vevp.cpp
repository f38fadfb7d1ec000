// Command-line front end: simulate, instability1d, sweep-eps, sweep-n, twin, steady-check.
//
// Exit codes: 0 success, 2 config error, 3 blow-up, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vevp/io.hpp"

namespace fs = std::filesystem;
using namespace vevp;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kBlowUp = 3, kIo = 4 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

RunConfig resolve(const Options& o) {
  auto overrides = o.overrides;
  if (o.seed) overrides.push_back("init.seed=" + std::to_string(*o.seed));
  if (!o.out.empty()) {
    nlohmann::json s = o.out;
    overrides.push_back("output.directory=" + s.dump());
  }
  RunConfig c = o.config.empty() ? parse_config("{}", overrides) : load_config(o.config, overrides);
  const fs::path dir = c.output.directory;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::ofstream(dir / "config.json") << serialize(c) << '\n';
  return c;
}

std::string snapshot_name(long index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06ld.bin", index);
  return buf;
}

int cmd_simulate(const RunConfig& c) {
  const fs::path dir = c.output.directory;
  const auto setup = build_setup(c);
  std::vector<DiagnosticsRecord> records;
  long snaps = 0;
  std::vector<RunCallback> callbacks;
  if (c.time.diag_cadence > 0.0)
    callbacks.push_back({c.time.diag_cadence, [&](const State& s) {
                           records.push_back(compute_record(s, c.params, c.variant));
                         }});
  if (c.time.snapshot_cadence > 0.0 && c.wants("snapshot"))
    callbacks.push_back({c.time.snapshot_cadence, [&](const State& s) { write_snapshot(s, dir / snapshot_name(snaps++)); }});

  std::fprintf(stderr, "simulate: N=%d M=%d dt=%.6g T=%.6g\n", setup.grid().cutoff(), setup.grid().size(), setup.dt,
               setup.t_final);
  try {
    const auto result = run_simulation(setup.initial, setup.t_final, setup.dt,
                                       make_rhs(setup.forcing, setup.params, setup.variant), callbacks);
    if (c.wants("csv")) write_diagnostics(dir / "diagnostics.csv", records);
    if (c.wants("snapshot")) write_snapshot(result.final_state, dir / "final.bin");
    std::fprintf(stderr, "simulate: %ld steps, t=%.17g\n", result.steps, result.final_state.t);
  } catch (const BlowUpError& e) {
    if (c.wants("csv")) write_diagnostics(dir / "diagnostics.csv", records);
    if (e.last_good() && c.wants("snapshot")) write_snapshot(*e.last_good(), dir / "last_good.bin");
    throw;
  }
  return kOk;
}

int cmd_instability(const RunConfig& c) {
  const auto& e = c.experiment;
  InstabilityOptions opts;
  opts.N = e.N_1d;
  opts.T = e.T_1d;
  opts.dt = e.dt_1d;
  opts.seed_amp = e.seed_amp;
  opts.alpha = e.alpha_1d;
  opts.fit_fraction = e.fit_fraction;
  const auto rows = run_instability_experiment(e.background, e.k_list, opts);
  std::vector<std::vector<double>> table;
  for (const auto& g : rows) {
    table.push_back({double(g.k), g.predicted_rate, g.measured_rate, g.relative_error});
    if (g.clipped) std::fprintf(stderr, "instability1d: k=%d left the representable range; fit window clipped\n", g.k);
  }
  std::fprintf(stderr, "instability1d: ellipticity coefficient c = %.6g\n", ellipticity_coefficient(e.background));
  write_csv(fs::path(c.output.directory) / "growth.csv", "k,predicted_rate,measured_rate,relative_error", table);
  return kOk;
}

std::vector<std::vector<double>> difference_table(const std::vector<DifferenceRow>& rows) {
  std::vector<std::vector<double>> t;
  for (const auto& r : rows) t.push_back({r.a, r.b, r.du_H1, r.dsigma_H1});
  return t;
}

int cmd_sweep_eps(const RunConfig& c) {
  const auto sweep = sweep_eps(build_setup(c), c.experiment.eps_list);
  const fs::path dir = c.output.directory;
  write_csv(dir / "eps_sweep.csv", "eps_a,eps_b,du_H1,dsigma_H1", difference_table(sweep.consecutive));
  write_csv(dir / "eps_vs_last.csv", "eps_a,eps_b,du_H1,dsigma_H1", difference_table(sweep.vs_last));
  return kOk;
}

int cmd_sweep_n(const RunConfig& c) {
  const auto rows = sweep_resolution(build_setup(c), c.experiment.N_list);
  write_csv(fs::path(c.output.directory) / "resolution.csv", "N_a,N_b,du_H1,dsigma_H1", difference_table(rows));
  return kOk;
}

int cmd_twin(const RunConfig& c) {
  const auto twin = twin_stability(build_setup(c), c.experiment.delta);
  std::vector<std::vector<double>> t;
  for (const auto& s : twin.samples) t.push_back({s.t, s.D, s.K});
  write_csv(fs::path(c.output.directory) / "twin.csv", "t,D,K", t);
  std::fprintf(stderr, "twin: envelope slope %.6g, max Groenwall coefficient %.6g\n", twin.envelope_slope, twin.max_K);
  return kOk;
}

int cmd_steady(const RunConfig& c) {
  const auto r = steady_check(build_setup(c));
  write_csv(fs::path(c.output.directory) / "steady.csv", "t,hibler_residual,rate_scaled,du_dt",
            {{r.t, r.hibler, r.rate_scaled, r.du_dt}});
  std::fprintf(stderr, "steady-check: residual %.6g, E^-1 |(I - a^2 Lap) dsigma/dt| %.6g, |du/dt| %.6g\n", r.hibler,
               r.rate_scaled, r.du_dt);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voigt-regularised EVP sea-ice simulator"};
  app.require_subcommand(1);
  Options opts;
  app.add_option("--config", opts.config, "JSON configuration file");
  app.add_option("--out", opts.out, "output directory (overrides output.directory)");
  app.add_option("--seed", opts.seed, "seed for random initial data (overrides init.seed)");
  app.add_option("--override", opts.overrides, "KEY=VALUE with a dot path into the config")->take_all();

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"simulate", "integrate the 2D model and write diagnostics", cmd_simulate},
      {"instability1d", "measure 1D linear growth rates against the dispersion relation", cmd_instability},
      {"sweep-eps", "eps -> 0 sweep of sup-in-time H1 differences", cmd_sweep_eps},
      {"sweep-n", "Galerkin refinement sweep", cmd_sweep_n},
      {"twin", "twin run for continuous dependence on initial data", cmd_twin},
      {"steady-check", "constitutive residual versus measured stress tendency", cmd_steady},
  };
  for (const auto& cmd : commands) app.add_subcommand(cmd.name, cmd.help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    const RunConfig config = resolve(opts);
    for (const auto& cmd : commands)
      if (app.got_subcommand(cmd.name)) return cmd.run(config);
    return kFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << " (stage time " << e.stage_time() << ")\n";
    return kBlowUp;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
