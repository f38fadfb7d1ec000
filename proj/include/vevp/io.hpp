#pragma once

// Run configuration (JSON), diagnostics CSV and binary snapshots.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vevp/diagnostics.hpp"
#include "vevp/experiments.hpp"
#include "vevp/illposedness1d.hpp"

namespace vevp {

struct RunConfig {
  struct Grid {
    int N = 32;
    double pad_factor = 2.0;
    friend bool operator==(const Grid&, const Grid&) = default;
  } grid;

  std::string preset = "table1";  // table1 | nondimensional; explicit params override it
  PhysicalParams params;          // eps and gamma are set through the strain section

  struct Forcing {
    ForcingMode mode = ForcingMode::Periodic;
    double T_period = 1.0;  // 0 in periodic mode freezes the wind at its t = 0 value
    double H0_amplitude = 0.0;  // H0 = A sin(2 pi x) sin(2 pi y)
    friend bool operator==(const Forcing&, const Forcing&) = default;
  } forcing;

  StrainVariant variant = StrainVariant::Simplified;

  struct Init {
    std::string preset = "rest";  // rest | smooth | random | snapshot
    std::string snapshot;
    double perturbation_amp = 0.0;
    std::uint64_t seed = 0;
    friend bool operator==(const Init&, const Init&) = default;
  } init;

  struct Time {
    std::optional<double> dt;  // empty: suggest_dt with the given safety
    double safety = 0.5;
    double T_final = 1.0;
    double diag_cadence = 0.1;
    double snapshot_cadence = 0.0;  // 0 disables periodic snapshots
    friend bool operator==(const Time&, const Time&) = default;
  } time;

  struct Output {
    std::string directory = "out";
    std::vector<std::string> formats = {"csv"};  // csv, snapshot
    friend bool operator==(const Output&, const Output&) = default;
  } output;

  struct Experiment {
    std::vector<double> eps_list = {1e-1, 5e-2, 2.5e-2, 1.25e-2, 0.0};
    std::vector<int> N_list = {16, 32, 64};
    double delta = 1e-4;
    std::vector<int> k_list = {2, 4, 8, 16};
    Background1D background{1.0, 1.0, 1.0, 1e-3};
    double alpha_1d = 0.0;
    int N_1d = 64;
    double T_1d = 1.0;
    double dt_1d = 1e-4;
    double seed_amp = 1e-6;
    double fit_fraction = 0.5;
    friend bool operator==(const Experiment&, const Experiment&) = default;
  } experiment;

  bool wants(std::string_view format) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates; throws ConfigError naming the offending key.
RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
/// Canonical JSON with every field explicit.
std::string serialize(const RunConfig& config);

/// Sets a dot-path key ("time.T_final=2") in a JSON document; values are parsed as JSON, else taken as strings.
void apply_override(std::string& json_text, std::string_view assignment);

/// Initial state, forcing and step size described by the config.
SimulationSetup build_setup(const RunConfig& config);
ForcingSpec build_forcing(const RunConfig& config);
State build_initial_state(const RunConfig& config, const SpectralGrid& grid);

inline constexpr std::string_view kDiagnosticsHeader =
    "t,E_l2,dissipation,sym_defect,cancel_residual,L2_u,H1_u,H2_u,L2_sigma,H1_sigma,H2_sigma,H3_sigma,Dmin,Dmax";

std::string format_double(double v);

void write_diagnostics(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_diagnostics(const std::filesystem::path& path);

/// Header plus rows of numbers, 17 significant digits.
void write_csv(const std::filesystem::path& path, std::string_view header,
               const std::vector<std::vector<double>>& rows);

void write_snapshot(const State& state, const std::filesystem::path& path);
State read_snapshot(const std::filesystem::path& path);

}  // namespace vevp
