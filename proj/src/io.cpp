#include "vevp/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace vevp {

using nlohmann::json;

bool RunConfig::wants(std::string_view format) const {
  for (const auto& f : output.formats)
    if (f == format) return true;
  return false;
}

namespace {

// Reads keys of one JSON object, remembering which were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& root, std::string path) : path_(std::move(path)) {
    if (!root.is_object()) throw ConfigError(label() + "must be an object");
    obj_ = &root;
  }

  bool has(const std::string& key) const { return obj_->contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!obj_->contains(key)) return;
    seen_.insert(key);
    try {
      out = obj_->at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name(key) + ": wrong type (" + e.what() + ")");
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(obj_->contains(key) ? obj_->at(key) : empty, name(key));
  }

  const json* raw(const std::string& key) {
    if (!obj_->contains(key)) return nullptr;
    seen_.insert(key);
    return &obj_->at(key);
  }

  void finish() const {
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(name(it.key()) + ": unknown key");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string label() const { return path_.empty() ? "config " : path_ + " "; }

  const json* obj_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& constraint) {
  if (!ok) throw ConfigError(key + ": " + constraint);
}

PhysicalParams preset_params(const std::string& preset) {
  if (preset == "table1") return PhysicalParams::table1();
  if (preset == "nondimensional") return PhysicalParams::nondimensional();
  throw ConfigError("params.preset: must be 'table1' or 'nondimensional', got '" + preset + "'");
}

template <class E, class Parse>
E parse_enum(Section& s, const std::string& key, E fallback, Parse&& parse) {
  std::string text;
  s.get(key, text);
  if (text.empty()) return fallback;
  try {
    return parse(text);
  } catch (const InvalidArgument& e) {
    throw ConfigError(s.name(key) + ": " + e.what());
  }
}

void validate(const RunConfig& c) {
  require(c.grid.N >= 1, "grid.N", "must be >= 1");
  require(std::isfinite(c.grid.pad_factor) && c.grid.pad_factor >= 1.0, "grid.pad_factor", "must be >= 1");
  try {
    c.params.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("params.") + e.what());
  }
  require(std::isfinite(c.forcing.T_period) && c.forcing.T_period >= 0.0, "forcing.T_period", "must be >= 0");
  require(c.forcing.mode != ForcingMode::Reference || c.forcing.T_period > 0.0, "forcing.T_period",
          "must be > 0 in reference mode");
  require(std::isfinite(c.forcing.H0_amplitude), "forcing.H0_amplitude", "must be finite");
  require(c.variant != StrainVariant::SmoothedMax || c.params.gamma < c.params.eps || c.params.gamma == 0.0,
          "strain_variant.gamma", "must be 0 or lie below eps");

  const auto& p = c.init.preset;
  require(p == "rest" || p == "smooth" || p == "random" || p == "snapshot", "init.preset",
          "must be one of rest, smooth, random, snapshot");
  require(p != "snapshot" || !c.init.snapshot.empty(), "init.snapshot", "required when init.preset is 'snapshot'");
  require(std::isfinite(c.init.perturbation_amp) && c.init.perturbation_amp >= 0.0, "init.perturbation_amp",
          "must be >= 0");

  require(!c.time.dt || (std::isfinite(*c.time.dt) && *c.time.dt > 0.0), "time.dt", "must be > 0 or \"auto\"");
  require(c.time.safety > 0.0 && c.time.safety <= 1.0, "time.safety", "must lie in (0, 1]");
  require(std::isfinite(c.time.T_final) && c.time.T_final > 0.0, "time.T_final", "must be > 0");
  require(std::isfinite(c.time.diag_cadence) && c.time.diag_cadence >= 0.0, "time.diag_cadence", "must be >= 0");
  require(std::isfinite(c.time.snapshot_cadence) && c.time.snapshot_cadence >= 0.0, "time.snapshot_cadence",
          "must be >= 0");

  require(!c.output.directory.empty(), "output.directory", "must not be empty");
  for (const auto& f : c.output.formats) require(f == "csv" || f == "snapshot", "output.formats", "unknown format '" + f + "'");

  const auto& e = c.experiment;
  for (double v : e.eps_list) require(std::isfinite(v) && v >= 0.0, "experiment.eps_list", "entries must be >= 0");
  for (int n : e.N_list) require(n >= 1, "experiment.N_list", "entries must be >= 1");
  require(std::isfinite(e.delta) && e.delta >= 0.0, "experiment.delta", "must be >= 0");
  require(e.N_1d >= 1, "experiment.N_1d", "must be >= 1");
  for (int k : e.k_list) require(k >= 1 && k <= e.N_1d, "experiment.k_list", "entries must lie in 1..N_1d");
  require(e.background.P > 0.0, "experiment.background.P", "must be > 0");
  require(e.background.eps >= 0.0, "experiment.background.eps", "must be >= 0");
  require(e.alpha_1d >= 0.0, "experiment.alpha_1d", "must be >= 0");
  require(e.T_1d > 0.0, "experiment.T_1d", "must be > 0");
  require(e.dt_1d > 0.0, "experiment.dt_1d", "must be > 0");
  require(e.seed_amp > 0.0, "experiment.seed_amp", "must be > 0");
  require(e.fit_fraction > 0.0 && e.fit_fraction <= 1.0, "experiment.fit_fraction", "must lie in (0, 1]");
}

RunConfig from_json(const json& root) {
  RunConfig c;
  Section top(root, "");

  {
    auto s = top.sub("grid");
    s.get("N", c.grid.N);
    s.get("pad_factor", c.grid.pad_factor);
    s.finish();
  }
  {
    auto s = top.sub("params");
    s.get("preset", c.preset);
    c.params = preset_params(c.preset);
    auto& p = c.params;
    s.get("E", p.E_mod);
    s.get("alpha", p.alpha);
    s.get("P", p.P);
    s.get("e_bar", p.e_bar);
    s.get("Omega", p.Omega);
    s.get("g", p.g);
    s.get("theta", p.theta);
    s.get("phi", p.phi);
    s.get("c_a", p.c_a);
    s.get("c_w", p.c_w);
    s.get("rho_a", p.rho_a);
    s.get("rho_w", p.rho_w);
    s.get("m", p.m);
    s.finish();
  }
  {
    auto s = top.sub("forcing");
    c.forcing.mode = parse_enum(s, "mode", c.forcing.mode, forcing_mode_from_string);
    s.get("T_period", c.forcing.T_period);
    s.get("H0_amplitude", c.forcing.H0_amplitude);
    s.finish();
  }
  if (const json* v = top.raw("strain_variant"); v && v->is_string()) {
    // Shorthand: "strain_variant": "original"
    try {
      c.variant = strain_variant_from_string(v->get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("strain_variant: ") + e.what());
    }
  } else {
    auto s = top.sub("strain_variant");
    c.variant = parse_enum(s, "variant", c.variant, strain_variant_from_string);
    s.get("eps", c.params.eps);
    s.get("gamma", c.params.gamma);
    s.finish();
  }
  {
    auto s = top.sub("init");
    s.get("preset", c.init.preset);
    s.get("snapshot", c.init.snapshot);
    s.get("perturbation_amp", c.init.perturbation_amp);
    s.get("seed", c.init.seed);
    s.finish();
  }
  {
    auto s = top.sub("time");
    if (const json* dt = s.raw("dt")) {
      if (dt->is_string() && dt->get<std::string>() == "auto")
        c.time.dt.reset();
      else if (dt->is_number())
        c.time.dt = dt->get<double>();
      else
        throw ConfigError("time.dt: must be a number or \"auto\"");
    }
    s.get("safety", c.time.safety);
    s.get("T_final", c.time.T_final);
    s.get("diag_cadence", c.time.diag_cadence);
    s.get("snapshot_cadence", c.time.snapshot_cadence);
    s.finish();
  }
  {
    auto s = top.sub("output");
    s.get("directory", c.output.directory);
    s.get("formats", c.output.formats);
    s.finish();
  }
  {
    auto s = top.sub("experiment");
    auto& e = c.experiment;
    s.get("eps_list", e.eps_list);
    s.get("N_list", e.N_list);
    s.get("delta", e.delta);
    s.get("k_list", e.k_list);
    {
      auto b = s.sub("background");
      b.get("ubar_x", e.background.ubar_x);
      b.get("sigbar", e.background.sigbar);
      b.get("P", e.background.P);
      b.get("eps", e.background.eps);
      b.finish();
    }
    s.get("alpha_1d", e.alpha_1d);
    s.get("N_1d", e.N_1d);
    s.get("T_1d", e.T_1d);
    s.get("dt_1d", e.dt_1d);
    s.get("seed_amp", e.seed_amp);
    s.get("fit_fraction", e.fit_fraction);
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

json parse_json(std::string_view text) {
  try {
    return text.find_first_not_of(" \t\r\n") == std::string_view::npos ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }
}

}  // namespace

void apply_override(std::string& json_text, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string(assignment) + "': expected KEY=VALUE");
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));

  json root = parse_json(json_text);
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + key + "': empty path component");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError("override '" + key + "': '" + part + "' is not inside an object");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    *node = json::parse(value);
  } catch (const json::parse_error&) {
    *node = value;
  }
  json_text = root.dump();
}

RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  std::string doc(text);
  for (const auto& o : overrides) apply_override(doc, o);
  return from_json(parse_json(doc));
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string serialize(const RunConfig& c) {
  const auto& p = c.params;
  const auto& e = c.experiment;
  json j;
  j["grid"] = {{"N", c.grid.N}, {"pad_factor", c.grid.pad_factor}};
  j["params"] = {{"preset", c.preset}, {"E", p.E_mod},     {"alpha", p.alpha}, {"P", p.P},
                 {"e_bar", p.e_bar},   {"Omega", p.Omega}, {"g", p.g},         {"theta", p.theta},
                 {"phi", p.phi},       {"c_a", p.c_a},     {"c_w", p.c_w},     {"rho_a", p.rho_a},
                 {"rho_w", p.rho_w},   {"m", p.m}};
  j["forcing"] = {{"mode", std::string(to_string(c.forcing.mode))},
                  {"T_period", c.forcing.T_period},
                  {"H0_amplitude", c.forcing.H0_amplitude}};
  j["strain_variant"] = {{"variant", std::string(to_string(c.variant))}, {"eps", p.eps}, {"gamma", p.gamma}};
  j["init"] = {{"preset", c.init.preset},
               {"snapshot", c.init.snapshot},
               {"perturbation_amp", c.init.perturbation_amp},
               {"seed", c.init.seed}};
  j["time"] = {{"dt", c.time.dt ? json(*c.time.dt) : json("auto")},
               {"safety", c.time.safety},
               {"T_final", c.time.T_final},
               {"diag_cadence", c.time.diag_cadence},
               {"snapshot_cadence", c.time.snapshot_cadence}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  j["experiment"] = {
      {"eps_list", e.eps_list},
      {"N_list", e.N_list},
      {"delta", e.delta},
      {"k_list", e.k_list},
      {"background",
       {{"ubar_x", e.background.ubar_x}, {"sigbar", e.background.sigbar}, {"P", e.background.P},
        {"eps", e.background.eps}}},
      {"alpha_1d", e.alpha_1d},
      {"N_1d", e.N_1d},
      {"T_1d", e.T_1d},
      {"dt_1d", e.dt_1d},
      {"seed_amp", e.seed_amp},
      {"fit_fraction", e.fit_fraction}};
  return j.dump(2);
}

ForcingSpec build_forcing(const RunConfig& c) {
  ForcingSpec f;
  f.mode = c.forcing.mode;
  f.period = c.forcing.T_period;
  if (c.forcing.H0_amplitude != 0.0) {
    const double a = c.forcing.H0_amplitude;
    f.topography = [a](double x, double y) { return a * std::sin(kTwoPi * x) * std::sin(kTwoPi * y); };
  }
  return f;
}

State build_initial_state(const RunConfig& c, const SpectralGrid& grid) {
  const double P = c.params.P;
  State s = State::rest(grid, P);
  const auto& preset = c.init.preset;
  if (preset == "smooth") {
    s.u = VectorField::from_function(grid, [](double x, double y) {
      return std::array{0.1 * (std::sin(kTwoPi * y) + 0.5 * std::cos(kTwoPi * (x + y))),
                        0.1 * (std::sin(kTwoPi * x) - 0.5 * std::sin(kTwoPi * (x - y)))};
    });
    s.sigma = TensorField::from_function(grid, [P](double x, double y) {
      const double shear = 0.05 * P * std::sin(kTwoPi * (x + y));
      return std::array{-0.5 * P + 0.1 * P * std::cos(kTwoPi * x), shear, shear,
                        -0.5 * P + 0.1 * P * std::cos(kTwoPi * y)};
    });
  } else if (preset == "random") {
    s.u = 0.1 * unit_perturbation(grid, PerturbationKind::Random, c.init.seed);
  } else if (preset == "snapshot") {
    const State snap = read_snapshot(c.init.snapshot);
    if (snap.grid().same_layout(grid))
      s = snap;
    else
      s = State(resample(snap.u, grid), resample(snap.sigma, grid), snap.t);
  }
  if (c.init.perturbation_amp > 0.0)
    s.u.axpy(c.init.perturbation_amp, unit_perturbation(grid, PerturbationKind::Random, c.init.seed + 1));
  return s;
}

SimulationSetup build_setup(const RunConfig& c) {
  const auto grid = SpectralGrid::make(c.grid.N, c.grid.pad_factor);
  State initial = build_initial_state(c, grid);
  const double dt = c.time.dt ? *c.time.dt : suggest_dt(initial, c.params, c.variant, c.time.safety);
  const double t_final = initial.t + c.time.T_final;
  return SimulationSetup{c.params,
                         build_forcing(c),
                         c.variant,
                         std::move(initial),
                         dt,
                         t_final,
                         c.time.diag_cadence};
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::array<double, 14> to_row(const DiagnosticsRecord& r) {
  const auto& n = r.norms;
  return {r.t,        r.E_l2,     r.dissipation, r.sym_defect, r.cancel_residual, n.L2_u, n.H1_u,
          n.H2_u,     n.L2_sigma, n.H1_sigma,    n.H2_sigma,   n.H3_sigma,        r.Dmin, r.Dmax};
}

}  // namespace

void write_csv(const std::filesystem::path& path, std::string_view header,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_for_write(path);
  out << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  close_checked(out, path);
}

void write_diagnostics(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : records) {
    const auto a = to_row(r);
    rows.emplace_back(a.begin(), a.end());
  }
  write_csv(path, kDiagnosticsHeader, rows);
}

std::vector<DiagnosticsRecord> read_diagnostics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kDiagnosticsHeader)
    throw IoError("'" + path.string() + "': unexpected diagnostics header");
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 14> v{};
    const char* p = line.c_str();
    for (std::size_t i = 0; i < v.size(); ++i) {
      char* end = nullptr;
      v[i] = std::strtod(p, &end);
      if (end == p) throw IoError("'" + path.string() + "': malformed row");
      p = end;
      if (i + 1 < v.size()) {
        if (*p != ',') throw IoError("'" + path.string() + "': malformed row");
        ++p;
      }
    }
    if (*p != '\0') throw IoError("'" + path.string() + "': trailing data in row");
    DiagnosticsRecord r;
    auto& n = r.norms;
    r.t = v[0], r.E_l2 = v[1], r.dissipation = v[2], r.sym_defect = v[3], r.cancel_residual = v[4];
    n.L2_u = v[5], n.H1_u = v[6], n.H2_u = v[7];
    n.L2_sigma = v[8], n.H1_sigma = v[9], n.H2_sigma = v[10], n.H3_sigma = v[11];
    r.Dmin = v[12], r.Dmax = v[13];
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 5> kMagic = {'V', 'E', 'V', 'P', '1'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return to_little(v);
}

}  // namespace

void write_snapshot(const State& state, const std::filesystem::path& path) {
  auto out = open_for_write(path, std::ios::binary | std::ios::out);
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.grid().cutoff()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(state.grid().size()));
  put<double>(out, state.t);
  auto dump = [&](std::span<const double> a) {
    for (double v : a) put<double>(out, v);
  };
  dump(state.u[0]);
  dump(state.u[1]);
  for (std::size_t c = 0; c < 4; ++c) dump(state.sigma[c]);
  close_checked(out, path);
}

State read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read snapshot '" + path.string() + "'");
  const std::string where = "snapshot '" + path.string() + "': ";
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError(where + "bad magic");
  const auto n = take<std::uint32_t>(in);
  const auto m = take<std::uint32_t>(in);
  const auto t = take<double>(in);
  if (!in) throw IoError(where + "size mismatch (truncated header)");
  if (n < 1 || m % 2 != 0 || m < 2 * n + 1 || m > 65536) throw IoError(where + "inconsistent grid sizes");

  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  const std::uintmax_t expected = kMagic.size() + 4 + 4 + 8 + std::uintmax_t{6} * m * m * 8;
  if (ec || bytes != expected)
    throw IoError(where + "size mismatch (expected " + std::to_string(expected) + " bytes, found " +
                  std::to_string(bytes) + ")");

  const auto grid = SpectralGrid::with_size(static_cast<int>(n), static_cast<int>(m));
  State s(grid);
  s.t = t;
  auto load = [&](std::span<double> a) {
    for (double& v : a) v = take<double>(in);
  };
  load(s.u[0]);
  load(s.u[1]);
  for (std::size_t c = 0; c < 4; ++c) load(s.sigma[c]);
  if (!in) throw IoError(where + "size mismatch (truncated payload)");
  if (!std::isfinite(t) || !s.u.all_finite() || !s.sigma.all_finite()) throw IoError(where + "non-finite payload");
  return s;
}

}  // namespace vevp
