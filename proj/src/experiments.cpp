#include "annealab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "annealab/eigensolver.hpp"
#include "annealab/errors.hpp"
#include "annealab/grid.hpp"
#include "annealab/parallel.hpp"
#include "json.hpp"

namespace annealab {

std::string version_string() { return ANNEALAB_VERSION; }

std::string to_string(StageKind kind) { return kind == StageKind::quantum ? "quantum" : "classical"; }

namespace {

constexpr double kTableTolerance = 1e-6;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double quantum_e0(const PotentialParams& params, double mass) {
  return lowest_eigenpairs(grid_for_mass(params, mass), params, mass, 1).energies[0];
}

const BoundaryRow& fixture(StageKind kind, char row) {
  for (const auto& r : boundary_fixtures()) {
    if (r.kind == kind && r.row == row) return r;
  }
  throw std::logic_error("missing stage fixture");
}

}  // namespace

const std::vector<BoundaryRow>& boundary_fixtures() {
  static const std::vector<BoundaryRow> rows = {
      {'a', StageKind::quantum, 1.0, 0.0, 0.5999898},
      {'b', StageKind::quantum, 1e3, 0.0, 0.1050870},
      {'c', StageKind::quantum, 1e5, 0.0, 0.0154758},
      {'d', StageKind::quantum, 1e6, 0.0, 0.0049617},
      {'a', StageKind::classical, std::pow(10.0, 0.29), 0.0, 0.6031582},
      {'b', StageKind::classical, std::pow(10.0, 1.18), 0.0, 0.1061226},
      {'c', StageKind::classical, std::pow(10.0, 1.97), 0.0, 0.0156931},
      {'d', StageKind::classical, std::pow(10.0, 2.35), 0.0, 0.0049526},
  };
  return rows;
}

std::vector<BoundaryRow> stage_table() {
  const PotentialParams params;
  std::vector<BoundaryRow> rows = boundary_fixtures();
  std::string failures;
  for (auto& r : rows) {
    r.energy = r.kind == StageKind::quantum ? quantum_e0(params, r.param)
                                            : equilibrium(params, r.param).internal_energy;
    if (!(std::abs(r.energy - r.reference) <= kTableTolerance)) {
      failures += " " + to_string(r.kind) + " row " + r.row + ": " + fmt(r.energy) +
                  " vs " + fmt(r.reference) + ";";
    }
  }
  if (!failures.empty()) throw CrossCheckError("stage table cross-check failed:" + failures);
  return rows;
}

StageSpec stage_bounds(std::string_view label) {
  static const std::map<std::string, std::pair<char, char>, std::less<>> rows = {
      {"1", {'a', 'b'}}, {"2", {'b', 'c'}}, {"3", {'c', 'd'}},
      {"A", {'a', 'b'}}, {"B", {'b', 'c'}}, {"C", {'c', 'd'}}};
  const auto it = rows.find(label);
  if (it == rows.end()) {
    throw std::invalid_argument("unknown stage '" + std::string(label) + "' (want 1|2|3|A|B|C)");
  }
  StageSpec s;
  s.label = it->first;
  s.kind = std::isdigit(static_cast<unsigned char>(s.label[0])) ? StageKind::quantum
                                                                 : StageKind::classical;
  s.start_param = fixture(s.kind, it->second.first).param;
  s.end_param = fixture(s.kind, it->second.second).param;
  return s;
}

StageSpec stage_spec(std::string_view label, const PotentialParams& params) {
  StageSpec s = stage_bounds(label);
  s.target_energy = s.kind == StageKind::quantum ? quantum_e0(params, s.end_param)
                                                 : equilibrium(params, s.end_param).avg_potential;
  return s;
}

void fit_curve(ResidualCurve& curve, FitMode mode,
               std::optional<std::pair<double, double>> log10_window) {
  curve.fit_mode = mode;
  curve.fit.reset();
  std::vector<PowerLawSample> samples;
  std::size_t skipped = 0;
  for (const auto& p : curve.samples) {
    const double lt = std::log10(p.total_time);
    if (log10_window && (lt < log10_window->first || lt > log10_window->second)) continue;
    if (p.residual > 0.0) {
      samples.push_back({p.total_time, p.residual});
    } else {
      ++skipped;
    }
  }
  try {
    curve.fit = fit_power_law(samples, mode);
    curve.fit_status = "ok";
    if (skipped > 0) curve.fit_status += " (" + std::to_string(skipped) + " nonpositive skipped)";
  } catch (const FitError& e) {
    curve.fit_status = e.what();
  }
}

QuantumSweep quantum_sweep(const PotentialParams& params, const StageSpec& stage,
                           MassScheduleKind kind, const std::vector<double>& total_times,
                           const QuantumSweepOptions& options) {
  if (stage.kind != StageKind::quantum) throw std::invalid_argument("quantum sweep needs stage 1-3");
  const GridConvergence conv = converged_grid(params, stage.start_param, stage.end_param);
  const Grid grid = options.n_points == conv.grid.size() ? conv.grid
                                                         : Grid(conv.grid.x_max(), options.n_points);
  const Wavefunction ground = lowest_eigenpairs(grid, params, stage.start_param, 1).states[0];
  QuantumSweep out{grid, lowest_eigenpairs(grid, params, stage.end_param, 1).energies[0], {}};

  std::vector<std::unique_ptr<QuantumCell>> cells(total_times.size());
  parallel_for(total_times.size(), options.threads, [&](std::size_t i) {
    const double T = total_times[i];
    const MassSchedule schedule{kind, stage.start_param, stage.end_param, T};
    try {
      Trajectory traj = propagate(grid, params, schedule, ground, options.propagation);
      const double r = traj.energy.back() - out.e0_final;
      cells[i] = std::make_unique<QuantumCell>(QuantumCell{T, r, std::move(traj)});
    } catch (const PropagationError& e) {
      throw PropagationError("stage " + stage.label + " " + to_string(kind) + " T=" + fmt(T) +
                             ": " + e.what());
    }
  });
  for (auto& c : cells) out.cells.push_back(std::move(*c));
  return out;
}

std::vector<ClassicalCell> classical_sweep(const PotentialParams& params, const StageSpec& stage,
                                           double step_size, std::size_t particles,
                                           std::uint64_t seed,
                                           const std::vector<double>& total_times,
                                           const ClassicalSweepOptions& options) {
  if (stage.kind != StageKind::classical) {
    throw std::invalid_argument("classical sweep needs stage A-C");
  }
  std::vector<ClassicalCell> out;
  for (double T : total_times) {
    const BetaSchedule schedule{options.kind, stage.start_param, stage.end_param, T};
    std::vector<double> times;
    for (int k = 1; k < options.records; ++k) times.push_back(T * k / options.records);
    ClassicalCell cell;
    cell.total_time = T;
    cell.series = anneal_ensemble(params, schedule, step_size, particles, seed, times,
                                  options.anneal);
    cell.residual = residual_energy_sa(cell.series, params, stage.end_param);
    out.push_back(std::move(cell));
  }
  return out;
}

// ---------------------------------------------------------------- config

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct LineError {
  int line;
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line) + ": " + what);
  }
};

double parse_number(const std::string& v, const LineError& at) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || !std::isfinite(out)) at.fail("not a number: '" + v + "'");
  return out;
}

std::uint64_t parse_unsigned(const std::string& v, const LineError& at) {
  // Accept 1e6-style values as long as they are exact integers.
  const double d = parse_number(v, at);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19) at.fail("not a nonnegative integer: '" + v + "'");
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  return (ec == std::errc() && p == end) ? out : static_cast<std::uint64_t>(d);
}

bool parse_bool(const std::string& v, const LineError& at) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  at.fail("not a boolean: '" + v + "'");
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    out.push_back(std::pow(10.0, u));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  static const std::map<std::string, std::set<std::string>, std::less<>> known = {
      {"potential", {"k", "h0", "w0"}},
      {"run", {"stage", "schedule", "T", "log10_T", "t_max", "beta_i", "seed", "threads", "output"}},
      {"quantum",
       {"dt", "n_points", "integrator", "max_kinetic_phase", "observer_stride", "dump_state"}},
      {"classical", {"s", "N", "adaptive_step", "records"}},
      {"fit", {"mode", "window"}},
  };
  ExperimentConfig c;
  std::string section;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const LineError at{lineno};
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    // trailing comment: '#' after whitespace
    for (std::size_t i = 1; i < line.size(); ++i) {
      if (line[i] == '#' && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line = trim(std::string_view(line).substr(0, i));
        break;
      }
    }
    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known.count(section)) at.fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) at.fail("key '" + key + "' outside any section");
    if (!known.at(section).count(key)) at.fail("unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) at.fail("duplicate key '" + key + "'");
    if (value.empty()) at.fail("empty value for '" + key + "'");

    try {
      if (section == "potential") {
        const double v = parse_number(value, at);
        (key == "k" ? c.potential.k : key == "h0" ? c.potential.h0 : c.potential.w0) = v;
      } else if (section == "run") {
        if (key == "stage") {
          c.stage = value;
        } else if (key == "schedule") {
          try {
            parse_mass_schedule_kind(value);
          } catch (const std::invalid_argument&) {
            parse_beta_schedule_kind(value);
          }
          c.schedule = value;
        } else if (key == "T") {
          for (const auto& item : split(value, ',')) c.total_times.push_back(parse_number(item, at));
        } else if (key == "log10_T") {
          const auto parts = split(value, ':');
          if (parts.size() != 3) at.fail("log10_T wants lo:hi:count");
          const auto n = parse_unsigned(parts[2], at);
          if (n < 1) at.fail("log10_T count must be >= 1");
          c.total_times = log_spaced(parse_number(parts[0], at), parse_number(parts[1], at), n);
        } else if (key == "t_max") {
          c.t_max = parse_number(value, at);
        } else if (key == "beta_i") {
          c.beta_initial = parse_number(value, at);
        } else if (key == "seed") {
          c.seed = parse_unsigned(value, at);
        } else if (key == "threads") {
          c.threads = static_cast<int>(parse_unsigned(value, at));
        } else {
          c.output = value;
        }
      } else if (section == "quantum") {
        if (key == "dt") c.dt = parse_number(value, at);
        if (key == "n_points") c.n_points = parse_unsigned(value, at);
        if (key == "integrator") c.integrator = parse_integrator(value);
        if (key == "max_kinetic_phase") c.max_kinetic_phase = parse_number(value, at);
        if (key == "observer_stride") c.observer_stride = static_cast<int>(parse_unsigned(value, at));
        if (key == "dump_state") c.dump_state = parse_bool(value, at);
      } else if (section == "classical") {
        if (key == "s") c.step_size = parse_number(value, at);
        if (key == "N") c.particles = parse_unsigned(value, at);
        if (key == "adaptive_step") c.adaptive_step = parse_bool(value, at);
        if (key == "records") c.records = static_cast<int>(parse_unsigned(value, at));
      } else {
        if (key == "mode") c.fit_mode = parse_fit_mode(value);
        if (key == "window") {
          const auto parts = split(value, ':');
          if (parts.size() != 2) at.fail("window wants lo:hi in log10 T");
          c.fit_window = std::pair{parse_number(parts[0], at), parse_number(parts[1], at)};
        }
      }
    } catch (const std::invalid_argument& e) {
      at.fail(e.what());
    }
  }
  if (seen.count("run.T") && seen.count("run.log10_T")) {
    throw ConfigError("give either T or log10_T, not both");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  try {
    potential.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (is_logarithmic()) {
    if (!(beta_initial > 0.0)) throw ConfigError("logarithmic runs need beta_i > 0");
    if (!(t_max > 10.0)) throw ConfigError("logarithmic runs need t_max > 10");
    if (!total_times.empty()) throw ConfigError("logarithmic runs take t_max, not a T list");
    if (!(step_size > 0.0) || particles < 1) throw ConfigError("need s > 0 and N >= 1");
    return;
  }
  StageSpec stage_info;
  try {
    stage_info = stage_bounds(stage);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (total_times.empty()) throw ConfigError("sweeps need a T list");
  for (std::size_t i = 0; i < total_times.size(); ++i) {
    if (!(total_times[i] > 0.0)) throw ConfigError("T values must be positive");
    if (i > 0 && !(total_times[i] > total_times[i - 1])) {
      throw ConfigError("T list must be strictly increasing");
    }
  }
  if (stage_info.kind == StageKind::quantum) {
    try {
      parse_mass_schedule_kind(schedule);
    } catch (const std::invalid_argument&) {
      throw ConfigError("schedule '" + schedule + "' is not a mass schedule for stage " + stage);
    }
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (n_points < 8 || (n_points & (n_points - 1)) != 0) {
      throw ConfigError("n_points must be a power of two >= 8");
    }
    if (!(max_kinetic_phase > 0.0)) throw ConfigError("max_kinetic_phase must be positive");
    if (observer_stride < 1) throw ConfigError("observer_stride must be >= 1");
  } else {
    BetaScheduleKind k{};
    try {
      k = parse_beta_schedule_kind(schedule);
    } catch (const std::invalid_argument&) {
      throw ConfigError("schedule '" + schedule + "' is not a temperature schedule for stage " +
                        stage);
    }
    if (k == BetaScheduleKind::logarithmic) throw ConfigError("unreachable schedule kind");
    if (!(step_size > 0.0)) throw ConfigError("s must be positive");
    if (particles < 1) throw ConfigError("N must be >= 1");
    if (records < 1) throw ConfigError("records must be >= 1");
  }
}

std::string ExperimentConfig::canonical() const {
  // threads and output do not change results and are left out.
  std::ostringstream o;
  o << "[potential]\nk = " << fmt(potential.k) << "\nh0 = " << fmt(potential.h0)
    << "\nw0 = " << fmt(potential.w0) << "\n[run]\nstage = " << stage
    << "\nschedule = " << schedule << "\nT =";
  for (std::size_t i = 0; i < total_times.size(); ++i) o << (i ? ", " : " ") << fmt(total_times[i]);
  o << "\nt_max = " << fmt(t_max) << "\nbeta_i = " << fmt(beta_initial) << "\nseed = " << seed
    << "\n[quantum]\ndt = " << fmt(dt) << "\nn_points = " << n_points
    << "\nintegrator = " << to_string(integrator)
    << "\nmax_kinetic_phase = " << fmt(max_kinetic_phase)
    << "\nobserver_stride = " << observer_stride
    << "\ndump_state = " << (dump_state ? "true" : "false") << "\n[classical]\ns = " << fmt(step_size)
    << "\nN = " << particles << "\nadaptive_step = " << (adaptive_step ? "true" : "false")
    << "\nrecords = " << records << "\n[fit]\nmode = " << to_string(fit_mode) << "\nwindow = ";
  if (fit_window) o << fmt(fit_window->first) << ":" << fmt(fit_window->second);
  o << "\n";
  return o.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

// ---------------------------------------------------------------- running

namespace {

using Trace = std::pair<std::string, std::string>;  // file name, CSV body

std::string header(const ExperimentConfig& c, const std::string& grid) {
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash()));
  return std::string("# config_hash: ") + hash + "\n# seed: " + std::to_string(c.seed) +
         "\n# grid: " + grid + "\n# version: " + version_string() + "\n";
}

nlohmann::json fit_json(const std::optional<DecayFit>& fit, const std::string& status) {
  nlohmann::json j;
  j["status"] = status;
  if (fit) {
    j["exponent"] = fit->exponent;
    j["intercept"] = fit->intercept;
    j["window"] = {fit->window_lo, fit->window_hi};
    j["r_squared"] = fit->r_squared;
    j["points"] = fit->points;
  }
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

void write_outputs(const ExperimentConfig& c, const ExperimentResult& r, const std::string& summary,
                   const std::vector<Trace>& traces, nlohmann::json meta) {
  namespace fs = std::filesystem;
  const fs::path dir(c.output);
  fs::create_directories(dir / "trace");
  const std::string head = header(c, r.grid_description);
  write_file(dir / "summary.csv", head + summary);
  for (const auto& [name, body] : traces) write_file(dir / "trace" / name, head + body);
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash()));
  meta["config_hash"] = hash;
  meta["seed"] = c.seed;
  meta["grid"] = r.grid_description;
  meta["version"] = version_string();
  meta["config"] = c.canonical();
  write_file(dir / "meta.json", meta.dump(2) + "\n");
}

std::string trace_name(std::size_t i, double T) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "T%02zu_%.6g.csv", i, T);
  return buf;
}

std::string state_name(std::size_t i, double T) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "T%02zu_%.6g_psi.csv", i, T);
  return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult result;
  std::string summary;
  std::vector<Trace> traces;
  nlohmann::json meta;
  AnnealOptions anneal;
  anneal.threads = c.threads;
  anneal.adaptive_step = c.adaptive_step;

  if (c.is_logarithmic()) {
    result.grid_description = "none";
    result.log = log_schedule_run(c.potential, c.beta_initial, c.step_size, c.particles, c.seed,
                                  c.t_max, anneal);
    summary = "t,avgV,lo,hi\n";
    for (const auto& p : result.log->series.points) {
      summary += fmt(p.t) + "," + fmt(p.mean) + "," + fmt(p.lo) + "," + fmt(p.hi) + "\n";
    }
    meta["kind"] = "classical_log";
    meta["beta_final"] = result.log->beta_final;
    meta["alpha_eq_final"] = alpha_eq(c.potential, result.log->beta_final);
    meta["fit"] = fit_json(result.log->fit, "ok");
  } else {
    const StageSpec stage = stage_bounds(c.stage);
    meta["stage"] = stage.label;
    meta["schedule"] = c.schedule;
    if (stage.kind == StageKind::quantum) {
      QuantumSweepOptions opts;
      opts.n_points = c.n_points;
      opts.threads = c.threads;
      opts.propagation.dt = c.dt;
      opts.propagation.integrator = c.integrator;
      opts.propagation.max_kinetic_phase = c.max_kinetic_phase;
      opts.propagation.observer_stride = c.observer_stride;
      const auto sweep = quantum_sweep(c.potential, stage, parse_mass_schedule_kind(c.schedule),
                                       c.total_times, opts);
      result.grid_description =
          "x_max=" + fmt(sweep.grid.x_max()) + ", n_points=" + std::to_string(sweep.grid.size());
      meta["kind"] = "quantum";
      meta["target_energy"] = sweep.e0_final;
      for (std::size_t i = 0; i < sweep.cells.size(); ++i) {
        const auto& cell = sweep.cells[i];
        result.curve.samples.push_back({cell.total_time, cell.residual, cell.residual, cell.residual});
        const Trajectory& t = cell.trajectory;
        std::string body = "t,energy,width,x0,j0,mass,forbidden_probability\n";
        for (std::size_t k = 0; k < t.times.size(); ++k) {
          body += fmt(t.times[k]) + "," + fmt(t.energy[k]) + "," + fmt(t.width[k]) + "," +
                  fmt(t.x0[k]) + "," + fmt(t.j0[k]) + "," + fmt(t.mass[k]) + "," +
                  fmt(t.forbidden_probability[k]) + "\n";
        }
        traces.emplace_back(trace_name(i, cell.total_time), std::move(body));
        if (c.dump_state) {
          const auto x = sweep.grid.points();
          const auto psi = t.final_state.amplitudes();
          std::string dump = "x,re,im\n";
          for (std::size_t k = 0; k < psi.size(); ++k) {
            dump += fmt(x[k]) + "," + fmt(psi[k].real()) + "," + fmt(psi[k].imag()) + "\n";
          }
          traces.emplace_back(state_name(i, cell.total_time), std::move(dump));
        }
      }
    } else {
      ClassicalSweepOptions opts;
      opts.anneal = anneal;
      opts.records = c.records;
      opts.kind = parse_beta_schedule_kind(c.schedule);
      const auto cells = classical_sweep(c.potential, stage, c.step_size, c.particles, c.seed,
                                         c.total_times, opts);
      result.grid_description = "none";
      meta["kind"] = "classical";
      meta["target_energy"] = equilibrium(c.potential, stage.end_param).avg_potential;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& r = cells[i].residual;
        result.curve.samples.push_back({cells[i].total_time, r.residual, r.lo, r.hi});
        std::string body = "t,avgV,lo,hi\n";
        for (const auto& p : cells[i].series.points) {
          body += fmt(p.t) + "," + fmt(p.mean) + "," + fmt(p.lo) + "," + fmt(p.hi) + "\n";
        }
        traces.emplace_back(trace_name(i, cells[i].total_time), std::move(body));
      }
    }
    fit_curve(result.curve, c.fit_mode, c.fit_window);
    if (stage.kind == StageKind::quantum) {
      summary = "T,residual_energy\n";
      for (const auto& p : result.curve.samples) {
        summary += fmt(p.total_time) + "," + fmt(p.residual) + "\n";
      }
    } else {
      summary = "T,residual,lo,hi\n";
      for (const auto& p : result.curve.samples) {
        summary += fmt(p.total_time) + "," + fmt(p.residual) + "," + fmt(p.lo) + "," + fmt(p.hi) + "\n";
      }
    }
    meta["fit_mode"] = to_string(c.fit_mode);
    meta["fit"] = fit_json(result.curve.fit, result.curve.fit_status);
  }
  if (!c.output.empty()) write_outputs(c, result, summary, traces, std::move(meta));
  return result;
}

}  // namespace annealab
