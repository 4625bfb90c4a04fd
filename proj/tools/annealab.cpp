// annealab command-line driver.

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "annealab/classical_mc.hpp"
#include "annealab/eigensolver.hpp"
#include "annealab/errors.hpp"
#include "annealab/experiments.hpp"
#include "annealab/fitting.hpp"
#include "annealab/grid.hpp"
#include "annealab/parallel.hpp"
#include "annealab/potential.hpp"

using namespace annealab;

namespace {

// "lo:hi:n" -> LinearRange
LinearRange parse_range(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw ConfigError("range '" + text + "' must be lo:hi:n");
  return {std::stod(parts[0]), std::stod(parts[1]), static_cast<std::size_t>(std::stoul(parts[2]))};
}

void print_fit(const ResidualCurve& curve) {
  if (curve.fit) {
    std::printf("exponent %.6f  (%zu points, log10 T in [%.3f, %.3f], R^2 %.5f)\n",
                curve.fit->exponent, curve.fit->points, curve.fit->window_lo,
                curve.fit->window_hi, curve.fit->r_squared);
  } else {
    std::printf("no exponent: %s\n", curve.fit_status.c_str());
  }
}

struct PotentialFlags {
  PotentialParams p;
  void attach(CLI::App* app) {
    app->add_option("--k", p.k, "spring constant")->capture_default_str();
    app->add_option("--h0", p.h0, "barrier height")->capture_default_str();
    app->add_option("--w0", p.w0, "minimum spacing")->capture_default_str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum and simulated annealing on a corrugated harmonic potential.\n"
               "All numeric output is CSV; column orders are listed per subcommand."};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  // eigen
  PotentialFlags eig_pot;
  std::string eig_mass = "1";
  std::size_t eig_points = 2048;
  double eig_xmax = 0.0;
  int eig_threads = 1;
  std::string eig_out;
  auto* eig = app.add_subcommand(
      "eigen", "Ground and first excited energies per mass (columns: mass,E0,E1,gap).");
  eig_pot.attach(eig);
  eig->add_option("--mass", eig_mass,
                  "comma list of masses, or lo:hi:n giving n masses log spaced over log10 m")
      ->capture_default_str();
  eig->add_option("--n-points", eig_points, "grid points (power of two)")->capture_default_str();
  eig->add_option("--x-max", eig_xmax, "grid half-width (default: chosen per mass)");
  eig->add_option("--threads", eig_threads, "worker threads")->capture_default_str();
  eig->add_option("--out", eig_out, "CSV path (default stdout)");

  // phase-diagram
  std::string pd_h0 = "0:1:11", pd_w0 = "0.1:1:10", pd_out;
  double pd_k = 1.0;
  auto* pd = app.add_subcommand("phase-diagram", "N_min over an (h0, w0) grid (columns: w0,h0,n_min).");
  pd->add_option("--h0", pd_h0, "lo:hi:n")->capture_default_str();
  pd->add_option("--w0", pd_w0, "lo:hi:n")->capture_default_str();
  pd->add_option("--k", pd_k, "spring constant")->capture_default_str();
  pd->add_option("--out", pd_out, "CSV path (default stdout)");

  // qa-run
  ExperimentConfig qa;
  qa.stage = "1";
  std::string qa_integrator = "split_step";
  auto* qa_cmd = app.add_subcommand(
      "qa-run",
      "Quantum annealing sweep. Writes summary.csv (T,residual_energy), "
      "trace/*.csv (t,energy,width,x0,j0,mass,forbidden_probability), with --dump-state "
      "trace/*_psi.csv (x,re,im), and meta.json.");
  qa_cmd->add_option("--stage", qa.stage, "1|2|3")->capture_default_str();
  qa_cmd->add_option("--schedule", qa.schedule, "linear|poly2|poly3|poly4|quadratic")
      ->capture_default_str();
  qa_cmd->add_option("--T", qa.total_times, "total times")->delimiter(',')->required();
  qa_cmd->add_option("--integrator", qa_integrator, "rk4|split_step")->capture_default_str();
  qa_cmd->add_option("--dt", qa.dt, "time step")->capture_default_str();
  qa_cmd->add_option("--n-points", qa.n_points, "grid points")->capture_default_str();
  qa_cmd->add_option("--threads", qa.threads, "worker threads")->capture_default_str();
  qa_cmd->add_option("--fit", qa.fit_mode, "fit mode")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, FitMode>{{"all", FitMode::all_points}, {"crests", FitMode::crests}}));
  qa_cmd->add_flag("--dump-state", qa.dump_state, "write the final wavefunction per T");
  qa_cmd->add_option("--out", qa.output, "output directory");

  // sa-run
  ExperimentConfig sa;
  sa.stage = "A";
  auto* sa_cmd = app.add_subcommand(
      "sa-run",
      "Simulated annealing sweep. Writes summary.csv (T,residual,lo,hi), trace/*.csv "
      "(t,avgV,lo,hi) and meta.json.");
  sa_cmd->add_option("--stage", sa.stage, "A|B|C")->capture_default_str();
  sa_cmd->add_option("--schedule", sa.schedule, "linear|quadratic")->capture_default_str();
  sa_cmd->add_option("--s", sa.step_size, "Metropolis step size")->capture_default_str();
  sa_cmd->add_option("--N", sa.particles, "ensemble size")->capture_default_str();
  sa_cmd->add_option("--T", sa.total_times, "total times")->delimiter(',')->required();
  sa_cmd->add_option("--seed", sa.seed, "random seed")->capture_default_str();
  sa_cmd->add_option("--threads", sa.threads, "worker threads")->capture_default_str();
  sa_cmd->add_flag("--adaptive-step", sa.adaptive_step, "adapt the step toward 50% acceptance");
  sa_cmd->add_option("--out", sa.output, "output directory");

  // sa-log
  ExperimentConfig lg;
  lg.schedule = "logarithmic";
  lg.step_size = 4.0;
  lg.beta_initial = std::pow(10.0, 0.29);
  auto* lg_cmd = app.add_subcommand(
      "sa-log",
      "Logarithmic schedule run. Writes summary.csv (t,avgV,lo,hi) and meta.json "
      "with the fitted exponent over log10 log10 t > 0.5.");
  lg_cmd->add_option("--beta-i", lg.beta_initial, "initial inverse temperature")
      ->capture_default_str();
  lg_cmd->add_option("--s", lg.step_size, "Metropolis step size")->capture_default_str();
  lg_cmd->add_option("--N", lg.particles, "ensemble size")->capture_default_str();
  lg_cmd->add_option("--tmax", lg.t_max, "final time")->required();
  lg_cmd->add_option("--seed", lg.seed, "random seed")->capture_default_str();
  lg_cmd->add_option("--threads", lg.threads, "worker threads")->capture_default_str();
  lg_cmd->add_option("--out", lg.output, "output directory");

  // fit
  std::string fit_in, fit_mode = "all", fit_window;
  auto* fit_cmd = app.add_subcommand(
      "fit", "Power-law fit of a summary.csv (uses the T and residual columns).");
  fit_cmd->add_option("--in", fit_in, "CSV path")->required();
  fit_cmd->add_option("--mode", fit_mode, "all|crests")->capture_default_str();
  fit_cmd->add_option("--window", fit_window, "log10 T range lo:hi");

  // stages
  auto* st_cmd = app.add_subcommand(
      "stages", "Recompute the stage boundary energies (columns: kind,row,param,energy,reference). "
                "Exits 2 on a cross-check failure.");

  // run
  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment file.");
  run_cmd->add_option("config", run_config, "config path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eig) {
      std::vector<double> masses;
      if (eig_mass.find(':') != std::string::npos) {
        for (double lm : parse_range(eig_mass).values()) masses.push_back(std::pow(10.0, lm));
      } else {
        std::stringstream ss(eig_mass);
        for (std::string item; std::getline(ss, item, ',');) masses.push_back(std::stod(item));
      }
      std::vector<std::array<double, 2>> levels(masses.size());
      parallel_for(masses.size(), eig_threads, [&](std::size_t i) {
        const Grid grid = eig_xmax > 0.0 ? Grid(eig_xmax, eig_points)
                                         : grid_for_mass(eig_pot.p, masses[i], eig_points);
        const auto res = lowest_eigenpairs(grid, eig_pot.p, masses[i], 2);
        levels[i] = {res.energies[0], res.energies[1]};
      });
      std::ofstream file;
      if (!eig_out.empty()) file.open(eig_out);
      std::ostream& out = eig_out.empty() ? std::cout : file;
      out.precision(17);
      out << "mass,E0,E1,gap\n";
      for (std::size_t i = 0; i < masses.size(); ++i) {
        out << masses[i] << "," << levels[i][0] << "," << levels[i][1] << ","
            << levels[i][1] - levels[i][0] << "\n";
      }
    } else if (*pd) {
      std::ofstream file;
      if (!pd_out.empty()) file.open(pd_out);
      std::ostream& out = pd_out.empty() ? std::cout : file;
      out.precision(17);
      const auto cells = phase_diagram(parse_range(pd_h0), parse_range(pd_w0), pd_k);
      out << "w0,h0,n_min\n";
      for (const auto& c : cells) {
        out << c.w0 << "," << c.h0 << "," << c.n_min << "\n";
      }
    } else if (*qa_cmd) {
      qa.integrator = parse_integrator(qa_integrator);
      print_fit(run_experiment(qa).curve);
    } else if (*sa_cmd) {
      print_fit(run_experiment(sa).curve);
    } else if (*lg_cmd) {
      const auto r = run_experiment(lg);
      std::printf("beta_final %.6g  alpha_sa %.4f  alpha_eq(beta_final) %.4f\n", r.log->beta_final,
                  r.log->fit.exponent, alpha_eq(lg.potential, r.log->beta_final));
    } else if (*fit_cmd) {
      std::ifstream in(fit_in);
      if (!in) throw ConfigError("cannot read " + fit_in);
      ResidualCurve curve;
      std::string line;
      bool header_seen = false;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
          header_seen = true;
          if (line.rfind("T,residual", 0) != 0) throw ConfigError("expected a T,residual header");
          continue;
        }
        std::stringstream ss(line);
        std::string t, r;
        std::getline(ss, t, ',');
        std::getline(ss, r, ',');
        curve.samples.push_back({std::stod(t), std::stod(r), 0.0, 0.0});
      }
      std::optional<std::pair<double, double>> window;
      if (!fit_window.empty()) {
        const auto colon = fit_window.find(':');
        if (colon == std::string::npos) throw ConfigError("window must be lo:hi");
        window = std::pair{std::stod(fit_window.substr(0, colon)), std::stod(fit_window.substr(colon + 1))};
      }
      fit_curve(curve, parse_fit_mode(fit_mode), window);
      print_fit(curve);
    } else if (*st_cmd) {
      std::vector<BoundaryRow> rows;
      try {
        rows = stage_table();
      } catch (const CrossCheckError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
      }
      std::printf("kind,row,param,energy,reference\n");
      for (const auto& r : rows) {
        std::printf("%s,%c,%.10g,%.10f,%.7f\n", to_string(r.kind).c_str(), r.row, r.param,
                    r.energy, r.reference);
      }
    } else if (*run_cmd) {
      const auto config = load_config(run_config);
      const auto r = run_experiment(config);
      if (r.log) {
        std::printf("beta_final %.6g  alpha_sa %.4f\n", r.log->beta_final, r.log->fit.exponent);
      } else {
        print_fit(r.curve);
      }
    }
  } catch (const CrossCheckError& e) {
    std::fprintf(stderr, "cross-check failed: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
