#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <type_traits>

#include "annealab/classical_mc.hpp"
#include "annealab/eigensolver.hpp"
#include "annealab/errors.hpp"
#include "annealab/experiments.hpp"
#include "annealab/fitting.hpp"
#include "annealab/grid.hpp"
#include "annealab/philox.hpp"
#include "annealab/potential.hpp"
#include "annealab/quantum_dynamics.hpp"
#include "annealab/schedules.hpp"

namespace py = pybind11;
using namespace annealab;

namespace {

template <class Range>
auto to_array(const Range& v) {
  using T = std::remove_cv_t<typename Range::value_type>;
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<Complex> amplitudes(const Wavefunction& psi) { return to_array(psi.amplitudes()); }

Wavefunction from_array(const Grid& grid, py::array_t<Complex, py::array::c_style | py::array::forcecast> a) {
  return Wavefunction(grid, std::span<const Complex>(a.data(), static_cast<std::size_t>(a.size())));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantum and simulated annealing on a corrugated harmonic potential";
  m.attr("__version__") = version_string();

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<PropagationError>(m, "PropagationError", PyExc_RuntimeError);
  py::register_exception<CrossCheckError>(m, "CrossCheckError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FitError>(m, "FitError", PyExc_ValueError);

  // potential
  py::class_<PotentialParams>(m, "PotentialParams")
      .def(py::init([](double k, double h0, double w0) { return PotentialParams{k, h0, w0}; }),
           py::arg("k") = 1.0, py::arg("h0") = 0.2, py::arg("w0") = 0.2)
      .def_readwrite("k", &PotentialParams::k)
      .def_readwrite("h0", &PotentialParams::h0)
      .def_readwrite("w0", &PotentialParams::w0)
      .def("validate", &PotentialParams::validate)
      .def("__repr__", [](const PotentialParams& p) {
        return "PotentialParams(k=" + std::to_string(p.k) + ", h0=" + std::to_string(p.h0) +
               ", w0=" + std::to_string(p.w0) + ")";
      });
  m.def("potential", py::vectorize([](double x, double k, double h0, double w0) {
          return potential(PotentialParams{k, h0, w0}, x);
        }),
        py::arg("x"), py::arg("k") = 1.0, py::arg("h0") = 0.2, py::arg("w0") = 0.2,
        "V(x), vectorized over x");
  m.def("second_derivative_at_origin", &second_derivative_at_origin, py::arg("params"));
  m.def("count_minima", &count_minima, py::arg("params"));
  m.def("local_minima", &local_minima, py::arg("params"));
  m.def(
      "phase_diagram",
      [](std::pair<double, double> h0, std::size_t nh, std::pair<double, double> w0, std::size_t nw,
         double k) {
        std::vector<std::tuple<double, double, int>> out;
        for (const auto& c : phase_diagram({h0.first, h0.second, nh}, {w0.first, w0.second, nw}, k)) {
          out.emplace_back(c.w0, c.h0, c.n_min);
        }
        return out;
      },
      py::arg("h0_range"), py::arg("h0_count"), py::arg("w0_range"), py::arg("w0_count"),
      py::arg("k") = 1.0, "List of (w0, h0, n_min)");

  // grid
  py::class_<Grid>(m, "Grid")
      .def(py::init<double, std::size_t>(), py::arg("x_max"), py::arg("n_points"))
      .def_property_readonly("x_max", &Grid::x_max)
      .def_property_readonly("n_points", &Grid::size)
      .def_property_readonly("dx", &Grid::dx)
      .def_property_readonly("dk", &Grid::dk)
      .def_property_readonly("points", [](const Grid& g) { return to_array(g.points()); })
      .def_property_readonly("wavenumbers", [](const Grid& g) { return to_array(g.wavenumbers()); });
  m.def(
      "apply_kinetic",
      [](const Grid& g, py::array_t<Complex, py::array::c_style | py::array::forcecast> psi,
         double mass) { return amplitudes(apply_kinetic(from_array(g, psi), mass)); },
      py::arg("grid"), py::arg("psi"), py::arg("mass"));
  m.def(
      "inner_product",
      [](const Grid& g, py::array_t<Complex, py::array::c_style | py::array::forcecast> a,
         py::array_t<Complex, py::array::c_style | py::array::forcecast> b) {
        return inner_product(from_array(g, a), from_array(g, b));
      },
      py::arg("grid"), py::arg("a"), py::arg("b"));
  m.def("select_x_max", &select_x_max, py::arg("params"), py::arg("mass"),
        py::arg("n_points") = 1024, py::arg("edge_ratio") = 1e-12, py::arg("levels") = 1);
  py::class_<GridConvergence>(m, "GridConvergence")
      .def_readonly("grid", &GridConvergence::grid)
      .def_readonly("e0_initial", &GridConvergence::e0_initial)
      .def_readonly("e0_final", &GridConvergence::e0_final)
      .def_readonly("drift_initial", &GridConvergence::drift_initial)
      .def_readonly("drift_final", &GridConvergence::drift_final);
  m.def("converged_grid", &converged_grid, py::arg("params"), py::arg("m_initial"),
        py::arg("m_final"), py::arg("tolerance") = 1e-7);

  // eigensolver
  py::enum_<EigenMethod>(m, "EigenMethod")
      .value("automatic", EigenMethod::automatic)
      .value("dense", EigenMethod::dense)
      .value("lanczos", EigenMethod::lanczos);
  m.def(
      "lowest_eigenpairs",
      [](const Grid& g, const PotentialParams& p, double mass, int count, EigenMethod method) {
        EigenOptions opt;
        opt.method = method;
        const auto r = lowest_eigenpairs(g, p, mass, count, opt);
        py::list states;
        for (const auto& s : r.states) states.append(amplitudes(s));
        py::dict d;
        d["energies"] = to_array(r.energies);
        d["residuals"] = to_array(r.residuals);
        d["states"] = states;
        d["degenerate_first_excited"] = r.degenerate_first_excited;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("grid"), py::arg("params"), py::arg("mass"), py::arg("count") = 2,
      py::arg("method") = EigenMethod::automatic);
  m.def("grid_for_mass", &grid_for_mass, py::arg("params"), py::arg("mass"),
        py::arg("n_points") = 2048);
  auto curve = [](auto fn) {
    return [fn](const PotentialParams& p, const std::vector<double>& masses, int threads) {
      std::vector<double> out;
      for (const auto& c : fn(p, masses, threads)) out.push_back(c.value);
      return to_array(out);
    };
  };
  m.def("energy_curve", curve(&energy_curve), py::arg("params"), py::arg("masses"),
        py::arg("threads") = 1);
  m.def("gap_curve", curve(&gap_curve), py::arg("params"), py::arg("masses"),
        py::arg("threads") = 1);

  // schedules
  py::enum_<MassScheduleKind>(m, "MassScheduleKind")
      .value("poly1", MassScheduleKind::poly1)
      .value("poly2", MassScheduleKind::poly2)
      .value("poly3", MassScheduleKind::poly3)
      .value("poly4", MassScheduleKind::poly4)
      .value("plain_quadratic", MassScheduleKind::plain_quadratic);
  m.def("parse_mass_schedule_kind", &parse_mass_schedule_kind);
  py::class_<MassSchedule>(m, "MassSchedule")
      .def(py::init([](MassScheduleKind kind, double mi, double mf, double T) {
             MassSchedule s{kind, mi, mf, T};
             s.validate();
             return s;
           }),
           py::arg("kind"), py::arg("m_initial"), py::arg("m_final"), py::arg("total_time"))
      .def_readonly("kind", &MassSchedule::kind)
      .def_readonly("m_initial", &MassSchedule::m_initial)
      .def_readonly("m_final", &MassSchedule::m_final)
      .def_readonly("total_time", &MassSchedule::total_time);
  m.def("mass_at", &mass_at, py::arg("schedule"), py::arg("t"));
  m.def("ramp", &ramp, py::arg("order"), py::arg("s"));
  py::enum_<BetaScheduleKind>(m, "BetaScheduleKind")
      .value("linear", BetaScheduleKind::linear)
      .value("logarithmic", BetaScheduleKind::logarithmic)
      .value("quadratic", BetaScheduleKind::quadratic);
  py::class_<BetaSchedule>(m, "BetaSchedule")
      .def(py::init([](BetaScheduleKind kind, double bi, double bf, double T) {
             BetaSchedule s{kind, bi, bf, T};
             s.validate();
             return s;
           }),
           py::arg("kind"), py::arg("beta_initial"), py::arg("beta_final") = 1.0,
           py::arg("total_time") = 1.0);
  m.def("beta_at", &beta_at, py::arg("schedule"), py::arg("t"));

  // quantum dynamics
  py::enum_<Integrator>(m, "Integrator")
      .value("rk4", Integrator::rk4)
      .value("split_step", Integrator::split_step);
  py::class_<PropagationConfig>(m, "PropagationConfig")
      .def(py::init<>())
      .def_readwrite("dt", &PropagationConfig::dt)
      .def_readwrite("integrator", &PropagationConfig::integrator)
      .def_readwrite("observer_stride", &PropagationConfig::observer_stride)
      .def_readwrite("max_kinetic_phase", &PropagationConfig::max_kinetic_phase)
      .def_readwrite("max_norm_drift", &PropagationConfig::max_norm_drift);
  m.def(
      "propagate",
      [](const Grid& g, const PotentialParams& p, const MassSchedule& s,
         py::array_t<Complex, py::array::c_style | py::array::forcecast> psi0,
         const PropagationConfig& cfg) {
        Trajectory t = [&] {
          py::gil_scoped_release release;
          return propagate(g, p, s, from_array(g, psi0), cfg);
        }();
        py::dict d;
        d["times"] = to_array(t.times);
        d["mass"] = to_array(t.mass);
        d["energy"] = to_array(t.energy);
        d["width"] = to_array(t.width);
        d["x0"] = to_array(t.x0);
        d["j0"] = to_array(t.j0);
        d["forbidden_probability"] = to_array(t.forbidden_probability);
        d["width_in_forbidden"] = std::vector<bool>(t.width_in_forbidden);
        d["final_state"] = amplitudes(t.final_state);
        d["max_norm_drift"] = t.max_norm_drift;
        d["substeps"] = t.substeps;
        return d;
      },
      py::arg("grid"), py::arg("params"), py::arg("schedule"), py::arg("psi0"),
      py::arg("config") = PropagationConfig{});
  m.def(
      "energy_expectation",
      [](const Grid& g, py::array_t<Complex, py::array::c_style | py::array::forcecast> psi,
         const PotentialParams& p, double mass) {
        return energy_expectation(from_array(g, psi), p, mass);
      },
      py::arg("grid"), py::arg("psi"), py::arg("params"), py::arg("mass"));
  m.def(
      "probability_current",
      [](const Grid& g, py::array_t<Complex, py::array::c_style | py::array::forcecast> psi,
         double mass) { return to_array(probability_current(from_array(g, psi), mass).values); },
      py::arg("grid"), py::arg("psi"), py::arg("mass"));

  // classical
  py::class_<EquilibriumResult>(m, "EquilibriumResult")
      .def_readonly("beta", &EquilibriumResult::beta)
      .def_readonly("avg_potential", &EquilibriumResult::avg_potential)
      .def_readonly("internal_energy", &EquilibriumResult::internal_energy)
      .def_readonly("partition_log", &EquilibriumResult::partition_log);
  m.def("equilibrium", &equilibrium, py::arg("params"), py::arg("beta"));
  m.def("boltzmann_average", &boltzmann_average, py::arg("params"), py::arg("beta"),
        py::arg("integrand"));
  m.def("alpha_eq", &alpha_eq, py::arg("params"), py::arg("beta"), py::arg("step_decades") = 0.01);
  m.def("alpha_eq_secant", &alpha_eq_secant, py::arg("params"), py::arg("beta_a"),
        py::arg("beta_b"));
  m.def(
      "sample_boltzmann",
      [](const PotentialParams& p, double beta, std::size_t n, std::uint64_t seed) {
        return to_array(sample_boltzmann(p, beta, n, seed));
      },
      py::arg("params"), py::arg("beta"), py::arg("n"), py::arg("seed"));
  m.def(
      "philox_uniforms",
      [](std::uint64_t seed, std::uint64_t particle, std::uint64_t tick) {
        const auto u = philox_uniforms(seed, particle, tick);
        return std::pair{u.first, u.second};
      },
      py::arg("seed"), py::arg("particle"), py::arg("tick"));
  m.def(
      "metropolis_step",
      [](double x, const PotentialParams& p, double beta, double s, double u1, double u2) {
        return metropolis_step(x, p, beta, s, UniformPair{u1, u2});
      },
      py::arg("x"), py::arg("params"), py::arg("beta"), py::arg("s"), py::arg("u_proposal"),
      py::arg("u_accept"));
  auto series_dict = [](const AnnealSeries& s) {
    std::vector<double> t, mean, lo, hi, se;
    for (const auto& p : s.points) {
      t.push_back(p.t);
      mean.push_back(p.mean);
      lo.push_back(p.lo);
      hi.push_back(p.hi);
      se.push_back(p.std_error);
    }
    py::dict d;
    d["t"] = to_array(t);
    d["avgV"] = to_array(mean);
    d["lo"] = to_array(lo);
    d["hi"] = to_array(hi);
    d["std_error"] = to_array(se);
    return d;
  };
  m.def(
      "anneal_ensemble",
      [series_dict](const PotentialParams& p, const BetaSchedule& sched, double s, std::size_t n,
                    std::uint64_t seed, const std::vector<double>& record_times, int threads) {
        AnnealOptions opt;
        opt.threads = threads;
        AnnealSeries out;
        {
          py::gil_scoped_release release;
          out = anneal_ensemble(p, sched, s, n, seed, record_times, opt);
        }
        return series_dict(out);
      },
      py::arg("params"), py::arg("schedule"), py::arg("s"), py::arg("n"), py::arg("seed"),
      py::arg("record_times") = std::vector<double>{}, py::arg("threads") = 1);
  m.def(
      "residual_energy_sa",
      [](const PotentialParams& p, const BetaSchedule& sched, double s, std::size_t n,
         std::uint64_t seed) {
        const auto series = anneal_ensemble(p, sched, s, n, seed, {});
        const auto r = residual_energy_sa(series, p, sched.beta_final);
        return py::dict(py::arg("residual") = r.residual, py::arg("lo") = r.lo,
                        py::arg("hi") = r.hi, py::arg("std_error") = r.std_error);
      },
      py::arg("params"), py::arg("schedule"), py::arg("s"), py::arg("n"), py::arg("seed"),
      "Anneal from the Boltzmann distribution at beta_i and return the final residual");

  py::class_<DecayFit>(m, "DecayFit")
      .def_readonly("exponent", &DecayFit::exponent)
      .def_readonly("intercept", &DecayFit::intercept)
      .def_readonly("window_lo", &DecayFit::window_lo)
      .def_readonly("window_hi", &DecayFit::window_hi)
      .def_readonly("r_squared", &DecayFit::r_squared)
      .def_readonly("points", &DecayFit::points);
  m.def(
      "log_schedule_run",
      [series_dict](const PotentialParams& p, double beta_i, double s, std::size_t n,
                    std::uint64_t seed, double t_max) {
        LogScheduleResult r;
        {
          py::gil_scoped_release release;
          r = log_schedule_run(p, beta_i, s, n, seed, t_max);
        }
        py::dict d = series_dict(r.series);
        d["fit"] = r.fit;
        d["beta_final"] = r.beta_final;
        return d;
      },
      py::arg("params"), py::arg("beta_i"), py::arg("s"), py::arg("n"), py::arg("seed"),
      py::arg("t_max"));

  py::enum_<FitMode>(m, "FitMode")
      .value("all_points", FitMode::all_points)
      .value("crests", FitMode::crests);
  m.def(
      "fit_power_law",
      [](const std::vector<double>& t, const std::vector<double>& r, FitMode mode) {
        if (t.size() != r.size()) throw std::invalid_argument("t and r differ in length");
        std::vector<PowerLawSample> s;
        for (std::size_t i = 0; i < t.size(); ++i) s.push_back({t[i], r[i]});
        return fit_power_law(s, mode);
      },
      py::arg("t"), py::arg("r"), py::arg("mode") = FitMode::all_points);

  // experiments
  m.def(
      "stage_table",
      [] {
        py::list out;
        for (const auto& r : stage_table()) {
          out.append(py::dict(py::arg("kind") = to_string(r.kind), py::arg("row") = std::string(1, r.row),
                              py::arg("param") = r.param, py::arg("energy") = r.energy,
                              py::arg("reference") = r.reference));
        }
        return out;
      },
      "Recompute the eight boundary energies; raises CrossCheckError on disagreement");
  m.def(
      "stage_spec",
      [](const std::string& label, const PotentialParams& p) {
        const auto s = stage_spec(label, p);
        return py::dict(py::arg("label") = s.label, py::arg("kind") = to_string(s.kind),
                        py::arg("start") = s.start_param, py::arg("end") = s.end_param,
                        py::arg("target_energy") = s.target_energy);
      },
      py::arg("label"), py::arg("params") = PotentialParams{});
  m.def(
      "run_experiment",
      [](const std::string& config_text) {
        const auto cfg = parse_config(config_text);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        py::dict d;
        std::vector<double> T, R;
        for (const auto& p : r.curve.samples) {
          T.push_back(p.total_time);
          R.push_back(p.residual);
        }
        d["T"] = to_array(T);
        d["residual"] = to_array(R);
        d["fit_status"] = r.curve.fit_status;
        if (r.curve.fit) d["exponent"] = r.curve.fit->exponent;
        if (r.log) {
          d["exponent"] = r.log->fit.exponent;
          d["beta_final"] = r.log->beta_final;
        }
        d["config_hash"] = cfg.hash();
        return d;
      },
      py::arg("config_text"), "Parse an experiment config and run it");
  m.def("config_hash", [](const std::string& text) { return parse_config(text).hash(); });
}
