#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "annealab/errors.hpp"
#include "annealab/experiments.hpp"

using namespace annealab;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("annealab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("stage table reproduces the boundary energies") {
  const auto rows = stage_table();
  REQUIRE(rows.size() == 8);
  for (const auto& r : rows) CHECK(std::abs(r.energy - r.reference) < 1e-6);
  const auto& qb = rows[1];
  CHECK(qb.kind == StageKind::quantum);
  CHECK(qb.param == 1e3);
  CHECK(qb.energy == Approx(0.1050870).epsilon(1e-5));
  const auto& cc = rows[6];
  CHECK(cc.kind == StageKind::classical);
  CHECK(cc.param == Approx(std::pow(10.0, 1.97)));
  CHECK(cc.energy == Approx(0.0156931).epsilon(1e-5));
  const double masses[] = {1.0, 1e3, 1e5, 1e6};
  const double lb[] = {0.29, 1.18, 1.97, 2.35};
  for (int i = 0; i < 4; ++i) {
    CHECK(rows[i].param == masses[i]);
    CHECK(rows[4 + i].param == Approx(std::pow(10.0, lb[i])).epsilon(1e-15));
  }
}

TEST_CASE("quantum and classical boundaries pair up") {
  const auto rows = stage_table();
  for (int i = 0; i < 4; ++i) {
    const double rel = std::abs(rows[i].energy - rows[4 + i].energy) / rows[4 + i].energy;
    CAPTURE(i);
    if (i == 2) {
      // row c: the tabulated pair itself differs by 1.38%
      CHECK(rel == Approx(std::abs(0.0154758 - 0.0156931) / 0.0156931).epsilon(1e-3));
    } else {
      CHECK(rel < 0.01);
    }
  }
}

TEST_CASE("stage specs") {
  const auto s2 = stage_spec("2");
  CHECK(s2.kind == StageKind::quantum);
  CHECK(s2.start_param == 1e3);
  CHECK(s2.end_param == 1e5);
  CHECK(std::abs(s2.target_energy - 0.0154758) < 1e-6);
  const auto sc = stage_spec("C");
  CHECK(sc.kind == StageKind::classical);
  CHECK(sc.target_energy == Approx(0.0049526 - 0.5 / std::pow(10.0, 2.35)).epsilon(1e-4));
  CHECK_THROWS_AS(stage_bounds("4"), std::invalid_argument);
  CHECK_THROWS_AS(stage_bounds("a"), std::invalid_argument);
}

TEST_CASE("config parsing") {
  const auto c = parse_config(R"(
# quantum sweep
[potential]
h0 = 0.2
[run]
stage = 1
schedule = poly3
log10_T = 2:3:5
seed = 7
[quantum]
dt = 0.05
integrator = rk4
[fit]
mode = crests
window = 2.2:2.9
)");
  CHECK(c.stage == "1");
  CHECK(c.schedule == "poly3");
  REQUIRE(c.total_times.size() == 5);
  CHECK(c.total_times.front() == Approx(100.0));
  CHECK(c.total_times.back() == Approx(1000.0));
  CHECK(c.seed == 7);
  CHECK(c.dt == 0.05);
  CHECK(c.integrator == Integrator::rk4);
  CHECK(c.fit_mode == FitMode::crests);
  REQUIRE(c.fit_window);
  CHECK(c.fit_window->first == 2.2);

  const auto lg = parse_config("[run]\nschedule = logarithmic\nbeta_i = 2\nt_max = 1e4\n[classical]\ns = 4\nN = 100\n");
  CHECK(lg.is_logarithmic());
  CHECK(lg.particles == 100);
}

TEST_CASE("config errors name the line") {
  CHECK(error_of("[run]\nstage = 1\nT = 10\nbogus = 3\n").find("line 4") != std::string::npos);
  CHECK(error_of("[run]\nstage = 1\nT = 10\nbogus = 3\n").find("unknown key") != std::string::npos);
  CHECK(error_of("[nope]\n").find("unknown section") != std::string::npos);
  CHECK(error_of("stage = 1\n").find("outside") != std::string::npos);
  CHECK(error_of("[run]\nstage = 1\nstage = 2\n").find("duplicate") != std::string::npos);
  CHECK(error_of("[potential]\nk = 1x\n").find("line 2") != std::string::npos);
  CHECK(error_of("[run]\nstage = 1\nschedule = poyl3\nT = 10\n").find("line 3") != std::string::npos);
  CHECK_FALSE(error_of("[run]\nstage = 1\nT = 10, 5\n").empty());
  CHECK_FALSE(error_of("[run]\nstage = A\nschedule = poly3\nT = 10\n").empty());
  CHECK_FALSE(error_of("[run]\nstage = 2\nschedule = linear\nT = 10\n[quantum]\nn_points = 1000\n").empty());
  CHECK_FALSE(error_of("[run]\nstage = 7\nT = 10\n").empty());
  CHECK_FALSE(error_of("[run]\nstage = 1\n").empty());
  CHECK_FALSE(error_of("[run]\nstage = 1\nT = 10\nlog10_T = 1:2:3\n").empty());
  CHECK_FALSE(error_of("[run]\nschedule = log\nt_max = 1e4\n").empty());
  CHECK_FALSE(error_of("[potential]\nw0 = 0\n[run]\nstage = 1\nT = 10\n").empty());
  CHECK_FALSE(error_of("[classical]\nadaptive_step = maybe\n[run]\nstage = A\nT = 10\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/annealab.cfg"), ConfigError);
}

TEST_CASE("config hash") {
  const std::string base = "[run]\nstage = A\nT = 10, 20\nseed = 3\n[classical]\nN = 100\n";
  const auto a = parse_config(base);
  CHECK(a.hash() == parse_config("# comment\n" + base).hash());
  CHECK(a.hash() == parse_config("[run]  # main\nstage = A   # classical\nT = 10, 20\nseed = 3\n[classical]\nN = 100\n").hash());
  CHECK(a.hash() == parse_config("[run]\nseed = 3\nT = 10,20\nstage = A\nthreads = 4\n[classical]\nN = 100\n").hash());
  CHECK(a.hash() != parse_config(base + "[fit]\nmode = crests\n").hash());
  CHECK(a.hash() != parse_config("[run]\nstage = A\nT = 10, 20\nseed = 4\n[classical]\nN = 100\n").hash());
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("fit status on degenerate curves") {
  ResidualCurve one;
  one.samples = {{100.0, 1e-3, 1e-3, 1e-3}};
  fit_curve(one, FitMode::all_points);
  CHECK_FALSE(one.fit);
  CHECK(one.fit_status.find("insufficient points") != std::string::npos);
  ResidualCurve some;
  for (double t : {10.0, 20.0, 40.0, 80.0}) some.samples.push_back({t, 1.0 / t, 0, 0});
  some.samples.push_back({160.0, -1e-9, 0, 0});
  fit_curve(some, FitMode::all_points);
  REQUIRE(some.fit);
  CHECK(some.fit->exponent == Approx(-1.0));
  CHECK(some.fit_status.find("skipped") != std::string::npos);
  fit_curve(some, FitMode::all_points, std::pair{1.2, 1.95});
  REQUIRE(some.fit);
  CHECK(some.fit->points == 3);
  fit_curve(some, FitMode::all_points, std::pair{1.5, 1.95});
  CHECK_FALSE(some.fit);
}

TEST_CASE("single-T quantum experiment has no exponent") {
  auto c = parse_config("[run]\nstage = 1\nT = 20\n[quantum]\nn_points = 1024\n");
  const auto r = run_experiment(c);
  REQUIRE(r.curve.samples.size() == 1);
  CHECK_FALSE(r.curve.fit);
  CHECK(r.curve.fit_status.find("insufficient points") != std::string::npos);
  CHECK(r.curve.samples[0].residual > 0.0);
}

TEST_CASE("classical experiment outputs are reproducible") {
  const auto dir = scratch("classical");
  const std::string text = "[run]\nstage = A\nT = 5, 10, 20\nseed = 11\noutput = " + dir.string() +
                           "\n[classical]\nN = 20000\nrecords = 4\n";
  auto c = parse_config(text);
  const auto first = run_experiment(c);
  REQUIRE(first.curve.fit);
  const std::string summary = slurp(dir / "summary.csv");
  const std::string trace = slurp(dir / "trace" / "T01_10.csv");
  const std::string meta = slurp(dir / "meta.json");
  c.threads = 3;
  run_experiment(c);
  CHECK(slurp(dir / "summary.csv") == summary);
  CHECK(slurp(dir / "trace" / "T01_10.csv") == trace);
  CHECK(slurp(dir / "meta.json") == meta);

  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash()));
  for (const auto& body : {summary, trace}) {
    CHECK(body.find(std::string("# config_hash: ") + hash) == 0);
    CHECK(body.find("# seed: 11\n") != std::string::npos);
    CHECK(body.find("# grid: none\n") != std::string::npos);
    CHECK(body.find("# version: " + version_string() + "\n") != std::string::npos);
  }
  CHECK(summary.find("\nT,residual,lo,hi\n") != std::string::npos);
  CHECK(trace.find("\nt,avgV,lo,hi\n") != std::string::npos);
  CHECK(meta.find(hash) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("quantum experiment outputs") {
  const auto dir = scratch("quantum");
  const std::string text = "[run]\nstage = 3\nschedule = poly2\nT = 10, 15\noutput = " + dir.string() +
                           "\n[quantum]\nn_points = 512\ndump_state = true\n";
  const auto c = parse_config(text);
  run_experiment(c);
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.find("\nT,residual_energy\n") != std::string::npos);
  CHECK(summary.find("# grid: x_max=") != std::string::npos);
  const std::string trace = slurp(dir / "trace" / "T00_10.csv");
  CHECK(trace.find("\nt,energy,width,x0,j0,mass,forbidden_probability\n") != std::string::npos);
  const std::string psi = slurp(dir / "trace" / "T01_15_psi.csv");
  CHECK(psi.find("\nx,re,im\n") != std::string::npos);
  run_experiment(c);
  CHECK(slurp(dir / "summary.csv") == summary);
  fs::remove_all(dir);
}

TEST_CASE("logarithmic experiment") {
  const auto dir = scratch("log");
  const auto c = parse_config("[run]\nschedule = log\nbeta_i = 1.9498\nt_max = 2000\noutput = " + dir.string() +
                              "\n[classical]\ns = 4\nN = 2000\n");
  const auto r = run_experiment(c);
  REQUIRE(r.log);
  CHECK(r.log->fit.exponent < 0.0);
  CHECK(slurp(dir / "summary.csv").find("\nt,avgV,lo,hi\n") != std::string::npos);
  CHECK(slurp(dir / "meta.json").find("alpha_eq_final") != std::string::npos);
  fs::remove_all(dir);
}
