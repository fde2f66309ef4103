#include "lmcf/curve_io.hpp"
#include "lmcf/diagnostics.hpp"
#include "lmcf/error.hpp"
#include "lmcf/fixtures.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace lmcf;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> refine;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--out", o.out, "output directory for summary.json and CSV tables");
  cmd->add_option("--seed", o.seed, "override the configuration seed");
  cmd->add_option("--refine", o.refine, "halve the base resolution this many times");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
}

void print_report(const ScenarioReport& r) {
  std::printf("scenario %s  config_hash %s\n", r.scenario.c_str(), r.hash.c_str());
  for (const Check& c : r.checks)
    std::printf("  %-4s %-44s %.6g %s %.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                c.threshold);
  std::printf("%s  (%.2f s)\n", r.pass() ? "PASS" : "FAIL", r.runtime_seconds);
}

int run(const std::string& scenario, const RunOptions& o) {
  json cfg = o.config.empty() ? json::object() : read_json(o.config);
  if (!scenario.empty()) {
    if (cfg.contains("scenario") && cfg["scenario"] != scenario)
      throw Error(ErrorCode::ConfigInvalid, "configuration is for scenario " + cfg["scenario"].dump());
    cfg["scenario"] = scenario;
  }
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.refine) cfg["refine"] = *o.refine;
  const ScenarioReport r = run_scenario(cfg);
  print_report(r);
  for (const std::string& e : r.errors) std::printf("  error: %s\n", e.c_str());
  const std::string out = o.out.empty() ? r.config["output"].get<std::string>() : o.out;
  if (!out.empty())
    for (const auto& f : write_bundle(r, out)) std::printf("wrote %s\n", f.c_str());
  return r.pass() ? 0 : 1;
}

json summary_at(const std::string& path) {
  return load_summary(fs::is_directory(path) ? (fs::path(path) / "summary.json").string() : path);
}

int compare(const std::string& a, const std::string& b) {
  const RunDiff d = compare_runs(summary_at(a), summary_at(b));
  for (const MetricDelta& m : d.deltas)
    std::printf("  %-7s %-48s %.10g -> %.10g  (|delta| %.3g, tolerance %.3g)\n", m.flagged ? "DRIFT" : "ok",
                m.name.c_str(), m.a, m.b, std::abs(m.a - m.b), m.tolerance);
  for (const std::string& c : d.check_changes) std::printf("  VERDICT %s changed\n", c.c_str());
  std::printf("%zu differing metrics, %s\n", d.deltas.size(), d.drift ? "drift" : "within tolerance");
  return d.drift ? 1 : 0;
}

// --param key=value, value parsed as JSON when possible.
json parse_params(const std::vector<std::string>& items) {
  json p = json::object();
  for (const std::string& kv : items) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected key=value, got " + kv);
    const std::string v = kv.substr(eq + 1);
    p[kv.substr(0, eq)] = json::accept(v) ? json::parse(v) : json(v);
  }
  return p;
}

struct Source {
  std::string fixture;
  std::vector<std::string> params;
  std::string curve;
};

void add_source(CLI::App* cmd, Source& s) {
  cmd->add_option("--fixture", s.fixture, "fixture name (see `lmcf list`)");
  cmd->add_option("--param", s.params, "fixture parameter key=value (repeatable)");
  cmd->add_option("--curve", s.curve, "curve file in the lmcf-curve format");
}

DiscreteCurve load_source_curve(const Source& s) {
  if (!s.curve.empty()) return load_curve(s.curve);
  if (s.fixture.empty()) throw Error(ErrorCode::InvalidArgument, "give --fixture or --curve");
  const Fixture f = generate_fixture(s.fixture, parse_params(s.params));
  if (!f.curve) throw Error(ErrorCode::InvalidArgument, "fixture " + s.fixture + " is not a curve");
  return *f.curve;
}

VecX parse_point(const std::vector<double>& v) {
  VecX x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lmcf: Lagrangian mean curvature flow laboratory"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list scenarios and fixtures");
  std::string list_defaults;
  list->add_option("--defaults", list_defaults, "print the default configuration of a scenario");

  RunOptions run_opts;
  std::string scenario_name;
  auto* run_cmd = app.add_subcommand("run", "run a scenario from a configuration");
  run_cmd->add_option("--scenario", scenario_name, "scenario name (when the configuration omits it)");
  add_run_options(run_cmd, run_opts);

  const std::vector<std::pair<std::string, std::string>> shortcuts = {
      {"monotonicity", "huisken-monotonicity"}, {"spectrum", "hermite-spectrum"},
      {"three-annulus", "three-annulus"},       {"heat", "caloric-identities"},
      {"translator-check", "grim-reaper-translator"}, {"linking", "linking"},
      {"blow-down", "blow-down"},              {"pair-density", "plane-pair-density"}};
  std::vector<std::pair<CLI::App*, std::string>> shortcut_cmds;
  for (const auto& [cmd, sc] : shortcuts)
    shortcut_cmds.push_back({app.add_subcommand(cmd, "run the " + sc + " scenario"), sc});
  for (auto& [cmd, sc] : shortcut_cmds) add_run_options(cmd, run_opts);

  std::string cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "compare two run summaries (files or bundle directories)");
  cmp->add_option("a", cmp_a)->required();
  cmp->add_option("b", cmp_b)->required();

  Source src;
  std::string out;
  double t0 = 0.0, t1 = 0.1, dt = 1e-4;
  std::string scheme = "semi-implicit";
  int record_every = 1;
  auto* sim = app.add_subcommand("simulate", "evolve a curve by curve shortening flow");
  add_source(sim, src);
  sim->add_option("--t0", t0, "start time");
  sim->add_option("--t1", t1, "end time");
  sim->add_option("--dt", dt, "time step");
  sim->add_option("--scheme", scheme, "explicit or semi-implicit")->check(CLI::IsMember({"explicit", "semi-implicit"}));
  sim->add_option("--record-every", record_every, "record every k-th state");
  sim->add_option("--out", out, "output directory")->required();

  std::vector<double> x0;
  double wt0 = 0.0, t = -1.0;
  auto* dens = app.add_subcommand("density", "Gaussian density ratio of a curve or plane pair");
  add_source(dens, src);
  dens->add_option("--x0", x0, "window center (2 entries for curves, 4 for plane pairs)")->delimiter(',');
  dens->add_option("--t0", wt0, "window time");
  dens->add_option("--t", t, "evaluation time (< t0)");

  std::uint64_t seed = 1;
  auto* ent = app.add_subcommand("entropy", "entropy of a curve");
  add_source(ent, src);
  ent->add_option("--seed", seed, "seed of the random centers");

  auto* fix = app.add_subcommand("fixture", "generate a fixture and save it");
  std::string fixture_name;
  std::vector<std::string> fixture_params;
  fix->add_option("name", fixture_name)->required();
  fix->add_option("--param", fixture_params, "parameter key=value (repeatable)");
  fix->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      if (!list_defaults.empty()) {
        std::printf("%s\n", default_config(list_defaults).dump(2).c_str());
        return 0;
      }
      std::printf("scenarios:\n");
      for (const auto& s : scenario_catalog()) std::printf("  %-24s %s\n", s.name.c_str(), s.summary.c_str());
      std::printf("fixtures:\n");
      for (const auto& f : fixture_catalog()) std::printf("  %-16s %s\n", f.name.c_str(), f.object.c_str());
      return 0;
    }
    if (run_cmd->parsed()) return run(scenario_name, run_opts);
    for (auto& [cmd, sc] : shortcut_cmds)
      if (cmd->parsed()) return run(sc, run_opts);
    if (cmp->parsed()) return compare(cmp_a, cmp_b);
    if (sim->parsed()) {
      FlowOptions opts;
      opts.scheme = scheme == "explicit" ? Scheme::Explicit : Scheme::SemiImplicit;
      const FlowTrajectory tr = evolve(load_source_curve(src), t0, t1, dt, opts, {}, record_every);
      fs::create_directories(out);
      std::ofstream csv(fs::path(out) / "trajectory.csv");
      csv << "step,t,component,vertex,x,y\n";
      for (std::size_t k = 0; k < tr.size(); ++k)
        for (std::size_t c = 0; c < tr.states[k].components.size(); ++c) {
          const Polyline& p = tr.states[k].components[c];
          for (std::size_t i = 0; i < p.size(); ++i)
            csv << k << ',' << format_double(tr.times[k]) << ',' << c << ',' << i << ','
                << format_double(p.vertices[i].x()) << ',' << format_double(p.vertices[i].y()) << '\n';
        }
      save_curve((fs::path(out) / "final.curve.csv").string(), tr.states.back());
      json meta = {{"scheme", tr.meta.scheme}, {"dt", tr.meta.dt}, {"h", tr.meta.h}, {"states", tr.size()},
                   {"t0", tr.times.front()}, {"t1", tr.times.back()}};
      if (tr.meta.first_crossing_time) meta["first_crossing_time"] = *tr.meta.first_crossing_time;
      std::ofstream(fs::path(out) / "run.json") << meta.dump(2) << "\n";
      std::printf("%zu states, t = %g .. %g, wrote %s\n", tr.size(), tr.times.front(), tr.times.back(), out.c_str());
      return 0;
    }
    if (dens->parsed()) {
      GaussianWindow w;
      w.t0 = wt0;
      if (!src.fixture.empty() && src.fixture.rfind("plane-pair-m", 0) == 0) {
        const Fixture f = generate_fixture(src.fixture, parse_params(src.params));
        std::vector<ProductLagrangian> pieces;
        for (int j = 0; j < 2; ++j) {
          const double th = f.pair->planes[j].angle;
          const bool m0 = f.pair->intersection_dim == 0;
          pieces.push_back({line_through_origin(m0 ? th / 2 : 0.0), line_through_origin(m0 ? th / 2 : th)});
        }
        w.x0 = x0.empty() ? VecX(VecX::Zero(4)) : parse_point(x0);
        std::printf("%.15g\n", gaussian_density_ratio(pieces, t, w));
      } else {
        w.x0 = x0.empty() ? VecX(VecX::Zero(2)) : parse_point(x0);
        std::printf("%.15g\n", gaussian_density_ratio(load_source_curve(src), t, w));
      }
      return 0;
    }
    if (ent->parsed()) {
      EntropyOptions opts;
      opts.seed = seed;
      const EntropyResult e = entropy(load_source_curve(src), opts);
      std::printf("entropy %.12g at x0 = (%.6g, %.6g), s = %.6g, %d evaluations\n", e.value, e.center[0], e.center[1],
                  e.scale, e.evaluations);
      return 0;
    }
    if (fix->parsed()) {
      const Fixture f = generate_fixture(fixture_name, parse_params(fixture_params));
      for (const auto& file : save_fixture(f, out)) std::printf("wrote %s\n", file.c_str());
      return f.audit_ok() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
