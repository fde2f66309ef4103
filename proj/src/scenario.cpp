#include "lmcf/scenario.hpp"

#include "lmcf/diagnostics.hpp"
#include "lmcf/drift_spectral.hpp"
#include "lmcf/error.hpp"
#include "lmcf/fixtures.hpp"
#include "lmcf/flow_heat.hpp"
#include "lmcf/linking.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace lmcf {

using json = nlohmann::json;

namespace {

json grid(double begin, double end, double step) {
  json a = json::array();
  for (int k = 0; begin + k * step < end - 1e-12; ++k) a.push_back(std::round((begin + k * step) * 1e12) / 1e12);
  return a;
}

const std::vector<ScenarioInfo>& catalog() {
  static const std::vector<ScenarioInfo> c = [] {
    auto base = [](const std::string& name, json fixture, json settings) {
      return json{{"schema_version", scenario_schema_version},
                  {"scenario", name},
                  {"seed", std::uint64_t{1}},
                  {"output", ""},
                  {"refine", 0},
                  {"fixture", std::move(fixture)},
                  {"settings", std::move(settings)}};
    };
    std::vector<ScenarioInfo> v;
    v.push_back({"plane-pair-density", "Gaussian density ratio of a plane and of a transverse plane pair",
                 base("plane-pair-density",
                      {{"name", "plane-pair-m0"}, {"params", {{"theta1", 0.0}, {"theta2", pi}}}},
                      {{"times", {-0.1, -1.0, -5.0}}, {"tolerance", 1e-6}})});
    v.push_back(
        {"huisken-monotonicity", "Huisken monotonicity with f = 1 on the exact solutions",
         base("huisken-monotonicity", nullptr,
              {{"value_tolerance", 1e-8},
               {"dissipation_tolerance", 0.02},
               {"line", {{"angle", 0.3}, {"half_length", 40.0}, {"N", 201}, {"t_begin", -1.0}, {"t_end", -0.1},
                         {"samples", 11}, {"x0", {0.0, 0.0}}, {"t0", 0.0}}},
               {"plane", {{"t_begin", -1.0}, {"t_end", -0.1}, {"samples", 11}, {"x0", {0.0, 0.0, 0.0, 0.0}},
                          {"t0", 0.0}}},
               {"circle", {{"N", 1024}, {"t_begin", 0.0}, {"t_end", 0.3}, {"samples", 301}, {"x0", {0.4, 0.0}},
                           {"t0", 0.6}}},
               {"grim_reaper", {{"delta", 1e-3}, {"N", 2001}, {"t_begin", -0.2}, {"t_end", 0.1}, {"samples", 61},
                                {"x0", {0.0, 1.0}}, {"t0", 0.2}}}})});
    v.push_back({"hermite-spectrum", "drift Laplacian eigenfunctions and degree-1 pair solutions",
                 base("hermite-spectrum",
                      {{"name", "plane-pair-m1"}, {"params", {{"theta1", 0.6}, {"theta2", -0.6}}}},
                      {{"dims", {1, 2}},
                       {"max_degree", 4},
                       {"half_width", 12.5},
                       {"grid_h", 0.1},
                       {"eval_radius", 12.1},
                       {"grid_tolerance", 1e-8},
                       {"basis_dims", {2, 3}},
                       {"inner_taus", {0.0, -1.7}},
                       {"inner_tolerance", 1e-10}})});
    v.push_back({"three-annulus", "three-annulus dichotomy on homogeneous and mixed sequences",
                 base("three-annulus", nullptr,
                      {{"n", 2},
                       {"max_degree", 4},
                       {"tau_min", -12},
                       {"tau_max", 0},
                       {"s_values", grid(0.05, 5.0, 0.1)},
                       {"mixtures", 100},
                       {"mixture_terms", 4},
                       {"mixture_tau_min", -10},
                       {"mixture_tau_max", 3}})});
    v.push_back({"grim-reaper-translator", "translator fit on Grim Reaper x R against round circle x R",
                 base("grim-reaper-translator", {{"name", "grim-reaper"}, {"params", {{"delta", 0.05}, {"N", 512}}}},
                      {{"residual_tolerance", 1e-3},
                       {"slope_min", 1.8},
                       {"speed_tolerance", 1e-3},
                       {"circle_r", 0.8},
                       {"circle_N", {64, 256, 1024}},
                       {"nondegenerate_ratio", 0.1}})});
    v.push_back(
        {"caloric-identities", "coordinates, constants, beta + 2 t theta and B along flows; uniqueness",
         base("caloric-identities", nullptr,
              {{"levels", 3},
               {"dt_factor", 1.0},
               {"slope_min", 1.8},
               {"certificate_constant", 10.0},
               {"line", {{"angle", 0.4}, {"half_length", 3.0}, {"N", 31}, {"offset", {0.3, -0.2}}}},
               {"circle", {{"N0", 32}, {"t_begin", -1.0}, {"t_end", -0.5}}},
               {"grim_reaper", {{"s_max", 4.0}, {"N0", 81}, {"t_begin", 0.0}, {"t_end", 0.25}}},
               {"smoothed_pair", {{"N0", 201}, {"sigma", 0.1}, {"t_begin", -1.0}, {"t_end", -0.75}}},
               {"beta", {{"s_max", 3.0}, {"N0", 81}, {"t_begin", -0.5}, {"t_end", -0.25}}},
               {"b_field", {{"s_max", 3.0}, {"N0", 81}, {"t_begin", -1.0}, {"t_end", -0.5}}},
               {"uniqueness", {{"N", 64}, {"steps", 50}, {"ratio_tolerance", 0.1}}}})});
    v.push_back({"linking", "sphere-slice linking and half-space separation",
                 base("linking", nullptr,
                      {{"transverse_radius", 1.0},
                       {"parallel_radius", 1.2},
                       {"poles", 5},
                       {"hopf_pairs", 5},
                       {"hopf_samples", 120},
                       {"tilted_radius", 1.5},
                       {"margin_tolerance", 1e-9}})});
    v.push_back({"blow-down", "blow-down ladder of Grim Reaper x R: Hausdorff distance and height comparison",
                 base("blow-down", nullptr,
                      {{"lambdas", {0.2, 0.1, 0.05}},
                       {"ds", 0.1},
                       {"dt", 0.0025},
                       {"arm_height", 3.5},
                       {"inner_radius", 2.0},
                       {"outer_radius", 2.2},
                       {"delta", 0.05},
                       {"s1_candidates", grid(-0.45, 0.0, 0.05)},
                       {"hausdorff_radius", 1.0}})});
    for (auto& info : v) {
      json& f = info.defaults["fixture"];
      if (f.is_object()) f["params"] = generate_fixture(f["name"], f["params"]).params;
    }
    return v;
  }();
  return c;
}

// Fixtures each scenario accepts in its "fixture" entry.
const std::map<std::string, std::set<std::string>>& allowed_fixtures() {
  static const std::map<std::string, std::set<std::string>> m = {
      {"plane-pair-density", {"plane-pair-m0", "plane-pair-m1"}},
      {"hermite-spectrum", {"plane-pair-m1"}},
      {"grim-reaper-translator", {"grim-reaper"}},
  };
  return m;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() && b.is_number_float());
  return a.type() == b.type();
}

// Overlay `in` onto `def`: keys must exist in `def` with matching JSON kinds (integers may not be
// replaced by fractional values); objects recurse.
void overlay(json& def, const json& in, const std::string& path) {
  if (!in.is_object()) invalid(path + " must be an object");
  for (auto it = in.begin(); it != in.end(); ++it) {
    const std::string p = path + "." + it.key();
    if (!def.contains(it.key())) invalid("unknown key " + p);
    json& d = def[it.key()];
    if (d.is_object()) {
      overlay(d, it.value(), p);
    } else {
      if (!same_kind(d, it.value())) invalid("wrong type for " + p);
      d = it.value();
    }
  }
}

// ---------------------------------------------------------------------------------------------

struct Recorder {
  ScenarioReport& r;

  void metric(const std::string& name, double v, double tol = 0.0) {
    r.metrics[name] = v;
    if (tol > 0.0) r.tolerances[name] = tol;
  }
  bool check(const std::string& name, double value, const std::string& rel, double threshold) {
    bool ok = false;
    if (rel == "<") ok = value < threshold;
    else if (rel == "<=") ok = value <= threshold;
    else if (rel == ">") ok = value > threshold;
    else if (rel == ">=") ok = value >= threshold;
    else if (rel == "==") ok = value == threshold;
    r.checks.push_back({name, ok, value, threshold, rel});
    return ok;
  }
  Table& table(const std::string& name, std::vector<std::string> columns) {
    Table& t = r.tables[name];
    t.columns = std::move(columns);
    return t;
  }
};

double d(const json& j, const char* k) { return j.at(k).get<double>(); }
int i(const json& j, const char* k) { return j.at(k).get<int>(); }
std::vector<double> dv(const json& j, const char* k) { return j.at(k).get<std::vector<double>>(); }

std::vector<double> time_grid(double t0, double t1, int steps) {
  std::vector<double> t;
  for (int k = 0; k <= steps; ++k) t.push_back(t0 + (t1 - t0) * k / steps);
  return t;
}

std::vector<double> samples(const json& s) { return time_grid(d(s, "t_begin"), d(s, "t_end"), i(s, "samples") - 1); }

GaussianWindow window(const json& s) {
  GaussianWindow w;
  const auto x = dv(s, "x0");
  w.x0 = Eigen::Map<const VecX>(x.data(), static_cast<Eigen::Index>(x.size()));
  w.t0 = d(s, "t0");
  return w;
}

std::string tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

Vec4 lift(const Vec2& v) { return Vec4(v.x(), v.y(), 0.0, 0.0); }

// ---------------------------------------------------------------------------------------------

void plane_pair_density(const json& cfg, Recorder& rec) {
  const json& s = cfg["settings"];
  const std::string fname = cfg["fixture"]["name"];
  const Fixture f = generate_fixture(fname, cfg["fixture"]["params"]);
  const PlanePairConfig& pair = *f.pair;
  // standard model with identity frame: m = 0 gives e^{i theta/2} R x e^{i theta/2} R, m = 1 gives
  // R x e^{i theta} R
  std::vector<ProductLagrangian> pieces;
  double dev = 0.0;
  for (int j = 0; j < 2; ++j) {
    const double th = pair.planes[j].angle;
    const AffineLine a = line_through_origin(pair.intersection_dim == 0 ? th / 2 : 0.0);
    const AffineLine b = line_through_origin(pair.intersection_dim == 0 ? th / 2 : th);
    pieces.push_back({a, b});
    MatX span(4, 2);
    span.col(0) = VecX(lift(a.direction));
    span.col(1) = VecX(Vec4(0.0, 0.0, b.direction.x(), b.direction.y()));
    const MatX& basis = pair.planes[j].basis;
    dev = std::max(dev, (span - basis * (basis.transpose() * span)).norm());
  }
  rec.metric("product_plane_deviation", dev);
  rec.check("products_span_fixture_planes", dev, "<", 1e-12);

  GaussianWindow w;
  w.x0 = VecX::Zero(4);
  w.t0 = 0.0;
  const double tol = d(s, "tolerance");
  double e1 = 0.0, e2 = 0.0;
  Table& t = rec.table("density", {"t", "plane", "pair"});
  for (double time : dv(s, "times")) {
    const double one = gaussian_density_ratio(std::vector<ProductLagrangian>{pieces[0]}, time, w);
    const double two = gaussian_density_ratio(pieces, time, w);
    rec.metric("plane_density_t" + tag(time), one);
    rec.metric("pair_density_t" + tag(time), two);
    t.rows.push_back({time, one, two});
    e1 = std::max(e1, std::abs(one - 1.0));
    e2 = std::max(e2, std::abs(two - 2.0));
  }
  rec.metric("plane_error", e1);
  rec.metric("pair_error", e2);
  rec.check("plane_density_one", e1, "<", tol);
  rec.check("pair_density_two", e2, "<", tol);
}

void record_monotonicity(Recorder& rec, const std::string& name, const MonotonicityReport& m, bool dissipation,
                         double dissipation_tol) {
  rec.metric(name + "_max_violation", m.max_violation);
  rec.metric(name + "_first", m.values.front());
  rec.metric(name + "_last", m.values.back());
  rec.check(name + "_monotone", m.pass ? 1.0 : 0.0, "==", 1.0);
  if (dissipation) {
    rec.metric(name + "_dissipation_mismatch", m.dissipation_mismatch);
    rec.check(name + "_dissipation_matches", m.dissipation_mismatch, "<", dissipation_tol);
  }
  Table& t = rec.table(name, {"t", "value", "dissipation", "bound"});
  for (std::size_t k = 0; k < m.times.size(); ++k) t.rows.push_back({m.times[k], m.values[k], m.dissipation[k], m.bound[k]});
}

void huisken_monotonicity(const json& cfg, Recorder& rec) {
  const json& s = cfg["settings"];
  const int R = 1 << cfg["refine"].get<int>();
  MonotonicityOptions opts;
  opts.value_tolerance = d(s, "value_tolerance");
  opts.dissipation_tolerance = d(s, "dissipation_tolerance");
  const double dtol = opts.dissipation_tolerance;

  const json& ls = s["line"];
  const Fixture line = generate_fixture(
      "line", {{"angle", d(ls, "angle")}, {"half_length", d(ls, "half_length")}, {"N", (i(ls, "N") - 1) * R + 1}});
  record_monotonicity(rec, "line", monotonicity_audit(static_trajectory(*line.curve, samples(ls)), window(ls), nullptr, nullptr, opts),
                      false, dtol);

  const json& ps = s["plane"];
  const AffineLine l0 = line_through_origin(0.0), l1 = line_through_origin(pi / 2);
  record_monotonicity(rec, "plane", monotonicity_audit(product_evolve(l0, l1, samples(ps)), window(ps), opts), false,
                      dtol);

  const json& cs = s["circle"];
  const int cn = i(cs, "N") * R;
  const FlowTrajectory circ = sample_trajectory(
      [cn](double t) { return *generate_fixture("circle", {{"r", std::sqrt(1.0 - 2.0 * t)}, {"N", cn}}).curve; },
      samples(cs));
  record_monotonicity(rec, "circle", monotonicity_audit(circ, window(cs), nullptr, nullptr, opts), true, dtol);

  const json& gs = s["grim_reaper"];
  const int gn = (i(gs, "N") - 1) * R + 1;
  const double delta = d(gs, "delta");
  const FlowTrajectory gr = sample_trajectory(
      [gn, delta](double t) {
        return *generate_fixture("grim-reaper", {{"delta", delta}, {"N", gn}, {"t", t}}).curve;
      },
      samples(gs));
  record_monotonicity(rec, "grim_reaper", monotonicity_audit(gr, window(gs), nullptr, nullptr, opts), false, dtol);

  GaussianWindow w4 = window(gs);
  const VecX x2 = w4.x0;
  w4.x0 = VecX::Zero(4);
  w4.x0.head(2) = x2;
  record_monotonicity(rec, "grim_reaper_x_line",
                      monotonicity_audit(product_evolve(gr, line_through_origin(0.0)), w4, opts), false, dtol);
}

void hermite_spectrum(const json& cfg, Recorder& rec) {
  const json& s = cfg["settings"];
  const int R = 1 << cfg["refine"].get<int>();
  const double hw = d(s, "half_width"), gh = d(s, "grid_h") / R, er = d(s, "eval_radius");
  const double gtol = d(s, "grid_tolerance");
  double sym = 0.0, grid_max = 0.0;
  Table& t = rec.table("eigen", {"n", "degree", "index", "lambda", "symbolic_residual", "grid_residual"});
  for (int n : s["dims"].get<std::vector<int>>())
    for (int deg = 0; deg <= i(s, "max_degree"); ++deg) {
      int idx = 0;
      for (const auto& k : multi_indices(n, deg)) {
        const Polynomial h = hermite(k);
        const double lambda = deg / 2.0;
        const double sr = drift_heat_residual(DriftSolution::homogeneous(h, lambda));
        const GridFunction g = sample_grid(h, hw, gh);
        const double gr = grid_eigen_residual(g, drift_apply_grid(g, er), lambda);
        sym = std::max(sym, sr);
        grid_max = std::max(grid_max, gr);
        t.rows.push_back({double(n), double(deg), double(idx++), lambda, sr, gr});
      }
    }
  rec.metric("symbolic_max_residual", sym);
  rec.metric("grid_max_residual", grid_max);
  rec.check("symbolic_exact", sym, "==", 0.0);
  rec.check("grid_residual", grid_max, "<", gtol);

  const json& fp = cfg["fixture"]["params"];
  const Fixture f = generate_fixture("plane-pair-m1", fp);
  const double th1 = f.pair->planes[0].angle, th2 = f.pair->planes[1].angle;
  const bool symmetric = std::abs(th1 + th2) < 1e-14;
  for (int n : s["basis_dims"].get<std::vector<int>>()) {
    const HomogeneousBasis b = homogeneous_basis(make_plane_pair(n, th1, th2, 1), 1);
    const std::string p = "n" + std::to_string(n) + "_";
    rec.metric(p + "degree1_rank", b.rank);
    rec.check(p + "degree1_rank_is_2n", b.rank, "==", 2 * n);
    const BasisElement* zt = nullptr;
    const BasisElement* z = nullptr;
    for (const auto& e : b.elements) {
      if (e.label == "ztheta") zt = &e;
      if (e.label == "z") z = &e;
    }
    rec.check(p + "ztheta_present", zt ? 1.0 : 0.0, "==", 1.0);
    if (!zt || !z) continue;
    double inner = 0.0;
    for (double tau : dv(s, "inner_taus")) inner = std::max(inner, std::abs(weighted_inner(zt->u, z->u, tau)));
    rec.metric(p + "ztheta_z_inner", inner);
    if (symmetric) rec.check(p + "ztheta_orthogonal_to_z", inner, "<", d(s, "inner_tolerance"));
  }
}

void three_annulus(const json& cfg, Recorder& rec) {
  const json& s = cfg["settings"];
  const int n = i(s, "n");
  std::vector<double> taus;
  for (int t = i(s, "tau_min"); t <= i(s, "tau_max"); ++t) taus.push_back(t);
  int wrong = 0, total = 0;
  Table& t = rec.table("homogeneous", {"degree", "index", "s", "growing", "expected_growing"});
  for (int deg = 0; deg <= i(s, "max_degree"); ++deg) {
    int idx = 0;
    for (const auto& k : multi_indices(n, deg)) {
      const NormSequence seq = norm_sequence(DriftSolution::homogeneous(hermite(k), deg / 2.0), taus);
      for (double sv : dv(s, "s_values")) {
        if (sv == std::round(sv)) invalid("s values must not be integers");
        const AnnulusReport r = three_annulus_classify(seq, sv);
        const bool expect = sv < deg;
        bool ok = r.verdict == (expect ? AnnulusVerdict::Growing : AnnulusVerdict::Decaying);
        for (char g : r.growth) ok = ok && static_cast<bool>(g) == expect;
        wrong += !ok;
        ++total;
        t.rows.push_back({double(deg), double(idx), sv, r.verdict == AnnulusVerdict::Growing ? 1.0 : 0.0,
                          expect ? 1.0 : 0.0});
      }
      ++idx;
    }
  }
  rec.metric("homogeneous_classifications", total);
  rec.metric("homogeneous_misclassified", wrong);
  rec.check("homogeneous_dichotomy", wrong, "==", 0.0);

  std::mt19937_64 rng(cfg["seed"].get<std::uint64_t>());
  std::uniform_int_distribution<int> deg(0, i(s, "max_degree")), count(1, i(s, "mixture_terms"));
  std::uniform_real_distribution<double> coef(-2.0, 2.0), sdist(0.05, i(s, "max_degree") + 0.95);
  std::vector<double> mtaus;
  for (int k = i(s, "mixture_tau_min"); k <= i(s, "mixture_tau_max"); ++k) mtaus.push_back(k);
  int violations = 0, nonconvex = 0, tested = 0;
  Table& mt = rec.table("mixtures", {"trial", "terms", "s", "verdict"});
  for (int trial = 0; trial < i(s, "mixtures"); ++trial) {
    DriftSolution u;
    u.n = n;
    const int terms = count(rng);
    for (int k = 0; k < terms; ++k) {
      const int dd = deg(rng);
      const auto ks = multi_indices(n, dd);
      const auto& kk = ks[std::uniform_int_distribution<std::size_t>(0, ks.size() - 1)(rng)];
      u.terms.push_back({hermite(kk) * coef(rng), dd / 2.0});
    }
    double sv = sdist(rng);
    u.normalize();
    if (u.terms.empty()) continue;
    if (sv == std::round(sv)) sv += 0.01;
    const NormSequence seq = norm_sequence(u, mtaus);
    nonconvex += !frequency_audit(seq).convex;
    const AnnulusReport r = three_annulus_classify(seq, sv);
    violations += r.verdict == AnnulusVerdict::Violation;
    ++tested;
    mt.rows.push_back({double(trial), double(u.terms.size()), sv, double(static_cast<int>(r.verdict))});
  }
  rec.metric("mixtures_tested", tested);
  rec.metric("mixture_violations", violations);
  rec.metric("mixture_nonconvex", nonconvex);
  rec.check("mixture_violations", violations, "==", 0.0);
  rec.check("mixtures_log_convex", nonconvex, "==", 0.0);
}

void grim_reaper_translator(const json& cfg, Recorder& rec) {
  const json& s = cfg["settings"];
  const int R = 1 << cfg["refine"].get<int>();
  json params = cfg["fixture"]["params"];
  const int n_top = params.value("N", 512) * R;
  if (n_top % 4 != 0) invalid("grim-reaper N must be divisible by 4");
  CoordinateFrame frame;
  std::vector<double> res;
  double b_top = 0.0, kappa_top = 0.0;
  Table& t = rec.table("ladder", {"N", "b", "kappa_measured", "residual", "rms_w", "velocity_residual"});
  for (int n : {n_top / 4, n_top / 2, n_top}) {
    params["N"] = n;
    const Fixture f = generate_fixture("grim-reaper", params);
    frame.e_z = VecX(lift(f.frame->e_z));
    frame.e_w = VecX(lift(f.frame->e_w));
    const TranslatorFit fit = translator_fit(ProductLagrangian{*f.curve, line_through_origin(0.0)}, frame).at(0);
    const std::string p = "N" + std::to_string(n) + "_";
    rec.metric(p + "residual", fit.residual);
    rec.metric(p + "b", fit.b);
    rec.metric(p + "kappa_measured", fit.kappa_measured);
    rec.metric(p + "velocity_residual", fit.velocity_residual);
    t.rows.push_back({double(n), fit.b, fit.kappa_measured, fit.residual, fit.rms_w, fit.velocity_residual});
    res.push_back(fit.residual);
    b_top = fit.b;
    kappa_top = fit.kappa_measured;
  }
  rec.check("residual_finest", res.back(), "<", d(s, "residual_tolerance"));
  const RefinementVerdict v = richardson_verdict(res, d(s, "slope_min"));
  for (std::size_t k = 0; k < v.slopes.size(); ++k) {
    rec.metric("slope_" + std::to_string(k), v.slopes[k]);
    rec.check("slope_" + std::to_string(k), v.slopes[k], ">=", d(s, "slope_min"));
  }
  // the fixture translates with unit speed in direction -e_z
  const double kappa = 1.0;
  rec.metric("b_kappa_error", std::abs(b_top * kappa - 1.0));
  rec.check("b_kappa", std::abs(b_top * kappa - 1.0), "<", d(s, "speed_tolerance"));
  rec.metric("b_kappa_measured_error", std::abs(b_top * std::abs(kappa_top) - 1.0));
  rec.check("b_kappa_measured", std::abs(b_top * std::abs(kappa_top) - 1.0), "<", d(s, "speed_tolerance"));

  Table& ct = rec.table("circle", {"N", "residual", "rms_w", "ratio"});
  for (int n : s["circle_N"].get<std::vector<int>>()) {
    const Fixture c = generate_fixture("circle", {{"r", d(s, "circle_r")}, {"N", n * R}});
    const TranslatorFit fit = translator_fit(ProductLagrangian{*c.curve, line_through_origin(0.0)}, frame).at(0);
    const double ratio = fit.residual / fit.rms_w;
    rec.metric("circle_N" + std::to_string(n * R) + "_ratio", ratio);
    rec.check("circle_N" + std::to_string(n * R) + "_not_translator", ratio, ">=", d(s, "nondegenerate_ratio"));
    ct.rows.push_back({double(n * R), fit.residual, fit.rms_w, ratio});
  }
}

double sup_interior_difference(const DiscreteCurve& c, const ScalarField& f, const Vec2& dir) {
  double e = 0.0;
  for (std::size_t k = 0; k < c.components.size(); ++k) {
    const Polyline& p = c.components[k];
    const std::size_t lo = p.closed ? 0 : 2, hi = p.closed ? p.size() : p.size() - 2;
    for (std::size_t i = lo; i < hi; ++i) e = std::max(e, std::abs(f.values[k][i] - p.vertices[i].dot(dir)));
  }
  return e;
}

int steps_for(double span, double dt) { return std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9))); }

void caloric_identities(const json& cfg, Recorder& rec) {
  const json& s = cfg["settings"];
  const int R = 1 << cfg["refine"].get<int>();
  const int levels = i(s, "levels");
  if (levels < 2) invalid("caloric-identities needs at least 2 levels");
  const double dtf = d(s, "dt_factor"), cert = d(s, "certificate_constant"), smin = d(s, "slope_min");
  const Vec2 dir = Vec2(1.0, 2.0).normalized();
  std::map<std::string, std::vector<double>> ladders;
  Table& t = rec.table("ladders", {"series", "level", "N", "dt", "value"});
  int series_id = 0;
  std::map<std::string, int> series_ids;
  auto push = [&](const std::string& name, int level, int n, double dt, double v) {
    if (!series_ids.count(name)) series_ids[name] = series_id++;
    ladders[name].push_back(v);
    rec.metric(name + "_L" + std::to_string(level), v, cert * dt);
    t.rows.push_back({double(series_ids[name]), double(level), double(n), dt, v});
  };
  double const_res = 0.0;

  // static line: every identity holds exactly
  {
    const json& ls = s["line"];
    const auto off = dv(ls, "offset");
    const Fixture f = generate_fixture("line", {{"angle", d(ls, "angle")}, {"half_length", d(ls, "half_length")},
                                                {"N", i(ls, "N")}, {"offset", off}});
    const FlowTrajectory st = static_trajectory(*f.curve, time_grid(0.0, 0.5, 10));
    const CaloricField x = solve_heat_on_flow(st, coordinate_field(st.states[0], dir));
    const double e = sup_interior_difference(st.states.back(), x.values.back(), dir);
    const double b = beta_caloric_check(st).residual.max_sup;
    rec.metric("line_coordinate_error", e, 1e-12);
    rec.metric("line_beta_residual", b, 1e-12);
    rec.check("line_coordinate_caloric", e, "<", 1e-12);
    rec.check("line_beta_caloric", b, "<", 1e-12);
    const_res = std::max(const_res, heat_residual(st, constant_fields(st, 1.0)).max_sup);
  }

  for (int lv = 0; lv < levels; ++lv) {
    const int scale = R << lv;
    {
      const json& cs = s["circle"];
      const int n = i(cs, "N0") * scale;
      const double h = 2.0 * pi / n, span = d(cs, "t_end") - d(cs, "t_begin");
      const int steps = steps_for(span, dtf * h * h);
      const FlowTrajectory tr = sample_trajectory(
          [n](double tt) { return *generate_fixture("circle", {{"r", std::sqrt(-2.0 * tt)}, {"N", n}}).curve; },
          time_grid(d(cs, "t_begin"), d(cs, "t_end"), steps));
      const CaloricField f = solve_heat_on_flow(tr, coordinate_field(tr.states[0], dir));
      const CaloricField one = solve_heat_on_flow(tr, make_field(tr.states[0], "one", 1.0));
      push("circle_coordinate_error", lv, n, span / steps, sup_interior_difference(tr.states.back(), f.values.back(), dir));
      push("circle_coordinate_residual", lv, n, span / steps, heat_residual(tr, coordinate_fields(tr, dir)).max_sup);
      const_res = std::max(const_res, heat_residual(tr, constant_fields(tr, 1.0)).max_sup);
      for (double v : one.values.back().values[0]) const_res = std::max(const_res, std::abs(v - 1.0));
    }
    {
      const json& gs = s["grim_reaper"];
      const int n = (i(gs, "N0") - 1) * scale + 1;
      const double sm = d(gs, "s_max"), h = 2.0 * sm / (n - 1), span = d(gs, "t_end") - d(gs, "t_begin");
      const int steps = steps_for(span, dtf * h * h);
      const FlowTrajectory tr = sample_trajectory([=](double tt) { return grim_reaper_curve(sm, n, tt); },
                                                  time_grid(d(gs, "t_begin"), d(gs, "t_end"), steps));
      const auto exact = HeatBoundary::callback([dir](std::size_t, int, double, const Vec2& p) { return p.dot(dir); });
      const CaloricField f = solve_heat_on_flow(tr, coordinate_field(tr.states[0], dir), exact);
      push("grim_reaper_coordinate_error", lv, n, span / steps,
           sup_interior_difference(tr.states.back(), f.values.back(), dir));
      push("grim_reaper_coordinate_residual", lv, n, span / steps, heat_residual(tr, coordinate_fields(tr, dir)).max_sup);
      const_res = std::max(const_res, heat_residual(tr, constant_fields(tr, 1.0)).max_sup);
    }
    {
      const json& ps = s["smoothed_pair"];
      const int n = (i(ps, "N0") - 1) * scale + 1;
      const Fixture f = generate_fixture("smoothed-pair", {{"N", n}, {"sigma", d(ps, "sigma")}});
      const double h = f.curve->mean_edge(), span = d(ps, "t_end") - d(ps, "t_begin");
      const FlowTrajectory tr = evolve(*f.curve, d(ps, "t_begin"), d(ps, "t_end"), dtf * h * h);
      push("smoothed_pair_coordinate_residual", lv, n, span / (tr.size() - 1),
           heat_residual(tr, coordinate_fields(tr, dir)).max_sup);
      const_res = std::max(const_res, heat_residual(tr, constant_fields(tr, 1.0)).max_sup);
    }
    {
      const json& bs = s["beta"];
      const int n = (i(bs, "N0") - 1) * scale + 1;
      const double sm = d(bs, "s_max"), h = 2.0 * sm / (n - 1), span = d(bs, "t_end") - d(bs, "t_begin");
      const int steps = steps_for(span, dtf * h * h);
      const FlowTrajectory tr = sample_trajectory([=](double tt) { return grim_reaper_curve(sm, n, tt); },
                                                  time_grid(d(bs, "t_begin"), d(bs, "t_end"), steps));
      push("beta_theta_residual", lv, n, span / steps, beta_caloric_check(tr).residual.max_sup);
      push("beta_theta_product_residual", lv, n, span / steps,
           beta_caloric_check(product_evolve(tr, line_through_origin(0.0))).max_sup);
    }
    {
      const json& bs = s["b_field"];
      const int n = (i(bs, "N0") - 1) * scale + 1;
      const double sm = d(bs, "s_max"), h = 2.0 * sm / (n - 1), span = d(bs, "t_end") - d(bs, "t_begin");
      const int steps = 2 * steps_for(span / 2, dtf * h * h);
      const FlowTrajectory tr = sample_trajectory([=](double tt) { return grim_reaper_curve(sm, n, tt); },
                                                  time_grid(d(bs, "t_begin"), d(bs, "t_end"), steps));
      const BFieldReport b = evolve_B(tr, tr.times[steps / 2]);
      const BFieldReport bp = evolve_B(product_evolve(tr, line_through_origin(0.0)), tr.times[steps / 2]);
      push("b_field_residual", lv, n, span / steps, b.residual.max_sup);
      push("b_field_product_residual", lv, n, span / steps, bp.residual.max_sup);
      rec.metric("b_field_defect_L" + std::to_string(lv), std::max(b.defect_at_s1, bp.defect_at_s1));
      rec.check("b_equals_cos_beta_at_s1_L" + std::to_string(lv), std::max(b.defect_at_s1, bp.defect_at_s1), "<",
                1e-12);
    }
  }
  rec.metric("constant_residual", const_res, 1e-12);
  rec.check("constant_caloric", const_res, "<", 1e-12);
  for (const auto& [name, v] : ladders) {
    const RefinementVerdict rv = richardson_verdict(v, smin);
    for (std::size_t k = 0; k < rv.slopes.size(); ++k) rec.metric(name + "_slope_" + std::to_string(k), rv.slopes[k], 0.5);
    rec.check(name + "_refinement", rv.pass ? 1.0 : 0.0, "==", 1.0);
  }

  const json& us = s["uniqueness"];
  const int n = i(us, "N"), steps = i(us, "steps");
  auto run = [&](int st) {
    const FlowTrajectory tr = sample_trajectory(
        [n](double tt) { return *generate_fixture("circle", {{"r", std::sqrt(-2.0 * tt)}, {"N", n}}).curve; },
        time_grid(-1.0, -0.5, st));
    ScalarField f0 = make_field(tr.states[0], "f0");
    for (int k = 0; k < n; ++k) f0.values[0][k] = std::cos(3.0 * 2.0 * pi * k / n) + 0.5;
    return solve_heat_on_flow(tr, f0).values.back().values[0];
  };
  const auto a = run(steps), b = run(steps), c = run(2 * steps), e = run(4 * steps);
  double d1 = 0.0, d2 = 0.0;
  for (int k = 0; k < n; ++k) {
    d1 = std::max(d1, std::abs(a[k] - c[k]));
    d2 = std::max(d2, std::abs(c[k] - e[k]));
  }
  rec.check("uniqueness_bitwise", a == b ? 1.0 : 0.0, "==", 1.0);
  rec.metric("uniqueness_dt_ratio", d1 / d2, 0.2);
  rec.check("uniqueness_dt_ratio", std::abs(d1 / d2 - 2.0) / 2.0, "<", d(us, "ratio_tolerance"));
}

void linking_scenario(const json& cfg, Recorder& rec) {
  const json& s = cfg["settings"];
  const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
  Table& t = rec.table("links", {"case", "value", "raw", "margin", "min_distance"});
  int case_id = 0;
  auto link = [&](const std::string& name, const std::vector<Vec4>& a, const std::vector<Vec4>& b) {
    const LinkingResult r = linking_number(a, b, seed);
    rec.metric(name + "_linking", r.value);
    rec.metric(name + "_margin", r.margin);
    t.rows.push_back({double(case_id++), double(r.value), r.raw, r.margin, r.min_distance});
    return r;
  };
  auto slice = [](const SurfaceMesh& m, double radius) { return sphere_slice(m, radius).curves.at(0).vertices; };

  const Fixture tr = generate_fixture("plane-pair-m0");
  const double rt = d(s, "transverse_radius");
  const auto ca = slice(tr.surfaces[0], rt), cb = slice(tr.surfaces[1], rt);
  const LinkingResult lt = link("transverse", ca, cb);
  rec.check("transverse_links_once", lt.value, "==", 1.0);
  rec.check("linking_symmetric", linking_number(cb, ca, seed).value, "==", lt.value);
  std::vector<Vec4> rev(ca.rbegin(), ca.rend());
  rec.check("linking_odd_under_reversal", linking_number(rev, cb, seed).value, "==", -lt.value);
  int disagree = 0;
  const auto poles = admissible_poles(ca, cb, i(s, "poles"), seed);
  for (const Vec4& p : poles) disagree += linking_number_with_pole(ca, cb, p).value != lt.value;
  rec.metric("poles_tested", poles.size());
  rec.check("pole_independent", disagree, "==", 0.0);

  const Fixture par = generate_fixture("parallel-pair");
  const double rp = d(s, "parallel_radius");
  rec.check("parallel_unlinked", link("parallel", slice(par.surfaces[0], rp), slice(par.surfaces[1], rp)).value, "==", 0.0);

  const Fixture hf = generate_fixture("hopf-fibers", {{"samples", i(s, "hopf_samples")}});
  rec.check("hopf_fibers_link", std::abs(link("hopf", hf.loops[0], hf.loops[1]).value), "==", 1.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  int tested = 0, bad = 0;
  while (tested < i(s, "hopf_pairs")) {
    const Vec4 p = Vec4(g(rng), g(rng), g(rng), g(rng)).normalized();
    const Vec4 q = Vec4(g(rng), g(rng), g(rng), g(rng)).normalized();
    const auto fp = hopf_fiber(p, i(s, "hopf_samples")), fq = hopf_fiber(q, i(s, "hopf_samples"));
    try {
      const LinkingResult r = linking_number(fp, fq, seed);
      bad += std::abs(r.value) != 1;
      ++tested;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CurvesTooClose) throw;
    }
  }
  rec.metric("random_hopf_pairs", tested);
  rec.check("random_hopf_fibers_link", bad, "==", 0.0);

  const Fixture tp = generate_fixture("tilted-pair");
  const double lambda = tp.params["lambda"].get<double>();
  const SeparationReport sep = halfspace_separation(tp.surfaces[0], tp.surfaces[1], tp.pair->frame, 0.0, lambda, 0.0);
  rec.metric("tilted_margin", sep.margin);
  rec.check("tilted_separated", sep.pass ? 1.0 : 0.0, "==", 1.0);
  rec.check("tilted_margin_half_lambda", std::abs(sep.margin - lambda / 2), "<", d(s, "margin_tolerance"));
  const Fixture same = generate_fixture("tilted-pair", {{"b2", tp.params["b1"]}});
  const SeparationReport eq = halfspace_separation(same.surfaces[0], same.surfaces[1], same.pair->frame, 0.0, lambda, 0.0);
  rec.metric("equal_slopes_margin", eq.margin);
  rec.check("equal_slopes_not_separated", eq.pass ? 1.0 : 0.0, "==", 0.0);
  const double rtl = d(s, "tilted_radius");
  const LinkingResult ltl = link("tilted", slice(tp.surfaces[0], rtl), slice(tp.surfaces[1], rtl));
  rec.check("tilted_slices_link", std::abs(ltl.value), "==", 1.0);
  rec.check("tilted_surfaces_intersect", surfaces_intersect(tp.surfaces[0], tp.surfaces[1], rtl) ? 1.0 : 0.0, "==", 1.0);
}

void blow_down(const json& cfg, Recorder& rec) {
  const json& s = cfg["settings"];
  const int refine = cfg["refine"].get<int>();
  const double ds = d(s, "ds") / (1 << refine), dt = d(s, "dt") / (1 << (2 * refine));
  HeightSetup setup;
  setup.mode = HeightSetup::ZMode::LineFactor;
  // limit of the blow-down: the vertical line x = 0 traversed downwards (left arm) and upwards
  setup.limit = {AffineLine{Vec2::Zero(), Vec2(0.0, -1.0)}, AffineLine{Vec2::Zero(), Vec2(0.0, 1.0)}};
  setup.inner_radius = d(s, "inner_radius");
  setup.outer_radius = d(s, "outer_radius");
  setup.delta = d(s, "delta");
  const std::vector<AffineLine> plane{AffineLine{Vec2::Zero(), Vec2(0.0, 1.0)}};
  const double hr = d(s, "hausdorff_radius");
  const int steps = steps_for(1.0, dt);
  const std::vector<double> times = time_grid(-1.0, 0.0, steps);

  std::vector<double> hd, hd1, sup;
  Table& t = rec.table("ladder", {"lambda", "vertices", "s1", "hausdorff_t_minus_1", "hausdorff_s1", "sup_difference",
                                  "separation", "b_bar_1", "b_bar_2"});
  for (double lambda : dv(s, "lambdas")) {
    // arms must reach arm_height above the origin at t = -1: lambda (S - log 2) - 1 / lambda
    const double S = (d(s, "arm_height") + 1.0 / lambda) / lambda + std::log(2.0) + 1.0;
    const int n = 2 * static_cast<int>(std::ceil(S / ds)) + 1;
    std::vector<double> cand;
    for (double c : dv(s, "s1_candidates")) {
      const auto it = std::min_element(times.begin(), times.end(),
                                        [c](double a, double b) { return std::abs(a - c) < std::abs(b - c); });
      cand.push_back(*it);
    }
    const double last = *std::max_element(cand.begin(), cand.end());
    std::vector<double> used(times.begin(), std::upper_bound(times.begin(), times.end(), last + 1e-12));
    const FlowTrajectory tr = sample_trajectory([=](double tt) { return grim_reaper_curve(S, n, tt, lambda); }, used);
    const HeightReport h = select_s1_and_height(tr, cand, setup);
    const std::size_t k1 = std::min_element(used.begin(), used.end(),
                                            [&](double a, double b) { return std::abs(a - h.s1) < std::abs(b - h.s1); }) -
                           used.begin();
    const double a = hausdorff_to_lines(tr.states[0], plane, hr);
    const double b = hausdorff_to_lines(tr.states[k1], plane, hr);
    const std::string p = "lambda" + tag(lambda) + "_";
    rec.metric(p + "hausdorff_t_minus_1", a, 1e-6);
    rec.metric(p + "hausdorff_s1", b, 1e-6);
    rec.metric(p + "sup_difference", h.sup_difference, 10.0 * dt);
    rec.metric(p + "s1", h.s1);
    rec.metric(p + "separation", h.separation, 1e-6);
    hd.push_back(a);
    hd1.push_back(b);
    sup.push_back(h.sup_difference);
    t.rows.push_back({lambda, double(n), h.s1, a, b, h.sup_difference, h.separation, h.components.at(0).b_bar,
                      h.components.at(1).b_bar});
  }
  auto decreasing = [](const std::vector<double>& v) {
    double worst = -1e300;
    for (std::size_t k = 1; k < v.size(); ++k) worst = std::max(worst, v[k] - v[k - 1]);
    return worst;
  };
  rec.check("hausdorff_decreasing_t_minus_1", decreasing(hd), "<", 0.0);
  rec.check("hausdorff_decreasing_s1", decreasing(hd1), "<", 0.0);
  rec.check("sup_difference_decreasing", decreasing(sup), "<", 0.0);
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_catalog() { return catalog(); }

json default_config(const std::string& scenario) {
  for (const auto& c : catalog())
    if (c.name == scenario) return c.defaults;
  throw Error(ErrorCode::ConfigInvalid, "unknown scenario '" + scenario + "'");
}

json normalize_config(const json& config) {
  if (!config.is_object()) invalid("configuration must be a JSON object");
  if (!config.contains("scenario") || !config["scenario"].is_string()) invalid("missing scenario name");
  const std::string name = config["scenario"];
  json out = default_config(name);
  for (auto it = config.begin(); it != config.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "scenario") continue;
    if (k == "schema_version") {
      if (!v.is_number_integer() || v.get<int>() != scenario_schema_version)
        invalid("unsupported schema_version " + v.dump());
    } else if (k == "seed") {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) invalid("seed must be a non-negative integer");
      out["seed"] = v.get<std::uint64_t>();
    } else if (k == "output") {
      if (!v.is_string()) invalid("output must be a path string");
      out["output"] = v;
    } else if (k == "refine") {
      if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > 4) invalid("refine must be in [0, 4]");
      out["refine"] = v;
    } else if (k == "fixture") {
      if (v.is_null()) continue;
      const auto allowed = allowed_fixtures().find(name);
      if (allowed == allowed_fixtures().end()) invalid("scenario '" + name + "' takes no fixture");
      if (!v.is_object()) invalid("fixture must be an object");
      for (auto f = v.begin(); f != v.end(); ++f)
        if (f.key() != "name" && f.key() != "params") invalid("unknown key fixture." + f.key());
      json fixture = out["fixture"];
      if (v.contains("name")) {
        if (!v["name"].is_string() || !allowed->second.count(v["name"].get<std::string>()))
          invalid("fixture " + v["name"].dump() + " not accepted by '" + name + "'");
        if (v["name"] != fixture["name"]) fixture = {{"name", v["name"]}, {"params", json::object()}};
      }
      if (v.contains("params")) {
        if (!v["params"].is_object()) invalid("fixture.params must be an object");
        fixture["params"].update(v["params"]);
      }
      out["fixture"] = fixture;
    } else if (k == "settings") {
      overlay(out["settings"], v, "settings");
    } else {
      invalid("unknown key " + k);
    }
  }
  if (out["fixture"].is_object()) {
    try {
      out["fixture"]["params"] = generate_fixture(out["fixture"]["name"], out["fixture"]["params"]).params;
    } catch (const Error& e) {
      invalid(std::string("fixture: ") + e.what());
    }
  }
  return out;
}

std::string config_hash(const json& config) {
  json c = normalize_config(config);
  c.erase("output");
  const std::string text = c.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool ScenarioReport::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

json ScenarioReport::summary() const {
  json j;
  j["schema_version"] = scenario_schema_version;
  j["scenario"] = scenario;
  j["config"] = config;
  j["config"].erase("output");
  j["config_hash"] = hash;
  j["fixture"] = config["fixture"].is_object() ? config["fixture"]["name"] : json(nullptr);
  j["pass"] = pass();
  j["metrics"] = metrics;
  j["tolerances"] = tolerances;
  j["checks"] = json::array();
  for (const Check& c : checks)
    j["checks"].push_back(
        {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold}});
  j["errors"] = errors;
  j["tables"] = json::array();
  for (const auto& [name, t] : tables) j["tables"].push_back(name + ".csv");
  return j;
}

ScenarioReport run_scenario(const json& config) {
  ScenarioReport r;
  r.config = normalize_config(config);
  r.scenario = r.config["scenario"];
  r.hash = config_hash(r.config);
  Recorder rec{r};
  const auto start = std::chrono::steady_clock::now();
  const std::string& n = r.scenario;
  try {
    if (n == "plane-pair-density") plane_pair_density(r.config, rec);
    else if (n == "huisken-monotonicity") huisken_monotonicity(r.config, rec);
    else if (n == "hermite-spectrum") hermite_spectrum(r.config, rec);
    else if (n == "three-annulus") three_annulus(r.config, rec);
    else if (n == "grim-reaper-translator") grim_reaper_translator(r.config, rec);
    else if (n == "caloric-identities") caloric_identities(r.config, rec);
    else if (n == "linking") linking_scenario(r.config, rec);
    else if (n == "blow-down") blow_down(r.config, rec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    // module errors end the scenario as a failed check; checks recorded so far are kept
    r.errors.push_back(e.what());
    r.checks.push_back({std::string("error_") + error_name(e.code()), false, 1.0, 0.0, "=="});
  }
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<std::string> write_bundle(const ScenarioReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  std::vector<std::string> files;
  auto open = [&](const std::string& name) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    files.push_back(path);
    return out;
  };
  {
    std::ofstream out = open("summary.json");
    out << report.summary().dump(2) << "\n";
  }
  for (const auto& [name, t] : report.tables) {
    std::ofstream out = open(name + ".csv");
    out << "# config_hash=" << report.hash << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << "\n";
    char buf[32];
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", row[c]);
        out << (c ? "," : "") << buf;
      }
      out << "\n";
    }
  }
  return files;
}

json load_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, path + ": " + e.what());
  }
}

RunDiff compare_runs(const json& a, const json& b) {
  auto field = [](const json& j, const char* k) { return j.contains(k) ? j[k] : json(nullptr); };
  for (const char* k : {"schema_version", "scenario", "fixture"})
    if (field(a, k) != field(b, k))
      throw Error(ErrorCode::SchemaMismatch,
                  std::string(k) + " differs: " + field(a, k).dump() + " vs " + field(b, k).dump());
  const json ma = field(a, "metrics"), mb = field(b, "metrics");
  if (!ma.is_object() || !mb.is_object()) throw Error(ErrorCode::SchemaMismatch, "summary without metrics");
  std::set<std::string> ka, kb;
  for (auto it = ma.begin(); it != ma.end(); ++it) ka.insert(it.key());
  for (auto it = mb.begin(); it != mb.end(); ++it) kb.insert(it.key());
  if (ka != kb) throw Error(ErrorCode::SchemaMismatch, "metric sets differ");

  RunDiff diff;
  auto tol = [](const json& s, const std::string& k) {
    const json t = s.contains("tolerances") ? s["tolerances"] : json::object();
    return t.contains(k) ? t[k].get<double>() : 0.0;
  };
  for (const std::string& k : ka) {
    if (ma[k] == mb[k]) continue;
    MetricDelta m;
    m.name = k;
    m.a = ma[k].is_number() ? ma[k].get<double>() : std::nan("");
    m.b = mb[k].is_number() ? mb[k].get<double>() : std::nan("");
    m.tolerance = std::max(tol(a, k), tol(b, k));
    m.flagged = !(std::abs(m.a - m.b) <= m.tolerance);
    diff.drift = diff.drift || m.flagged;
    diff.deltas.push_back(m);
  }
  std::map<std::string, bool> va;
  for (const json& c : field(a, "checks")) va[c["name"]] = c["pass"];
  for (const json& c : field(b, "checks")) {
    const auto it = va.find(c["name"]);
    if (it != va.end() && it->second != c["pass"].get<bool>()) {
      diff.check_changes.push_back(c["name"]);
      diff.drift = true;
    }
  }
  return diff;
}

}  // namespace lmcf
