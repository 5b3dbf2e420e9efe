#include "trgeo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "trgeo/error.hpp"
#include "trgeo/numerics.hpp"

namespace trgeo {

namespace fs = std::filesystem;
using io::json;
using io::number;

namespace {

constexpr const char* kToolVersion = "1.0.0";

// ---- small json helpers

const json& required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

double num(const json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return io::to_double(j.at(key));
}

int integer(const json& j, const char* key, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<int>();
}

cplx complex_value(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {io::to_double(j[0]), io::to_double(j[1])};
  fail(ErrorKind::ParseError, "complex values are numbers or [re, im] pairs");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// Uniform in [0, 1) from the raw 64-bit stream, so samples do not depend on
// the standard library's distribution implementation.
double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

std::vector<double> time_grid(const json& params) {
  if (params.contains("times")) {
    std::vector<double> ts;
    for (const auto& t : params.at("times")) ts.push_back(io::to_double(t));
    return ts;
  }
  const auto& g = required(params, "t");
  const double from = num(g, "from", 0.0), to = io::to_double(required(g, "to"));
  const int count = integer(g, "count", 20);
  if (count < 2) fail(ErrorKind::InvalidArgument, "time grid needs at least two samples");
  std::vector<double> ts(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) ts[k] = from + (to - from) * k / (count - 1);
  return ts;
}

// ---- checks

struct Checks {
  double tol_scale = 1.0;
  bool all_pass = true;
  json tolerances = json::object();

  // value <= bound (loosened by tol_scale)
  void at_most(json& rec, const std::string& quantity, double value, double bound, bool scaled = true) {
    add(rec, quantity, value, "<=", scaled ? bound * tol_scale : bound);
  }
  // value >= bound; a scaled bound moves towards -infinity as tol_scale grows
  void at_least(json& rec, const std::string& quantity, double value, double bound, bool scaled = true) {
    double b = bound;
    if (scaled) b = bound < 0 ? bound * tol_scale : bound / tol_scale;
    add(rec, quantity, value, ">=", b);
  }
  void holds(json& rec, const std::string& quantity, bool ok) {
    json c;
    c["quantity"] = quantity;
    c["pass"] = ok;
    rec["checks"].push_back(c);
    all_pass = all_pass && ok;
  }

 private:
  void add(json& rec, const std::string& quantity, double value, const char* rel, double bound) {
    const bool ok = std::isfinite(value) && (rel[0] == '<' ? value <= bound : value >= bound);
    json c;
    c["quantity"] = quantity;
    c["value"] = number(value);
    c["relation"] = rel;
    c["bound"] = number(bound);
    c["pass"] = ok;
    rec["checks"].push_back(c);
    tolerances[quantity] = number(bound);
    all_pass = all_pass && ok;
  }
};

json record(const std::string& label) {
  json r;
  r["label"] = label;
  r["checks"] = json::array();
  return r;
}

struct Context {
  json scenario;
  json params;
  fs::path out, base;
  std::uint64_t seed = 0;
  Checks checks;
  json records = json::array();
  std::vector<std::string> files;

  void write_csv(const std::string& name, const io::CsvTable& t) {
    t.write(out / name);
    files.push_back(name);
  }
  void write_json(const std::string& name, const json& j) {
    io::write_json(out / name, j);
    files.push_back(name);
  }
  ChartPtr chart() const { return io::chart_from_descriptor(required(scenario, "chart")); }
  Immersion immersion() const { return immersion_from_descriptor(required(scenario, "immersion"), chart(), base, seed); }
  VectorFieldOnL field(const GridTorus& grid, const char* key = "field") const {
    return field_from_descriptor(required(scenario, key), grid, seed);
  }
};

// ---- curve families

cplx family_term(const json& d, int n) {
  const auto kind = required(d, "kind").get<std::string>();
  const double scale = num(d, "scale", 1.0);
  const double x = n;
  if (kind == "zero") return 0.0;
  if (kind == "log_power") return scale * std::exp(-std::log(x) * std::log(x));
  if (kind == "power") return scale * std::pow(x, -num(d, "p", 2.0));
  if (kind == "geometric") return scale * std::pow(io::to_double(required(d, "radius")), -x);
  if (kind == "exp_sqrt") return scale * std::exp(-std::sqrt(x));
  fail(ErrorKind::ParseError, "unknown coefficient family '" + kind + "'");
}

int grid_size(const json& d, int which) {
  const auto& n = required(d, "N");
  if (n.is_number()) return n.get<int>();
  return n.at(static_cast<std::size_t>(which)).get<int>();
}

GridTorus grid_from(const json& d, bool torus) {
  if (!torus) return GridTorus::circle(grid_size(d, 0));
  const auto& n = required(d, "N");
  return n.is_number() ? GridTorus::torus(n.get<int>(), n.get<int>()) : GridTorus::torus(grid_size(d, 0), grid_size(d, 1));
}

int samples_for(int N) {
  int m = 16;
  while (m < 4 * N) m *= 2;
  return m;
}

// Smooth ambient deformation: a trigonometric polynomial with modes up to
// max_mode in each angle, coefficients decaying like 1/(1 + |k|^2).
std::vector<double> random_ambient_field(const GridTorus& grid, int dim, std::uint64_t seed, int max_mode) {
  std::mt19937_64 gen(seed);
  const int m2 = grid.dim == 2 ? max_mode : 0;
  std::vector<double> out(grid.node_count() * dim, 0.0);
  for (int r = 0; r < dim; ++r)
    for (int k1 = -max_mode; k1 <= max_mode; ++k1)
      for (int k2 = -m2; k2 <= m2; ++k2) {
        const double w = 1.0 / (1.0 + k1 * k1 + k2 * k2);
        const double c = w * (2.0 * unit(gen) - 1.0), s = w * (2.0 * unit(gen) - 1.0);
        for (std::size_t node = 0; node < grid.node_count(); ++node) {
          const auto a = grid.angles(node);
          const double ph = k1 * a[0] + k2 * a[1];
          out[node * dim + r] += c * std::cos(ph) + s * std::sin(ph);
        }
      }
  return out;
}

std::vector<double> ambient_from_descriptor(const json& d, const Immersion& im, std::uint64_t seed) {
  const auto kind = required(d, "kind").get<std::string>();
  if (kind == "random")
    return random_ambient_field(im.grid(), im.ambient_dim(), seed + static_cast<std::uint64_t>(integer(d, "seed_offset", 0)),
                                integer(d, "max_mode", 2));
  if (kind == "push_forward" || kind == "j_push_forward") {
    const auto x = field_from_descriptor(required(d, "field"), im.grid(), seed);
    return kind == "push_forward" ? im.push_forward(x) : im.j_push_forward(x);
  }
  fail(ErrorKind::ParseError, "unknown deformation kind '" + kind + "'");
}

double closed_form_value(const json& d, double t) {
  const auto kind = required(d, "kind").get<std::string>();
  if (kind == "exp") return io::to_double(required(d, "scale")) * std::exp(-t);
  if (kind == "csch") return 2.0 * kPi / std::sinh(io::to_double(required(d, "t0")) + t);
  fail(ErrorKind::ParseError, "unknown closed form '" + kind + "'");
}

// ---- operations

void run_curve_classify(Context& c) {
  for (const auto& d : required(c.scenario, "curves")) {
    const auto curve = curve_from_descriptor(d, c.base);
    const auto cls = classify_direction(curve, num(c.params, "margin", 0.02));
    auto rec = record(d.value("label", std::string("curve")));
    rec["N"] = curve.N;
    rec["direction"] = io::to_json(cls);
    if (d.contains("expected")) {
      rec["expected"] = d.at("expected");
      c.checks.holds(rec, "kind", to_string(cls.kind) == d.at("expected").get<std::string>());
    }
    c.records.push_back(rec);
  }
}

void run_curve_analyze(Context& c) {
  for (const auto& d : required(c.scenario, "curves")) {
    const auto curve = curve_from_descriptor(d, c.base);
    const int M = integer(c.params, "M", samples_for(curve.N));
    const auto back = fourier_analyze(curve.synthesize(M), curve.N);
    double err = 0.0, big = 0.0;
    for (int n = -curve.N; n <= curve.N; ++n) {
      err = std::max(err, std::abs(back[n] - curve[n]));
      big = std::max(big, std::abs(curve[n]));
    }
    const auto radii = estimate_radii(curve);
    auto rec = record(d.value("label", std::string("curve")));
    rec["N"] = curve.N;
    rec["M"] = M;
    rec["parseval_residual"] = number(back.parseval_residual);
    rec["radii"] = io::to_json(radii);
    c.checks.at_most(rec, "round_trip_error", err, 1e-12 * std::max(big, 1.0));
    if (d.contains("expected")) {
      const auto& e = d.at("expected");
      const double tol = num(e, "tolerance", 1e-6);
      if (e.contains("r_inner")) c.checks.at_most(rec, "r_inner_error", std::abs(radii.r_inner - io::to_double(e.at("r_inner"))), tol);
      if (e.contains("r_outer")) c.checks.at_most(rec, "r_outer_error", std::abs(radii.r_outer - io::to_double(e.at("r_outer"))), tol);
    }
    c.records.push_back(rec);
  }
}

void run_curve_geodesic(Context& c) {
  const auto curve = curve_from_descriptor(required(c.scenario, "curve"), c.base);
  const int M = integer(c.params, "M", samples_for(curve.N));
  std::size_t k = 0;
  for (const auto& rj : required(c.params, "radii")) {
    const double r = io::to_double(rj);
    const auto pts = geodesic_evaluate(curve, r, M);
    io::CsvTable t({"theta", "x", "y"});
    double diff = 0.0, big = 0.0;
    for (int j = 0; j < M; ++j) {
      const double th = kTwoPi * j / M;
      t.add_row({th, pts[j].real(), pts[j].imag()});
      big = std::max(big, std::abs(pts[j]));
      // direct Laurent sum against the FFT synthesis
      if (j % std::max(1, M / 16) == 0) diff = std::max(diff, std::abs(curve.laurent(std::polar(r, th)) - pts[j]));
    }
    const std::string name = "geodesic_r" + std::to_string(k++) + ".csv";
    c.write_csv(name, t);
    auto rec = record("r=" + io::format_double(r));
    rec["r"] = number(r);
    rec["file"] = name;
    c.checks.at_most(rec, "laurent_discrepancy", diff, 1e-10 * std::max(big, 1.0));
    c.records.push_back(rec);
  }
}

void run_curve_length(Context& c) {
  const auto curve = curve_from_descriptor(required(c.scenario, "curve"), c.base);
  std::vector<double> radii;
  if (c.params.contains("radii")) {
    for (const auto& r : c.params.at("radii")) radii.push_back(io::to_double(r));
  } else {
    for (double t : time_grid(c.params)) radii.push_back(std::exp(-t));
  }
  const auto p = length_profile(curve, radii);
  c.write_csv("length_profile.csv", io::length_profile_csv(p));
  const double lmax = *std::max_element(p.lambda.begin(), p.lambda.end());
  double d2min = std::numeric_limits<double>::infinity();
  for (double d : p.second_differences) d2min = std::min(d2min, d);
  auto rec = record("length_profile");
  rec["samples"] = p.radii.size();
  rec["lambda_max"] = number(lmax);
  c.checks.at_least(rec, "min_d2_relative", d2min / lmax, -1e-9);
  bool one_sided = true;
  for (int n = 1; n <= curve.N; ++n) one_sided = one_sided && curve[-n] == cplx(0.0);
  if (one_sided) {
    // Lambda increases with r
    std::vector<std::size_t> order(radii.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return radii[a] < radii[b]; });
    double violation = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
      violation = std::max(violation, p.lambda[order[i]] - p.lambda[order[i + 1]]);
    c.checks.at_most(rec, "monotonicity_violation", violation / lmax, 1e-12);
  }
  rec["file"] = "length_profile.csv";
  c.records.push_back(rec);
}

void run_curve_secondvar(Context& c) {
  const auto curve = curve_from_descriptor(required(c.scenario, "curve"), c.base);
  const int M = integer(c.params, "M", 256);
  const auto arc = resample_arclength(curve.synthesize(samples_for(std::max(curve.N, M / 4))), M);
  const auto grid = GridTorus::circle(M);
  for (const auto& fd : required(c.scenario, "fields")) {
    const auto f = field_from_descriptor(fd, grid, c.seed).components[0];
    const auto r = second_variation_length(arc, f);
    auto rec = record(fd.value("label", std::string("field")));
    rec["analytic"] = number(r.analytic);
    rec["fd"] = number(r.fd);
    rec["abs_err"] = number(r.abs_err);
    rec["rel_err"] = number(r.rel_err);
    rec["exact"] = r.exact;
    c.checks.at_most(rec, "rel_err", r.rel_err, num(c.params, "tolerance", 1e-4));
    c.records.push_back(rec);
  }
}

void run_jvol_compute(Context& c) {
  const int repeat = integer(c.params, "repeat", 1);
  if (repeat < 1) fail(ErrorKind::InvalidArgument, "repeat must be positive");
  for (int k = 0; k < repeat; ++k) {
    Context sub = c;
    sub.seed = c.seed + static_cast<std::uint64_t>(k);
    const auto im = sub.immersion();
    const auto v = total_volumes(im);
    auto rec = record(repeat == 1 ? std::string("immersion") : "sample " + std::to_string(k));
    rec["vol_j"] = number(v.vol_j);
    rec["vol_g"] = number(v.vol_g);
    rec["lagrangian_defect"] = number(lagrangian_defect(im));
    rec["min_rho"] = number(im.min_rho());
    rec["rho_route_discrepancy"] = number(im.rho_route_discrepancy());
    c.checks.at_most(rec, "vol_j_minus_vol_g", (v.vol_j - v.vol_g) / v.vol_g, 1e-12);
    if (c.params.value("strict", false)) c.checks.at_most(rec, "vol_j_over_vol_g", v.vol_j / v.vol_g, 1.0 - 1e-9, false);
    if (c.params.contains("expected_vol_j")) {
      const double e = io::to_double(c.params.at("expected_vol_j"));
      c.checks.at_most(rec, "vol_j_rel_err", std::abs(v.vol_j - e) / std::abs(e), num(c.params, "tolerance", 1e-9));
    }
    if (k == 0) {
      c.write_csv("densities.csv", io::densities_csv(im));
      rec["file"] = "densities.csv";
    }
    c.records.push_back(rec);
  }
}

void run_jvol_hj(Context& c) {
  const auto im = c.immersion();
  const auto h = h_j_field(im);
  const auto hm = mean_curvature_field(im);
  const int dim = im.ambient_dim();
  const bool torus = im.dim() == 2;
  std::vector<std::string> header = {"node", "theta1"};
  if (torus) header.push_back("theta2");
  header.push_back("H_J_norm");
  header.push_back("H_norm");
  io::CsvTable t(header);
  double hmax = 0.0, mmax = 0.0;
  for (std::size_t node = 0; node < im.node_count(); ++node) {
    double a = 0.0, b = 0.0;
    for (int r = 0; r < dim; ++r) {
      a += h[node * dim + r] * h[node * dim + r];
      b += hm[node * dim + r] * hm[node * dim + r];
    }
    a = std::sqrt(a);
    b = std::sqrt(b);
    hmax = std::max(hmax, a);
    mmax = std::max(mmax, b);
    const auto ang = im.grid().angles(node);
    std::vector<io::CsvCell> row = {static_cast<long long>(node), ang[0]};
    if (torus) row.push_back(ang[1]);
    row.push_back(a);
    row.push_back(b);
    t.add_row(std::move(row));
  }
  c.write_csv("hj.csv", t);
  auto rec = record("h_j");
  rec["max_h_j"] = number(hmax);
  rec["max_mean_curvature"] = number(mmax);
  if (c.params.contains("expected_max_h_j")) {
    const double e = io::to_double(c.params.at("expected_max_h_j"));
    c.checks.at_most(rec, "max_h_j_error", std::abs(hmax - e), num(c.params, "tolerance", 1e-6) * std::max(1.0, e));
  }
  rec["file"] = "hj.csv";
  c.records.push_back(rec);
}

void run_flow(Context& c) {
  const auto im = c.immersion();
  const auto x = c.field(im.grid());
  const auto times = time_grid(c.params);
  const auto scheme = c.params.value("scheme", std::string("auto"));
  TimestepOptions topt;
  topt.dt = num(c.params, "dt", 0.0);
  topt.filter = num(c.params, "filter", topt.filter);
  std::optional<FlowResult> flow;
  if (scheme == "spectral") {
    flow = flow_spectral(im, x, times);
  } else if (scheme == "timestep") {
    flow = flow_timestep(im, x, times, topt);
  } else if (scheme == "auto") {
    try {
      flow = flow_spectral(im, x, times);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnsupportedField) throw;
      flow = flow_timestep(im, x, times, topt);
    }
  } else {
    fail(ErrorKind::ParseError, "unknown scheme '" + scheme + "'");
  }
  std::vector<std::string> names;
  for (std::size_t k = 0; k < flow->immersions.size(); ++k) {
    const auto& ik = flow->immersions[k];
    if (ik.dim() == 1 && ik.ambient_dim() == 2) {
      names.push_back("curve_t" + std::to_string(k) + ".csv");
      c.write_csv(names.back(), io::curve_points_csv(ik));
    } else {
      names.push_back("immersion_t" + std::to_string(k) + ".json");
      c.write_json(names.back(), io::immersion_container(ik));
    }
  }
  c.write_json("flow.json", io::flow_manifest(*flow, required(c.scenario, "field"), names));
  auto rec = record("flow");
  rec["scheme"] = to_string(flow->scheme);
  rec["amplification"] = number(flow->amplification);
  rec["geodesic_residual"] = number(flow->geodesic_residual);
  json vols = json::array();
  for (const auto& ik : flow->immersions) vols.push_back(number(total_volumes(ik).vol_j));
  rec["vol_j"] = vols;
  if (flow->scheme == FlowScheme::Spectral) c.checks.at_most(rec, "geodesic_residual", flow->geodesic_residual, 1e-8);
  if (flow->times.size() >= 3) c.checks.at_most(rec, "commutator", commutator_check(*flow, x), 1e-5);
  rec["file"] = "flow.json";
  c.records.push_back(rec);
}

void run_flow_bvp(Context& c) {
  const auto outer = curve_from_descriptor(required(c.scenario, "outer"), c.base);
  const auto inner = curve_from_descriptor(required(c.scenario, "inner"), c.base);
  const auto r = solve_bvp_annulus(outer, inner, integer(c.params, "modes", 8), integer(c.params, "max_iter", 200));
  io::CsvTable t({"iteration", "residual"});
  for (std::size_t k = 0; k < r.history.size(); ++k) t.add_row({static_cast<long long>(k), r.history[k]});
  c.write_csv("bvp_history.csv", t);
  auto rec = record("bvp");
  rec["result"] = io::to_json(r);
  c.checks.holds(rec, "converged", r.converged);
  c.checks.at_most(rec, "boundary_misfit", std::max(r.outer_misfit, r.inner_misfit), 1e-8);
  bool monotone = true;
  for (std::size_t k = 1; k < r.history.size(); ++k) monotone = monotone && r.history[k] <= r.history[k - 1];
  c.checks.holds(rec, "monotone_history", monotone);
  if (c.params.contains("expected_rho"))
    c.checks.at_most(rec, "rho_error", std::abs(r.rho - io::to_double(c.params.at("expected_rho"))),
                     num(c.params, "tolerance", 1e-6));
  if (c.params.contains("expected_coefficients")) {
    double err = 0.0;
    for (const auto& e : c.params.at("expected_coefficients")) {
      const int n = e.at(0).get<int>();
      if (std::abs(n) > r.g.N) fail(ErrorKind::InvalidArgument, "expected coefficient outside the solved range");
      err = std::max(err, std::abs(r.g[n] - cplx(io::to_double(e.at(1)), io::to_double(e.at(2)))));
    }
    c.checks.at_most(rec, "coefficient_error", err, num(c.params, "tolerance", 1e-6));
  }
  rec["file"] = "bvp_history.csv";
  c.records.push_back(rec);
}

void run_flow_uniqueness(Context& c) {
  const auto im = c.immersion();
  const auto x = c.field(im.grid());
  const double d = uniqueness_compare(im, x, io::to_double(required(c.params, "t_final")));
  auto rec = record("uniqueness");
  c.checks.at_most(rec, "discrepancy", d, num(c.params, "tolerance", 1e-5));
  c.records.push_back(rec);
}

void add_report(Context& c, json& rec, const VariationReport& r, double tol, bool want_order) {
  rec["report"] = io::to_json(r);
  c.checks.at_most(rec, "rel_err", r.rel_err, tol);
  if (want_order) {
    const bool ok = r.exact || r.richardson_order >= 1.8;
    c.checks.holds(rec, "richardson_order_at_least_1.8", ok);
  }
}

void run_variation_first(Context& c) {
  const auto im = c.immersion();
  const auto r = check_first_variation(im, c.field(im.grid()));
  auto rec = record("first_variation");
  add_report(c, rec, r, num(c.params, "tolerance", 1e-4), true);
  if (c.params.contains("expected")) {
    const double e = io::to_double(c.params.at("expected"));
    c.checks.at_most(rec, "analytic_vs_expected", std::abs(r.analytic - e) / std::max(std::abs(e), 1e-300),
                     num(c.params, "tolerance", 1e-4));
  }
  c.records.push_back(rec);
  c.write_csv("summary.csv", io::variation_summary_csv({{"first_variation", r}}));
}

void run_variation_second(Context& c) {
  const auto im = c.immersion();
  const auto r = check_second_variation_kahler(im, c.field(im.grid()));
  auto rec = record("second_variation");
  add_report(c, rec, r, num(c.params, "tolerance", 1e-3), false);
  if (c.params.contains("oracle")) {
    const auto& o = c.params.at("oracle");
    const auto kind = required(o, "kind").get<std::string>();
    double e = 0.0;
    if (kind == "value") {
      e = io::to_double(required(o, "value"));
    } else if (kind == "csch") {
      // d^2/dt^2 of 2 pi / sinh t
      const double t = io::to_double(required(o, "t"));
      const double cs = 1.0 / std::sinh(t), ct = 1.0 / std::tanh(t);
      e = 2.0 * kPi * cs * (cs * cs + ct * ct);
    } else {
      fail(ErrorKind::ParseError, "unknown oracle '" + kind + "'");
    }
    rec["oracle"] = number(e);
    c.checks.at_most(rec, "fd_vs_oracle", std::abs(r.fd - e) / std::abs(e), num(c.params, "tolerance", 1e-3));
  }
  c.records.push_back(rec);
  c.write_csv("summary.csv", io::variation_summary_csv({{"second_variation", r}}));
}

void run_variation_density(Context& c) {
  const auto im = c.immersion();
  const auto r = check_density_divergence(im, c.field(im.grid()));
  const double tol = num(c.params, "tolerance", 1e-4);
  auto rec = record("density");
  rec["first"] = io::to_json(r.first);
  rec["second"] = io::to_json(r.second);
  rec["total_second"] = number(r.total_second);
  c.checks.at_most(rec, "first_rel_err", r.first.rel_err, tol);
  c.checks.at_most(rec, "second_rel_err", r.second.rel_err, tol);
  c.records.push_back(rec);
  c.write_csv("summary.csv", io::variation_summary_csv({{"density_first", r.first}, {"density_second", r.second}}));
}

void run_variation_convexity(Context& c) {
  const auto im = c.immersion();
  const auto x = c.field(im.grid());
  const auto ts = time_grid(c.params);
  std::function<double(double)> closed;
  if (c.params.contains("closed_form")) {
    const json cf = c.params.at("closed_form");
    closed = [cf](double t) { return closed_form_value(cf, t); };
  }
  const auto p = convexity_experiment(im, x, ts, closed);
  c.write_csv("convexity.csv", io::convexity_csv(p));
  auto rec = record("convexity");
  rec["samples"] = p.t.size();
  rec["min_relative"] = number(p.min_relative);
  c.checks.at_least(rec, "min_d2_relative", p.min_relative, num(c.params, "min_relative_bound", -1e-6));
  if (closed) {
    double err = 0.0;
    for (std::size_t k = 0; k < p.t.size(); ++k)
      err = std::max(err, std::abs(p.vol_j[k] - p.closed_form[k]) / std::abs(p.closed_form[k]));
    c.checks.at_most(rec, "closed_form_rel_err", err, num(c.params, "closed_form_tolerance", 1e-6));
  }
  rec["file"] = "convexity.csv";
  c.records.push_back(rec);
}

void run_variation_mixed(Context& c) {
  const auto im = c.immersion();
  const auto w = ambient_from_descriptor(required(c.scenario, "w"), im, c.seed);
  const auto z = ambient_from_descriptor(required(c.scenario, "z"), im, c.seed);
  const auto r = check_mixed_second_variation(im, w, z);
  auto rec = record("mixed_second_variation");
  add_report(c, rec, r, num(c.params, "tolerance", 1e-4), true);
  c.records.push_back(rec);
  c.write_csv("summary.csv", io::variation_summary_csv({{"mixed", r}}));
}

void run_variation_stability(Context& c) {
  const auto im = c.immersion();
  const double vol = total_volumes(im).vol_j;
  const int samples = integer(c.params, "samples", 20);
  std::vector<std::pair<std::string, VariationReport>> batch;
  for (int k = 0; k < samples; ++k) {
    const auto y = VectorFieldOnL::random_smooth(im.grid(), c.seed + static_cast<std::uint64_t>(k),
                                                 integer(c.params, "max_mode", 2), num(c.params, "amplitude", 0.5));
    const auto r = check_stability(im, y);
    auto rec = record("sample " + std::to_string(k));
    rec["report"] = io::to_json(r);
    c.checks.at_least(rec, "fd_relative", r.fd / vol, -1e-6);
    c.checks.at_most(rec, "abs_err_relative", r.abs_err / std::max(r.analytic, vol), 1e-4);
    c.records.push_back(rec);
    batch.emplace_back(rec["label"].get<std::string>(), r);
  }
  c.write_csv("summary.csv", io::variation_summary_csv(batch));
}

void run_ambient_verify(Context& c) {
  const auto chart = c.chart();
  const auto& dom = chart->domain();
  double lo = 0.0, hi = 1.0;
  if (dom.shape == ChartDomain::Shape::Ball) {
    const double span = dom.outer_radius - dom.inner_radius;
    lo = dom.inner_radius + 0.2 * span;
    hi = dom.inner_radius + 0.6 * span;
  }
  lo = num(c.params, "r_min", lo);
  hi = num(c.params, "r_max", hi);
  const int count = integer(c.params, "samples", 16);
  std::mt19937_64 gen(c.seed);
  std::vector<Vec> pts;
  json listed = json::array();
  for (int k = 0; k < count; ++k) {
    Vec p(chart->real_dim());
    double norm = 0.0;
    do {
      for (int r = 0; r < p.size(); ++r) p[r] = 2.0 * unit(gen) - 1.0;
      norm = p.norm();
    } while (norm < 1e-3 || norm > 1.0);
    p *= (lo + (hi - lo) * unit(gen)) / norm;
    pts.push_back(p);
    json pj = json::array();
    for (int r = 0; r < p.size(); ++r) pj.push_back(p[r]);
    listed.push_back(pj);
  }
  const auto rep = verify_kahler_einstein(*chart, pts);
  auto rec = record(chart->name());
  rec["report"] = io::to_json(rep);
  rec["points"] = listed;
  c.checks.at_most(rec, "max_nabla_j", rep.max_nabla_j, num(c.params, "nabla_j_tolerance", 1e-6));
  if (c.params.contains("expected_einstein")) c.checks.holds(rec, "einstein", rep.einstein == c.params.at("expected_einstein").get<bool>());
  if (c.params.contains("expected_constant"))
    c.checks.at_most(rec, "einstein_constant_error",
                     std::abs(rep.einstein_constant - io::to_double(c.params.at("expected_constant"))),
                     num(c.params, "tolerance", 1e-5));
  c.records.push_back(rec);
}

using Runner = void (*)(Context&);

const std::vector<std::pair<std::string, Runner>>& runners() {
  static const std::vector<std::pair<std::string, Runner>> table = {
      {"curve.analyze", run_curve_analyze},
      {"curve.classify", run_curve_classify},
      {"curve.geodesic", run_curve_geodesic},
      {"curve.length", run_curve_length},
      {"curve.secondvar", run_curve_secondvar},
      {"jvol.compute", run_jvol_compute},
      {"jvol.hj", run_jvol_hj},
      {"flow.run", run_flow},
      {"flow.bvp", run_flow_bvp},
      {"flow.uniqueness", run_flow_uniqueness},
      {"variation.first", run_variation_first},
      {"variation.second", run_variation_second},
      {"variation.density", run_variation_density},
      {"variation.convexity", run_variation_convexity},
      {"variation.mixed", run_variation_mixed},
      {"variation.stability", run_variation_stability},
      {"ambient.verify", run_ambient_verify},
  };
  return table;
}

json error_json(ErrorKind kind, const std::string& message) {
  json e;
  e["kind"] = std::string(to_string(kind));
  e["message"] = message;
  return e;
}

}  // namespace

const std::vector<std::string>& scenario_operations() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : runners()) out.push_back(name);
    return out;
  }();
  return names;
}

FourierCurve curve_from_descriptor(const json& d, const fs::path& base_dir) {
  try {
    if (d.contains("file")) return io::coefficients_from_json(io::read_json(resolve(base_dir, d.at("file").get<std::string>())));
    if (d.contains("coefficients")) return io::coefficients_from_json(d.at("coefficients"));
    const int N = integer(d, "N", 0);
    if (N < 1) fail(ErrorKind::InvalidArgument, "curve needs N >= 1");
    const json zero = {{"kind", "zero"}};
    const json pos = d.value("positive", zero), neg = d.value("negative", zero);
    auto c = FourierCurve::from_families(
        N, [&](int n) { return family_term(pos, n); }, [&](int n) { return family_term(neg, n); },
        d.contains("a0") ? complex_value(d.at("a0")) : cplx(0.0));
    if (d.contains("add"))
      for (const auto& t : d.at("add")) {
        const int n = t.at(0).get<int>();
        if (std::abs(n) > N) fail(ErrorKind::InvalidArgument, "added coefficient outside [-N, N]");
        c[n] += cplx(io::to_double(t.at(1)), io::to_double(t.at(2)));
      }
    return c;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("curve descriptor: ") + e.what());
  }
}

Immersion immersion_from_descriptor(const json& d, const ChartPtr& chart, const fs::path& base_dir,
                                    std::uint64_t seed) {
  try {
    const auto kind = required(d, "kind").get<std::string>();
    if (kind == "file") return io::immersion_from_container(io::read_json(resolve(base_dir, required(d, "path").get<std::string>())));
    if (kind == "circle")
      return Immersion::circle(grid_from(d, false), chart, io::to_double(required(d, "radius")),
                               d.contains("center") ? complex_value(d.at("center")) : cplx(0.0));
    if (kind == "ellipse")
      return Immersion::ellipse(grid_from(d, false), chart, io::to_double(required(d, "a")), io::to_double(required(d, "b")));
    if (kind == "curve") {
      const auto grid = grid_from(d, false);
      const auto c = curve_from_descriptor(required(d, "curve"), base_dir);
      if (grid.sizes[0] <= 2 * c.N) fail(ErrorKind::InvalidArgument, "curve grid must exceed twice the mode count");
      return Immersion::plane_curve(grid, chart, c.synthesize(grid.sizes[0]));
    }
    if (kind == "product_torus")
      return Immersion::product_torus(grid_from(d, true), chart, io::to_double(required(d, "r1")), io::to_double(required(d, "r2")));
    if (kind == "graph_perturbed_torus")
      return Immersion::graph_perturbed_torus(grid_from(d, true), chart, io::to_double(required(d, "r1")),
                                              io::to_double(required(d, "r2")), io::to_double(required(d, "amp")),
                                              integer(d, "m1", 1), integer(d, "m2", 1));
    if (kind == "straight_torus") return Immersion::straight_torus(grid_from(d, true), chart, num(d, "offset", 0.0));
    if (kind == "random_perturbed_torus") {
      // product torus displaced by a seeded smooth field
      const auto base = Immersion::product_torus(grid_from(d, true), chart, io::to_double(required(d, "r1")),
                                                 io::to_double(required(d, "r2")));
      const auto field = random_ambient_field(base.grid(), base.ambient_dim(),
                                              seed + static_cast<std::uint64_t>(integer(d, "seed_offset", 0)),
                                              integer(d, "max_mode", 2));
      return base.displaced(field, io::to_double(required(d, "amp")));
    }
    fail(ErrorKind::ParseError, "unknown immersion kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("immersion descriptor: ") + e.what());
  }
}

VectorFieldOnL field_from_descriptor(const json& d, const GridTorus& grid, std::uint64_t seed) {
  try {
    const auto kind = required(d, "kind").get<std::string>();
    const int axis = integer(d, "axis", 0);
    if (axis < 0 || axis >= grid.dim) fail(ErrorKind::InvalidArgument, "field axis out of range");
    if (kind == "coordinate") return VectorFieldOnL::coordinate(grid, axis, num(d, "c", 1.0));
    if (kind == "trig") {
      // f = a0 + sum cos_k cos(k . theta) + sin_k sin(k . theta)
      const double a0 = num(d, "a0", 1.0);
      std::vector<std::array<double, 4>> terms;
      if (d.contains("terms"))
        for (const auto& t : d.at("terms")) {
          const auto& k = required(t, "k");
          const double k1 = k.is_number() ? k.get<double>() : k.at(0).get<double>();
          const double k2 = k.is_number() ? 0.0 : k.at(1).get<double>();
          terms.push_back({k1, k2, num(t, "cos", 0.0), num(t, "sin", 0.0)});
        }
      return VectorFieldOnL::scaled_coordinate(grid, axis, [&](double t1, double t2) {
        double f = a0;
        for (const auto& [k1, k2, a, b] : terms) f += a * std::cos(k1 * t1 + k2 * t2) + b * std::sin(k1 * t1 + k2 * t2);
        return f;
      });
    }
    if (kind == "random")
      return VectorFieldOnL::random_smooth(grid, seed + static_cast<std::uint64_t>(integer(d, "seed_offset", 0)),
                                           integer(d, "max_mode", 3), num(d, "amplitude", 1.0));
    fail(ErrorKind::ParseError, "unknown field kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("field descriptor: ") + e.what());
  }
}

RunOutcome run_scenario_json(const json& scenario, const fs::path& out, const RunOptions& opts, const fs::path& base_dir) {
  set_thread_count(opts.threads);
  RunOutcome outcome;
  json results;
  results["format_version"] = io::kFormatVersion;
  Context c;
  c.out = out;
  c.base = base_dir;
  c.checks.tol_scale = opts.tol_scale;
  std::string op;
  std::optional<json> expected_error;
  try {
    try {
      if (!scenario.is_object()) fail(ErrorKind::ParseError, "scenario must be a JSON object");
      if (required(scenario, "version") != kScenarioVersion)
        fail(ErrorKind::ParseError, "unsupported scenario version " + scenario.at("version").dump());
      results["scenario"] = required(scenario, "name").get<std::string>();
      op = required(scenario, "operation").get<std::string>();
      results["operation"] = op;
      c.seed = scenario.contains("seed") ? scenario.at("seed").get<std::uint64_t>() : 0;
      results["seed"] = c.seed;
      results["tol_scale"] = number(opts.tol_scale);
      if (!(opts.tol_scale > 0.0)) fail(ErrorKind::InvalidArgument, "tol-scale must be positive");
      if (!opts.required_operation.empty() && opts.required_operation != op)
        fail(ErrorKind::UnknownOperation,
             "subcommand runs '" + opts.required_operation + "' but the scenario operation is '" + op + "'");
      c.scenario = scenario;
      c.params = scenario.value("params", json::object());
      if (scenario.contains("expect")) expected_error = required(scenario.at("expect"), "error");
    } catch (const json::exception& e) {
      fail(ErrorKind::ParseError, e.what());
    }
    const auto it = std::find_if(runners().begin(), runners().end(), [&](const auto& r) { return r.first == op; });
    if (it == runners().end()) fail(ErrorKind::UnknownOperation, "unknown operation '" + op + "'");
    fs::create_directories(out);
    try {
      it->second(c);
    } catch (const json::exception& e) {
      fail(ErrorKind::ParseError, e.what());
    }
    if (expected_error) {
      auto rec = record("expected_error");
      rec["expected"] = *expected_error;
      c.checks.holds(rec, "error_raised", false);
      c.records.push_back(rec);
    }
    results["status"] = c.checks.all_pass ? "ok" : "checks_failed";
    outcome.exit_code = c.checks.all_pass ? 0 : 3;
    if (!c.checks.all_pass) outcome.diagnostic = "one or more checks failed";
  } catch (const Error& e) {
    if (expected_error && expected_error->is_string() && *expected_error == std::string(to_string(e.kind()))) {
      auto rec = record("expected_error");
      rec["expected"] = *expected_error;
      rec["error"] = error_json(e.kind(), e.what());
      c.checks.holds(rec, "error_raised", true);
      c.records.push_back(rec);
      results["status"] = c.checks.all_pass ? "ok" : "checks_failed";
      outcome.exit_code = c.checks.all_pass ? 0 : 3;
    } else {
      results["status"] = "error";
      results["error"] = error_json(e.kind(), e.what());
      outcome.exit_code = is_numerical(e.kind()) ? 3 : 2;
      outcome.diagnostic = e.what();
    }
  }
  results["all_pass"] = outcome.exit_code == 0;
  results["records"] = c.records;
  results["files"] = c.files;
  outcome.results = results;

  json manifest;
  manifest["format_version"] = io::kFormatVersion;
  manifest["tool"] = "trgeo";
  manifest["tool_version"] = kToolVersion;
  manifest["scenario_version"] = kScenarioVersion;
  manifest["inputs"] = scenario;
  manifest["threads"] = opts.threads;
  manifest["tol_scale"] = number(opts.tol_scale);
  manifest["tolerances"] = c.checks.tolerances;
  manifest["files"] = c.files;
  try {
    io::write_json(out / "results.json", results);
    io::write_json(out / "manifest.json", manifest);
  } catch (const Error& e) {
    outcome.exit_code = 2;
    outcome.diagnostic = e.what();
  }
  return outcome;
}

RunOutcome run_scenario(const fs::path& path, const fs::path& out, const RunOptions& opts) {
  json scenario;
  try {
    scenario = io::read_json(path);
  } catch (const Error& e) {
    // still produce a structured record
    RunOutcome o = run_scenario_json(json(nullptr), out, opts, path.parent_path());
    o.results["error"] = error_json(e.kind(), e.what());
    o.diagnostic = e.what();
    o.exit_code = 2;
    try {
      io::write_json(out / "results.json", o.results);
    } catch (const Error&) {
    }
    return o;
  }
  return run_scenario_json(scenario, out, opts, path.parent_path());
}

}  // namespace trgeo
