// One line per acceptance criterion; exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "trgeo/curve_lab.hpp"
#include "trgeo/error.hpp"
#include "trgeo/geodesic_flow.hpp"
#include "trgeo/scenario.hpp"
#include "trgeo/variation.hpp"

using namespace trgeo;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED[" << what << "]";
    }
  }
  template <class T>
  void note(const std::string& key, T value) {
    detail << " " << key << "=" << value;
  }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("ACCEPTANCE %2d %s  %s (%.2f s)%s\n", id, o.pass ? "PASS" : "FAIL", title, secs, o.detail.str().c_str());
  std::fflush(stdout);
}

ErrorKind raised(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected an error, none raised");
}

bool order_ok(const VariationReport& r) { return r.exact || r.richardson_order >= 1.8; }

std::vector<double> uniform(double from, double to, int count) {
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = from + (to - from) * k / (count - 1);
  return out;
}

double log_power(int n) { return std::exp(-std::log(n) * std::log(n)); }

FourierCurve coefficients(std::initializer_list<std::pair<int, cplx>> terms) {
  int N = 1;
  for (const auto& [n, a] : terms) N = std::max(N, std::abs(n));
  auto c = FourierCurve::zeros(N);
  for (const auto& [n, a] : terms) c[n] = a;
  return c;
}

std::vector<std::filesystem::path> scenario_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(TRGEO_SCENARIO_DIR))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const std::filesystem::path& p) { return io::read_text(p); }

}  // namespace

int main() {
  criterion(1, "rho_J of static planes is cos(alpha)", [](Outcome& o) {
    const Mat g = Mat::Identity(4, 4);
    const Mat j = standard_complex_structure(2);
    double worst = 0.0;
    for (double alpha : {0.0, pi / 6, pi / 4, pi / 3}) {
      // v1 = d/dx1, v2 = sin(alpha) d/dy1 + cos(alpha) d/dx2
      Mat v = Mat::Zero(4, 2);
      v(0, 0) = 1.0;
      v(1, 1) = std::sin(alpha);
      v(2, 1) = std::cos(alpha);
      const auto plane = plane_geometry(g, j, v);
      // oracle: 4x4 Gram determinant of (v1, v2, J v1, J v2) is rho^4
      Mat b(4, 4);
      b << v, j * v;
      const double gram = std::pow((b.transpose() * b).determinant(), 0.25);
      worst = std::max({worst, std::abs(plane.rho - gram), std::abs(plane.rho - std::cos(alpha)),
                        std::abs(plane.rho_gram - gram)});
    }
    o.note("max_err", worst);
    o.require(worst <= 1e-12, "abs err <= 1e-12");
  });

  criterion(2, "Vol_J <= Vol_g, equality on Lagrangian product tori", [](Outcome& o) {
    const auto flat2 = AmbientChart::flat(2);
    const auto d = io::json::parse(R"({"kind": "random_perturbed_torus", "N": 32, "r1": 1, "r2": 2, "amp": 0.1})");
    int strict = 0;
    double max_ratio = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto v = total_volumes(immersion_from_descriptor(d, flat2, {}, seed));
      strict += v.vol_j < v.vol_g;
      max_ratio = std::max(max_ratio, v.vol_j / v.vol_g);
    }
    o.note("strict", strict);
    o.note("max_ratio", max_ratio);
    o.require(strict == 100, "Vol_J < Vol_g on all 100 tori");
    const auto grid = GridTorus::torus(64, 64);
    double worst = 0.0;
    for (auto [r1, r2] : {std::pair{1.0, 2.0}, std::pair{0.5, 1.5}, std::pair{3.0, 0.25}}) {
      const auto v = total_volumes(Immersion::product_torus(grid, flat2, r1, r2));
      const double exact = 4.0 * pi * pi * r1 * r2;
      worst = std::max({worst, std::abs(v.vol_j - exact) / exact, std::abs(v.vol_g - exact) / exact});
    }
    o.note("product_rel_err", worst);
    o.require(worst <= 1e-9, "product tori within 1e-9");
  });

  criterion(3, "first variation identity", [](Outcome& o) {
    struct Case {
      const char* name;
      Immersion im;
      double closed;
    };
    const auto circle = GridTorus::circle(64);
    const auto torus = GridTorus::torus(32, 32);
    const double rho = 0.5;
    const std::vector<Case> cases = {
        {"circle", Immersion::circle(circle, AmbientChart::flat(1), 1.0), -2.0 * pi},
        {"torus", Immersion::product_torus(torus, AmbientChart::flat(2), 1.0, 2.0), -8.0 * pi * pi},
        // hyperbolic length 4 pi r / (1 - r^2) differentiated along r -> r (1 - t)
        {"poincare", Immersion::circle(circle, AmbientChart::poincare_disk(), rho),
         -rho * 4.0 * pi * (1.0 + rho * rho) / ((1.0 - rho * rho) * (1.0 - rho * rho))},
    };
    for (const auto& c : cases) {
      const auto r = check_first_variation(c.im, VectorFieldOnL::coordinate(c.im.grid(), 0));
      o.note(std::string(c.name) + ".rel_err", r.rel_err);
      o.note(std::string(c.name) + ".order", r.exact ? std::string("exact") : std::to_string(r.richardson_order));
      o.require(r.rel_err <= 1e-4, std::string(c.name) + " rel err");
      o.require(order_ok(r), std::string(c.name) + " Richardson order");
      o.require(std::abs(r.analytic - c.closed) <= 1e-4 * std::abs(c.closed), std::string(c.name) + " closed form");
    }
  });

  criterion(4, "Kahler second variation", [](Outcome& o) {
    const auto grid = GridTorus::circle(64);
    const auto flat = check_second_variation_kahler(Immersion::circle(grid, AmbientChart::flat(1), 1.0),
                                                    VectorFieldOnL::coordinate(grid, 0));
    // lambda(t) = 2 pi e^{-t}
    const double e1 = std::abs(flat.fd - 2.0 * pi) / (2.0 * pi);
    o.note("circle.analytic", flat.analytic);
    o.note("circle.fd_err", e1);
    o.require(std::abs(flat.analytic - 2.0 * pi) <= 1e-3 * 2.0 * pi && e1 <= 1e-3, "flat circle");
    // lambda(t) = 2 pi / sinh t at t = 1
    const auto hyp = check_second_variation_kahler(
        Immersion::circle(grid, AmbientChart::poincare_disk(), std::exp(-1.0)), VectorFieldOnL::coordinate(grid, 0));
    const double cs = 1.0 / std::sinh(1.0), ct = 1.0 / std::tanh(1.0);
    const double oracle = 2.0 * pi * cs * (cs * cs + ct * ct);
    const double e2 = std::abs(hyp.fd - oracle) / oracle, e3 = std::abs(hyp.analytic - oracle) / oracle;
    o.note("poincare.fd_err", e2);
    o.note("poincare.analytic_err", e3);
    o.require(e2 <= 1e-3 && e3 <= 1e-3, "Poincare circle");
  });

  criterion(5, "convexity of Vol_J along geodesics", [](Outcome& o) {
    const auto ts = uniform(0.0, 0.38, 20);
    const auto circle = GridTorus::circle(64);
    const auto torus = GridTorus::torus(32, 32);
    const auto cubic = coefficients({{1, 1.0}, {3, 0.2}});
    const std::vector<std::pair<const char*, Immersion>> flat = {
        {"circle", Immersion::circle(circle, AmbientChart::flat(1), 1.0)},
        {"ellipse", Immersion::ellipse(circle, AmbientChart::flat(1), 2.0, 1.0)},
        {"cubic", Immersion::plane_curve(circle, AmbientChart::flat(1), cubic.synthesize(64))},
        {"product_torus", Immersion::product_torus(torus, AmbientChart::flat(2), 1.0, 2.0)},
        {"graph_torus", Immersion::graph_perturbed_torus(torus, AmbientChart::flat(2), 1.0, 2.0, 0.1, 0, 1)},
    };
    for (const auto& [name, im] : flat) {
      const auto p = convexity_experiment(im, VectorFieldOnL::coordinate(im.grid(), 0), ts);
      o.note(std::string(name), p.min_relative);
      o.require(p.t.size() == 20 && p.min_relative >= -1e-6, name);
    }
    const auto hs = uniform(0.0, 1.5, 20);
    for (double t0 : {0.5, 1.0}) {
      const auto p = convexity_experiment(Immersion::circle(circle, AmbientChart::poincare_disk(), std::exp(-t0)),
                                          VectorFieldOnL::coordinate(circle, 0), hs,
                                          [t0](double t) { return 2.0 * pi / std::sinh(t0 + t); });
      double cf = 0.0;
      for (std::size_t k = 0; k < hs.size(); ++k) cf = std::max(cf, std::abs(p.vol_j[k] / p.closed_form[k] - 1.0));
      o.note("poincare_t0=" + std::to_string(t0).substr(0, 3), p.min_relative);
      o.require(p.min_relative >= 1e-4, "strict on the Poincare circle family");
      o.require(cf <= 1e-6, "Poincare closed form");
    }
  });

  criterion(6, "length convexity in one dimension", [](Outcome& o) {
    const auto ts = uniform(-0.2, 0.4, 20);
    std::vector<double> radii;
    for (double t : ts) radii.push_back(std::exp(-t));
    const std::vector<std::pair<const char*, FourierCurve>> curves = {
        {"circle", coefficients({{1, 1.0}})},
        {"ellipse", coefficients({{1, 1.5}, {-1, 0.5}})},
        {"cubic", coefficients({{1, 1.0}, {3, 0.2}})},
    };
    for (const auto& [name, c] : curves) {
      const auto p = length_profile(c, radii);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < p.second_differences.size(); ++k)
        worst = std::min(worst, p.second_differences[k] / p.lambda[k + 1]);
      o.note(std::string(name) + ".min_d2", worst);
      o.require(worst >= -1e-9, std::string(name) + " convex");
      bool one_sided = true;
      for (int n = 1; n <= c.N; ++n) one_sided = one_sided && c[-n] == cplx(0.0);
      if (one_sided) {
        // radii decrease along ts, so Lambda must too
        bool monotone = true;
        for (std::size_t k = 1; k < p.lambda.size(); ++k) monotone = monotone && p.lambda[k] < p.lambda[k - 1];
        o.require(monotone, std::string(name) + " monotone in r");
      }
    }
    const auto ell = resample_arclength(coefficients({{1, 1.5}, {-1, 0.5}}).synthesize(1024), 256);
    const auto grid = GridTorus::circle(256);
    const std::vector<std::function<double(double)>> fields = {
        [](double) { return 1.0; }, [](double s) { return std::cos(s); },
        [](double s) { return 1.0 + 0.5 * std::sin(2.0 * s); }};
    double worst = 0.0;
    for (const auto& f : fields) {
      std::vector<double> samples(256);
      for (int k = 0; k < 256; ++k) samples[k] = f(grid.angle(0, k));
      const auto r = second_variation_length(ell, samples);
      worst = std::max(worst, r.rel_err);
    }
    o.note("secondvar.max_rel_err", worst);
    o.require(worst <= 1e-4, "second variation of length");
  });

  criterion(7, "geodesic existence trichotomy at N = 256", [](Outcome& o) {
    const auto geometric = [](double r) { return [r](int n) { return cplx(std::pow(r, -n)); }; };
    const auto lp = [](int n) { return cplx(log_power(n)); };
    const auto a = classify_direction(FourierCurve::from_families(256, geometric(1.05), geometric(1.1)));
    const auto b = classify_direction(FourierCurve::from_families(256, lp, geometric(2.0)));
    const auto c = classify_direction(FourierCurve::from_families(256, lp, lp));
    o.note("geometric", to_string(a.kind));
    o.note("ray", to_string(b.kind));
    o.note("neither", to_string(c.kind));
    o.require(a.kind == DirectionKind::GeodesicAnnulus, "GeodesicAnnulus");
    o.require(b.kind == DirectionKind::RayOnly, "RayOnly");
    o.require(c.kind == DirectionKind::NoRay, "NoRay");
  });

  criterion(8, "annulus boundary value problem", [](Outcome& o) {
    const auto concentric = solve_bvp_annulus(coefficients({{1, 1.0}}), coefficients({{1, 0.5}}), 8);
    o.note("concentric.rho_err", std::abs(concentric.rho - 0.5));
    o.require(concentric.converged && std::abs(concentric.rho - 0.5) <= 1e-10, "concentric rho");
    o.require(std::abs(concentric.g[1] - 1.0) <= 1e-10, "concentric g(z) = z");
    // images of |z| = 1.5 and |z| = 1.1 under (z + 1/z) / 2, rescaled to the unit circle
    const auto jouk = [](double r) { return coefficients({{1, r / 2.0}, {-1, 1.0 / (2.0 * r)}}); };
    const auto r = solve_bvp_annulus(jouk(1.5), jouk(1.1), 8);
    const double rho_err = std::abs(r.rho - 1.1 / 1.5);
    const double misfit = std::max(r.outer_misfit, r.inner_misfit);
    const double coeff_err = std::max(std::abs(r.g[1] - 0.75), std::abs(r.g[-1] - 1.0 / 3.0));
    o.note("joukowski.rho_err", rho_err);
    o.note("joukowski.misfit", misfit);
    o.note("joukowski.coeff_err", coeff_err);
    o.require(r.converged && rho_err <= 1e-6, "Joukowski modulus");
    o.require(misfit < 1e-8, "boundary misfit");
    o.require(coeff_err <= 1e-6, "Joukowski coefficients");
  });

  criterion(9, "uniqueness across schemes and ill-posedness guard", [](Outcome& o) {
    const auto circle = GridTorus::circle(64);
    const auto torus = GridTorus::torus(32, 32);
    const std::vector<std::pair<const char*, Immersion>> cases = {
        {"circle", Immersion::circle(circle, AmbientChart::flat(1), 1.0)},
        {"ellipse", Immersion::ellipse(circle, AmbientChart::flat(1), 2.0, 1.0)},
        {"torus", Immersion::product_torus(torus, AmbientChart::flat(2), 1.0, 2.0)},
    };
    for (const auto& [name, im] : cases) {
      const double d = uniqueness_compare(im, VectorFieldOnL::coordinate(im.grid(), 0), 0.1);
      o.note(name, d);
      o.require(d <= 1e-5, name);
    }
    auto c = FourierCurve::from_families(
        400, [](int) { return cplx(0.0); }, [](int n) { return cplx(std::exp(-std::sqrt(n))); });
    c[1] += 16.0;
    const auto grid = GridTorus::circle(1024);
    const auto im = Immersion::plane_curve(grid, AmbientChart::flat(1), c.synthesize(1024));
    const auto kind = raised([&] { flow_timestep(im, VectorFieldOnL::coordinate(grid, 0), uniform(0.0, 0.2, 21)); });
    o.note("guard", to_string(kind));
    o.require(kind == ErrorKind::BlowUpDetected, "BlowUpDetected before t = 0.2");
  });

  criterion(10, "scenario suite results are byte-identical for 1 and 8 threads", [](Outcome& o) {
    const auto root = std::filesystem::temp_directory_path() / "trgeo_acceptance";
    std::filesystem::remove_all(root);
    int identical = 0, ok = 0;
    const auto files = scenario_files();
    for (const auto& f : files) {
      const auto name = f.stem().string();
      RunOptions one, eight;
      one.threads = 1;
      eight.threads = 8;
      const auto a = run_scenario(f, root / "t1" / name, one);
      const auto b = run_scenario(f, root / "t8" / name, eight);
      ok += a.exit_code == 0 && b.exit_code == 0;
      const bool same = slurp(root / "t1" / name / "results.json") == slurp(root / "t8" / name / "results.json");
      identical += same;
      o.require(same, name);
    }
    o.note("scenarios", files.size());
    o.note("identical", identical);
    o.note("exit0", ok);
    o.require(!files.empty(), "non-empty suite");
  });

  return failures == 0 ? 0 : 1;
}
