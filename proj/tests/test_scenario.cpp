#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "trgeo/error.hpp"
#include "trgeo/scenario.hpp"

using namespace trgeo;
using io::json;

namespace {

constexpr double pi = std::numbers::pi;

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / "trgeo_test_scenario" / name;
  std::filesystem::remove_all(p);
  return p;
}

json circle_flow() {
  return json::parse(R"({
    "version": 1, "name": "circle", "seed": 3, "operation": "flow.run",
    "chart": {"name": "flat", "n": 1},
    "immersion": {"kind": "circle", "N": 32, "radius": 1},
    "field": {"kind": "coordinate"},
    "params": {"t": {"from": 0, "to": 0.2, "count": 11}, "scheme": "spectral"}
  })");
}

}  // namespace

TEST_CASE("curve descriptors") {
  const auto c = curve_from_descriptor(json::parse(R"({
    "N": 8, "positive": {"kind": "log_power"}, "negative": {"kind": "geometric", "radius": 2, "scale": 3},
    "a0": [0.5, -1], "add": [[1, 1, 0]]})"));
  CHECK(c.N == 8);
  CHECK(std::abs(c[3] - std::exp(-std::log(3.0) * std::log(3.0))) < 1e-15);
  CHECK(std::abs(c[1] - 2.0) < 1e-15);  // 1^{-log 1} + 1
  CHECK(std::abs(c[-4] - 3.0 / 16.0) < 1e-15);
  CHECK(c[0] == std::complex<double>(0.5, -1.0));

  const auto e = curve_from_descriptor(json::parse(R"({"N": 4, "positive": {"kind": "exp_sqrt"},
                                                      "negative": {"kind": "power", "p": 3}})"));
  CHECK(std::abs(e[4] - std::exp(-2.0)) < 1e-15);
  CHECK(std::abs(e[-2] - 0.125) < 1e-15);

  CHECK_THROWS_AS(curve_from_descriptor(json::parse(R"({"N": 4, "positive": {"kind": "wavy"}})")), Error);
  CHECK_THROWS_AS(curve_from_descriptor(json::parse(R"({"N": 2, "add": [[3, 1, 0]]})")), Error);
}

TEST_CASE("immersion and field descriptors") {
  const auto flat2 = AmbientChart::flat(2);
  const auto im = immersion_from_descriptor(json::parse(R"({"kind": "product_torus", "N": [16, 32], "r1": 1, "r2": 2})"),
                                            flat2);
  CHECK(im.grid().sizes[0] == 16);
  CHECK(im.grid().sizes[1] == 32);
  CHECK(std::abs(total_volumes(im).vol_j - 8.0 * pi * pi) < 1e-10);

  // the seeded random torus is reproducible and depends on the seed
  const auto d = json::parse(R"({"kind": "random_perturbed_torus", "N": 16, "r1": 1, "r2": 2, "amp": 0.1})");
  const auto a = immersion_from_descriptor(d, flat2, {}, 5), b = immersion_from_descriptor(d, flat2, {}, 5),
             c = immersion_from_descriptor(d, flat2, {}, 6);
  CHECK(a.periodic() == b.periodic());
  CHECK(a.periodic() != c.periodic());

  const auto curve = immersion_from_descriptor(
      json::parse(R"({"kind": "curve", "N": 64, "curve": {"coefficients": [[1, 1.5, 0], [-1, 0.5, 0]]}})"),
      AmbientChart::flat(1));
  const auto ell = Immersion::ellipse(GridTorus::circle(64), AmbientChart::flat(1), 2.0, 1.0);
  for (std::size_t i = 0; i < ell.periodic().size(); ++i) CHECK(std::abs(curve.periodic()[i] - ell.periodic()[i]) < 1e-14);

  const auto grid = GridTorus::circle(32);
  const auto f = field_from_descriptor(
      json::parse(R"({"kind": "trig", "a0": 1, "terms": [{"k": 2, "cos": 0.5}, {"k": 1, "sin": -0.25}]})"), grid, 0);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const double t = grid.angles(n)[0];
    CHECK(std::abs(f.components[0][n] - (1.0 + 0.5 * std::cos(2 * t) - 0.25 * std::sin(t))) < 1e-15);
  }
  CHECK_THROWS_AS(field_from_descriptor(json::parse(R"({"kind": "coordinate", "axis": 1})"), grid, 0), Error);
  CHECK_THROWS_AS(immersion_from_descriptor(json::parse(R"({"kind": "klein_bottle", "N": 16})"), flat2), Error);
}

TEST_CASE("scenario runs and exit codes") {
  SUBCASE("success writes results, manifest and series") {
    const auto out = scratch("ok");
    const auto r = run_scenario_json(circle_flow(), out);
    CHECK(r.exit_code == 0);
    CHECK(r.results["status"] == "ok");
    CHECK(std::filesystem::exists(out / "results.json"));
    CHECK(std::filesystem::exists(out / "manifest.json"));
    CHECK(std::filesystem::exists(out / "flow.json"));
    CHECK(std::filesystem::exists(out / "curve_t10.csv"));
    const auto manifest = io::read_json(out / "manifest.json");
    CHECK(manifest["inputs"]["name"] == "circle");
    CHECK(manifest["tolerances"].contains("commutator"));
    // the final curve is the circle of radius e^{-0.2}
    const auto pts = io::read_text(out / "curve_t10.csv");
    CHECK(pts.substr(0, pts.find('\n')) == "theta,x,y");
    const auto row = pts.substr(pts.find('\n') + 1);
    CHECK(row.substr(0, 2) == "0,");
    CHECK(std::abs(std::stod(row.substr(2)) - std::exp(-0.2)) < 1e-14);
  }
  SUBCASE("validation failures exit 2") {
    auto s = circle_flow();
    s["version"] = 2;
    CHECK(run_scenario_json(s, scratch("version")).exit_code == 2);
    s = circle_flow();
    s["operation"] = "flow.smooth";
    const auto r = run_scenario_json(s, scratch("op"));
    CHECK(r.exit_code == 2);
    CHECK(r.results["error"]["kind"] == "UnknownOperation");
    s = circle_flow();
    s.erase("chart");
    CHECK(run_scenario_json(s, scratch("missing")).results["error"]["kind"] == "ParseError");
    RunOptions opts;
    opts.required_operation = "curve.classify";
    CHECK(run_scenario_json(circle_flow(), scratch("mismatch"), opts).exit_code == 2);
  }
  SUBCASE("numerical failures exit 3 and are recorded") {
    auto s = json::parse(R"({
      "version": 1, "name": "amp", "operation": "flow.run",
      "chart": {"name": "flat", "n": 1},
      "immersion": {"kind": "curve", "N": 1024,
                    "curve": {"N": 256, "positive": {"kind": "log_power"}, "negative": {"kind": "log_power"},
                              "add": [[1, 1, 0]]}},
      "field": {"kind": "coordinate"},
      "params": {"times": [0, 0.01], "scheme": "spectral"}})");
    const auto out = scratch("numerical");
    const auto r = run_scenario_json(s, out);
    CHECK(r.exit_code == 3);
    CHECK(io::read_json(out / "results.json")["error"]["kind"] == "AmplificationExceeded");
    s["expect"] = json{{"error", "AmplificationExceeded"}};
    CHECK(run_scenario_json(s, scratch("expected")).exit_code == 0);
    s["expect"] = json{{"error", "BlowUpDetected"}};
    CHECK(run_scenario_json(s, scratch("wrong_expected")).exit_code == 3);
  }
  SUBCASE("failed checks exit 3; tol-scale loosens them") {
    auto s = json::parse(R"({
      "version": 1, "name": "bvp", "operation": "flow.bvp",
      "outer": {"coefficients": [[1, 1, 0]]}, "inner": {"coefficients": [[1, 0.5, 0]]},
      "params": {"expected_rho": 0.5000001, "tolerance": 1e-8}})");
    CHECK(run_scenario_json(s, scratch("tight")).exit_code == 3);
    RunOptions opts;
    opts.tol_scale = 100.0;
    CHECK(run_scenario_json(s, scratch("loose"), opts).exit_code == 0);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const auto s = json::parse(R"({
    "version": 1, "name": "density", "seed": 7, "operation": "variation.density",
    "chart": {"name": "flat", "n": 2},
    "immersion": {"kind": "graph_perturbed_torus", "N": 16, "r1": 1, "r2": 2, "amp": 0.2, "m1": 1, "m2": 1},
    "field": {"kind": "random", "max_mode": 2, "amplitude": 0.5}})");
  RunOptions one, many;
  many.threads = 8;
  const auto a = scratch("t1"), b = scratch("t8");
  CHECK(run_scenario_json(s, a, one).exit_code == 0);
  CHECK(run_scenario_json(s, b, many).exit_code == 0);
  CHECK(io::read_text(a / "results.json") == io::read_text(b / "results.json"));
  CHECK(io::read_text(a / "summary.csv") == io::read_text(b / "summary.csv"));
  set_thread_count(1);
}
