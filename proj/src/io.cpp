#include "trgeo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "trgeo/error.hpp"

namespace trgeo::io {

namespace fs = std::filesystem;

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorKind::ParseError, "expected a number, got " + j.dump());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

json chart_descriptor(const AmbientChart& chart) {
  json d;
  d["name"] = chart.name();
  d["n"] = chart.complex_dim();
  if (!chart.is_flat()) d["fd_step"] = chart.fd_step();
  return d;
}

ChartPtr chart_from_descriptor(const json& d) {
  if (!d.is_object() || !d.contains("name")) fail(ErrorKind::ParseError, "chart descriptor needs a name");
  const auto name = d.at("name").get<std::string>();
  const int n = d.value("n", 1);
  const double step = d.value("fd_step", 0.0);
  if (name == "flat") return AmbientChart::flat(n);
  if (name == "flat_quotient") return AmbientChart::flat_quotient(n);
  if (name == "poincare_disk") return AmbientChart::poincare_disk(step);
  if (name == "complex_hyperbolic_ball") return AmbientChart::complex_hyperbolic_ball(step);
  if (name == "quartic") return AmbientChart::quartic(step);
  fail(ErrorKind::ParseError, "unknown chart '" + name + "'");
}

json immersion_container(const Immersion& im) {
  json c;
  c["format_version"] = kFormatVersion;
  const auto& grid = im.grid();
  c["grid"] = grid.dim == 1 ? json::array({grid.sizes[0]}) : json::array({grid.sizes[0], grid.sizes[1]});
  c["chart"] = chart_descriptor(*im.chart());
  const int dim = im.ambient_dim();
  json w = json::array();
  for (int r = 0; r < dim; ++r) {
    json row = json::array();
    for (int k = 0; k < grid.dim; ++k) row.push_back(im.winding().size() ? im.winding()(r, k) : 0.0);
    w.push_back(row);
  }
  c["winding"] = w;
  json pts = json::array();
  for (std::size_t node = 0; node < im.node_count(); ++node) {
    const Vec p = im.point(node);
    for (int r = 0; r < dim; ++r) pts.push_back(p[r]);
  }
  c["points"] = pts;
  return c;
}

Immersion immersion_from_container(const json& c) {
  try {
    if (c.at("format_version").get<int>() != kFormatVersion)
      fail(ErrorKind::ParseError, "unsupported immersion format version");
    const auto sizes = c.at("grid").get<std::vector<int>>();
    GridTorus grid;
    if (sizes.size() == 1)
      grid = GridTorus::circle(sizes[0]);
    else if (sizes.size() == 2)
      grid = GridTorus::torus(sizes[0], sizes[1]);
    else
      fail(ErrorKind::ParseError, "grid must have one or two sizes");
    auto chart = chart_from_descriptor(c.at("chart"));
    const int dim = chart->real_dim();
    Mat w = Mat::Zero(dim, grid.dim);
    const auto& wj = c.at("winding");
    for (int r = 0; r < dim; ++r)
      for (int k = 0; k < grid.dim; ++k) w(r, k) = wj.at(r).at(k).get<double>();
    const auto& pts = c.at("points");
    if (pts.size() != grid.node_count() * dim) fail(ErrorKind::ParseError, "point array has the wrong length");
    std::vector<double> periodic(pts.size());
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      const auto a = grid.angles(node);
      for (int r = 0; r < dim; ++r) {
        double lin = 0.0;
        for (int k = 0; k < grid.dim; ++k) lin += w(r, k) * a[k];
        periodic[node * dim + r] = pts[node * dim + r].get<double>() - lin;
      }
    }
    return Immersion(grid, std::move(chart), std::move(periodic), w);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("immersion container: ") + e.what());
  }
}

json coefficients_json(const FourierCurve& c) {
  json out = json::array();
  for (int n = -c.N; n <= c.N; ++n) out.push_back(json::array({n, c[n].real(), c[n].imag()}));
  return out;
}

FourierCurve coefficients_from_json(const json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::ParseError, "coefficient file must be a non-empty array");
  int N = 1;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 3) fail(ErrorKind::ParseError, "coefficients are [n, re, im] triples");
    N = std::max(N, std::abs(t[0].get<int>()));
  }
  auto c = FourierCurve::zeros(N);
  for (const auto& t : j) c[t[0].get<int>()] = cplx(to_double(t[1]), to_double(t[2]));
  return c;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != header_.size()) fail(ErrorKind::InvalidArgument, "CSV row width differs from the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t k = 0; k < header_.size(); ++k) out += (k ? "," : "") + csv_quote(header_[k]);
  out += "\n";
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ",";
      if (const auto* s = std::get_if<std::string>(&row[k]))
        out += csv_quote(*s);
      else if (const auto* d = std::get_if<double>(&row[k]))
        out += format_double(*d);
      else
        out += std::to_string(std::get<long long>(row[k]));
    }
    out += "\n";
  }
  return out;
}

void CsvTable::write(const fs::path& path) const { write_text(path, str()); }

CsvTable length_profile_csv(const LengthProfile& p) {
  CsvTable t({"r", "t", "Lambda", "d2"});
  for (std::size_t k = 0; k < p.radii.size(); ++k) {
    const bool interior = k > 0 && k + 1 < p.radii.size();
    t.add_row({p.radii[k], p.t[k], p.lambda[k], interior ? CsvCell(p.second_differences[k - 1]) : CsvCell(std::string())});
  }
  return t;
}

CsvTable curve_points_csv(const Immersion& im) {
  CsvTable t({"theta", "x", "y"});
  for (std::size_t node = 0; node < im.node_count(); ++node) {
    const Vec p = im.point(node);
    t.add_row({im.grid().angles(node)[0], p[0], p[1]});
  }
  return t;
}

CsvTable densities_csv(const Immersion& im) {
  const bool torus = im.dim() == 2;
  std::vector<std::string> header = {"node", "theta1"};
  if (torus) header.push_back("theta2");
  for (const char* h : {"rho_J", "vol_g_density", "vol_J_density"}) header.push_back(h);
  CsvTable t(header);
  for (std::size_t node = 0; node < im.node_count(); ++node) {
    const auto a = im.grid().angles(node);
    std::vector<CsvCell> row = {static_cast<long long>(node), a[0]};
    if (torus) row.push_back(a[1]);
    row.push_back(im.rho(node));
    row.push_back(im.volg_density(node));
    row.push_back(im.volj_density(node));
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable convexity_csv(const ConvexityProfile& p) {
  const bool closed = !p.closed_form.empty();
  std::vector<std::string> header = {"t", "Vol_J", "d2"};
  if (closed) header.push_back("closed_form");
  CsvTable t(header);
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    const bool interior = k > 0 && k + 1 < p.t.size();
    std::vector<CsvCell> row = {p.t[k], p.vol_j[k],
                                interior ? CsvCell(p.second_differences[k - 1]) : CsvCell(std::string())};
    if (closed) row.push_back(p.closed_form[k]);
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable variation_summary_csv(const std::vector<std::pair<std::string, VariationReport>>& reports) {
  CsvTable t({"case", "analytic", "fd", "rel_err", "order"});
  for (const auto& [name, r] : reports) t.add_row({name, r.analytic, r.fd, r.rel_err, r.richardson_order});
  return t;
}

json to_json(const VariationReport& r) {
  json j;
  j["context"] = r.context;
  j["analytic"] = number(r.analytic);
  j["fd"] = number(r.fd);
  j["abs_err"] = number(r.abs_err);
  j["rel_err"] = number(r.rel_err);
  if (r.steps.size() >= 2) j["richardson_order"] = number(r.richardson_order);
  j["exact"] = r.exact;
  json steps = json::array(), est = json::array();
  for (double s : r.steps) steps.push_back(number(s));
  for (double e : r.fd_estimates) est.push_back(number(e));
  j["steps"] = steps;
  j["fd_estimates"] = est;
  return j;
}

json to_json(const SideFit& f) {
  json j;
  j["absent"] = f.absent;
  j["radius"] = number(f.radius);
  j["slope"] = number(f.slope);
  j["log_coefficients"] = json::array({number(f.c0), number(f.c1), number(f.c2)});
  j["residual"] = number(f.residual);
  j["points"] = f.points;
  j["l1_partial"] = number(f.l1_partial);
  return j;
}

json to_json(const RadiusEstimate& r) {
  json j;
  j["r_inner"] = number(r.r_inner);
  j["r_outer"] = number(r.r_outer);
  j["inner_fit"] = to_json(r.inner);
  j["outer_fit"] = to_json(r.outer);
  return j;
}

json to_json(const DirectionClass& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["outer_l1_convergent"] = c.outer_l1_convergent;
  j["evidence"] = to_json(c.evidence);
  return j;
}

json to_json(const BvpResult& r) {
  json j;
  j["converged"] = r.converged;
  j["rho"] = number(r.rho);
  j["outer_misfit"] = number(r.outer_misfit);
  j["inner_misfit"] = number(r.inner_misfit);
  j["iterations"] = r.iterations;
  json h = json::array();
  for (double v : r.history) h.push_back(number(v));
  j["history"] = h;
  j["coefficients"] = coefficients_json(r.g);
  return j;
}

json to_json(const KahlerEinsteinReport& r) {
  json j;
  j["samples"] = r.samples;
  j["max_nabla_j"] = number(r.max_nabla_j);
  j["einstein_constant"] = number(r.einstein_constant);
  j["max_einstein_residual"] = number(r.max_einstein_residual);
  j["einstein"] = r.einstein;
  return j;
}

json flow_manifest(const FlowResult& flow, const json& field_descriptor, const std::vector<std::string>& files) {
  json j;
  j["scheme"] = to_string(flow.scheme);
  j["field"] = field_descriptor;
  j["amplification"] = number(flow.amplification);
  j["geodesic_residual"] = number(flow.geodesic_residual);
  json times = json::array();
  for (double t : flow.times) times.push_back(number(t));
  j["times"] = times;
  j["files"] = files;
  return j;
}

}  // namespace trgeo::io
