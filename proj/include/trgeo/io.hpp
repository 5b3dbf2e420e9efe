#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "trgeo/ambient.hpp"
#include "trgeo/curve_lab.hpp"
#include "trgeo/geodesic_flow.hpp"
#include "trgeo/immersion.hpp"
#include "trgeo/variation.hpp"

namespace trgeo::io {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Finite values as numbers; inf, -inf and nan as strings, since JSON has no
/// literal for them.
json number(double v);
double to_double(const json& j);

/// 17 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

// ---- charts and immersions

json chart_descriptor(const AmbientChart& chart);
/// Built-in charts only: flat, flat_quotient, poincare_disk,
/// complex_hyperbolic_ball, quartic.
ChartPtr chart_from_descriptor(const json& d);

/// {format_version, grid, chart, winding, points}, points row-major with 2n
/// reals per node.
json immersion_container(const Immersion& im);
Immersion immersion_from_container(const json& c);

// ---- coefficient files: array of [n, re, im]

json coefficients_json(const FourierCurve& c);
FourierCurve coefficients_from_json(const json& j);

// ---- CSV (RFC 4180 quoting, LF line endings)

using CsvCell = std::variant<std::string, double, long long>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<CsvCell> row);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

std::string csv_quote(const std::string& field);

CsvTable length_profile_csv(const LengthProfile& p);
CsvTable curve_points_csv(const Immersion& im);
CsvTable densities_csv(const Immersion& im);
CsvTable convexity_csv(const ConvexityProfile& p);
CsvTable variation_summary_csv(const std::vector<std::pair<std::string, VariationReport>>& reports);

// ---- result records

json to_json(const VariationReport& r);
json to_json(const SideFit& f);
json to_json(const RadiusEstimate& r);
json to_json(const DirectionClass& c);
json to_json(const BvpResult& r);
json to_json(const KahlerEinsteinReport& r);
json flow_manifest(const FlowResult& flow, const json& field_descriptor, const std::vector<std::string>& files);

}  // namespace trgeo::io
