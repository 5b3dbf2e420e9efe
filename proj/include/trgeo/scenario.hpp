#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trgeo/io.hpp"

namespace trgeo {

inline constexpr int kScenarioVersion = 1;

struct RunOptions {
  int threads = 1;
  double tol_scale = 1.0;
  /// When set, the scenario's operation must equal this one.
  std::string required_operation;
};

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 validation failure, 3 numerical failure
  io::json results;
  std::string diagnostic;  // empty on success
};

/// Every operation name a scenario may carry, e.g. "curve.classify".
const std::vector<std::string>& scenario_operations();

/// Runs one scenario document and writes manifest.json, results.json and any
/// CSV series into `out`. Never throws for scenario-level failures; they end
/// up in the outcome and in results.json.
RunOutcome run_scenario_json(const io::json& scenario, const std::filesystem::path& out, const RunOptions& opts = {},
                             const std::filesystem::path& base_dir = {});

RunOutcome run_scenario(const std::filesystem::path& path, const std::filesystem::path& out,
                        const RunOptions& opts = {});

// Descriptor builders, exposed for tests.
FourierCurve curve_from_descriptor(const io::json& d, const std::filesystem::path& base_dir = {});
Immersion immersion_from_descriptor(const io::json& d, const ChartPtr& chart,
                                    const std::filesystem::path& base_dir = {}, std::uint64_t seed = 0);
VectorFieldOnL field_from_descriptor(const io::json& d, const GridTorus& grid, std::uint64_t seed);

}  // namespace trgeo
