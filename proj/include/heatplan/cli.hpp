#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatplan/config.hpp"
#include "heatplan/render.hpp"

namespace heatplan {

// Exit statuses of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Writes `count` scenarios of `kind` with seeds seed, seed + 1, ... to
/// `<out_dir>/<kind>_<seed>.json`. With `perturb` the ego start is perturbed
/// and the expert replaced by its recovery trajectory. Returns the paths.
std::vector<std::filesystem::path> cmd_gen(const std::string& kind, const SyntheticParams& params,
                                           std::uint64_t seed, int count, bool perturb,
                                           const RunConfig& config,
                                           const std::filesystem::path& out_dir);

/// One planning tick at the scenario start. Writes initial_plan.json,
/// refined_plan.json and breakdown.json to `out_dir`, plus density.grid,
/// non_drivable.grid, heatmap.grid and occupancy.grid when `write_grids`.
/// Returns the breakdown document.
nlohmann::json cmd_plan(const std::filesystem::path& scenario_path, const RunConfig& config,
                        const std::filesystem::path& out_dir, bool write_grids);

/// Closed-loop run. Writes log.jsonl and metrics.json to `out_dir`.
MetricsReport cmd_simulate(const std::filesystem::path& scenario_path, const RunConfig& config,
                           const std::filesystem::path& out_dir);

struct EvalRow {
  std::string scenario;  // file name
  std::optional<MetricsReport> report;
  std::string error;  // set when the run failed
};

/// Simulates every *.json scenario in the directory (sorted by file name,
/// HEATPLAN_THREADS workers) and writes `<out_dir>/eval.csv` with one row
/// per scenario and a final mean row over successful runs. Throws IoError
/// for a missing or empty directory.
std::vector<EvalRow> cmd_eval(const std::filesystem::path& scenario_dir, const RunConfig& config,
                              const std::filesystem::path& out_dir);

std::string eval_csv(const std::vector<EvalRow>& rows);

/// Renders a .jsonl log (one SVG per tick, `tick_NNNN.svg`) or a .grid file
/// (one SVG per plane, `<stem>_plane_NN.svg`). Returns the written paths.
std::vector<std::filesystem::path> cmd_render(const std::filesystem::path& input,
                                              const std::filesystem::path& out_dir,
                                              const std::vector<int>& ticks_or_planes,
                                              const RenderOptions& options);

/// Parses arguments and dispatches. Errors are reported on `err`; the
/// return value is one of the exit statuses above.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace heatplan
