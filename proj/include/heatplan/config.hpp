#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "heatplan/losses.hpp"
#include "heatplan/perturb.hpp"
#include "heatplan/predictor.hpp"
#include "heatplan/sim.hpp"
#include "heatplan/solver.hpp"

namespace heatplan {

/// Everything a CLI run needs, loaded from one JSON document:
/// {"solver", "loss", "sim", "perturb", "predictor", "seed", "output_dir"}.
struct RunConfig {
  SolverConfig solver;
  LossConfig loss;
  SimConfig sim;
  PerturbRanges perturb;
  PredictorConfig predictor;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
};

/// Unknown keys raise ParseError. Relative paths resolve against `base_dir`;
/// a referenced bundle directory that does not exist raises IoError.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace heatplan
