#include "heatplan/config.hpp"

#include <fstream>

#include "json_util.hpp"

namespace heatplan {

using nlohmann::json;

RunConfig run_config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  jsonu::reject_unknown(doc, {"solver", "loss", "sim", "perturb", "predictor", "seed", "output_dir"},
                        "");
  RunConfig c;
  if (auto it = doc.find("solver"); it != doc.end()) c.solver = solver_config_from_json(*it);
  if (auto it = doc.find("loss"); it != doc.end()) c.loss = loss_config_from_json(*it);
  if (auto it = doc.find("sim"); it != doc.end()) c.sim = sim_config_from_json(*it);
  if (auto it = doc.find("perturb"); it != doc.end()) c.perturb = perturb_ranges_from_json(*it);
  if (auto it = doc.find("predictor"); it != doc.end()) c.predictor = predictor_config_from_json(*it);
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) throw ParseError("config field 'seed': expected a non-negative integer");
    c.seed = it->get<std::uint64_t>();
  }
  std::string out = c.output_dir.string();
  jsonu::read(doc, "output_dir", out, "");
  c.output_dir = out;

  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
  };
  resolve(c.output_dir);
  resolve(c.predictor.bundle_dir);
  if (c.predictor.kind == "external" && !std::filesystem::is_directory(c.predictor.bundle_dir)) {
    throw IoError("config field 'predictor.bundle_dir': directory " + c.predictor.bundle_dir.string() +
                  " does not exist");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return run_config_from_json(doc, path.parent_path());
}

json to_json(const RunConfig& c) {
  return {{"solver", to_json(c.solver)},     {"loss", to_json(c.loss)},
          {"sim", to_json(c.sim)},           {"perturb", to_json(c.perturb)},
          {"predictor", to_json(c.predictor)}, {"seed", c.seed},
          {"output_dir", c.output_dir.string()}};
}

}  // namespace heatplan
