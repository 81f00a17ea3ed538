#include "heatplan/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

namespace heatplan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

Scenario load_scenario_checked(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("scenario file " + path.string() + " does not exist");
  return load_scenario_file(path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

SyntheticParams parse_params(const std::vector<std::string>& items) {
  SyntheticParams params;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError("--param '" + item + "': expected name=value");
    }
    const std::string name = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw ParseError("--param '" + name + "': '" + text + "' is not a number");
    }
    params[name] = value;
  }
  return params;
}

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

}  // namespace

std::vector<fs::path> cmd_gen(const std::string& kind_name, const SyntheticParams& params,
                              std::uint64_t seed, int count, bool perturb, const RunConfig& config,
                              const fs::path& out_dir) {
  const auto kind = synthetic_kind_from_string(kind_name);
  if (!kind) throw ParseError("unknown scenario kind '" + kind_name + "'");
  if (count < 1) throw ParseError("--count must be at least 1");
  ensure_dir(out_dir);
  std::vector<fs::path> written;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    Scenario scenario = generate_synthetic(*kind, params, s);
    if (perturb) scenario = augment_sample(scenario, config.perturb, s, config.solver);
    const fs::path path = out_dir / (kind_name + "_" + std::to_string(s) + ".json");
    write_text(path, save_scenario(scenario));
    written.push_back(path);
  }
  return written;
}

json cmd_plan(const fs::path& scenario_path, const RunConfig& config, const fs::path& out_dir,
              bool write_grids) {
  const Scenario scenario = load_scenario_checked(scenario_path);
  const auto predictor = make_predictor(config.predictor, config.seed);
  const PlanOutput out = plan_tick(scenario, initial_snapshot(scenario), *predictor, config.solver,
                                   config.sim.plan);
  const Trajectory& initial = out.bundle.initial_plan;

  json doc;
  doc["solver"] = out.refinement.has_value();
  if (out.refinement) {
    const RefinementResult& r = *out.refinement;
    doc["initial"] = to_json(r.initial_breakdown);
    doc["refined"] = to_json(r.breakdown);
    doc["feasible"] = r.feasible;
    doc["converged"] = r.converged;
    doc["iterations"] = r.iterations;
    doc["infeasibility"] = r.infeasibility;
  } else {
    SolverConfig solver = config.solver;
    if (!config.sim.plan.use_heatmap_term) solver.lambda_h = 0.0;
    doc["initial"] = to_json(
        total_cost(initial, initial, out.density, out.bundle.heatmap, solver).breakdown);
    doc["refined"] = nullptr;
  }
  doc["max_density_initial"] = max_density_along(initial, out.density);
  doc["max_density_refined"] = max_density_along(out.plan, out.density);

  ensure_dir(out_dir);
  write_text(out_dir / "initial_plan.json", trajectory_to_json(initial).dump(2) + "\n");
  write_text(out_dir / "refined_plan.json", trajectory_to_json(out.plan).dump(2) + "\n");
  write_text(out_dir / "breakdown.json", doc.dump(2) + "\n");
  if (write_grids) {
    write_grid_file(out_dir / "density.grid", out.density.grid);
    write_grid_file(out_dir / "non_drivable.grid", out.non_drivable.grid);
    write_grid_file(out_dir / "heatmap.grid", out.bundle.heatmap);
    write_grid_file(out_dir / "occupancy.grid", out.bundle.occupancy);
  }
  return doc;
}

MetricsReport cmd_simulate(const fs::path& scenario_path, const RunConfig& config,
                           const fs::path& out_dir) {
  const Scenario scenario = load_scenario_checked(scenario_path);
  const auto predictor = make_predictor(config.predictor, config.seed);
  const SimulationLog log = run_closed_loop(scenario, *predictor, config.solver, config.sim);
  const MetricsReport report = compute_metrics(log, scenario, config.sim, config.solver.vehicle);

  // The output directory is left out so that logs do not depend on it.
  json run = to_json(config);
  run.erase("output_dir");
  const json header = {{"scenario", json::parse(save_scenario(scenario))},
                       {"config", std::move(run)},
                       {"seed", config.seed}};
  ensure_dir(out_dir);
  write_log(out_dir / "log.jsonl", log, header);
  write_text(out_dir / "metrics.json", to_json(report).dump(2) + "\n");
  return report;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
  std::string csv = "scenario";
  for (const char* name : kMetricNames) csv += std::string(",") + name;
  csv += ",collision_events,error\n";

  std::array<double, 8> sum{};
  double events = 0.0;
  int ok = 0;
  for (const auto& row : rows) {
    csv += csv_field(row.scenario);
    if (row.report) {
      const auto values = metric_values(*row.report);
      for (std::size_t i = 0; i < values.size(); ++i) {
        csv += "," + fmt(values[i]);
        sum[i] += values[i];
      }
      csv += "," + std::to_string(row.report->collision_events) + ",\n";
      events += row.report->collision_events;
      ++ok;
    } else {
      csv += std::string(kMetricNames.size() + 1, ',') + "," + csv_field(row.error) + "\n";
    }
  }
  csv += "mean";
  if (ok > 0) {
    for (double s : sum) csv += "," + fmt(s / ok);
    csv += "," + fmt(events / ok) + ",\n";
  } else {
    csv += std::string(kMetricNames.size() + 1, ',') + ",no successful runs\n";
  }
  return csv;
}

std::vector<EvalRow> cmd_eval(const fs::path& scenario_dir, const RunConfig& config,
                              const fs::path& out_dir) {
  if (!fs::is_directory(scenario_dir)) {
    throw IoError("scenario directory " + scenario_dir.string() + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(scenario_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (files.empty()) throw IoError("no scenario files (*.json) in " + scenario_dir.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  std::vector<EvalRow> rows(files.size());
  parallel_for(files.size(), thread_count_from_env(), [&](std::size_t i) {
    EvalRow& row = rows[i];
    row.scenario = files[i].filename().string();
    try {
      const Scenario scenario = load_scenario_file(files[i]);
      const auto predictor = make_predictor(config.predictor, config.seed);
      const SimulationLog log = run_closed_loop(scenario, *predictor, config.solver, config.sim);
      row.report = compute_metrics(log, scenario, config.sim, config.solver.vehicle);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  ensure_dir(out_dir);
  write_text(out_dir / "eval.csv", eval_csv(rows));
  return rows;
}

std::vector<fs::path> cmd_render(const fs::path& input, const fs::path& out_dir,
                                 const std::vector<int>& indices, const RenderOptions& options) {
  if (!fs::is_regular_file(input)) throw IoError("render input " + input.string() + " does not exist");
  const std::vector<int> wanted = indices.empty() ? std::vector<int>{0} : indices;
  std::vector<fs::path> written;
  if (input.extension() == ".grid") {
    const SpatialTemporalGrid grid = read_grid_file(input);
    std::vector<std::string> svgs;
    for (int plane : wanted) {
      if (plane < 0) throw RangeError("render: plane " + std::to_string(plane) + " is negative");
      svgs.push_back(render_grid_svg(grid, static_cast<std::size_t>(plane)));
    }
    ensure_dir(out_dir);
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      written.push_back(out_dir / (input.stem().string() + "_plane_" + padded(wanted[i], 2) + ".svg"));
      write_text(written.back(), svgs[i]);
    }
    return written;
  }
  if (input.extension() != ".jsonl") {
    throw ParseError("render input " + input.string() + ": expected a .jsonl log or a .grid file");
  }
  json header;
  const SimulationLog log = read_log(input, &header);
  std::vector<std::string> svgs;
  for (int tick : wanted) {
    RenderOptions o = options;
    o.tick = tick;
    svgs.push_back(render_log_svg(log, header, o));
  }
  ensure_dir(out_dir);
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    written.push_back(out_dir / ("tick_" + padded(wanted[i], 4) + ".svg"));
    write_text(written.back(), svgs[i]);
  }
  return written;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heatmap-guided trajectory refinement: scenarios, planning, simulation"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_option("--seed", seed, "Seed, overrides the configuration");
  app.add_option("--out", out_path, "Output directory, overrides the configuration");

  bool no_solver = false;
  bool no_heatmap_term = false;
  auto ablation = [&](CLI::App* sub) {
    sub->add_flag("--no-solver", no_solver, "Execute the initial plan without refinement");
    sub->add_flag("--no-heatmap-term", no_heatmap_term, "Drop the heatmap term from the cost");
  };

  auto* gen = app.add_subcommand("gen", "Generate synthetic scenarios");
  std::string kind;
  std::vector<std::string> param_items;
  int count = 1;
  bool perturb = false;
  gen->add_option("kind", kind, "straight_lead_stop | crosswalk_pedestrians | unprotected_turn | "
                                "open_field_obstacle")
      ->required();
  gen->add_option("--param", param_items, "Generator parameter name=value (repeatable)");
  gen->add_option("--count", count, "Number of scenarios (seeds seed .. seed+count-1)");
  gen->add_flag("--perturb", perturb, "Perturb the ego start and fit a recovery expert");

  auto* plan = app.add_subcommand("plan", "Plan once at the scenario start");
  std::string scenario_path;
  bool grids = false;
  plan->add_option("scenario", scenario_path, "Scenario file")->required();
  plan->add_flag("--grids", grids, "Also write density, non-drivable, heatmap and occupancy grids");
  ablation(plan);

  auto* simulate = app.add_subcommand("simulate", "Closed-loop simulation with metrics");
  simulate->add_option("scenario", scenario_path, "Scenario file")->required();
  ablation(simulate);

  auto* eval = app.add_subcommand("eval", "Simulate a directory of scenarios into a CSV");
  std::string scenario_dir;
  eval->add_option("dir", scenario_dir, "Directory of scenario files")->required();
  ablation(eval);

  auto* render = app.add_subcommand("render", "Render a log tick or a grid plane as SVG");
  std::string input;
  std::vector<int> ticks;
  std::vector<int> planes;
  bool no_heatmap = false;
  bool no_density = false;
  render->add_option("input", input, "Simulation log (.jsonl) or grid file (.grid)")->required();
  render->add_option("--tick", ticks, "Log tick to render (repeatable, default 0)");
  render->add_option("--plane", planes, "Grid plane to render (repeatable, default 0)");
  render->add_flag("--no-heatmap", no_heatmap, "Omit the heatmap layer");
  render->add_flag("--no-density", no_density, "Omit the collision density layer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) config.seed = *seed;
    if (!out_path.empty()) config.output_dir = out_path;
    if (no_solver) config.sim.plan.use_solver = false;
    if (no_heatmap_term) config.sim.plan.use_heatmap_term = false;
    const fs::path out_dir = config.output_dir;

    if (gen->parsed()) {
      for (const auto& p : cmd_gen(kind, parse_params(param_items), config.seed, count, perturb,
                                   config, out_dir)) {
        out << p.string() << "\n";
      }
    } else if (plan->parsed()) {
      const json doc = cmd_plan(scenario_path, config, out_dir, grids);
      out << doc.dump(2) << "\n";
    } else if (simulate->parsed()) {
      const MetricsReport report = cmd_simulate(scenario_path, config, out_dir);
      out << to_json(report).dump(2) << "\n";
    } else if (eval->parsed()) {
      const auto rows = cmd_eval(scenario_dir, config, out_dir);
      out << eval_csv(rows);
      const bool failed = std::any_of(rows.begin(), rows.end(), [](const EvalRow& r) { return !r.report; });
      if (failed) {
        err << "heatplan: some scenarios failed, see the error column\n";
        return kExitDomain;
      }
    } else if (render->parsed()) {
      RenderOptions options;
      options.heatmap = !no_heatmap;
      options.density = !no_density;
      const fs::path in = input;
      for (const auto& p : cmd_render(in, out_dir, in.extension() == ".grid" ? planes : ticks, options)) {
        out << p.string() << "\n";
      }
    }
  } catch (const ParseError& e) {
    err << "heatplan: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "heatplan: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GridFormatError& e) {
    err << "heatplan: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "heatplan: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace heatplan
