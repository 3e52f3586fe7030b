// Command-line front end: run scenarios, sanity-check maps, validate trees.
#include <iostream>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "navstack/app/map_io.hpp"
#include "navstack/app/runner.hpp"

namespace {

int cmd_run(const std::string& scenario, navstack::ScenarioRunner::Options opts) {
  using namespace navstack;
  try {
    ScenarioConfig cfg = load_scenario(scenario);
    ScenarioRunner runner(std::move(cfg), std::move(opts));
    const RunReport report = runner.run();
    std::cout << report_summary(report);
    return report.passed() ? 0 : 1;
  } catch (const NavError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_check_map(const std::string& pgm, const std::string& meta) {
  using namespace navstack;
  try {
    const OccupancyGrid grid = load_map(pgm, meta);
    std::size_t occupied = 0, free_cells = 0, unknown = 0;
    for (const auto c : grid.cells) {
      switch (c) {
        case Occupancy::Occupied: ++occupied; break;
        case Occupancy::Free: ++free_cells; break;
        case Occupancy::Unknown: ++unknown; break;
      }
    }
    std::cout << grid.meta.width << "x" << grid.meta.height << " @ "
              << grid.meta.resolution << " m/cell, origin (" << grid.meta.origin.x
              << ", " << grid.meta.origin.y << ")\n"
              << "occupied " << occupied << ", free " << free_cells << ", unknown "
              << unknown << "\n";
    return 0;
  } catch (const NavError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_validate_bt(const std::string& path) {
  using namespace navstack;
  try {
    std::ifstream in(path);
    if (!in) {
      std::cerr << "error: cannot open " << path << "\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    // Validation registry: the full action vocabulary with inert nodes.
    ActionRegistry registry;
    for (const auto& tag : known_action_tags()) {
      registry.add(tag, [tag](const ParamMap& params) -> std::unique_ptr<BTNode> {
        class InertAction : public ActionNode {
         public:
          using ActionNode::ActionNode;

         protected:
          NodeStatus do_tick(TickContext&) override { return NodeStatus::Success; }
        };
        return std::make_unique<InertAction>(tag, params);
      });
    }
    const TreeSpec spec = parse_tree(buf.str(), registry);
    std::cout << "valid tree: " << spec.node_count << " nodes, root "
              << spec.root->name() << "\n";
    return 0;
  } catch (const NavError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D navigation stack and simulation harness"};
  app.require_subcommand(1);

  std::string scenario;
  navstack::ScenarioRunner::Options opts;
  opts.quiet = false;
  std::uint64_t seed = 0;
  double max_sim_time = 0.0;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("--scenario", scenario, "scenario YAML")->required();
  auto* seed_opt = run->add_option("--seed", seed, "RNG seed override");
  run->add_option("--bt", opts.bt_override, "behavior tree XML override");
  run->add_option("--log", opts.log_csv_path, "metrics CSV output path");
  run->add_option("--report", opts.report_path, "JSON report output path");
  run->add_option("--trace", opts.trace_path, "per-step trajectory trace CSV");
  run->add_option("--dump-costmaps", opts.dump_costmaps_dir, "dump final costmap PGMs here");
  auto* mst_opt = run->add_option("--max-sim-time", max_sim_time, "simulated-time cap (s)");
  run->add_flag("--audit", opts.audit, "re-simulate every control command");

  std::string pgm, meta;
  auto* check = app.add_subcommand("check-map", "parse and summarize a map");
  check->add_option("pgm", pgm, "PGM image")->required();
  check->add_option("meta", meta, "YAML metadata")->required();

  std::string bt_path;
  auto* validate = app.add_subcommand("validate-bt", "parse a behavior tree XML");
  validate->add_option("xml", bt_path, "behavior tree XML")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (seed_opt->count() > 0) opts.seed = seed;
    if (mst_opt->count() > 0) opts.max_sim_time = max_sim_time;
    return cmd_run(scenario, std::move(opts));
  }
  if (check->parsed()) {
    return cmd_check_map(pgm, meta);
  }
  return cmd_validate_bt(bt_path);
}
