// racesim — scenario runner and post-processing CLI.
//
// Exit codes: 0 success, 1 simulation failure (numerical blow-up, runtime
// forecast failure), 2 bad configuration / missing file / bad usage.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "raceway/cli.hpp"
#include "raceway/config.hpp"
#include "raceway/forecast.hpp"
#include "raceway/sim.hpp"
#include "raceway/synthetic.hpp"

namespace {

int cmd_run(const std::string& scenario_path, const std::string& controller,
            const std::string& forecast, const std::string& out_dir,
            std::optional<std::uint32_t> seed) {
  raceway::Scenario sc;
  try {
    sc = raceway::load_scenario(scenario_path, seed);
    if (!controller.empty()) sc.controller = controller;
    if (!forecast.empty()) sc.forecast = forecast;
    sc.validate();
    if (sc.controller == "empc")
      (void)raceway::make_forecast(sc.forecast, sc.weather);  // reject unknown kinds
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  raceway::Trajectory traj;
  try {
    traj = raceway::run_scenario(sc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    raceway::write_run_outputs(sc, traj, out_dir);
    std::cout << raceway::summary_text(sc, traj);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b) {
  try {
    const raceway::RunSummary a = raceway::read_summary(dir_a);
    const raceway::RunSummary b = raceway::read_summary(dir_b);
    std::cout << raceway::comparison_table(a, b);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_plot_data(const std::string& run_dir, const std::string& out_file) {
  try {
    const std::string traj_path =
        (std::filesystem::path(run_dir) / "trajectory.csv").string();
    std::ifstream in(traj_path, std::ios::binary);
    if (!in) throw raceway::invalid_parameter("trajectory not found: " + traj_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string csv = raceway::plot_data_from_csv(buf.str());
    if (out_file.empty())
      std::cout << csv;
    else
      raceway::write_file_atomic(out_file, csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_gen_weather(const std::string& preset, const std::string& out_file,
                    const std::string& start, int days, std::uint32_t seed,
                    int cadence) {
  try {
    const std::int64_t t0 = raceway::parse_iso8601(start);
    std::vector<raceway::SyntheticDay> plan = raceway::weather_preset(preset);
    if (days > 0) {
      std::vector<raceway::SyntheticDay> cycled;
      for (int i = 0; i < days; ++i) cycled.push_back(plan[i % plan.size()]);
      plan = std::move(cycled);
    }
    const raceway::WeatherSeries w = raceway::synthetic_weather(t0, plan, cadence, seed);
    raceway::save_weather_csv(w, out_file, cadence);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raceway photobioreactor simulation and economic optimization"};
  app.require_subcommand(1);

  std::string scenario_path, controller, forecast, out_dir;
  std::optional<std::uint32_t> seed;
  CLI::App* run = app.add_subcommand("run", "simulate a scenario and write run artifacts");
  run->add_option("--scenario", scenario_path, "scenario config file")->required();
  run->add_option("--controller", controller,
                  "override controller: empc | benchmark | none");
  run->add_option("--forecast", forecast,
                  "override forecast: perfect | hourly | previous-day | hold-current");
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed, "override the synthetic-weather seed");

  std::string dir_a, dir_b;
  CLI::App* compare = app.add_subcommand("compare", "compare two completed runs");
  compare->add_option("--a", dir_a, "first run directory")->required();
  compare->add_option("--b", dir_b, "second run directory")->required();

  std::string plot_run, plot_out;
  CLI::App* plot = app.add_subcommand("plot-data",
                                      "emit long-format plot data from a run");
  plot->add_option("--run", plot_run, "run directory")->required();
  plot->add_option("--out", plot_out, "output file (default: stdout)");

  std::string gw_preset, gw_out, gw_start = "2024-05-06T00:00:00";
  int gw_days = 0, gw_cadence = 60;
  std::uint32_t gw_seed = 0;
  CLI::App* gen = app.add_subcommand("gen-weather", "write a synthetic weather CSV");
  gen->add_option("--preset", gw_preset,
                  "clear-day | cloudy-day | mixed-3day | reference-2day")
      ->required();
  gen->add_option("--out", gw_out, "output CSV file")->required();
  gen->add_option("--start", gw_start, "first timestamp (ISO 8601)");
  gen->add_option("--days", gw_days, "override the preset's day count");
  gen->add_option("--seed", gw_seed, "jitter seed");
  gen->add_option("--cadence", gw_cadence, "sample spacing [s]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (app.got_subcommand(run))
    return cmd_run(scenario_path, controller, forecast, out_dir, seed);
  if (app.got_subcommand(compare)) return cmd_compare(dir_a, dir_b);
  if (app.got_subcommand(plot)) return cmd_plot_data(plot_run, plot_out);
  return cmd_gen_weather(gw_preset, gw_out, gw_start, gw_days, gw_seed, gw_cadence);
}
