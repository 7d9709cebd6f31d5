// Command-line front end: run / sweep / analyze / presets.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tvgames/error.hpp"
#include "tvgames/experiment.hpp"

namespace {

using namespace tvgames;

struct Common {
  std::string config_path;
  std::string preset_id;
  std::optional<long long> rounds;
  std::string out;
  bool svg = false;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* cfg = cmd->add_option("--config", c.config_path, "JSON experiment config");
  auto* pre = cmd->add_option("--preset", c.preset_id, "named preset (see `presets`)");
  cfg->excludes(pre);
  cmd->add_option("--rounds", c.rounds, "override the number of rounds");
  cmd->add_option("--out", c.out, "output directory (default $TVG_OUT_DIR or ./tvg_out)");
  cmd->add_flag("--svg", c.svg, "also write an SVG chart");
  cmd->add_option("--seed", c.seed, "override the seed");
}

ExperimentConfig load(const Common& c) {
  if (c.config_path.empty() == c.preset_id.empty()) {
    throw Error(ErrorKind::ConfigError, "give exactly one of --config or --preset");
  }
  ExperimentConfig config = c.preset_id.empty() ? load_config(c.config_path) : preset(c.preset_id);
  if (c.rounds) {
    if (*c.rounds < 1 || *c.rounds > kMaxRounds) {
      throw Error(ErrorKind::ConfigError, "--rounds out of range");
    }
    config.rounds = *c.rounds;
  }
  if (c.seed) config.seed = *c.seed;
  if (c.svg) config.svg = true;
  return config;
}

std::filesystem::path out_dir(const Common& c) {
  return c.out.empty() ? default_out_dir() : std::filesystem::path(c.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning dynamics in time-varying bilinear zero-sum games"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "simulate a config or preset and write CSV files");
  add_common(run, run_opts);

  Common sweep_opts;
  std::vector<std::string> grid;
  std::optional<unsigned> threads;
  auto* sweep_cmd = app.add_subcommand("sweep", "grid over one or two parameters");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd
      ->add_option("--grid", grid,
                   "name=start:stop:step or name=v1,v2,...; name is one of eta, alpha, gamma, "
                   "step, beta1, beta2, exponent (at most two)")
      ->required();
  sweep_cmd->add_option("--threads", threads, "worker threads (default: hardware)");

  Common analyze_opts;
  auto* analyze = app.add_subcommand("analyze", "period-product spectrum and verdict");
  add_common(analyze, analyze_opts);

  std::string show;
  auto* presets = app.add_subcommand("presets", "list presets");
  presets->add_option("--show", show, "print the expanded config of one preset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      if (!show.empty()) {
        std::cout << dump_config(preset(show));
        return 0;
      }
      for (const auto& id : preset_ids()) {
        const auto c = preset(id);
        std::cout << id << "\n    " << c.note << "\n";
      }
      return 0;
    }

    if (run->parsed()) {
      const auto config = load(run_opts);
      const auto result = run_experiment(config, out_dir(run_opts));
      for (const auto& s : result.series) {
        std::cout << s.label << ": " << to_string(s.status) << " after " << s.rounds_completed
                  << " rounds";
        for (std::size_t k = 0; k < s.measures.size(); ++k) {
          std::cout << ", " << s.measures[k].id() << "=" << format_double(s.final_deltas[k]);
        }
        std::cout << "\n";
      }
      for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
      return result.exit_code;
    }

    if (sweep_cmd->parsed()) {
      const auto config = load(sweep_opts);
      std::vector<GridAxis> axes;
      for (const auto& g : grid) axes.push_back(parse_grid_axis(g));
      const auto rows = sweep(config, axes, threads.value_or(0));
      const auto path = out_dir(sweep_opts) / config.name / "sweep.csv";
      write_sweep_csv(path, axes, rows);
      std::cout << rows.size() << " cells, wrote " << path.string() << "\n";
      return 0;
    }

    if (analyze->parsed()) {
      const auto config = load(analyze_opts);
      for (const auto& a : analyze_experiment(config, out_dir(analyze_opts))) {
        std::cout << a.label << ": " << a.verdict << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
