#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmvshrink/error.hpp"
#include "gmvshrink/version.hpp"
#include "gmvshrink_cli/commands.hpp"

namespace gmvshrink::cli {

namespace {

constexpr std::array<const char*, 4> kCommandNames{"estimate", "simulate", "backtest", "curves"};

bool is_command_name(const std::string& token) {
  return std::find(kCommandNames.begin(), kCommandNames.end(), token) != kCommandNames.end();
}

void print_error(const std::string& kind, int exit_code, const std::string& message) {
  const nlohmann::json doc{
      {"error", {{"kind", kind}, {"exit_code", exit_code}, {"message", message}}}};
  std::cerr << doc.dump() << '\n';
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file path");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

struct ConfigTokens {
  std::optional<std::string> command;
  std::vector<std::string> tokens;
};

ConfigTokens load_config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::ParseError& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  ConfigTokens out;
  for (const CLI::ConfigItem& item : items) {
    if (item.name.empty() || item.name == "++" || item.name == "--") continue;
    std::string value;
    for (const std::string& v : item.inputs) {
      if (!value.empty()) value += ',';
      value += v;
    }
    if (item.name == "command") {
      out.command = value;
      continue;
    }
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") throw ConfigError("config files cannot include other config files");
    out.tokens.push_back("--" + key + "=" + value);
  }
  return out;
}

/// Splices config-file options in front of the command-line options of the
/// selected command so that explicit flags win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  const std::optional<std::string> path = find_config_path(args);
  if (!path) return args;
  ConfigTokens config = load_config_tokens(*path);

  auto command_it = std::find_if(args.begin(), args.end(), is_command_name);
  if (command_it == args.end()) {
    if (!config.command) throw ConfigError("no command given on the command line or in the config");
    if (!is_command_name(*config.command)) {
      throw ConfigError("config names unknown command '" + *config.command + "'");
    }
    args.insert(args.begin(), *config.command);
    command_it = args.begin();
  }
  const auto offset = std::distance(args.begin(), command_it) + 1;
  args.insert(args.begin() + offset, config.tokens.begin(), config.tokens.end());
  return args;
}

void take_last(CLI::App& app) {
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

CLI::App* add_command(CLI::App& app, const char* name, const char* description) {
  CLI::App* sub = app.add_subcommand(name, description);
  sub->fallthrough();
  take_last(*sub);
  return sub;
}

}  // namespace

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  CLI::App app{"Shrinkage estimation of the global minimum variance portfolio", "gmvshrink"};
  take_last(app);
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GlobalOptions global;
  std::uint64_t seed_value = 0;
  std::string config_path;
  app.add_option("-o,--output-dir", global.output_dir, "Directory for output files");
  CLI::Option* seed_opt = app.add_option("--seed", seed_value, "Random seed");
  app.add_option("--threads", global.threads, "Worker threads (0 = all cores)");
  app.add_option("--config", config_path, "INI config file; command-line flags override it");

  EstimateOptions estimate;
  CLI::App* estimate_cmd = add_command(app, "estimate", "Bona fide shrinkage weights from a returns CSV");
  estimate_cmd->add_option("--returns", estimate.returns_csv, "Returns CSV, one row per date")
      ->required();
  estimate_cmd->add_option("--target", estimate.target, "naive or comma-separated weights");

  simulation::SimulationConfig sim;
  std::string sim_scenario = "bounded_spectrum";
  std::string sim_schedule;
  std::string sim_spectrum;
  std::string sim_distribution = "gaussian";
  std::string sim_estimators = "traditional,bona_fide";
  std::string sim_target = "naive";
  double sim_c = 0.0;
  CLI::App* simulate_cmd = add_command(app, "simulate", "Monte Carlo study of relative losses");
  simulate_cmd->add_option("--scenario", sim_scenario,
                           "bounded_spectrum, unbounded_spectrum, fig1_spectrum or custom");
  CLI::Option* sim_c_opt = simulate_cmd->add_option("--c", sim_c, "Target concentration p/n");
  simulate_cmd->add_option("--schedule", sim_schedule, "Cells as p:n,p:n,...");
  simulate_cmd->add_option("--spectrum", sim_spectrum, "Custom spectrum as value:fraction,...");
  simulate_cmd->add_option("--distribution", sim_distribution, "gaussian or student_t(df)");
  simulate_cmd->add_option("--repetitions", sim.repetitions, "Repetitions per cell");
  simulate_cmd->add_option("--estimators", sim_estimators, "Comma-separated estimator names");
  simulate_cmd->add_option("--target", sim_target, "naive, gmv or comma-separated weights");
  simulate_cmd->add_option("--mean-return", sim.mean_return, "Common expected return");
  simulate_cmd->add_flag("--redraw-sigma", sim.redraw_sigma, "Draw a new covariance per repetition");

  BacktestOptions bt;
  std::string bt_estimators = "traditional,bona_fide";
  double bt_c = 0.0;
  CLI::App* backtest_cmd = add_command(app, "backtest", "Rolling out-of-sample evaluation");
  backtest_cmd->add_option("--returns", bt.returns_csv, "Returns CSV, one row per date")
      ->required();
  CLI::Option* window_opt =
      backtest_cmd->add_option("--window-n", bt.config.window_n, "Estimation window length");
  CLI::Option* bt_c_opt =
      backtest_cmd->add_option("--c", bt_c, "Concentration p/n; sets the window length");
  backtest_cmd->add_option("--portfolio-p", bt.config.portfolio_p, "Assets per portfolio")
      ->required();
  backtest_cmd->add_option("--num-portfolios", bt.config.num_portfolios, "Number of random portfolios");
  backtest_cmd->add_option("--estimators", bt_estimators, "Comma-separated estimator names");

  CurvesOptions curves;
  CLI::App* curves_cmd = add_command(app, "curves", "Asymptotic curves over a grid of c");
  curves_cmd->add_option("--c-grid", curves.c_grid, "Values or start:stop:step segments")
      ->required();
  curves_cmd->add_option("--r-b", curves.r_b, "Relative loss of the target");

  try {
    args = merge_config(std::move(args));
    std::vector<const char*> raw{"gmvshrink"};
    for (const std::string& a : args) raw.push_back(a.c_str());
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("config", 2, e.what());
    return 2;
  } catch (const Error& e) {
    print_error(e.kind(), e.exit_code(), e.what());
    return e.exit_code();
  }

  try {
    if (seed_opt->count() > 0) global.seed = seed_value;
    global.config_path = config_path;

    if (estimate_cmd->parsed()) {
      const ShrinkageEstimate result = cmd_estimate(estimate, global);
      std::ifstream in(global.output_dir / "estimate.json");
      std::cout << in.rdbuf();
      (void)result;
    } else if (simulate_cmd->parsed()) {
      sim.scenario = simulation::parse_scenario(sim_scenario);
      if (!sim_spectrum.empty()) sim.custom_spectrum = parse_spectrum(sim_spectrum);
      if (sim_c_opt->count() > 0) sim.c_target = sim_c;
      if (!sim_schedule.empty()) sim.schedule = parse_schedule(sim_schedule);
      sim.distribution = simulation::parse_distribution(sim_distribution);
      sim.estimators = parse_estimators(sim_estimators);
      sim.target = parse_target(sim_target);
      const simulation::MonteCarloReport report = cmd_simulate(sim, global);
      for (const auto& cell : report.cells) {
        for (const auto& est : cell.estimators) {
          std::cout << to_string(est.kind) << " p=" << cell.size.p << " n=" << cell.size.n
                    << " mean_loss=" << est.mean_loss() << '\n';
        }
      }
    } else if (backtest_cmd->parsed()) {
      if (window_opt->count() > 0 && bt_c_opt->count() > 0) {
        throw ConfigError("give either --window-n or --c, not both");
      }
      if (bt_c_opt->count() > 0) {
        if (!(bt_c > 0.0)) throw ConfigError("--c must be positive");
        bt.config.window_n = static_cast<Index>(
            std::llround(static_cast<double>(bt.config.portfolio_p) / bt_c));
      } else if (window_opt->count() == 0) {
        throw ConfigError("backtest needs --window-n or --c");
      }
      bt.config.estimators = parse_estimators(bt_estimators);
      const backtest::BacktestReport report = cmd_backtest(bt, global);
      for (const auto& est : report.estimators) {
        const auto variances = est.variances();
        double mean_var = 0.0;
        for (double v : variances) mean_var += v;
        mean_var /= static_cast<double>(variances.size());
        std::cout << to_string(est.kind) << " draws=" << variances.size()
                  << " mean_variance=" << mean_var << '\n';
      }
    } else if (curves_cmd->parsed()) {
      const std::vector<CurvePoint> points = cmd_curves(curves, global);
      std::cout << "wrote " << points.size() << " points to "
                << (global.output_dir / "curves.csv").string() << '\n';
    }
  } catch (const Error& e) {
    print_error(e.kind(), e.exit_code(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    print_error("internal", 1, e.what());
    return 1;
  }
  return 0;
}

}  // namespace gmvshrink::cli
