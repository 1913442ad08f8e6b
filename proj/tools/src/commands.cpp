#include "gmvshrink_cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "gmvshrink/asymptotics.hpp"
#include "gmvshrink/error.hpp"
#include "gmvshrink/returns_csv.hpp"
#include "gmvshrink/version.hpp"

namespace gmvshrink::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, const char* what) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(std::string(what) + ": cannot parse number '" + text + "'");
  }
  return v;
}

Index parse_index(const std::string& text, const char* what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(what) + ": cannot parse integer '" + text + "'");
  }
  return static_cast<Index>(v);
}

fs::path prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("output directory '" + dir.string() + "' cannot be created");
  }
  const fs::path probe = dir / ".gmvshrink_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

/// CSV file whose first lines record (version, seed, config hash).
class CsvFile {
 public:
  CsvFile(const fs::path& path, const RunManifest& manifest,
          const std::vector<std::string>& extra_header = {})
      : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw ConfigError("cannot write " + path.string());
    out_ << "# gmvshrink " << manifest.version << '\n';
    out_ << "# command: " << to_string(manifest.command) << '\n';
    out_ << "# seed: " << (manifest.seed ? std::to_string(*manifest.seed) : "none") << '\n';
    out_ << "# config_hash: " << manifest.config_hash << '\n';
    for (const std::string& line : extra_header) out_ << "# " << line << '\n';
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(cells)), ...);
    out_ << '\n';
  }

  ~CsvFile() { out_.flush(); }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return format_number(v); }
  template <typename T>
    requires std::is_integral_v<T>
  static std::string cell(T v) { return std::to_string(v); }

  std::ofstream out_;
  fs::path path_;
};

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json manifest_json(const RunManifest& m) {
  return json{{"command", to_string(m.command)},
              {"config_path", m.config_path.string()},
              {"output_dir", m.output_dir.string()},
              {"seed", m.seed ? json(*m.seed) : json(nullptr)},
              {"config_hash", m.config_hash},
              {"version", m.version}};
}

RunManifest make_manifest(Command command, const GlobalOptions& global, std::string canonical) {
  RunManifest m;
  m.command = command;
  m.config_path = global.config_path;
  m.output_dir = global.output_dir;
  m.seed = global.seed;
  m.config_hash = config_hash(canonical);
  m.version = kVersion;
  return m;
}

json to_json_array(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

std::string join_estimators(const std::vector<EstimatorKind>& kinds) {
  std::string out;
  for (EstimatorKind k : kinds) {
    if (!out.empty()) out += ',';
    out += to_string(k);
  }
  return out;
}

std::string cell_suffix(const simulation::CellSize& cell) {
  return "p" + std::to_string(cell.p) + "_n" + std::to_string(cell.n);
}

std::uint64_t require_seed(const GlobalOptions& global, const char* command) {
  if (!global.seed) {
    throw ConfigError(std::string(command) + " requires --seed");
  }
  return *global.seed;
}

}  // namespace

const char* to_string(Command command) noexcept {
  switch (command) {
    case Command::kEstimate: return "estimate";
    case Command::kSimulate: return "simulate";
    case Command::kBacktest: return "backtest";
    case Command::kCurves: return "curves";
  }
  return "unknown";
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string describe(const simulation::SimulationConfig& config) {
  std::ostringstream out;
  out << "scenario=" << to_string(config.scenario) << '\n';
  out << "spectrum=";
  for (const auto& b : config.custom_spectrum) {
    out << format_number(b.value) << ':' << format_number(b.fraction) << ';';
  }
  out << '\n';
  out << "c_target=" << (config.c_target ? format_number(*config.c_target) : "none") << '\n';
  out << "schedule=";
  for (const auto& cell : config.schedule) out << cell.p << ':' << cell.n << ';';
  out << '\n';
  out << "distribution=" << config.distribution.label() << '\n';
  out << "repetitions=" << config.repetitions << '\n';
  out << "estimators=" << join_estimators(config.estimators) << '\n';
  out << "target=" << config.target.label();
  for (Index i = 0; i < config.target.weights.size(); ++i) {
    out << (i ? ',' : ':') << format_number(config.target.weights(i));
  }
  out << '\n';
  out << "mean_return=" << format_number(config.mean_return) << '\n';
  out << "redraw_sigma=" << (config.redraw_sigma ? "true" : "false") << '\n';
  return out.str();
}

std::string describe(const backtest::BacktestConfig& config) {
  std::ostringstream out;
  out << "window_n=" << config.window_n << '\n';
  out << "portfolio_p=" << config.portfolio_p << '\n';
  out << "num_portfolios=" << config.num_portfolios << '\n';
  out << "estimators=" << join_estimators(config.estimators) << '\n';
  return out.str();
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  for (const std::string& segment : split(spec, ',')) {
    const std::vector<std::string> parts = split(segment, ':');
    if (parts.size() == 1) {
      out.push_back(parse_double(parts[0], "c grid"));
    } else if (parts.size() == 3) {
      const double start = parse_double(parts[0], "c grid");
      const double stop = parse_double(parts[1], "c grid");
      const double step = parse_double(parts[2], "c grid");
      if (!(step > 0.0) || stop < start) {
        throw ConfigError("c grid range '" + segment + "' needs start <= stop and step > 0");
      }
      const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
      for (long long i = 0; i <= count; ++i) {
        const double v = start + static_cast<double>(i) * step;
        out.push_back(std::round(v * 1e12) / 1e12);
      }
    } else {
      throw ConfigError("c grid segment '" + segment + "' is neither a value nor start:stop:step");
    }
  }
  if (out.empty()) throw ConfigError("c grid is empty");
  return out;
}

std::vector<simulation::CellSize> parse_schedule(const std::string& spec) {
  std::vector<simulation::CellSize> out;
  for (const std::string& segment : split(spec, ',')) {
    const std::vector<std::string> parts = split(segment, ':');
    if (parts.size() != 2) throw ConfigError("schedule entry '" + segment + "' must be p:n");
    out.push_back({parse_index(parts[0], "schedule"), parse_index(parts[1], "schedule")});
  }
  return out;
}

std::vector<simulation::SpectrumBlock> parse_spectrum(const std::string& spec) {
  std::vector<simulation::SpectrumBlock> out;
  for (const std::string& segment : split(spec, ',')) {
    const std::vector<std::string> parts = split(segment, ':');
    if (parts.size() != 2) {
      throw ConfigError("spectrum entry '" + segment + "' must be value:fraction");
    }
    out.push_back({parse_double(parts[0], "spectrum"), parse_double(parts[1], "spectrum")});
  }
  return out;
}

std::vector<EstimatorKind> parse_estimators(const std::string& spec) {
  std::vector<EstimatorKind> out;
  for (const std::string& name : split(spec, ',')) out.push_back(parse_estimator_kind(name));
  if (out.empty()) throw ConfigError("no estimators selected");
  return out;
}

simulation::TargetSpec parse_target(const std::string& spec) {
  using simulation::TargetSpec;
  const std::string s = trim(spec);
  if (s.empty() || s == "naive") return {TargetSpec::Kind::kNaive, {}};
  if (s == "gmv" || s == "population_gmv") return {TargetSpec::Kind::kPopulationGmv, {}};
  const std::vector<std::string> parts = split(s, ',');
  Vector w(static_cast<Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    w(static_cast<Index>(i)) = parse_double(parts[i], "target");
  }
  try {
    (void)WeightVector(w);
  } catch (const DataError& e) {
    throw ConfigError(std::string("target: ") + e.what());
  }
  return {TargetSpec::Kind::kExplicit, w};
}

ShrinkageEstimate cmd_estimate(const EstimateOptions& options, const GlobalOptions& global) {
  const ReturnsPanel panel = read_returns_csv(options.returns_csv);
  const ReturnsMatrix returns(panel.returns);
  if (returns.assets() < 2) throw DataError("estimate: need at least two assets");

  const simulation::TargetSpec spec = parse_target(options.target);
  if (spec.kind == simulation::TargetSpec::Kind::kPopulationGmv) {
    throw ConfigError("estimate: the population GMV target is only available in simulations");
  }
  TargetPortfolio target = TargetPortfolio::naive(returns.assets());
  if (spec.kind == simulation::TargetSpec::Kind::kExplicit) {
    if (spec.weights.size() != returns.assets()) {
      throw ConfigError("estimate: target has " + std::to_string(spec.weights.size()) +
                        " weights but the file has " + std::to_string(returns.assets()) +
                        " assets");
    }
    target = TargetPortfolio::from_weights(spec.weights, "explicit");
  }

  const ShrinkageEstimate estimate = bona_fide_shrinkage(returns, target);

  const fs::path dir = prepare_output_dir(global.output_dir);
  const std::string canonical = "command=estimate\nreturns=" +
                                options.returns_csv.filename().string() +
                                "\ntarget=" + trim(options.target) + '\n';
  const RunManifest manifest = make_manifest(Command::kEstimate, global, canonical);

  json doc{{"version", manifest.version},
           {"seed", manifest.seed ? json(*manifest.seed) : json(nullptr)},
           {"config_hash", manifest.config_hash},
           {"p", returns.assets()},
           {"n", returns.observations()},
           {"c_ratio", estimate.c_ratio},
           {"regime", to_string(estimate.regime)},
           {"alpha_hat", estimate.alpha_hat},
           {"alpha_raw", estimate.alpha_raw},
           {"r_hat_b", estimate.r_hat_b},
           {"target", target.label},
           {"assets", panel.asset_ids},
           {"weights", to_json_array(estimate.weights.values())},
           {"traditional_weights", to_json_array(estimate.traditional.values())}};
  write_json(dir / "estimate.json", doc);

  CsvFile weights(dir / "weights.csv", manifest);
  weights.row("asset", "weight");
  for (Index i = 0; i < estimate.weights.size(); ++i) {
    weights.row(panel.asset_ids[static_cast<std::size_t>(i)], estimate.weights(i));
  }
  write_json(dir / "manifest.json", manifest_json(manifest));
  return estimate;
}

simulation::MonteCarloReport cmd_simulate(simulation::SimulationConfig config,
                                          const GlobalOptions& global) {
  config.seed = require_seed(global, "simulate");
  config.threads = global.threads;
  config = simulation::validated(std::move(config));
  if (config.distribution.experimental()) {
    std::cerr << "warning: " << config.distribution.label()
              << " innovations lack a finite fourth moment; results are experimental\n";
  }

  const fs::path dir = prepare_output_dir(global.output_dir);
  const simulation::MonteCarloReport report = simulation::run_monte_carlo(config);
  const RunManifest manifest = make_manifest(Command::kSimulate, global, describe(config));

  CsvFile summary(dir / "summary.csv", manifest);
  summary.row("estimator", "p", "n", "mean_loss");
  for (const auto& cell : report.cells) {
    for (const auto& est : cell.estimators) {
      summary.row(to_string(est.kind), cell.size.p, cell.size.n, est.mean_loss());
    }
  }

  for (const auto& cell : report.cells) {
    const std::string suffix = cell_suffix(cell.size);
    CsvFile losses(dir / ("losses_" + suffix + ".csv"), manifest);
    losses.row("estimator", "repetition", "relative_loss");
    for (const auto& est : cell.estimators) {
      for (std::size_t r = 0; r < est.loss.size(); ++r) {
        losses.row(to_string(est.kind), r, est.loss[r]);
      }
    }
    CsvFile ecdf(dir / ("ecdf_" + suffix + ".csv"), manifest);
    ecdf.row("estimator", "loss_value", "cdf");
    for (const auto& est : cell.estimators) {
      for (const auto& [value, cdf] : est.ecdf().steps()) {
        ecdf.row(to_string(est.kind), value, cdf);
      }
    }
  }
  write_json(dir / "manifest.json", manifest_json(manifest));
  return report;
}

backtest::BacktestReport cmd_backtest(BacktestOptions options, const GlobalOptions& global) {
  options.config.seed = require_seed(global, "backtest");
  options.config.threads = global.threads;
  const ReturnsPanel panel = read_returns_csv(options.returns_csv);
  const ReturnsMatrix returns(panel.returns);
  const backtest::BacktestReport report = backtest::run_backtest(returns, options.config);

  const fs::path dir = prepare_output_dir(global.output_dir);
  const std::string canonical = "command=backtest\nreturns=" +
                                options.returns_csv.filename().string() + '\n' +
                                describe(options.config);
  const RunManifest manifest = make_manifest(Command::kBacktest, global, canonical);

  std::vector<std::string> extra;
  if (!panel.dates.empty()) {
    const auto first_oos = static_cast<std::size_t>(options.config.window_n);
    extra.push_back("out_of_sample_dates: " + panel.dates[first_oos] + " .. " +
                    panel.dates.back());
  }

  CsvFile variance(dir / "variance.csv", manifest, extra);
  CsvFile sharpe(dir / "sharpe.csv", manifest, extra);
  variance.row("estimator", "draw_index", "value");
  sharpe.row("estimator", "draw_index", "value");
  for (const auto& est : report.estimators) {
    for (std::size_t d = 0; d < est.stats.size(); ++d) {
      variance.row(to_string(est.kind), d, est.stats[d].variance);
      sharpe.row(to_string(est.kind), d, est.stats[d].sharpe);
    }
  }

  CsvFile ecdf_var(dir / "ecdf_variance.csv", manifest, extra);
  CsvFile ecdf_sr(dir / "ecdf_sharpe.csv", manifest, extra);
  ecdf_var.row("estimator", "value", "cdf");
  ecdf_sr.row("estimator", "value", "cdf");
  for (const auto& est : report.estimators) {
    for (const auto& [v, f] : est.variance_ecdf().steps()) ecdf_var.row(to_string(est.kind), v, f);
    for (const auto& [v, f] : est.sharpe_ecdf().steps()) ecdf_sr.row(to_string(est.kind), v, f);
  }

  CsvFile draws(dir / "draws.csv", manifest, extra);
  draws.row("draw_index", "assets");
  for (std::size_t d = 0; d < report.draws.size(); ++d) {
    std::string ids;
    for (Index a : report.draws[d]) {
      if (!ids.empty()) ids += ';';
      ids += panel.asset_ids[static_cast<std::size_t>(a)];
    }
    draws.row(d, ids);
  }
  write_json(dir / "manifest.json", manifest_json(manifest));
  return report;
}

std::vector<CurvePoint> cmd_curves(const CurvesOptions& options, const GlobalOptions& global) {
  namespace as = asymptotics;
  const std::vector<double> grid = parse_grid(options.c_grid);
  for (double c : grid) {
    if (!(c > 0.0)) throw ConfigError("c grid values must be positive");
    if (std::abs(c - 1.0) < 1e-12) {
      throw ConfigError("c grid must exclude c = 1, where the limits are singular");
    }
  }
  if (!(options.r_b >= 0.0)) throw ConfigError("R_b must be non-negative");

  std::vector<CurvePoint> points;
  for (double c : grid) {
    const as::LimitInputs in{c, options.r_b};
    CurvePoint pt;
    pt.c = c;
    pt.alpha = c < 1.0 ? as::alpha_star_limit(in) : as::alpha_plus_limit(in);
    pt.rel_loss_traditional =
        c < 1.0 ? as::rel_loss_traditional(c) : as::rel_loss_traditional_super(c);
    pt.rel_loss_gse = as::rel_loss_gse_limit(in);
    pt.variance_ratio = as::variance_ratio_traditional(c);
    points.push_back(pt);
  }

  const fs::path dir = prepare_output_dir(global.output_dir);
  const std::string canonical = "command=curves\nc_grid=" + trim(options.c_grid) +
                                "\nr_b=" + format_number(options.r_b) + '\n';
  const RunManifest manifest = make_manifest(Command::kCurves, global, canonical);
  CsvFile out(dir / "curves.csv", manifest, {"r_b: " + format_number(options.r_b)});
  out.row("c", "alpha_star_or_plus", "rel_loss_traditional_branch", "rel_loss_gse",
          "variance_ratio");
  for (const CurvePoint& pt : points) {
    out.row(pt.c, pt.alpha, pt.rel_loss_traditional, pt.rel_loss_gse, pt.variance_ratio);
  }
  write_json(dir / "manifest.json", manifest_json(manifest));
  return points;
}

}  // namespace gmvshrink::cli
