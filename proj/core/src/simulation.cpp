#include "gmvshrink/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "gmvshrink/detail/parallel.hpp"
#include "gmvshrink/error.hpp"

namespace gmvshrink::simulation {

namespace {

constexpr std::uint64_t kSigmaStreamTag = 1ULL << 63;

std::uint64_t cell_key(const CellSize& cell) {
  return (static_cast<std::uint64_t>(cell.p) << 32) ^ static_cast<std::uint64_t>(cell.n);
}

Vector blocks_to_spectrum(Index p, std::initializer_list<std::pair<double, Index>> blocks) {
  Vector out(p);
  Index pos = 0;
  for (const auto& [value, count] : blocks) {
    out.segment(pos, count).setConstant(value);
    pos += count;
  }
  return out;
}

void require_divisible(Index p, Index modulus, Scenario scenario) {
  if (p < 1 || p % modulus != 0) {
    throw ConfigError(std::string(to_string(scenario)) + " scenario requires p divisible by " +
                      std::to_string(modulus) + ", got p=" + std::to_string(p));
  }
}

Vector target_weights(const TargetSpec& spec, const CovarianceModel& sigma) {
  switch (spec.kind) {
    case TargetSpec::Kind::kNaive:
      return Vector::Constant(sigma.dim(), 1.0 / static_cast<double>(sigma.dim()));
    case TargetSpec::Kind::kPopulationGmv:
      return sigma.gmv_weights();
    case TargetSpec::Kind::kExplicit:
      return spec.weights;
  }
  return {};
}

struct RepetitionResult {
  std::vector<double> loss;
  std::vector<double> alpha;
  std::vector<double> r_hat;
  double target_loss = 0.0;
};

RepetitionResult run_repetition(const SimulationConfig& config, const CellSize& cell,
                                const CovarianceModel& sigma, Rng& rng) {
  const Index p = cell.p;
  const Index n = cell.n;
  const Vector mu = Vector::Constant(p, config.mean_return);
  GeneratedSample sample = generate_sample(sigma, mu, n, config.distribution, rng);
  const SampleMoments moments = sample_moments(sample.returns);
  const TargetPortfolio target{WeightVector(target_weights(config.target, sigma)),
                               config.target.label()};

  const bool needs_oracle = std::any_of(config.estimators.begin(), config.estimators.end(),
                                        [](EstimatorKind k) { return is_oracle(k); });
  std::optional<SymmetricMatrix> generalized;
  if (needs_oracle) {
    if (p < n) {
      generalized = moments.pinv;
    } else {
      const Matrix centered =
          sample.innovations.colwise() - sample.innovations.rowwise().mean();
      generalized = oracle_generalized_inverse(sigma, centered, n - 1);
    }
  }

  const std::size_t k = config.estimators.size();
  RepetitionResult out;
  out.loss.assign(k, 0.0);
  out.alpha.assign(k, std::numeric_limits<double>::quiet_NaN());
  out.r_hat.assign(k, std::numeric_limits<double>::quiet_NaN());
  out.target_loss = out_of_sample_loss(target.weights, sigma);

  for (std::size_t e = 0; e < k; ++e) {
    switch (config.estimators[e]) {
      case EstimatorKind::kTraditional:
        out.loss[e] = out_of_sample_loss(traditional_gmv(moments.pinv), sigma);
        break;
      case EstimatorKind::kBonaFide: {
        const ShrinkageEstimate est = bona_fide_shrinkage(moments, target);
        out.loss[e] = out_of_sample_loss(est.weights, sigma);
        out.alpha[e] = est.alpha_hat;
        out.r_hat[e] = est.r_hat_b;
        break;
      }
      case EstimatorKind::kFrahmMemmel:
        out.loss[e] = out_of_sample_loss(frahm_memmel(moments), sigma);
        break;
      case EstimatorKind::kOracleShrinkage: {
        const double alpha = oracle_alpha(*generalized, sigma, target);
        const WeightVector trad = traditional_gmv(*generalized);
        const WeightVector w(alpha * trad.values() + (1.0 - alpha) * target.weights.values());
        out.loss[e] = out_of_sample_loss(w, sigma);
        out.alpha[e] = alpha;
        break;
      }
      case EstimatorKind::kOracleTraditional:
        out.loss[e] = out_of_sample_loss(traditional_gmv(*generalized), sigma);
        break;
    }
  }
  return out;
}

bool has_per_rep_alpha(EstimatorKind kind) {
  return kind == EstimatorKind::kBonaFide || kind == EstimatorKind::kOracleShrinkage;
}

}  // namespace

std::string_view to_string(Scenario scenario) noexcept {
  switch (scenario) {
    case Scenario::kBoundedSpectrum: return "bounded_spectrum";
    case Scenario::kUnboundedSpectrum: return "unbounded_spectrum";
    case Scenario::kFig1Spectrum: return "fig1_spectrum";
    case Scenario::kCustom: return "custom";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::kBoundedSpectrum, Scenario::kUnboundedSpectrum,
                     Scenario::kFig1Spectrum, Scenario::kCustom}) {
    if (to_string(s) == name) return s;
  }
  if (name == "bounded") return Scenario::kBoundedSpectrum;
  if (name == "unbounded") return Scenario::kUnboundedSpectrum;
  if (name == "fig1") return Scenario::kFig1Spectrum;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::string Distribution::label() const {
  if (kind == Kind::kGaussian) return "gaussian";
  return "student_t(" + std::to_string(df) + ")";
}

Distribution parse_distribution(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (s == "gaussian" || s == "normal") return Distribution::gaussian();
  std::string digits;
  if (s.rfind("student_t(", 0) == 0 && s.back() == ')') {
    digits = s.substr(10, s.size() - 11);
  } else if (s.rfind("t", 0) == 0) {
    digits = s.substr(1);
  }
  if (!digits.empty() && std::all_of(digits.begin(), digits.end(),
                                     [](unsigned char ch) { return std::isdigit(ch); })) {
    const int df = std::stoi(digits);
    if (df < 3) {
      throw ConfigError("student_t requires df >= 3 for finite variance, got " +
                        std::to_string(df));
    }
    return Distribution::student_t(df);
  }
  throw ConfigError("unknown distribution '" + std::string(text) +
                    "' (expected gaussian or student_t(df))");
}

std::string TargetSpec::label() const {
  switch (kind) {
    case Kind::kNaive: return "naive";
    case Kind::kPopulationGmv: return "population_gmv";
    case Kind::kExplicit: return "explicit";
  }
  return "unknown";
}

std::vector<CellSize> default_schedule(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("default_schedule: c must be positive");
  }
  std::vector<CellSize> out;
  for (int j = 0; j <= 5; ++j) {
    const Index p = 9 * (Index{1} << j);
    const auto n = std::max<Index>(2, static_cast<Index>(std::llround(static_cast<double>(p) / c)));
    out.push_back({p, n});
  }
  return out;
}

SimulationConfig validated(SimulationConfig config) {
  if (config.repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (config.estimators.empty()) throw ConfigError("no estimators selected");
  {
    std::vector<EstimatorKind> unique;
    for (EstimatorKind kind : config.estimators) {
      if (std::find(unique.begin(), unique.end(), kind) == unique.end()) unique.push_back(kind);
    }
    config.estimators = std::move(unique);
  }
  if (config.distribution.kind == Distribution::Kind::kStudentT && config.distribution.df < 3) {
    throw ConfigError("student_t requires df >= 3");
  }
  if (config.c_target && !(*config.c_target > 0.0)) {
    throw ConfigError("c_target must be positive");
  }
  if (config.schedule.empty()) {
    if (!config.c_target) throw ConfigError("either a schedule or c_target is required");
    config.schedule = default_schedule(*config.c_target);
  }
  for (const CellSize& cell : config.schedule) {
    if (cell.p < 2 || cell.n < 2) {
      throw ConfigError("cell (p=" + std::to_string(cell.p) + ", n=" + std::to_string(cell.n) +
                        ") violates p >= 2, n >= 2");
    }
    if (config.c_target && config.scenario != Scenario::kCustom) {
      const double c = *config.c_target;
      if (std::abs(cell.c_ratio() - c) > 0.01 * c) {
        throw ConfigError("cell (p=" + std::to_string(cell.p) + ", n=" +
                          std::to_string(cell.n) + ") has p/n more than 1% away from c_target");
      }
    }
    // Throws on divisibility violations.
    (void)scenario_spectrum(config.scenario, cell.p, config.custom_spectrum);
    const bool uses_fm = std::find(config.estimators.begin(), config.estimators.end(),
                                   EstimatorKind::kFrahmMemmel) != config.estimators.end();
    if (uses_fm && cell.p >= cell.n) {
      throw ConfigError("frahm_memmel is only defined for p/n < 1; cell (p=" +
                        std::to_string(cell.p) + ", n=" + std::to_string(cell.n) + ")");
    }
    if (config.target.kind == TargetSpec::Kind::kExplicit) {
      if (config.target.weights.size() != cell.p) {
        throw ConfigError("explicit target has " + std::to_string(config.target.weights.size()) +
                          " weights but cell has p=" + std::to_string(cell.p));
      }
      (void)WeightVector(config.target.weights);
    }
  }
  return config;
}

Vector scenario_spectrum(Scenario scenario, Index p, const std::vector<SpectrumBlock>& custom) {
  switch (scenario) {
    case Scenario::kBoundedSpectrum: {
      require_divisible(p, 9, scenario);
      const Index k = p / 9;
      return blocks_to_spectrum(p, {{2.0, k}, {5.0, 4 * k}, {10.0, 4 * k}});
    }
    case Scenario::kUnboundedSpectrum: {
      require_divisible(p, 9, scenario);
      const Index k = p / 9;
      return blocks_to_spectrum(
          p, {{2.0, k}, {5.0, 4 * k}, {10.0, 4 * k - 1}, {static_cast<double>(p), 1}});
    }
    case Scenario::kFig1Spectrum: {
      require_divisible(p, 5, scenario);
      const Index k = p / 5;
      return blocks_to_spectrum(p, {{3.0, k}, {1.0, 2 * k}, {0.5, 2 * k}});
    }
    case Scenario::kCustom: {
      if (custom.empty()) throw ConfigError("custom scenario requires spectrum blocks");
      Vector out(p);
      Index pos = 0;
      double total = 0.0;
      for (const SpectrumBlock& block : custom) {
        if (!(block.value > 0.0) || !(block.fraction > 0.0)) {
          throw ConfigError("custom spectrum blocks need positive value and fraction");
        }
        const double exact = block.fraction * static_cast<double>(p);
        const auto count = static_cast<Index>(std::llround(exact));
        if (std::abs(exact - static_cast<double>(count)) > 1e-9 * static_cast<double>(p)) {
          throw ConfigError("custom spectrum fraction " + std::to_string(block.fraction) +
                            " does not divide p=" + std::to_string(p) + " into whole eigenvalues");
        }
        if (pos + count > p) throw ConfigError("custom spectrum fractions exceed 1");
        out.segment(pos, count).setConstant(block.value);
        pos += count;
        total += block.fraction;
      }
      if (pos != p || std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("custom spectrum fractions must sum to 1");
      }
      return out;
    }
  }
  throw ConfigError("unknown scenario");
}

CovarianceModel build_scenario(Scenario scenario, Index p, Rng& rng,
                               const std::vector<SpectrumBlock>& custom) {
  Vector spectrum = scenario_spectrum(scenario, p, custom);
  Matrix v = haar_orthogonal(p, rng);
  return build_covariance(spectrum, v);
}

GeneratedSample generate_sample(const CovarianceModel& sigma, const Vector& mu, Index n,
                                const Distribution& distribution, Rng& rng) {
  const Index p = sigma.dim();
  if (n < 2) throw ConfigError("generate_returns: need n >= 2");
  if (mu.size() != p) throw DataError("generate_returns: mean vector has wrong length");

  Matrix x(p, n);
  if (distribution.kind == Distribution::Kind::kGaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < p; ++i) x(i, j) = normal(rng);
    }
  } else {
    const int df = distribution.df;
    if (df < 3) throw ConfigError("student_t requires df >= 3");
    std::student_t_distribution<double> student(static_cast<double>(df));
    const double scale = std::sqrt((static_cast<double>(df) - 2.0) / static_cast<double>(df));
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < p; ++i) x(i, j) = scale * student(rng);
    }
  }
  Matrix y = sigma.sqrt() * x;
  y.colwise() += mu;
  return {std::move(x), ReturnsMatrix(std::move(y))};
}

ReturnsMatrix generate_returns(const CovarianceModel& sigma, const Vector& mu, Index n,
                               const Distribution& distribution, Rng& rng) {
  return generate_sample(sigma, mu, n, distribution, rng).returns;
}

const EstimatorSamples& CellReport::at(EstimatorKind kind) const {
  for (const EstimatorSamples& s : estimators) {
    if (s.kind == kind) return s;
  }
  throw ConfigError("estimator '" + std::string(to_string(kind)) + "' was not part of the run");
}

const CellReport& MonteCarloReport::cell(CellSize size) const {
  for (const CellReport& c : cells) {
    if (c.size == size) return c;
  }
  throw ConfigError("no cell (p=" + std::to_string(size.p) + ", n=" + std::to_string(size.n) +
                    ") in report");
}

MonteCarloReport run_monte_carlo(const SimulationConfig& input) {
  const SimulationConfig config = validated(input);
  const auto reps = static_cast<std::size_t>(config.repetitions);
  const std::size_t k = config.estimators.size();

  MonteCarloReport report{config, {}};
  for (const CellSize& cell : config.schedule) {
    const std::uint64_t key = cell_key(cell);
    std::optional<CovarianceModel> fixed_sigma;
    if (!config.redraw_sigma) {
      Rng sigma_rng = make_stream(config.seed, key, kSigmaStreamTag);
      fixed_sigma = build_scenario(config.scenario, cell.p, sigma_rng, config.custom_spectrum);
    }

    std::vector<RepetitionResult> results(reps);
    detail::parallel_for(reps, config.threads, [&](std::size_t rep) {
      Rng rng = make_stream(config.seed, key, rep + 1);
      if (fixed_sigma) {
        results[rep] = run_repetition(config, cell, *fixed_sigma, rng);
      } else {
        Rng sigma_rng = make_stream(config.seed, key, kSigmaStreamTag | (rep + 1));
        const CovarianceModel sigma =
            build_scenario(config.scenario, cell.p, sigma_rng, config.custom_spectrum);
        results[rep] = run_repetition(config, cell, sigma, rng);
      }
    });

    CellReport cell_report{cell, {}, {}};
    cell_report.target_loss.reserve(reps);
    for (const RepetitionResult& r : results) cell_report.target_loss.push_back(r.target_loss);
    for (std::size_t e = 0; e < k; ++e) {
      EstimatorSamples samples;
      samples.kind = config.estimators[e];
      samples.loss.reserve(reps);
      for (const RepetitionResult& r : results) samples.loss.push_back(r.loss[e]);
      if (has_per_rep_alpha(samples.kind)) {
        for (const RepetitionResult& r : results) samples.alpha.push_back(r.alpha[e]);
      }
      if (samples.kind == EstimatorKind::kBonaFide) {
        for (const RepetitionResult& r : results) samples.r_hat.push_back(r.r_hat[e]);
      }
      cell_report.estimators.push_back(std::move(samples));
    }
    report.cells.push_back(std::move(cell_report));
  }
  return report;
}

}  // namespace gmvshrink::simulation
