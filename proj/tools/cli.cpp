#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <boost/version.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "semivar/errors.hpp"
#include "semivar/gaussmix.hpp"
#include "semivar/likelihood.hpp"
#include "semivar/returns.hpp"
#include "semivar/rolling.hpp"
#include "semivar/semivariance.hpp"
#include "semivar/svjj.hpp"
#include "semivar/svjj_mcmc.hpp"
#include "semivar/svjj_simulate.hpp"
#include "semivar/synthetic.hpp"

#ifndef SEMIVAR_VERSION
#define SEMIVAR_VERSION "unknown"
#endif

namespace semivar::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// --- shared plumbing ----------------------------------------------------------

struct Global {
  std::string out_dir = "semivar-out";
  std::uint64_t seed = 42;
  unsigned threads = 1;
  bool print_config = false;
};

struct InputOptions {
  std::string path;
  std::string delimiter = ",";
  std::size_t date_column = 0;
  std::size_t level_column = 1;
  double delta_t = kDailyStep;

  void add(CLI::App& app) {
    app.add_option("-i,--input", path, "price CSV (date, level)");
    app.add_option("--delimiter", delimiter, "field delimiter")->capture_default_str();
    app.add_option("--date-column", date_column, "0-based date column")->capture_default_str();
    app.add_option("--level-column", level_column, "0-based level column")->capture_default_str();
    app.add_option("--delta-t", delta_t, "years between observations")->capture_default_str();
  }

  ReturnSeries load() const {
    if (path.empty()) throw DataError("--input is required");
    if (delimiter.size() != 1) throw DataError("--delimiter must be a single character");
    const auto prices = load_prices(path, CsvLayout{delimiter[0], date_column, level_column});
    return to_log_returns(prices, delta_t);
  }
};

struct DEOptions {
  int population = 200;
  int iterations = 250;
  double crossover = 0.5;
  double weight = 0.8;

  void add(CLI::App& app) {
    app.add_option("--population", population, "DE population size")->capture_default_str();
    app.add_option("--de-iterations", iterations, "DE generations")->capture_default_str();
    app.add_option("--crossover", crossover, "DE crossover probability")->capture_default_str();
    app.add_option("--weight", weight, "DE differential weight")->capture_default_str();
  }

  DEConfig config(const Global& g) const {
    DEConfig c;
    c.population_size = population;
    c.max_iterations = iterations;
    c.crossover = crossover;
    c.weight = weight;
    c.seed = g.seed;
    c.threads = g.threads;
    return c;
  }
};

ModelKind parse_model(const std::string& name) {
  if (name == "pure") return ModelKind::pure_diffusion;
  if (name == "ball-torous") return ModelKind::ball_torous;
  if (name == "generalized") return ModelKind::generalized_m_jump;
  throw std::invalid_argument("unknown model '" + name + "' (expected pure, ball-torous or generalized)");
}

// Every file a command writes goes through here, so nothing lands outside --out.
class OutputDir {
 public:
  explicit OutputDir(const std::string& root) : root_(root) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) throw DataError("cannot create output directory '" + root + "'");
  }

  std::ofstream open(const std::string& name) {
    if (fs::path(name).filename() != fs::path(name)) throw std::invalid_argument("output name '" + name + "' is not a plain file name");
    std::ofstream f(root_ / name);
    if (!f) throw DataError("cannot write '" + (root_ / name).string() + "'");
    f << std::setprecision(17);
    files_.push_back(name);
    return f;
  }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
  const std::vector<std::string>& files() const noexcept { return files_; }
  const fs::path& root() const noexcept { return root_; }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

void write_manifest(OutputDir& dir, const CLI::App& app, const std::string& command, const Global& g,
                    int argc, const char* const* argv, const json& extra = json::object()) {
  json m;
  m["command"] = command;
  std::vector<std::string> args(argv + 1, argv + argc);
  m["argv"] = args;
  m["config"] = app.config_to_str(true, false);  // the executed subcommand's resolved options
  m["seed"] = g.seed;
  m["threads"] = g.threads;
  m["version"] = SEMIVAR_VERSION;
  m["compiler"] = __VERSION__;
  m["boost"] = BOOST_LIB_VERSION;
  m["rng"] = "xoshiro256** seeded by splitmix64; Boost.Random distributions";
  auto outputs = dir.files();
  outputs.push_back("manifest.json");
  m["outputs"] = outputs;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  dir.write_json("manifest.json", m);
}

json params_json(const JumpDiffusionParams& p) {
  return {{"mu", p.mu}, {"sigma", p.sigma}, {"lambda", p.lambda}, {"mu_q", p.mu_q}, {"sigma_q", p.sigma_q}};
}

json svjj_json(const SVJJParams& p) {
  json j;
  const auto a = p.to_array();
  for (std::size_t k = 0; k < SVJJParams::kCount; ++k) j[std::string(SVJJParams::names()[k])] = a[k];
  return j;
}

std::string pct(double x, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << 100.0 * x << "%";
  return s.str();
}

// --- SVJJ parameter input (fractions, daily time unit) --------------------------

struct SVJJInput {
  std::string params_file;
  std::array<double, SVJJParams::kCount> values = rescale(SVJJParams{}, 0.01).to_array();
  std::array<CLI::Option*, SVJJParams::kCount> flags{};

  void add(CLI::App& app) {
    app.add_option("--params", params_file, "JSON with the ten parameters (fractions, daily time unit)");
    for (std::size_t k = 0; k < SVJJParams::kCount; ++k) {
      std::string name(SVJJParams::names()[k]);
      std::replace(name.begin(), name.end(), '_', '-');
      flags[k] = app.add_option("--" + name, values[k], "SVJJ " + std::string(SVJJParams::names()[k]))
                     ->capture_default_str();
    }
  }

  // Defaults < --params file < explicit flags. Returned in estimation units.
  SVJJParams resolve(double return_scale) const {
    auto a = values;
    if (!params_file.empty()) {
      std::ifstream in(params_file);
      if (!in) throw DataError("cannot open parameter file '" + params_file + "'");
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw DataError("parameter file '" + params_file + "': " + e.what());
      }
      const json& src = j.contains("posterior_mean") ? j["posterior_mean"] : j;
      for (std::size_t k = 0; k < SVJJParams::kCount; ++k) {
        const std::string name(SVJJParams::names()[k]);
        if (flags[k]->count() == 0 && src.contains(name)) a[k] = src[name].get<double>();
      }
    }
    return rescale(SVJJParams::from_array(a), return_scale);
  }
};

// --- MCMC options --------------------------------------------------------------

struct McmcOptions {
  McmcConfig config;

  void add(CLI::App& app) {
    auto& c = config;
    app.add_option("--iterations", c.iterations, "MCMC iterations")->capture_default_str();
    app.add_option("--burn-in", c.burn_in, "discarded iterations")->capture_default_str();
    app.add_option("--m", c.m, "jump cap per day")->capture_default_str();
    app.add_option("--state-thin", c.state_thin, "latent state storage interval")->capture_default_str();
    app.add_option("--return-scale", c.return_scale, "returns are multiplied by this for estimation")->capture_default_str();
    app.add_option("--v-step", c.v_step, "initial V random-walk step (relative)")->capture_default_str();
    app.add_option("--adapt-interval", c.adapt_interval, "burn-in iterations between step updates")->capture_default_str();
    app.add_option("--variance-window", c.init.variance_window, "initial rolling variance window")->capture_default_str();
    app.add_option("--jump-threshold", c.init.jump_threshold, "robust z-score flagging initial jumps")->capture_default_str();
    auto& p = c.priors;
    app.add_option("--prior-mu-mean", p.mu_mean)->capture_default_str();
    app.add_option("--prior-mu-var", p.mu_var)->capture_default_str();
    app.add_option("--prior-kappa-mean", p.kappa_mean)->capture_default_str();
    app.add_option("--prior-kappa-var", p.kappa_var)->capture_default_str();
    app.add_option("--prior-theta-mean", p.theta_mean)->capture_default_str();
    app.add_option("--prior-theta-var", p.theta_var)->capture_default_str();
    app.add_option("--prior-sigma-nu2-shape", p.sigma_nu2_shape)->capture_default_str();
    app.add_option("--prior-sigma-nu2-scale", p.sigma_nu2_scale)->capture_default_str();
    app.add_option("--prior-mu-y-mean", p.mu_y_mean)->capture_default_str();
    app.add_option("--prior-mu-y-var", p.mu_y_var)->capture_default_str();
    app.add_option("--prior-rho-j-mean", p.rho_j_mean)->capture_default_str();
    app.add_option("--prior-rho-j-var", p.rho_j_var)->capture_default_str();
    app.add_option("--prior-sigma-y2-shape", p.sigma_y2_shape)->capture_default_str();
    app.add_option("--prior-sigma-y2-scale", p.sigma_y2_scale)->capture_default_str();
    app.add_option("--prior-mu-nu-rate-shape", p.mu_nu_rate_shape)->capture_default_str();
    app.add_option("--prior-mu-nu-rate-scale", p.mu_nu_rate_scale)->capture_default_str();
    app.add_option("--prior-lambda-a", p.lambda_a)->capture_default_str();
    app.add_option("--prior-lambda-b", p.lambda_b)->capture_default_str();
  }
};

struct SimulationOptions {
  SimulationConfig config;
  std::optional<double> v0;  // fraction^2
  double tau = 0.0;
  int grid_points = 512;

  void add(CLI::App& app) {
    auto& c = config;
    app.add_option("--paths", c.paths, "Monte-Carlo paths")->capture_default_str();
    app.add_option("--horizon", c.horizon, "horizon in years")->capture_default_str();
    app.add_option("--euler-dt", c.euler_dt, "Euler step in years")->capture_default_str();
    app.add_option("--v0", v0, "initial variance (fraction^2 per day); theta when omitted");
    app.add_option("--tau", tau, "semivariance threshold (log-return)")->capture_default_str();
    app.add_option("--grid-points", grid_points, "density grid size")->capture_default_str();
  }

  SimulationConfig resolve(const Global& g, double return_scale) const {
    auto c = config;
    c.seed = g.seed;
    c.threads = g.threads;
    c.return_scale = return_scale;
    if (v0) c.v0 = *v0 * return_scale * return_scale;
    return c;
  }
};

struct SimulationSummary {
  std::vector<double> sample;
  DensitySemivariance kde;
  double plug_in = 0.0;
  double standard_error = 0.0;
  double bandwidth = 0.0;
};

SimulationSummary simulate_and_integrate(const SVJJParams& params, const SimulationConfig& config, double tau) {
  SimulationSummary s;
  s.sample = simulate_horizon_returns(params, config);
  for (double r : s.sample) {
    if (!std::isfinite(r)) throw NumericalError("simulation produced a non-finite return");
  }
  const DensityEstimate density(s.sample);
  s.bandwidth = density.bandwidth();
  s.kde = semivariance_from_density(density, tau);
  s.plug_in = empirical_semivariance(s.sample, tau);
  s.standard_error = semivariance_standard_error(s.sample, tau);
  return s;
}

json simulation_json(const SimulationSummary& s, const SimulationConfig& c, double tau) {
  return {{"paths", c.paths},
          {"horizon_years", c.horizon},
          {"euler_dt_years", c.euler_dt},
          {"tau", tau},
          {"bandwidth", s.bandwidth},
          {"semivariance", s.kde.result.semivariance},
          {"semideviation", s.kde.result.semideviation},
          {"plug_in_semivariance", s.plug_in},
          {"plug_in_standard_error", s.standard_error},
          {"quadrature_error", s.kde.quadrature.error}};
}

void write_samples(OutputDir& dir, const std::vector<double>& sample) {
  auto f = dir.open("samples.csv");
  f << "log_return\n";
  for (double r : sample) f << r << '\n';
}

// --- MCMC outputs ---------------------------------------------------------------

json posterior_json(const ChainOutput& chain, const McmcConfig& c) {
  const double f = 1.0 / c.return_scale;
  const auto [lo, hi] = chain.credible_interval(0.95);
  json j;
  j["units"] = "fractions; daily time unit";
  j["posterior_mean"] = svjj_json(rescale(chain.posterior_mean(), f));
  j["posterior_sd"] = svjj_json(rescale(chain.posterior_sd(), f));
  j["mc_standard_error"] = svjj_json(rescale(chain.mc_standard_error(), f));
  j["q025"] = svjj_json(rescale(lo, f));
  j["q975"] = svjj_json(rescale(hi, f));
  j["acceptance"] = chain.acceptance;
  j["v_step"] = chain.v_step;
  j["iterations"] = c.iterations;
  j["burn_in"] = c.burn_in;
  j["kept_draws"] = chain.draws.size();
  j["m"] = c.m;
  return j;
}

void write_mcmc_outputs(OutputDir& dir, const ChainOutput& chain, const McmcConfig& c, const ReturnSeries& returns,
                        std::ostream& out) {
  const double f = 1.0 / c.return_scale;
  {
    auto file = dir.open("chain.csv");
    write_chain_csv(file, chain, f);
  }
  {
    auto file = dir.open("posterior_summary.csv");
    write_posterior_summary_csv(file, chain, f);
  }
  std::vector<double> y(returns.values().begin(), returns.values().end());
  for (auto& v : y) v *= c.return_scale;
  const auto diag = diagnostics(chain, y);
  {
    auto file = dir.open("acf.csv");
    write_acf_csv(file, diag);
  }
  {
    auto file = dir.open("qq.csv");
    write_qq_csv(file, diag);
  }
  {
    auto file = dir.open("latent.csv");
    file << "date,v_mean,jump_probability,jump_y_mean\n";
    for (std::size_t t = 0; t < chain.mean_v.size(); ++t) {
      file << returns.dates()[t] << ',' << chain.mean_v[t] * f * f << ',' << chain.jump_probability[t] << ','
           << chain.mean_jump_y[t] * f << '\n';
    }
  }
  auto j = posterior_json(chain, c);
  json flagged = json::array();
  for (const auto& p : diag.parameters) {
    if (p.non_mixing) flagged.push_back(p.name);
  }
  j["non_mixing"] = flagged;
  j["residual_mean"] = diag.residual_mean;
  j["residual_variance"] = diag.residual_variance;
  dir.write_json("posterior.json", j);

  const auto mean = rescale(chain.posterior_mean(), f).to_array();
  const auto sd = rescale(chain.posterior_sd(), f).to_array();
  out << "parameter      mean            sd\n";
  for (std::size_t k = 0; k < SVJJParams::kCount; ++k) {
    out << std::left << std::setw(14) << SVJJParams::names()[k] << ' ' << std::setw(15) << mean[k] << ' ' << sd[k]
        << '\n';
  }
  if (!flagged.empty()) out << "warning: non-mixing chains: " << flagged.dump() << '\n';
}

// --- constant-volatility semideviations of one window ----------------------------

struct WindowSemideviations {
  double sqrt_rule;
  double pure;
  double jump;
  JumpDiffusionParams jump_params;
  double jump_loglik;
};

WindowSemideviations window_semideviations(const ReturnSeries& returns, const RollingConfig& config) {
  const auto y = returns.values();
  const double dt = returns.delta_t();
  WindowSemideviations w{};
  const int steps = static_cast<int>(std::lround(config.horizon / dt));
  w.sqrt_rule = sqrt_time_semideviation(std::sqrt(empirical_semivariance(y, config.threshold)), steps);
  const auto mle = normal_mle(y, dt);
  w.pure = pure_diffusion_semivariance(mle.mu, mle.sigma, config.horizon, config.threshold).semideviation;
  JumpWindowFitter fitter(config, dt);
  const auto est = fitter.fit(y, 0);
  if (!est.ok) throw NumericalError("jump-diffusion fit failed: " + est.note);
  w.jump = est.semideviation;
  w.jump_params = *est.params;
  w.jump_loglik = *est.log_likelihood;
  return w;
}

// --- commands -------------------------------------------------------------------

struct FitCommand {
  InputOptions input;
  DEOptions de;
  std::string model = "generalized";
  int m = 5;
  double lambda_cap = 252.0;
  double threshold = 0.0;
  double horizon = 1.0;

  void add(CLI::App& app) {
    input.add(app);
    de.add(app);
    app.add_option("--model", model, "pure, ball-torous or generalized")->capture_default_str();
    app.add_option("--m", m, "jump cap per period")->capture_default_str();
    app.add_option("--lambda-cap", lambda_cap, "upper bound on lambda (per year)")->capture_default_str();
    app.add_option("--threshold", threshold, "semivariance threshold tau")->capture_default_str();
    app.add_option("--horizon", horizon, "semivariance horizon in years")->capture_default_str();
  }

  json run(const Global& g, OutputDir& dir, std::ostream& out) const {
    const auto returns = input.load();
    const double dt = returns.delta_t();
    auto spec = ModelSpec::defaults(parse_model(model), m, dt);
    spec.with_lambda_cap(lambda_cap);
    auto nested = normal_mle(returns.values(), dt);
    nested.mu = std::clamp(nested.mu, spec.bounds[0].low, spec.bounds[0].high);
    nested.sigma = std::clamp(nested.sigma, spec.bounds[1].low, spec.bounds[1].high);
    nested.sigma_q = spec.bounds[4].low;
    const std::vector<JumpDiffusionParams> seeds{nested};
    const auto r = fit(returns.values(), spec, de.config(g), nullptr, seeds);
    const auto q = SemivarianceQuery::for_horizon(horizon, threshold, m, dt);
    const auto sv = jump_diffusion_semivariance(r.params, q);
    const auto stats = sample_stats(returns);

    json j;
    j["model"] = model;
    j["m"] = m;
    j["params"] = params_json(r.params);
    j["log_likelihood"] = r.log_likelihood;
    j["converged"] = r.converged;
    j["evaluations"] = r.evaluations;
    j["observations"] = returns.size();
    j["semivariance"] = sv.semivariance;
    j["semideviation"] = sv.semideviation;
    j["horizon_years"] = horizon;
    j["threshold"] = threshold;
    dir.write_json("fit.json", j);

    auto report = dir.open("fit_report.txt");
    std::ostringstream text;
    text << "model            " << model << " (m = " << m << ", lambda <= " << spec.bounds[2].high << ")\n"
         << "observations     " << returns.size() << " (" << returns.dates().front() << " .. "
         << returns.dates().back() << ")\n"
         << "daily mean       " << pct(stats.mean, 4) << "\n"
         << "daily std        " << pct(stats.std_dev, 4) << "\n"
         << "mu               " << pct(r.params.mu) << " per year\n"
         << "sigma            " << pct(r.params.sigma) << " per sqrt(year)\n"
         << "lambda           " << r.params.lambda << " per year\n"
         << "mu_q             " << pct(r.params.mu_q, 4) << "\n"
         << "sigma_q          " << pct(r.params.sigma_q, 4) << "\n"
         << "log-likelihood   " << std::setprecision(10) << r.log_likelihood << "\n"
         << "converged        " << (r.converged ? "yes" : "no") << "\n"
         << "semideviation    " << pct(sv.semideviation) << " over " << horizon << " year(s)\n";
    report << text.str();
    out << text.str();
    return {{"output", "fit.json"}};
  }
};

struct RollCommand {
  InputOptions input;
  DEOptions de;
  std::size_t window = 252;
  std::vector<std::string> methods{"sqrt", "pure", "jump"};
  std::string model = "generalized";
  int m = 5;
  double lambda_cap = 252.0;
  std::vector<double> lambda_caps;
  double threshold = 0.0;
  double horizon = 1.0;
  bool no_memory = false;
  std::size_t memory_capacity = 50;
  double hysteresis = 1e-7;

  void add(CLI::App& app) {
    input.add(app);
    de.add(app);
    app.add_option("--window", window, "window length in observations")->capture_default_str();
    app.add_option("--methods", methods, "comma-separated subset of sqrt,pure,jump")->delimiter(',')->capture_default_str();
    app.add_option("--model", model, "jump model: ball-torous or generalized")->capture_default_str();
    app.add_option("--m", m, "jump cap per period")->capture_default_str();
    app.add_option("--lambda-cap", lambda_cap, "upper bound on lambda (per year)")->capture_default_str();
    app.add_option("--lambda-caps", lambda_caps, "comma-separated caps for a constraint sweep")->delimiter(',');
    app.add_option("--threshold", threshold, "semivariance threshold tau")->capture_default_str();
    app.add_option("--horizon", horizon, "semivariance horizon in years")->capture_default_str();
    app.add_flag("--no-memory", no_memory, "fit every window independently (parallel)");
    app.add_option("--memory-capacity", memory_capacity, "DE memory size")->capture_default_str();
    app.add_option("--hysteresis", hysteresis, "keep the previous solution within this log-likelihood")->capture_default_str();
  }

  RollingConfig config(const Global& g) const {
    RollingConfig c;
    c.window = window;
    c.methods.clear();
    for (const auto& name : methods) c.methods.push_back(parse_method(name));
    c.jump_model = parse_model(model);
    if (c.jump_model == ModelKind::pure_diffusion) throw std::invalid_argument("--model must be a jump model");
    c.m = m;
    c.lambda_cap = lambda_cap;
    c.threshold = threshold;
    c.horizon = horizon;
    c.de = de.config(g);
    c.use_memory = !no_memory;
    c.memory_capacity = memory_capacity;
    c.hysteresis = hysteresis;
    c.threads = g.threads;
    return c;
  }

  json run(const Global& g, OutputDir& dir, std::ostream& out) const {
    const auto returns = input.load();
    const auto c = config(g);
    const auto rows = roll(returns, c);
    {
      auto f = dir.open("rolling.csv");
      write_rolling_csv(f, rows);
    }
    long evaluations = 0;
    std::size_t jump_rows = 0, failed = 0;
    for (const auto& row : rows) {
      for (const auto& e : row.estimates) {
        evaluations += e.evaluations;
        if (e.method == Method::jump_diffusion) {
          ++jump_rows;
          if (!e.ok) ++failed;
        }
      }
    }
    json j{{"rows", rows.size()}, {"optimizer_evaluations", evaluations}, {"failed_jump_fits", failed}};
    if (!lambda_caps.empty()) {
      const auto sweep = lambda_constraint_sweep(returns, lambda_caps, c);
      auto f = dir.open("lambda_sweep.csv");
      f << "date,cap,semideviation\n";
      for (const auto& s : sweep) {
        for (std::size_t i = 0; i < s.dates.size(); ++i) f << s.dates[i] << ',' << s.cap << ',' << s.semideviation[i] << '\n';
      }
    }
    out << rows.size() << " rows written to " << (dir.root() / "rolling.csv").string() << '\n';
    if (failed > 0) out << "warning: " << failed << " jump-diffusion fits failed (flagged rows)\n";
    if (jump_rows > 0 && failed == jump_rows) throw NumericalError("every jump-diffusion fit failed");
    return j;
  }
};

struct EstimateCommand {
  InputOptions input;
  McmcOptions mcmc;

  void add(CLI::App& app) {
    input.add(app);
    mcmc.add(app);
  }

  json run(const Global& g, OutputDir& dir, std::ostream& out) const {
    const auto returns = input.load();
    auto c = mcmc.config;
    c.seed = g.seed;
    c.validate();
    const auto chain = run_mcmc(returns, c);
    write_mcmc_outputs(dir, chain, c, returns, out);
    return {{"kept_draws", chain.draws.size()}};
  }
};

struct SimulateCommand {
  SVJJInput params;
  SimulationOptions sim;
  double return_scale = 100.0;

  void add(CLI::App& app) {
    params.add(app);
    sim.add(app);
    app.add_option("--return-scale", return_scale, "internal unit scale of the parameters")->capture_default_str();
  }

  json run(const Global& g, OutputDir& dir, std::ostream& out) const {
    const auto p = params.resolve(return_scale);
    const auto c = sim.resolve(g, return_scale);
    c.validate();
    const auto s = simulate_and_integrate(p, c, sim.tau);
    write_samples(dir, s.sample);
    {
      auto f = dir.open("density.csv");
      write_density_grid_csv(f, DensityEstimate(s.sample, s.bandwidth), sim.grid_points);
    }
    auto j = simulation_json(s, c, sim.tau);
    j["params"] = svjj_json(rescale(p, 1.0 / return_scale));
    dir.write_json("simulation.json", j);
    out << "semideviation (KDE)  " << pct(s.kde.result.semideviation) << " over " << c.horizon << " year(s)\n"
        << "plug-in semivariance " << s.plug_in << " +/- " << s.standard_error << '\n';
    return {{"paths", c.paths}};
  }
};

struct SemidevCommand {
  InputOptions input;
  McmcOptions mcmc;
  SimulationOptions sim;
  DEOptions de;
  int m = 5;
  double lambda_cap = 252.0;

  void add(CLI::App& app) {
    input.add(app);
    mcmc.add(app);
    sim.add(app);
    de.add(app);
    app.add_option("--jd-m", m, "jump cap of the constant-volatility fit")->capture_default_str();
    app.add_option("--lambda-cap", lambda_cap, "lambda bound of the constant-volatility fit")->capture_default_str();
  }

  json run(const Global& g, OutputDir& dir, std::ostream& out) const {
    const auto returns = input.load();
    auto mc = mcmc.config;
    mc.seed = g.seed;
    mc.validate();
    const auto chain = run_mcmc(returns, mc);
    write_mcmc_outputs(dir, chain, mc, returns, out);

    const auto params = chain.posterior_mean();
    auto sc = sim.resolve(g, mc.return_scale);
    sc.seed = Rng::substream(g.seed, 1)();
    sc.validate();
    const auto s = simulate_and_integrate(params, sc, sim.tau);
    write_samples(dir, s.sample);

    RollingConfig rc;
    rc.m = m;
    rc.lambda_cap = lambda_cap;
    rc.threshold = sim.tau;
    rc.horizon = sc.horizon;
    rc.de = de.config(g);
    rc.window = std::max<std::size_t>(returns.size(), 30);
    const auto w = window_semideviations(returns, rc);

    {
      auto f = dir.open("semidev.csv");
      f << "label,method,semideviation\n"
        << "SD1,sqrt," << w.sqrt_rule << '\n'
        << "SD2,pure," << w.pure << '\n'
        << "SD3,jump," << w.jump << '\n'
        << "SD4,svjj," << s.kde.result.semideviation << '\n';
    }
    json j;
    j["window"] = {{"first", returns.dates().front()}, {"last", returns.dates().back()}, {"observations", returns.size()}};
    j["SD1"] = w.sqrt_rule;
    j["SD2"] = w.pure;
    j["SD3"] = w.jump;
    j["SD4"] = s.kde.result.semideviation;
    j["jump_params"] = params_json(w.jump_params);
    j["jump_log_likelihood"] = w.jump_loglik;
    j["simulation"] = simulation_json(s, sc, sim.tau);
    dir.write_json("semidev.json", j);

    out << "Annualized semideviations (in %)\n"
        << "SD1 square-root-of-time  " << pct(w.sqrt_rule) << '\n'
        << "SD2 pure diffusion       " << pct(w.pure) << '\n'
        << "SD3 jump-diffusion       " << pct(w.jump) << '\n'
        << "SD4 SVJJ (simulated)     " << pct(s.kde.result.semideviation) << '\n';
    return {{"simulation_seed", sc.seed}};
  }
};

struct TailboundCommand {
  int max_m = 5;
  int digits = 3;

  void add(CLI::App& app) {
    app.add_option("--max-m", max_m, "largest jump cap listed")->capture_default_str();
    app.add_option("--digits", digits, "decimal places")->capture_default_str();
  }

  json run(const Global&, OutputDir& dir, std::ostream& out) const {
    if (max_m < 1) throw std::invalid_argument("--max-m must be >= 1");
    std::ostringstream text;
    text << "m  bound\n";
    json rows = json::array();
    for (int m = 1; m <= max_m; ++m) {
      const double b = poisson_tail_bound(m);
      text << m << "  " << std::fixed << std::setprecision(digits) << b << '\n';
      rows.push_back({{"m", m}, {"bound", b}});
    }
    out << text.str();
    dir.write_json("tailbound.json", rows);
    return json::object();
  }
};

struct SynthCommand {
  std::string model = "jd";
  std::size_t n = 2000;
  std::string file = "prices.csv";
  double start_level = 100.0;
  JumpDiffusionParams jd{0.08, 0.2, 0.0, 0.0, 1e-6};
  SVJJInput svjj;
  double return_scale = 100.0;
  std::optional<double> v0;
  int m = 5;

  void add(CLI::App& app) {
    app.add_option("--model", model, "jd (constant volatility) or svjj")->capture_default_str();
    app.add_option("--n", n, "number of returns")->capture_default_str();
    app.add_option("--file", file, "output file name inside --out")->capture_default_str();
    app.add_option("--start-level", start_level, "initial price level")->capture_default_str();
    app.add_option("--jd-mu", jd.mu, "drift per year")->capture_default_str();
    app.add_option("--jd-sigma", jd.sigma, "volatility per sqrt(year)")->capture_default_str();
    app.add_option("--jd-lambda", jd.lambda, "jumps per year")->capture_default_str();
    app.add_option("--jd-mu-q", jd.mu_q, "mean log jump")->capture_default_str();
    app.add_option("--jd-sigma-q", jd.sigma_q, "log jump std")->capture_default_str();
    svjj.add(app);
    app.add_option("--v0", v0, "SVJJ initial variance (fraction^2 per day); theta when omitted");
    app.add_option("--m", m, "SVJJ jump cap per day")->capture_default_str();
  }

  json run(const Global& g, OutputDir& dir, std::ostream& out) const {
    std::vector<double> r;
    json truth;
    if (model == "jd") {
      r = jump_diffusion_returns(jd, n, kDailyStep, g.seed);
      truth = params_json(jd);
    } else if (model == "svjj") {
      const auto p = svjj.resolve(return_scale);
      const double start = v0 ? *v0 * return_scale * return_scale : p.theta;
      auto path = simulate_daily_path(p, n, start, m, g.seed, return_scale);
      r = std::move(path.log_returns);
      truth = svjj_json(rescale(p, 1.0 / return_scale));
      auto f = dir.open("latent_truth.csv");
      f << "t,v,jumps,xi_y,xi_nu\n";
      const double k = 1.0 / return_scale;
      for (std::size_t t = 0; t < path.state.size(); ++t) {
        f << t << ',' << path.state.v[t] * k * k << ',' << path.state.jumps[t] << ',' << path.state.xi_y[t] * k << ','
          << path.state.xi_nu[t] * k * k << '\n';
      }
    } else {
      throw std::invalid_argument("unknown synthetic model '" + model + "' (expected jd or svjj)");
    }
    const auto prices = to_prices(ReturnSeries::from_values(r), start_level, "t0000000");
    {
      auto f = dir.open(file);
      f << "date,level\n";
      for (const auto& pt : prices.points()) f << pt.date << ',' << pt.level << '\n';
    }
    dir.write_json("truth.json", {{"model", model}, {"params", truth}, {"n", n}});
    out << n << " returns written to " << (dir.root() / file).string() << '\n';
    return json::object();
  }
};

template <class Command>
int execute(const Command& cmd, const CLI::App& sub, const std::string& name, const Global& g, int argc,
            const char* const* argv, std::ostream& out) {
  OutputDir dir(g.out_dir);
  const json extra = cmd.run(g, dir, out);
  write_manifest(dir, sub, name, g, argc, argv, extra);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semivariance of asset returns under jump-diffusion and SVJJ models"};
  app.set_version_flag("--version", SEMIVAR_VERSION);
  app.set_config("--config", "", "TOML/INI config file; command-line flags override it");
  app.require_subcommand(0, 1);
  app.fallthrough();

  Global g;
  app.add_option("-o,--out", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();
  app.add_flag("--print-config", g.print_config, "print the resolved configuration and exit");

  FitCommand fit_cmd;
  RollCommand roll_cmd;
  EstimateCommand estimate_cmd;
  SimulateCommand simulate_cmd;
  SemidevCommand semidev_cmd;
  TailboundCommand tail_cmd;
  SynthCommand synth_cmd;

  auto* fit_app = app.add_subcommand("fit", "maximum-likelihood fit of a constant-volatility model");
  fit_cmd.add(*fit_app);
  auto* roll_app = app.add_subcommand("roll", "rolling-window semideviations");
  roll_cmd.add(*roll_app);
  auto* svjj_app = app.add_subcommand("svjj", "stochastic volatility with jumps");
  svjj_app->require_subcommand(0, 1);
  svjj_app->fallthrough();
  auto* estimate_app = svjj_app->add_subcommand("estimate", "MCMC estimation");
  estimate_cmd.add(*estimate_app);
  auto* simulate_app = svjj_app->add_subcommand("simulate", "Monte-Carlo horizon returns and KDE semideviation");
  simulate_cmd.add(*simulate_app);
  auto* semidev_app = svjj_app->add_subcommand("semidev", "estimate, simulate and compare semideviations");
  semidev_cmd.add(*semidev_app);
  auto* tail_app = app.add_subcommand("tailbound", "upper bounds on P(more than m jumps per period)");
  tail_cmd.add(*tail_app);
  auto* synth_app = app.add_subcommand("synth", "write a synthetic price series");
  synth_cmd.add(*synth_app);
  for (auto* sub : {fit_app, roll_app, estimate_app, simulate_app, semidev_app, tail_app, synth_app}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  if (g.print_config) {
    out << app.config_to_str(true, true);
    return 0;
  }

  try {
    if (*fit_app) return execute(fit_cmd, *fit_app, "fit", g, argc, argv, out);
    if (*roll_app) return execute(roll_cmd, *roll_app, "roll", g, argc, argv, out);
    if (*estimate_app) return execute(estimate_cmd, *estimate_app, "svjj estimate", g, argc, argv, out);
    if (*simulate_app) return execute(simulate_cmd, *simulate_app, "svjj simulate", g, argc, argv, out);
    if (*semidev_app) return execute(semidev_cmd, *semidev_app, "svjj semidev", g, argc, argv, out);
    if (*tail_app) return execute(tail_cmd, *tail_app, "tailbound", g, argc, argv, out);
    if (*synth_app) return execute(synth_cmd, *synth_app, "synth", g, argc, argv, out);
    if (*svjj_app) {
      err << "svjj: expected one of estimate, simulate, semidev\n";
      return 2;
    }
    err << app.help();
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace semivar::cli
