// Command-line front end: `run` (sampler), `simgen` (simulated examples),
// `summarize` (recompute posterior summaries from a saved trace), `oracle`
// (exhaustive enumeration for p <= 20).
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ess/csv.hpp"
#include "ess/dataset.hpp"
#include "ess/engine.hpp"
#include "ess/estimation.hpp"
#include "ess/oracle.hpp"
#include "ess/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string y_file, x_file, example, out = ".";
  std::string prior = "g";
  std::string tau = "fixed:1";
  int chains = 5;
  long sweeps = 12000, burnin = 2000;
  double b1 = 4.0;
  double e_pgamma = 0.0, v_pgamma = 0.0;
  double a_sigma = 1e-6, b_sigma = 1e-3;
  double a_tau = 0.5, b_tau = 0.0;  // b_tau 0 => n/2 after data load
  std::string local = "fsmh";
  std::string crossovers = "1point,uniform,adaptive,block";
  double rho0 = 0.25;
  std::uint64_t seed = 0;
  int replicates = 1;
  bool parallel_local = false;
  double ls1 = 0.0;
};

void add_data_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--y", o.y_file, "response CSV (single column)");
  cmd->add_option("--x", o.x_file, "design matrix CSV");
  cmd->add_option("--example", o.example,
                  "built-in simulated example (Ex1..Ex5)");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out", o.out, "output directory");
}

void add_model_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--prior", o.prior, "coefficient prior: g | indep");
  cmd->add_option("--tau", o.tau,
                  "tau mode: fixed:FLOAT | zs | hyperg:FLOAT");
  cmd->add_option("--e-pgamma", o.e_pgamma, "elicited E(p_gamma)");
  cmd->add_option("--v-pgamma", o.v_pgamma,
                  "elicited V(p_gamma) (default: binomial value)");
  cmd->add_option("--a-sigma", o.a_sigma, "sigma^2 prior shape");
  cmd->add_option("--b-sigma", o.b_sigma, "sigma^2 prior scale");
  cmd->add_option("--a-tau", o.a_tau, "Zellner-Siow shape");
  cmd->add_option("--b-tau", o.b_tau, "Zellner-Siow scale (default n/2)");
}

ess::PriorSpec build_spec(const CommonOpts& o, int n, int p,
                          bool* binomial_limit) {
  ess::PriorSpec spec;
  if (o.prior == "g")
    spec.family = ess::PriorFamily::GPrior;
  else if (o.prior == "indep")
    spec.family = ess::PriorFamily::Independent;
  else
    throw ConfigError("--prior must be g or indep");
  if (o.tau == "zs") {
    spec.tau_mode = ess::TauMode::ZellnerSiow;
    spec.a_tau = o.a_tau;
    spec.b_tau = o.b_tau > 0.0 ? o.b_tau : n / 2.0;
    spec.tau = 1.0;
  } else if (o.tau.rfind("fixed:", 0) == 0) {
    spec.tau_mode = ess::TauMode::Fixed;
    spec.tau = std::stod(o.tau.substr(6));
    if (!(spec.tau > 0.0)) throw ConfigError("fixed tau must be positive");
  } else if (o.tau.rfind("hyperg:", 0) == 0) {
    spec.tau_mode = ess::TauMode::HyperG;
    spec.c_tau = std::stod(o.tau.substr(7));
    if (!(spec.c_tau > 0.0)) throw ConfigError("c_tau must be positive");
    spec.tau = 1.0;
  } else {
    throw ConfigError("--tau must be fixed:FLOAT, zs, or hyperg:FLOAT");
  }
  spec.a_sigma = o.a_sigma;
  spec.b_sigma = o.b_sigma;
  if (o.e_pgamma > 0.0) {
    double v = o.v_pgamma > 0.0 ? o.v_pgamma
                                : o.e_pgamma * (1.0 - o.e_pgamma / p);
    auto [a, b] =
        ess::elicit_omega_hyperparams(o.e_pgamma, v, p, binomial_limit);
    spec.a_omega = a;
    spec.b_omega = b;
  }
  return spec;
}

std::vector<ess::CrossoverKind> parse_crossovers(const std::string& list) {
  std::vector<ess::CrossoverKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "1point")
      out.push_back(ess::CrossoverKind::OnePoint);
    else if (item == "uniform")
      out.push_back(ess::CrossoverKind::Uniform);
    else if (item == "adaptive")
      out.push_back(ess::CrossoverKind::Adaptive);
    else if (item == "block")
      out.push_back(ess::CrossoverKind::Block);
    else
      throw ConfigError("unknown crossover operator: " + item);
  }
  if (out.empty()) throw ConfigError("--crossovers must not be empty");
  return out;
}

ess::Dataset load_or_generate(const CommonOpts& o, std::uint64_t seed) {
  if (!o.example.empty()) {
    ess::SimSpec sim;
    sim.example = ess::parse_example(o.example);
    sim.seed = seed;
    return ess::gen_example(sim).ds;
  }
  if (o.y_file.empty() || o.x_file.empty())
    throw ConfigError("provide --y and --x, or --example");
  return ess::load_dataset(o.y_file, o.x_file);
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const CommonOpts& o, const json& extra) {
  json j;
  j["artifact_version"] = kVersion;
  j["subcommand"] = subcommand;
  j["seed"] = o.seed;
  j["y"] = o.y_file;
  j["x"] = o.x_file;
  j["example"] = o.example;
  j["prior"] = o.prior;
  j["tau"] = o.tau;
  j["chains"] = o.chains;
  j["sweeps"] = o.sweeps;
  j["burnin"] = o.burnin;
  j["b1"] = o.b1;
  j["e_pgamma"] = o.e_pgamma;
  j["v_pgamma"] = o.v_pgamma;
  j["a_sigma"] = o.a_sigma;
  j["b_sigma"] = o.b_sigma;
  j["a_tau"] = o.a_tau;
  j["b_tau"] = o.b_tau;
  j["local"] = o.local;
  j["crossovers"] = o.crossovers;
  j["rho0"] = o.rho0;
  j["replicates"] = o.replicates;
  j["parallel_local"] = o.parallel_local;
  j["ls1"] = o.ls1;
  j.update(extra);
  std::ofstream f(dir / "manifest.json");
  f << j.dump(2) << "\n";
}

void run_one_replicate(const CommonOpts& o, std::uint64_t seed,
                       const fs::path& dir) {
  fs::create_directories(dir);
  ess::Dataset raw = load_or_generate(o, seed);
  ess::Dataset ds = ess::center(std::move(raw));
  bool binomial_limit = false;
  ess::PriorSpec spec = build_spec(o, ds.n, ds.p, &binomial_limit);
  if (spec.family == ess::PriorFamily::Independent)
    ds = ess::standardize(std::move(ds));

  ess::RunConfig cfg;
  cfg.sweeps = o.sweeps;
  cfg.burn_in = o.burnin;
  cfg.L = o.chains;
  cfg.b1 = o.b1;
  if (o.local == "fsmh")
    cfg.local_move = ess::LocalMoveKind::FSMH;
  else if (o.local == "mc3")
    cfg.local_move = ess::LocalMoveKind::MC3;
  else if (o.local == "gibbs")
    cfg.local_move = ess::LocalMoveKind::Gibbs;
  else
    throw ConfigError("--local must be fsmh, mc3 or gibbs");
  cfg.crossover_set = parse_crossovers(o.crossovers);
  cfg.rho0 = o.rho0;
  cfg.seed = seed;
  cfg.spec = spec;
  cfg.parallel_local = o.parallel_local;
  cfg.tau_log_sd1 = o.ls1;

  ess::Engine engine(cfg, ds);
  ess::SamplerOutput& out = engine.run();

  auto incl = ess::inclusion_probabilities(out.model_trace, out.burn_in, ds.p);
  auto pmf = ess::model_size_posterior(out.model_trace, out.burn_in, ds.p);
  ess::write_inclusion_csv((dir / "inclusion.csv").string(), incl);
  ess::write_model_size_csv((dir / "model_size.csv").string(), pmf);
  ess::write_top_models_csv((dir / "top_models.csv").string(),
                            out.visited_best);
  ess::write_trace_csv((dir / "trace.csv").string(), out.model_trace);
  ess::write_tau_trace_csv((dir / "tau_trace.csv").string(), out.tau_trace);

  std::vector<double> temps;
  for (const auto& c : engine.population().chains)
    temps.push_back(c.temperature);
  ess::write_diagnostics_txt((dir / "diagnostics.txt").string(), out, temps);

  bool used_all = false;
  double stability = ess::stability_index(out.model_trace, out.burn_in,
                                          &used_all);
  json extra;
  extra["resolved_a_omega"] = spec.a_omega;
  extra["resolved_b_omega"] = spec.b_omega;
  extra["resolved_b_tau"] = spec.b_tau;
  extra["binomial_limit"] = binomial_limit;
  extra["stability_index"] = stability;
  extra["stability_used_all_records"] = used_all;
  extra["mode_model_size"] = ess::mode_model_size(pmf);
  extra["replicate_seed"] = seed;
  if (spec.tau_mode != ess::TauMode::Fixed)
    extra["posterior_mean_tau"] =
        ess::posterior_mean_tau(out.tau_trace, out.burn_in);
  if (spec.tau_mode == ess::TauMode::HyperG && spec.c_tau <= 1.0)
    extra["improper_tau_prior"] = true;
  write_manifest(dir, "run", o, extra);
}

int cmd_run(const CommonOpts& o) {
  fs::path base(o.out);
  if (o.replicates < 1) throw ConfigError("--replicates must be >= 1");
  if (o.replicates == 1) {
    run_one_replicate(o, o.seed, base);
    return 0;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(o.replicates);
  for (int i = 0; i < o.replicates; ++i) {
    workers.emplace_back([&, i] {
      try {
        run_one_replicate(o, o.seed + i,
                          base / ("rep" + std::to_string(i + 1)));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return 0;
}

int cmd_simgen(const CommonOpts& o, const std::string& example, int n, int p,
               double noise_sd) {
  ess::SimSpec sim;
  sim.example = ess::parse_example(example);
  sim.seed = o.seed;
  sim.n = n;
  sim.p = p;
  sim.noise_sd = noise_sd;
  ess::SimResult r = ess::gen_example(sim);
  fs::path dir(o.out);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "y.csv");
    f.precision(12);
    f << "y\n";
    for (int i = 0; i < r.ds.n; ++i) f << r.ds.y[i] << "\n";
  }
  {
    std::ofstream f(dir / "X.csv");
    f.precision(12);
    for (int j = 0; j < r.ds.p; ++j) f << (j ? "," : "") << "x" << j + 1;
    f << "\n";
    for (int i = 0; i < r.ds.n; ++i) {
      for (int j = 0; j < r.ds.p; ++j)
        f << (j ? "," : "") << r.ds.X(i, j);
      f << "\n";
    }
  }
  {
    std::ofstream f(dir / "truth.csv");
    f.precision(12);
    f << "index,beta\n";
    for (int k = 0; k < r.gamma_true.size(); ++k)
      f << r.gamma_true.included[k] + 1 << "," << r.beta_true[k] << "\n";
    f << "noise_sd," << r.noise_sd << "\n";
  }
  json extra;
  extra["n"] = r.ds.n;
  extra["p"] = r.ds.p;
  extra["noise_sd"] = r.noise_sd;
  write_manifest(dir, "simgen", o, extra);
  return 0;
}

std::vector<ess::SweepRecord> read_trace(const std::string& path, int* p_out) {
  std::ifstream f(path);
  if (!f) throw ess::DataError("cannot open trace: " + path);
  std::vector<ess::SweepRecord> trace;
  std::string line;
  int max_idx = 0;
  bool first = true;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("sweep,", 0) == 0) continue;
    }
    auto cells = ess::csv::split_line(line);
    if (cells.size() != 5)
      throw ess::DataError(path + ": expected 5 columns in trace");
    ess::SweepRecord r;
    r.sweep = std::stol(cells[0]);
    r.log_post = std::stod(cells[1]);
    r.p_gamma = std::stoi(cells[2]);
    r.r2 = std::stod(cells[3]);
    std::stringstream ss(cells[4]);
    int idx;
    std::vector<int> included;
    while (ss >> idx) {
      included.push_back(idx - 1);
      max_idx = std::max(max_idx, idx);
    }
    r.gamma.included = std::move(included);
    trace.push_back(std::move(r));
  }
  if (trace.empty()) throw ess::DataError(path + ": empty trace");
  *p_out = max_idx;
  return trace;
}

int cmd_summarize(const CommonOpts& o, const std::string& trace_file, int p) {
  int p_seen = 0;
  auto trace = read_trace(trace_file, &p_seen);
  if (p <= 0) p = p_seen;
  fs::path dir(o.out);
  fs::create_directories(dir);
  auto incl = ess::inclusion_probabilities(trace, o.burnin, p);
  auto pmf = ess::model_size_posterior(trace, o.burnin, p);
  ess::write_inclusion_csv((dir / "inclusion.csv").string(), incl);
  ess::write_model_size_csv((dir / "model_size.csv").string(), pmf);
  // deduplicated ranking for the top-models file
  std::map<std::vector<int>, ess::SweepRecord> best;
  for (const auto& r : trace) {
    if (r.sweep < o.burnin) continue;
    auto [it, inserted] = best.try_emplace(r.gamma.included, r);
    if (!inserted && r.log_post > it->second.log_post) it->second = r;
  }
  std::vector<ess::SweepRecord> ranked;
  for (auto& [k, v] : best) ranked.push_back(v);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.log_post > b.log_post; });
  if (ranked.size() > 1000) ranked.resize(1000);
  ess::write_top_models_csv((dir / "top_models.csv").string(), ranked);
  bool used_all = false;
  double stability = ess::stability_index(trace, o.burnin, &used_all);
  json extra;
  extra["trace"] = trace_file;
  extra["stability_index"] = stability;
  extra["stability_used_all_records"] = used_all;
  extra["mode_model_size"] = ess::mode_model_size(pmf);
  write_manifest(dir, "summarize", o, extra);
  return 0;
}

int cmd_oracle(const CommonOpts& o) {
  ess::Dataset raw = load_or_generate(o, o.seed);
  ess::Dataset ds = ess::center(std::move(raw));
  if (ds.p > 20)
    throw ConfigError(
        "oracle enumerates all 2^p models and supports p <= 20 only; got p=" +
        std::to_string(ds.p));
  bool binomial_limit = false;
  ess::PriorSpec spec = build_spec(o, ds.n, ds.p, &binomial_limit);
  if (spec.tau_mode != ess::TauMode::Fixed)
    throw ConfigError("oracle requires --tau fixed:FLOAT");
  if (spec.family == ess::PriorFamily::Independent)
    ds = ess::standardize(std::move(ds));
  ess::ExactPosterior ex = ess::enumerate_posterior(ds, spec, spec.tau);
  fs::path dir(o.out);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "oracle_models.csv");
    f.precision(12);
    f << "mask,log_posterior,probability,model\n";
    for (std::size_t mask = 0; mask < ex.prob.size(); ++mask) {
      f << mask << "," << ex.log_post[mask] << "," << ex.prob[mask] << ",";
      bool firstcol = true;
      for (int j = 0; j < ds.p; ++j)
        if (mask >> j & 1) {
          f << (firstcol ? "" : " ") << j + 1;
          firstcol = false;
        }
      f << "\n";
    }
  }
  ess::write_inclusion_csv((dir / "oracle_inclusion.csv").string(),
                           ex.inclusion);
  ess::write_model_size_csv((dir / "oracle_model_size.csv").string(),
                            ex.size_pmf);
  write_manifest(dir, "oracle", o, json::object());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary stochastic search for Bayesian variable "
               "selection in linear regression"};
  app.require_subcommand(1);
  CommonOpts o;

  CLI::App* run = app.add_subcommand("run", "run the sampler");
  add_data_flags(run, o);
  add_model_flags(run, o);
  run->add_option("--chains", o.chains, "number of tempered chains (>= 3)");
  run->add_option("--sweeps", o.sweeps, "total sweeps including burn-in");
  run->add_option("--burnin", o.burnin, "burn-in sweeps");
  run->add_option("--b1", o.b1, "initial temperature-ladder ratio");
  run->add_option("--local", o.local, "local move: fsmh | mc3 | gibbs");
  run->add_option("--crossovers", o.crossovers,
                  "comma list of 1point,uniform,adaptive,block");
  run->add_option("--rho0", o.rho0, "block-crossover correlation threshold");
  run->add_option("--replicates", o.replicates,
                  "independent replicates (seeds seed+i)");
  run->add_flag("--parallel-local", o.parallel_local,
                "run the local phase with one thread per chain");
  run->add_option("--ls1", o.ls1, "initial log-sd of the tau proposal");

  CLI::App* simgen = app.add_subcommand("simgen", "write a simulated example");
  std::string sg_example = "Ex1";
  int sg_n = 0, sg_p = 0;
  double sg_noise = 1.0;
  simgen->add_option("--example", sg_example,
                     "Ex1..Ex5 or ldblocks");
  simgen->add_option("--n", sg_n, "rows (ldblocks)");
  simgen->add_option("--p", sg_p, "columns (ldblocks)");
  simgen->add_option("--noise-sd", sg_noise, "noise sd (ldblocks)");
  simgen->add_option("--seed", o.seed, "random seed");
  simgen->add_option("--out", o.out, "output directory");

  CLI::App* summarize =
      app.add_subcommand("summarize", "recompute summaries from a trace");
  std::string trace_file;
  int sm_p = 0;
  summarize->add_option("--trace", trace_file, "trace.csv from a run")
      ->required();
  summarize->add_option("--burnin", o.burnin, "burn-in sweeps to discard");
  summarize->add_option("--p", sm_p, "number of covariates");
  summarize->add_option("--out", o.out, "output directory");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "exact posterior by exhaustive enumeration (p <= 20)");
  add_data_flags(oracle, o);
  add_model_flags(oracle, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (simgen->parsed()) return cmd_simgen(o, sg_example, sg_n, sg_p, sg_noise);
    if (summarize->parsed()) return cmd_summarize(o, trace_file, sm_p);
    if (oracle->parsed()) return cmd_oracle(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ess::AdaptError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ess::PriorError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ess::EngineError& e) {
    if (e.sweep >= 0) {
      std::cerr << "numeric failure: " << e.what() << "\n";
      return 4;
    }
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ess::csv::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ess::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ess::SimError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ess::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
