#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ess/adaptation.hpp"
#include "ess/dataset.hpp"
#include "ess/moves.hpp"
#include "ess/priors.hpp"
#include "ess/rng.hpp"

namespace ess {

struct EngineError : std::runtime_error {
  long sweep = -1;
  EngineError(long s, const std::string& msg)
      : std::runtime_error("sweep " + std::to_string(s) + ": " + msg),
        sweep(s) {}
  explicit EngineError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class LocalMoveKind { FSMH, MC3, Gibbs };

struct RunConfig {
  long sweeps = 0;
  long burn_in = 0;
  int L = 5;
  double b1 = 4.0;
  LocalMoveKind local_move = LocalMoveKind::FSMH;
  std::vector<CrossoverKind> crossover_set = {
      CrossoverKind::OnePoint, CrossoverKind::Uniform,
      CrossoverKind::Adaptive, CrossoverKind::Block};
  double rho0 = 0.25;
  int gibbs_interval = 100;
  int batch_size = 100;
  std::uint64_t seed = 0;
  PriorSpec spec;
  double selection_temperature = 0.0;  // <= 0: use the hottest temperature
  bool parallel_local = false;
  int mc3_steps_per_sweep = 1;  // budget-matching multiplier for MC3 mode
  double tau_log_sd1 = 0.0;
  int top_k = 1000;
};

struct SweepRecord {
  long sweep = 0;
  ModelIndicator gamma;
  double log_post = 0.0;  // log p(y|gamma,tau) + log p(gamma), chain 1
  int p_gamma = 0;
  double r2 = 0.0;
};

struct BatchRecord {
  long batch = 0;
  double b = 0.0;
  double dr_acceptance = 0.0;
  double tau_acceptance = 0.0;
  double tau_log_sd = 0.0;
};

struct MoveStats {
  long proposals = 0, accepts = 0, models_evaluated = 0;
  long no_ops = 0, nan_guards = 0;
};

constexpr int kNumMoveKinds = 10;

struct Diagnostics {
  std::array<MoveStats, kNumMoveKinds> moves;  // indexed by MoveKind
  std::vector<long> chain_swap_successes;
  std::vector<BatchRecord> batches;
  long local_phases = 0, crossover_phases = 0;
  long dr_moves = 0, all_exchange_moves = 0;

  MoveStats& of(MoveKind k) { return moves[static_cast<int>(k)]; }
  const MoveStats& of(MoveKind k) const {
    return moves[static_cast<int>(k)];
  }
};

struct SamplerOutput {
  std::vector<SweepRecord> model_trace;            // chain 1, every sweep
  std::vector<std::pair<double, int>> tau_trace;   // (tau, accepted flag)
  std::vector<std::vector<double>> chain_f_trace;  // [L][sweep]
  std::vector<SweepRecord> visited_best;  // deduplicated top-K, descending
  Diagnostics diag;
  long burn_in = 0;
  int p = 0;
};

inline constexpr int kCheckpointVersion = 1;

class Engine {
 public:
  Engine(RunConfig cfg, const Dataset& ds) : cfg_(std::move(cfg)), ds_(&ds) {
    validate();
    ladder_ = init_ladder(cfg_.L, cfg_.b1, cfg_.burn_in, cfg_.batch_size);
    tau_state_ =
        init_tau_proposal(cfg_.tau_log_sd1, cfg_.burn_in, cfg_.batch_size);
    global_rng_ = Rng(cfg_.seed);
    chain_rngs_.clear();
    for (int l = 0; l < cfg_.L; ++l)
      chain_rngs_.emplace_back(cfg_.seed ^ static_cast<std::uint64_t>(l + 1));
    init_population();
    out_.burn_in = cfg_.burn_in;
    out_.p = ds_->p;
    out_.chain_f_trace.assign(cfg_.L, {});
    out_.diag.chain_swap_successes.assign(cfg_.L, 0);
  }

  const RunConfig& config() const { return cfg_; }
  const Population& population() const { return pop_; }
  long sweep() const { return sweep_; }

  /// Runs all remaining sweeps and finalizes the output.
  SamplerOutput& run() {
    while (sweep_ < cfg_.sweeps) {
      try {
        step();
      } catch (const EngineError&) {
        throw;
      } catch (const std::exception& e) {
        throw EngineError(sweep_, e.what());
      }
    }
    finalize();
    return out_;
  }

  /// One full sweep: local/crossover phase, periodic chain-1 Gibbs scan,
  /// exchange phase, tau step, trace recording and batch adaptation.
  void step() {
    const long s = sweep_;
    const bool in_burn_in = s < cfg_.burn_in;
    const double t_sel = cfg_.selection_temperature > 0.0
                             ? cfg_.selection_temperature
                             : ladder_.temperatures.back();
    // (i) local move on every chain, or one crossover
    if (global_rng_.uniform() < 0.5) {
      ++out_.diag.local_phases;
      run_local_phase();
    } else {
      ++out_.diag.crossover_phases;
      CrossoverKind kind = cfg_.crossover_set[global_rng_.below(
          static_cast<int>(cfg_.crossover_set.size()))];
      record(crossover(pop_, kind, *ds_, cfg_.spec, cfg_.rho0, t_sel,
                       global_rng_));
    }
    if (cfg_.gibbs_interval > 0 && (s + 1) % cfg_.gibbs_interval == 0)
      record(gibbs_full_scan(pop_.chains[0], pop_.tau, *ds_, cfg_.spec,
                             global_rng_));
    // (ii) exchange phase: DR only during burn-in, else a fair coin
    if (in_burn_in || global_rng_.uniform() < 0.5) {
      ++out_.diag.dr_moves;
      MoveOutcome ex = dr_exchange(pop_, global_rng_);
      ++batch_dr_proposals_;
      if (ex.accepted) ++batch_dr_accepts_;
      record(ex);
    } else {
      ++out_.diag.all_exchange_moves;
      record(all_exchange(pop_, global_rng_));
    }
    // (iii) tau
    bool tau_accepted = false;
    if (cfg_.spec.tau_mode != TauMode::Fixed)
      tau_accepted = tau_mwg_step(pop_, *ds_, cfg_.spec, tau_state_,
                                  global_rng_);
    record_sweep(tau_accepted);
    ++sweep_;
    if (sweep_ % cfg_.batch_size == 0) on_batch_boundary();
    if (!ladder_.frozen && sweep_ >= cfg_.burn_in) ladder_.frozen = true;
  }

  void save_checkpoint(const std::string& path) const {
    nlohmann::json j;
    j["version"] = kCheckpointVersion;
    j["sweep"] = sweep_;
    j["n"] = ds_->n;
    j["p"] = ds_->p;
    j["config"] = config_json();
    j["tau"] = pop_.tau;
    nlohmann::json chains = nlohmann::json::array();
    for (const ChainState& c : pop_.chains)
      chains.push_back({{"gamma", c.gamma.included},
                        {"temperature", c.temperature}});
    j["chains"] = chains;
    j["ladder"] = {{"b", ladder_.b},
                   {"frozen", ladder_.frozen},
                   {"delta_b", ladder_.delta_b}};
    j["tau_state"] = {{"log_sd", tau_state_.log_sd},
                      {"initial_log_sd", tau_state_.initial_log_sd},
                      {"k_tilde", tau_state_.k_tilde},
                      {"batch_index", tau_state_.batch_index},
                      {"batch_proposals", tau_state_.batch_proposals},
                      {"batch_accepts", tau_state_.batch_accepts}};
    j["batch_dr_proposals"] = batch_dr_proposals_;
    j["batch_dr_accepts"] = batch_dr_accepts_;
    j["global_rng"] = global_rng_.state();
    nlohmann::json rngs = nlohmann::json::array();
    for (const Rng& r : chain_rngs_) rngs.push_back(r.state());
    j["chain_rngs"] = rngs;
    std::ofstream f(path);
    if (!f) throw EngineError("cannot write checkpoint: " + path);
    f << j.dump(1) << "\n";
  }

  /// Rebuilds an engine mid-run; continuing produces the identical trace
  /// suffix as the uninterrupted run.
  static Engine resume(const std::string& path, const Dataset& ds) {
    std::ifstream f(path);
    if (!f) throw EngineError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const std::exception& e) {
      throw EngineError(std::string("corrupt checkpoint: ") + e.what());
    }
    if (!j.contains("version") || j["version"] != kCheckpointVersion)
      throw EngineError("checkpoint version mismatch");
    if (j["p"] != ds.p || j["n"] != ds.n)
      throw EngineError("checkpoint data shape does not match dataset");
    Engine e(config_from_json(j["config"]), ds);
    e.sweep_ = j["sweep"];
    e.pop_.tau = j["tau"];
    const auto& chains = j["chains"];
    if (static_cast<int>(chains.size()) != e.cfg_.L)
      throw EngineError("checkpoint chain count mismatch");
    for (int l = 0; l < e.cfg_.L; ++l) {
      std::vector<int> idx = chains[l]["gamma"].get<std::vector<int>>();
      e.pop_.chains[l].gamma = ModelIndicator::from_indices(idx, ds.p);
      e.pop_.chains[l].temperature = chains[l]["temperature"];
      refresh_chain(e.pop_.chains[l], e.pop_.tau, ds, e.cfg_.spec);
    }
    e.ladder_.b = j["ladder"]["b"];
    e.ladder_.frozen = j["ladder"]["frozen"];
    e.ladder_.delta_b = j["ladder"]["delta_b"];
    e.ladder_.recompute();
    e.tau_state_.log_sd = j["tau_state"]["log_sd"];
    e.tau_state_.initial_log_sd = j["tau_state"]["initial_log_sd"];
    e.tau_state_.k_tilde = j["tau_state"]["k_tilde"];
    e.tau_state_.batch_index = j["tau_state"]["batch_index"];
    e.tau_state_.batch_proposals = j["tau_state"]["batch_proposals"];
    e.tau_state_.batch_accepts = j["tau_state"]["batch_accepts"];
    e.batch_dr_proposals_ = j["batch_dr_proposals"];
    e.batch_dr_accepts_ = j["batch_dr_accepts"];
    e.global_rng_.set_state(j["global_rng"]);
    for (int l = 0; l < e.cfg_.L; ++l)
      e.chain_rngs_[l].set_state(j["chain_rngs"][l]);
    return e;
  }

 private:
  void validate() const {
    if (cfg_.sweeps <= cfg_.burn_in)
      throw EngineError("sweeps must exceed burn-in");
    if (cfg_.burn_in < cfg_.batch_size)
      throw EngineError("burn-in must cover at least one batch");
    if (cfg_.crossover_set.empty())
      throw EngineError("crossover set must not be empty");
    if (!ds_->centered) throw EngineError("dataset must be centered");
    if (cfg_.spec.family == PriorFamily::Independent && !ds_->standardized)
      throw EngineError(
          "independent priors require a standardized design matrix");
  }

  void init_population() {
    pop_.chains.assign(cfg_.L, ChainState{});
    pop_.tau = cfg_.spec.tau;
    double omega = cfg_.spec.a_omega / (cfg_.spec.a_omega + cfg_.spec.b_omega);
    for (int l = 0; l < cfg_.L; ++l) {
      ChainState& c = pop_.chains[l];
      c.temperature = ladder_.temperatures[l];
      for (int j = 0; j < ds_->p; ++j)
        if (global_rng_.uniform() < omega) c.gamma.included.push_back(j);
      refresh_chain(c, pop_.tau, *ds_, cfg_.spec);
    }
  }

  void local_move_on(int l) {
    ChainState& c = pop_.chains[l];
    switch (cfg_.local_move) {
      case LocalMoveKind::FSMH:
        local_outcomes_[l] = fsmh_scan(c, pop_.tau, *ds_, cfg_.spec,
                                       chain_rngs_[l]);
        break;
      case LocalMoveKind::MC3: {
        MoveOutcome agg;
        agg.kind = MoveKind::MC3;
        for (int i = 0; i < cfg_.mc3_steps_per_sweep; ++i) {
          MoveOutcome o = mc3_step(c, pop_.tau, *ds_, cfg_.spec,
                                   chain_rngs_[l]);
          agg.proposals += o.proposals;
          agg.accepts += o.accepts;
          agg.models_evaluated += o.models_evaluated;
          agg.accepted = agg.accepted || o.accepted;
        }
        local_outcomes_[l] = agg;
        break;
      }
      case LocalMoveKind::Gibbs:
        local_outcomes_[l] = gibbs_full_scan(c, pop_.tau, *ds_, cfg_.spec,
                                             chain_rngs_[l]);
        break;
    }
  }

  void run_local_phase() {
    local_outcomes_.assign(cfg_.L, MoveOutcome{});
    if (cfg_.parallel_local) {
      std::vector<std::thread> workers;
      workers.reserve(cfg_.L);
      for (int l = 0; l < cfg_.L; ++l)
        workers.emplace_back([this, l] { local_move_on(l); });
      for (std::thread& w : workers) w.join();
    } else {
      for (int l = 0; l < cfg_.L; ++l) local_move_on(l);
    }
    for (const MoveOutcome& o : local_outcomes_) record(o);
  }

  void record(const MoveOutcome& o) {
    MoveStats& st = out_.diag.of(o.kind);
    st.proposals += o.proposals;
    st.accepts += o.accepts;
    st.models_evaluated += o.models_evaluated;
    if (o.no_op) ++st.no_ops;
    if (o.nan_guard) ++st.nan_guards;
    bool is_swap = o.kind == MoveKind::DRExchangeStage1 ||
                   o.kind == MoveKind::DRExchangeStage2 ||
                   o.kind == MoveKind::AllExchange;
    if (is_swap && o.accepted && o.chain_a >= 0) {
      ++out_.diag.chain_swap_successes[o.chain_a];
      ++out_.diag.chain_swap_successes[o.chain_b];
    }
  }

  void record_sweep(bool tau_accepted) {
    const ChainState& c0 = pop_.chains[0];
    SweepRecord rec;
    rec.sweep = sweep_;
    rec.gamma = c0.gamma;
    rec.log_post = c0.f();
    rec.p_gamma = c0.gamma.size();
    rec.r2 = chain_r_squared(c0, pop_.tau, *ds_, cfg_.spec.family);
    out_.model_trace.push_back(std::move(rec));
    out_.tau_trace.emplace_back(pop_.tau, tau_accepted ? 1 : 0);
    for (int l = 0; l < cfg_.L; ++l)
      out_.chain_f_trace[l].push_back(pop_.chains[l].f());
  }

  void on_batch_boundary() {
    double dr_rate = batch_dr_proposals_ > 0
                         ? static_cast<double>(batch_dr_accepts_) /
                               batch_dr_proposals_
                         : 0.0;
    if (!ladder_.frozen && sweep_ <= cfg_.burn_in) {
      update_ladder(ladder_, dr_rate);
      for (int l = 0; l < cfg_.L; ++l)
        pop_.chains[l].temperature = ladder_.temperatures[l];
    }
    BatchRecord br;
    br.batch = sweep_ / cfg_.batch_size;
    br.b = ladder_.b;
    br.dr_acceptance = dr_rate;
    br.tau_log_sd = tau_state_.log_sd;
    if (cfg_.spec.tau_mode != TauMode::Fixed) {
      br.tau_acceptance = tau_state_.batch_proposals > 0
                              ? static_cast<double>(tau_state_.batch_accepts) /
                                    tau_state_.batch_proposals
                              : 0.0;
      adapt_tau_proposal(tau_state_, br.tau_acceptance);
    }
    out_.diag.batches.push_back(br);
    batch_dr_proposals_ = 0;
    batch_dr_accepts_ = 0;
  }

  void finalize() {
    // deduplicated top-K visited models by unnormalized log posterior
    std::map<std::vector<int>, SweepRecord> best;
    for (const SweepRecord& r : out_.model_trace) {
      if (r.sweep < cfg_.burn_in) continue;
      auto [it, inserted] = best.try_emplace(r.gamma.included, r);
      if (!inserted && r.log_post > it->second.log_post) it->second = r;
    }
    out_.visited_best.clear();
    for (auto& [key, rec] : best) out_.visited_best.push_back(rec);
    std::sort(out_.visited_best.begin(), out_.visited_best.end(),
              [](const SweepRecord& a, const SweepRecord& b) {
                return a.log_post > b.log_post;
              });
    if (static_cast<int>(out_.visited_best.size()) > cfg_.top_k)
      out_.visited_best.resize(cfg_.top_k);
  }

  nlohmann::json config_json() const {
    const PriorSpec& sp = cfg_.spec;
    std::vector<int> xs;
    for (CrossoverKind k : cfg_.crossover_set)
      xs.push_back(static_cast<int>(k));
    return {{"sweeps", cfg_.sweeps},
            {"burn_in", cfg_.burn_in},
            {"L", cfg_.L},
            {"b1", cfg_.b1},
            {"local_move", static_cast<int>(cfg_.local_move)},
            {"crossover_set", xs},
            {"rho0", cfg_.rho0},
            {"gibbs_interval", cfg_.gibbs_interval},
            {"batch_size", cfg_.batch_size},
            {"seed", cfg_.seed},
            {"selection_temperature", cfg_.selection_temperature},
            {"parallel_local", cfg_.parallel_local},
            {"mc3_steps_per_sweep", cfg_.mc3_steps_per_sweep},
            {"tau_log_sd1", cfg_.tau_log_sd1},
            {"top_k", cfg_.top_k},
            {"family", static_cast<int>(sp.family)},
            {"tau_mode", static_cast<int>(sp.tau_mode)},
            {"tau", sp.tau},
            {"a_tau", sp.a_tau},
            {"b_tau", sp.b_tau},
            {"c_tau", sp.c_tau},
            {"a_sigma", sp.a_sigma},
            {"b_sigma", sp.b_sigma},
            {"a_omega", sp.a_omega},
            {"b_omega", sp.b_omega}};
  }

  static RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.sweeps = j["sweeps"];
    cfg.burn_in = j["burn_in"];
    cfg.L = j["L"];
    cfg.b1 = j["b1"];
    cfg.local_move = static_cast<LocalMoveKind>(j["local_move"].get<int>());
    cfg.crossover_set.clear();
    for (int k : j["crossover_set"].get<std::vector<int>>())
      cfg.crossover_set.push_back(static_cast<CrossoverKind>(k));
    cfg.rho0 = j["rho0"];
    cfg.gibbs_interval = j["gibbs_interval"];
    cfg.batch_size = j["batch_size"];
    cfg.seed = j["seed"];
    cfg.selection_temperature = j["selection_temperature"];
    cfg.parallel_local = j["parallel_local"];
    cfg.mc3_steps_per_sweep = j["mc3_steps_per_sweep"];
    cfg.tau_log_sd1 = j["tau_log_sd1"];
    cfg.top_k = j["top_k"];
    cfg.spec.family = static_cast<PriorFamily>(j["family"].get<int>());
    cfg.spec.tau_mode = static_cast<TauMode>(j["tau_mode"].get<int>());
    cfg.spec.tau = j["tau"];
    cfg.spec.a_tau = j["a_tau"];
    cfg.spec.b_tau = j["b_tau"];
    cfg.spec.c_tau = j["c_tau"];
    cfg.spec.a_sigma = j["a_sigma"];
    cfg.spec.b_sigma = j["b_sigma"];
    cfg.spec.a_omega = j["a_omega"];
    cfg.spec.b_omega = j["b_omega"];
    return cfg;
  }

  RunConfig cfg_;
  const Dataset* ds_;
  Population pop_;
  TemperatureLadder ladder_;
  TauProposalState tau_state_;
  Rng global_rng_;
  std::vector<Rng> chain_rngs_;
  std::vector<MoveOutcome> local_outcomes_;
  long sweep_ = 0;
  long batch_dr_proposals_ = 0, batch_dr_accepts_ = 0;
  SamplerOutput out_;
};

/// Convenience wrapper matching the paper's driver.
inline SamplerOutput run_ess(const RunConfig& cfg, const Dataset& ds) {
  Engine engine(cfg, ds);
  return std::move(engine.run());
}

}  // namespace ess
