#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ess/engine.hpp"

// Posterior summaries from the chain-1 trace: Eq. (L35) reweighted inclusion
// probabilities, model-size posterior, top-model ranking, and the stability /
// overlap / swap-frequency mixing diagnostics.

namespace ess {

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Normalized weights w_t = p(y|gamma^(t)) p(gamma^(t)) over post-burn-in
/// records, computed in log space with max-subtraction.
inline std::vector<double> trace_weights(const std::vector<SweepRecord>& trace,
                                         long burn_in) {
  std::vector<double> w;
  double mx = -std::numeric_limits<double>::infinity();
  for (const SweepRecord& r : trace)
    if (r.sweep >= burn_in) mx = std::max(mx, r.log_post);
  if (!std::isfinite(mx))
    throw EstimationError("no post-burn-in records in trace");
  double total = 0.0;
  for (const SweepRecord& r : trace) {
    if (r.sweep < burn_in) continue;
    w.push_back(std::exp(r.log_post - mx));
    total += w.back();
  }
  for (double& x : w) x /= total;
  return w;
}

}  // namespace detail

namespace detail {

/// Distinct post-burn-in models with their unnormalized log posterior (the
/// maximum recorded value when tau varies across revisits).
inline std::map<std::vector<int>, double> distinct_models(
    const std::vector<SweepRecord>& trace, long burn_in) {
  std::map<std::vector<int>, double> models;
  for (const SweepRecord& r : trace) {
    if (r.sweep < burn_in) continue;
    auto [it, inserted] = models.try_emplace(r.gamma.included, r.log_post);
    if (!inserted && r.log_post > it->second) it->second = r.log_post;
  }
  if (models.empty())
    throw EstimationError("no post-burn-in records in trace");
  return models;
}

}  // namespace detail

/// Marginal posterior inclusion probabilities, Eq. (L35): posterior weights
/// p(y|gamma)p(gamma) renormalized over the distinct models visited after
/// burn-in. This estimator converges to the exact marginals once the high
/// mass models have been visited. The sweep-indexed variant (repeat visits
/// contributing repeatedly, a literal reading of the sum) is available with
/// count_repeats=true; it double-weights by visit frequency and is kept for
/// comparison only.
inline std::vector<double> inclusion_probabilities(
    const std::vector<SweepRecord>& trace, long burn_in, int p,
    bool count_repeats = false) {
  std::vector<double> incl(p, 0.0);
  if (count_repeats) {
    std::vector<double> w = detail::trace_weights(trace, burn_in);
    std::size_t i = 0;
    for (const SweepRecord& r : trace) {
      if (r.sweep < burn_in) continue;
      for (int j : r.gamma.included) incl[j] += w[i];
      ++i;
    }
    return incl;
  }
  auto models = detail::distinct_models(trace, burn_in);
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& [gamma, lp] : models) mx = std::max(mx, lp);
  double total = 0.0;
  for (const auto& [gamma, lp] : models) {
    double w = std::exp(lp - mx);
    total += w;
    for (int j : gamma) incl[j] += w;
  }
  for (double& x : incl) x /= total;
  return incl;
}

/// Posterior of the model size p_gamma, same renormalization as Eq. (L35).
inline std::vector<double> model_size_posterior(
    const std::vector<SweepRecord>& trace, long burn_in, int p,
    bool count_repeats = false) {
  std::vector<double> pmf(p + 1, 0.0);
  if (count_repeats) {
    std::vector<double> w = detail::trace_weights(trace, burn_in);
    std::size_t i = 0;
    for (const SweepRecord& r : trace) {
      if (r.sweep < burn_in) continue;
      pmf[r.p_gamma] += w[i++];
    }
    return pmf;
  }
  auto models = detail::distinct_models(trace, burn_in);
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& [gamma, lp] : models) mx = std::max(mx, lp);
  double total = 0.0;
  for (const auto& [gamma, lp] : models) {
    double w = std::exp(lp - mx);
    total += w;
    pmf[gamma.size()] += w;
  }
  for (double& x : pmf) x /= total;
  return pmf;
}

inline int mode_model_size(const std::vector<double>& pmf) {
  return static_cast<int>(std::max_element(pmf.begin(), pmf.end()) -
                          pmf.begin());
}

/// Standard deviation (divisor N-1) of R^2 over the top-1000 (not unique)
/// post-burn-in records ranked by log posterior. Uses all records, flagged
/// through `used_all`, when fewer than 1000 are available.
inline double stability_index(const std::vector<SweepRecord>& trace,
                              long burn_in, bool* used_all = nullptr,
                              std::size_t top = 1000) {
  std::vector<const SweepRecord*> recs;
  for (const SweepRecord& r : trace)
    if (r.sweep >= burn_in) recs.push_back(&r);
  if (recs.empty()) throw EstimationError("empty trace");
  if (used_all) *used_all = recs.size() < top;
  std::size_t k = std::min(top, recs.size());
  std::partial_sort(recs.begin(), recs.begin() + k, recs.end(),
                    [](const SweepRecord* a, const SweepRecord* b) {
                      return a->log_post > b->log_post;
                    });
  if (k < 2) return 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < k; ++i) mean += recs[i]->r2;
  mean /= k;
  double ss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double d = recs[i]->r2 - mean;
    ss += d * d;
  }
  return std::sqrt(ss / (k - 1));
}

/// Overlap diagnostic per adjacent temperature pair:
/// V(f(gamma_l)) (1/t_{l+1} - 1/t_l)^2, from the post-burn-in f traces.
inline std::vector<double> overlap_index(
    const std::vector<std::vector<double>>& chain_f_trace,
    const std::vector<double>& temperatures, long burn_in) {
  const int L = static_cast<int>(temperatures.size());
  std::vector<double> out(L - 1, 0.0);
  for (int l = 0; l + 1 < L; ++l) {
    const std::vector<double>& f = chain_f_trace[l];
    if (static_cast<long>(f.size()) <= burn_in + 1) continue;
    double mean = 0.0;
    long n = 0;
    for (std::size_t t = burn_in; t < f.size(); ++t, ++n) mean += f[t];
    mean /= n;
    double var = 0.0;
    for (std::size_t t = burn_in; t < f.size(); ++t) {
      double d = f[t] - mean;
      var += d * d;
    }
    var /= (n - 1);
    double gap = 1.0 / temperatures[l + 1] - 1.0 / temperatures[l];
    out[l] = var * gap * gap;
  }
  return out;
}

/// Per-chain participation fractions in successful swaps, normalized to sum
/// to 1 across chains (Table S4 convention). All-zero when no swap succeeded;
/// `any_swaps` reports that condition.
inline std::vector<double> swap_frequencies(
    const std::vector<long>& chain_swap_successes, bool* any_swaps = nullptr) {
  long total = std::accumulate(chain_swap_successes.begin(),
                               chain_swap_successes.end(), 0L);
  if (any_swaps) *any_swaps = total > 0;
  std::vector<double> out(chain_swap_successes.size(), 0.0);
  if (total == 0) return out;
  for (std::size_t l = 0; l < out.size(); ++l)
    out[l] = static_cast<double>(chain_swap_successes[l]) / total;
  return out;
}

inline double posterior_mean_tau(
    const std::vector<std::pair<double, int>>& tau_trace, long burn_in) {
  double sum = 0.0;
  long n = 0;
  for (std::size_t t = burn_in; t < tau_trace.size(); ++t, ++n)
    sum += tau_trace[t].first;
  if (n == 0) throw EstimationError("empty tau trace");
  return sum / n;
}

// ---- file emission (CSV with headers, 1-based covariate indices) ----

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw EstimationError("cannot write " + path);
  f.precision(12);
  return f;
}

}  // namespace detail

inline void write_inclusion_csv(const std::string& path,
                                const std::vector<double>& incl) {
  auto f = detail::open_out(path);
  f << "index,probability\n";
  for (std::size_t j = 0; j < incl.size(); ++j)
    f << j + 1 << "," << incl[j] << "\n";
}

inline void write_model_size_csv(const std::string& path,
                                 const std::vector<double>& pmf) {
  auto f = detail::open_out(path);
  f << "model_size,probability\n";
  for (std::size_t k = 0; k < pmf.size(); ++k)
    f << k << "," << pmf[k] << "\n";
}

inline void write_top_models_csv(const std::string& path,
                                 const std::vector<SweepRecord>& best) {
  auto f = detail::open_out(path);
  f << "rank,log_posterior,r_squared,model\n";
  for (std::size_t i = 0; i < best.size(); ++i) {
    f << i + 1 << "," << best[i].log_post << "," << best[i].r2 << ",";
    for (std::size_t k = 0; k < best[i].gamma.included.size(); ++k)
      f << (k ? " " : "") << best[i].gamma.included[k] + 1;
    f << "\n";
  }
}

inline void write_trace_csv(const std::string& path,
                            const std::vector<SweepRecord>& trace) {
  auto f = detail::open_out(path);
  f << "sweep,log_posterior,p_gamma,r_squared,model\n";
  for (const SweepRecord& r : trace) {
    f << r.sweep << "," << r.log_post << "," << r.p_gamma << "," << r.r2
      << ",";
    for (std::size_t k = 0; k < r.gamma.included.size(); ++k)
      f << (k ? " " : "") << r.gamma.included[k] + 1;
    f << "\n";
  }
}

inline void write_tau_trace_csv(
    const std::string& path,
    const std::vector<std::pair<double, int>>& tau_trace) {
  auto f = detail::open_out(path);
  f << "sweep,tau,accepted\n";
  for (std::size_t t = 0; t < tau_trace.size(); ++t)
    f << t << "," << tau_trace[t].first << "," << tau_trace[t].second << "\n";
}

inline const char* move_kind_name(MoveKind k) {
  switch (k) {
    case MoveKind::Gibbs: return "gibbs";
    case MoveKind::FSMH: return "fsmh";
    case MoveKind::MC3: return "mc3";
    case MoveKind::Crossover1pt: return "crossover_1point";
    case MoveKind::CrossoverUnif: return "crossover_uniform";
    case MoveKind::CrossoverAdaptive: return "crossover_adaptive";
    case MoveKind::CrossoverBlock: return "crossover_block";
    case MoveKind::DRExchangeStage1: return "dr_exchange_stage1";
    case MoveKind::DRExchangeStage2: return "dr_exchange_stage2";
    case MoveKind::AllExchange: return "all_exchange";
  }
  return "unknown";
}

inline void write_diagnostics_txt(const std::string& path,
                                  const SamplerOutput& out,
                                  const std::vector<double>& temperatures) {
  auto f = detail::open_out(path);
  for (int k = 0; k < kNumMoveKinds; ++k) {
    const MoveStats& st = out.diag.moves[k];
    if (st.proposals == 0 && st.no_ops == 0) continue;
    const char* name = move_kind_name(static_cast<MoveKind>(k));
    f << name << ".proposals=" << st.proposals << "\n";
    f << name << ".accepts=" << st.accepts << "\n";
    f << name << ".acceptance_rate="
      << (st.proposals ? static_cast<double>(st.accepts) / st.proposals : 0.0)
      << "\n";
    f << name << ".models_evaluated=" << st.models_evaluated << "\n";
    if (st.no_ops) f << name << ".no_ops=" << st.no_ops << "\n";
    if (st.nan_guards) f << name << ".nan_guards=" << st.nan_guards << "\n";
  }
  bool any = false;
  std::vector<double> freqs =
      swap_frequencies(out.diag.chain_swap_successes, &any);
  for (std::size_t l = 0; l < freqs.size(); ++l)
    f << "swap_frequency.chain" << l + 1 << "=" << freqs[l] << "\n";
  if (!any) f << "swap_frequency.note=no successful swaps\n";
  std::vector<double> ov =
      overlap_index(out.chain_f_trace, temperatures, out.burn_in);
  for (std::size_t l = 0; l < ov.size(); ++l)
    f << "overlap.pair" << l + 1 << "_" << l + 2 << "=" << ov[l] << "\n";
  for (std::size_t l = 0; l < temperatures.size(); ++l)
    f << "temperature.chain" << l + 1 << "=" << temperatures[l] << "\n";
  for (const BatchRecord& b : out.diag.batches)
    f << "batch." << b.batch << "=b:" << b.b << ",dr_acc:" << b.dr_acceptance
      << ",tau_acc:" << b.tau_acceptance << ",tau_log_sd:" << b.tau_log_sd
      << "\n";
}

}  // namespace ess
