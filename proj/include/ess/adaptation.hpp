#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ess/moves.hpp"
#include "ess/priors.hpp"
#include "ess/rng.hpp"

namespace ess {

struct AdaptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Geometric temperature ladder t_l = b^{l-1}, tuned during burn-in so the
/// delayed-rejection exchange acceptance approaches 0.50, then frozen.
struct TemperatureLadder {
  double b = 1.0;
  int L = 0;
  std::vector<double> temperatures;
  int batch_size = 100;
  double delta_b = 0.0;  // per-batch step on log2(b)
  bool frozen = false;

  void recompute() {
    temperatures.resize(L);
    double t = 1.0;
    for (int l = 0; l < L; ++l) {
      temperatures[l] = t;
      t *= b;
    }
  }
};

inline TemperatureLadder init_ladder(int L, double b1, long burn_in,
                                     int batch_size = 100) {
  if (L < 3)
    throw AdaptError("at least 3 chains are required (L >= 3 recommended)");
  if (!(b1 > 1.0)) throw AdaptError("initial geometric ratio b1 must be > 1");
  if (batch_size < 1 || burn_in < batch_size)
    throw AdaptError("burn-in must cover at least one batch");
  TemperatureLadder lad;
  lad.b = b1;
  lad.L = L;
  lad.batch_size = batch_size;
  double k_tilde = static_cast<double>(burn_in) / batch_size;
  lad.delta_b = std::log2(b1) / k_tilde;
  lad.recompute();
  return lad;
}

/// Batch-boundary update b_{k+1} = 2^{log2 b_k +/- delta_b}: compress the
/// ladder when the DR-exchange acceptance is below 0.5, stretch when above,
/// hold on a tie; b is floored at 1.
inline void update_ladder(TemperatureLadder& lad, double batch_dr_acceptance) {
  if (lad.frozen) throw AdaptError("ladder update after freeze");
  double log2b = std::log2(lad.b);
  if (batch_dr_acceptance < 0.5)
    log2b -= lad.delta_b;
  else if (batch_dr_acceptance > 0.5)
    log2b += lad.delta_b;
  lad.b = std::max(1.0, std::exp2(log2b));
  lad.recompute();
}

/// Adaptive Metropolis-within-Gibbs proposal for log(tau), per Roberts and
/// Rosenthal (2008): batched +/- delta_tau(k) steps on the log-sd, clamped.
struct TauProposalState {
  double log_sd = 0.0;
  double initial_log_sd = 0.0;
  double k_tilde = 1.0;      // burn-in batches, fixes the increment cap
  long batch_index = 1;      // k, counted from 1 and including burn-in
  long batch_proposals = 0;
  long batch_accepts = 0;

  static constexpr double kMin = -10.0, kMax = 10.0;

  double increment() const {
    double cap = std::abs(initial_log_sd - 5.0) / k_tilde;
    return std::min(cap, 1.0 / std::sqrt(static_cast<double>(batch_index)));
  }
};

inline TauProposalState init_tau_proposal(double log_sd1, long burn_in,
                                          int batch_size = 100) {
  TauProposalState st;
  st.log_sd = st.initial_log_sd = log_sd1;
  st.k_tilde = std::max(1.0, static_cast<double>(burn_in) / batch_size);
  return st;
}

inline void adapt_tau_proposal(TauProposalState& st, double batch_acceptance) {
  double d = st.increment();
  st.log_sd += batch_acceptance > 0.44 ? d : -d;
  st.log_sd = std::clamp(st.log_sd, TauProposalState::kMin,
                         TauProposalState::kMax);
  ++st.batch_index;
  st.batch_proposals = 0;
  st.batch_accepts = 0;
}

/// One Metropolis-within-Gibbs step on tau (Eq. T24bis): random-walk proposal
/// on log(tau); the acceptance ratio combines every chain's tempered
/// likelihood, the tau hyperprior, and the log-scale Jacobian.
inline bool tau_mwg_step(Population& pop, const Dataset& ds,
                         const PriorSpec& spec, TauProposalState& st,
                         Rng& rng) {
  if (spec.tau_mode == TauMode::Fixed)
    throw AdaptError("tau step requested with fixed tau");
  ++st.batch_proposals;
  double lambda = std::log(pop.tau);
  double lambda_new = lambda + rng.normal() * std::exp(st.log_sd);
  double tau_new = std::exp(lambda_new);
  double log_ratio = log_tau_prior(tau_new, spec) -
                     log_tau_prior(pop.tau, spec) + (lambda_new - lambda);
  std::vector<double> lik_new(pop.L());
  std::vector<double> s_new(pop.L(), 0.0);
  for (int l = 0; l < pop.L(); ++l) {
    const ChainState& c = pop.chains[l];
    if (spec.family == PriorFamily::GPrior) {
      lik_new[l] = log_marginal_gprior_from_fit(c.fit, c.gamma.size(), tau_new,
                                                ds, spec.a_sigma, spec.b_sigma)
                       .value;
    } else {
      LogMarginal lm = log_marginal_indep(c.gamma, tau_new, ds, spec.a_sigma,
                                          spec.b_sigma);
      lik_new[l] = lm.value;
      s_new[l] = lm.s_gamma;
    }
    log_ratio += (lik_new[l] - c.log_lik) / c.temperature;
  }
  bool accept = std::isfinite(log_ratio) &&
                (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio);
  if (accept) {
    pop.tau = tau_new;
    for (int l = 0; l < pop.L(); ++l) {
      pop.chains[l].log_lik = lik_new[l];
      if (spec.family == PriorFamily::Independent)
        pop.chains[l].fit = s_new[l];
    }
    ++st.batch_accepts;
  }
  return accept;
}

}  // namespace ess
