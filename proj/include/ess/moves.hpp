#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "ess/dataset.hpp"
#include "ess/likelihood.hpp"
#include "ess/model_indicator.hpp"
#include "ess/priors.hpp"
#include "ess/rng.hpp"

namespace ess {

enum class MoveKind {
  Gibbs,
  FSMH,
  MC3,
  Crossover1pt,
  CrossoverUnif,
  CrossoverAdaptive,
  CrossoverBlock,
  DRExchangeStage1,
  DRExchangeStage2,
  AllExchange,
};

enum class CrossoverKind { OnePoint, Uniform, Adaptive, Block };

inline MoveKind to_move_kind(CrossoverKind k) {
  switch (k) {
    case CrossoverKind::OnePoint: return MoveKind::Crossover1pt;
    case CrossoverKind::Uniform: return MoveKind::CrossoverUnif;
    case CrossoverKind::Adaptive: return MoveKind::CrossoverAdaptive;
    case CrossoverKind::Block: return MoveKind::CrossoverBlock;
  }
  return MoveKind::Crossover1pt;
}

struct ChainState {
  ModelIndicator gamma;
  double temperature = 1.0;
  double log_lik = 0.0;    // log p(y|gamma,tau), unnormalized
  double log_prior = 0.0;  // log p(gamma)
  // g-prior: tau-free projection fit y'X_g(X_g'X_g)^{-1}X_g'y (fast tau path)
  // independent prior: S(gamma) at the current tau
  double fit = 0.0;

  double f() const { return log_lik + log_prior; }
};

struct Population {
  std::vector<ChainState> chains;
  double tau = 1.0;

  int L() const { return static_cast<int>(chains.size()); }
};

struct MoveOutcome {
  MoveKind kind = MoveKind::FSMH;
  bool accepted = false;
  bool no_op = false;        // crossover offspring identical to parents
  bool nan_guard = false;    // non-finite ratio forced a rejection
  int chain_a = -1, chain_b = -1;
  long models_evaluated = 0;
  long proposals = 0, accepts = 0;  // per-index counts for scan moves
};

/// Evaluates (log_lik, fit) for a candidate model under the run's family.
inline std::pair<double, double> eval_log_lik(const ModelIndicator& gamma,
                                              double tau, const Dataset& ds,
                                              const PriorSpec& spec) {
  if (spec.family == PriorFamily::GPrior) {
    double fit = projection_fit(gamma, ds);
    return {log_marginal_gprior_from_fit(fit, gamma.size(), tau, ds,
                                         spec.a_sigma, spec.b_sigma)
                .value,
            fit};
  }
  LogMarginal lm =
      log_marginal_indep(gamma, tau, ds, spec.a_sigma, spec.b_sigma);
  return {lm.value, lm.s_gamma};
}

/// R^2 of a chain's current model from its caches.
inline double chain_r_squared(const ChainState& c, double tau,
                              const Dataset& ds, PriorFamily family) {
  if (family == PriorFamily::GPrior)
    return tau / (1.0 + tau) * c.fit / ds.yty;
  return 1.0 - c.fit / ds.yty;
}

/// Recomputes every cached quantity of a chain from its gamma.
inline void refresh_chain(ChainState& c, double tau, const Dataset& ds,
                          const PriorSpec& spec) {
  auto [lik, fit] = eval_log_lik(c.gamma, tau, ds, spec);
  c.log_lik = lik;
  c.fit = fit;
  c.log_prior = log_model_prior(c.gamma, spec, ds.p);
}

/// Recomputes log_lik only, after a change of tau. For g-priors this reuses
/// the cached tau-free fit; independent priors refactorize.
inline void reweight_chain(ChainState& c, double tau, const Dataset& ds,
                           const PriorSpec& spec) {
  if (spec.family == PriorFamily::GPrior) {
    c.log_lik = log_marginal_gprior_from_fit(c.fit, c.gamma.size(), tau, ds,
                                             spec.a_sigma, spec.b_sigma)
                    .value;
  } else {
    LogMarginal lm =
        log_marginal_indep(c.gamma, tau, ds, spec.a_sigma, spec.b_sigma);
    c.log_lik = lm.value;
    c.fit = lm.s_gamma;
  }
}

/// Largest cache discrepancy across the population (test/audit hook).
inline double max_cache_error(const Population& pop, const Dataset& ds,
                              const PriorSpec& spec) {
  double err = 0.0;
  for (const ChainState& c : pop.chains) {
    ChainState fresh = c;
    refresh_chain(fresh, pop.tau, ds, spec);
    err = std::max(err, std::abs(fresh.log_lik - c.log_lik));
    err = std::max(err, std::abs(fresh.log_prior - c.log_prior));
  }
  return err;
}

/// Full Gibbs scan (Eq. T34 form): every index resampled in sweep order from
/// the normalized tempered conditional.
inline MoveOutcome gibbs_full_scan(ChainState& chain, double tau,
                                   const Dataset& ds, const PriorSpec& spec,
                                   Rng& rng) {
  MoveOutcome out;
  out.kind = MoveKind::Gibbs;
  out.accepted = true;
  const double t = chain.temperature;
  for (int j = 0; j < ds.p; ++j) {
    bool cur = chain.gamma.contains(j);
    ModelIndicator alt = chain.gamma;
    alt.flip(j);
    auto [alt_lik, alt_fit] = eval_log_lik(alt, tau, ds, spec);
    double alt_prior = log_model_prior(alt, spec, ds.p);
    ++out.models_evaluated;
    ++out.proposals;
    double f1 = cur ? chain.f() : alt_lik + alt_prior;
    double f0 = cur ? alt_lik + alt_prior : chain.f();
    double pr1 = 1.0 / (1.0 + std::exp((f0 - f1) / t));
    bool next = rng.uniform() < pr1;
    if (next != cur) {
      chain.gamma = std::move(alt);
      chain.log_lik = alt_lik;
      chain.fit = alt_fit;
      chain.log_prior = alt_prior;
      ++out.accepts;
    }
  }
  return out;
}

/// Tempered prior inclusion weight theta-tilde^(1)(1/t) of Prop. 3.
inline double theta_tilde_one(double theta1, double t) {
  double a = std::pow(theta1, 1.0 / t);
  double b = std::pow(1.0 - theta1, 1.0 / t);
  return a / (a + b);
}

/// Fast Scan Metropolis-Hastings (Prop. 3): Bernoulli(theta-tilde) proposals
/// over a fresh random permutation; the likelihood is evaluated only when the
/// proposed state differs from the current one (AL6/AL7 acceptance).
inline MoveOutcome fsmh_scan(ChainState& chain, double tau, const Dataset& ds,
                             const PriorSpec& spec, Rng& rng) {
  MoveOutcome out;
  out.kind = MoveKind::FSMH;
  const double t = chain.temperature;
  std::vector<int> perm(ds.p);
  for (int j = 0; j < ds.p; ++j) perm[j] = j;
  for (int j = ds.p - 1; j > 0; --j)
    std::swap(perm[j], perm[rng.below(j + 1)]);
  for (int j : perm) {
    bool cur = chain.gamma.contains(j);
    int size_with_j = cur ? chain.gamma.size() : chain.gamma.size() + 1;
    double th1t = theta_tilde_one(theta_one(size_with_j, ds.p, spec), t);
    bool proposed = rng.uniform() < th1t;
    if (proposed == cur) continue;
    ModelIndicator alt = chain.gamma;
    alt.flip(j);
    auto [alt_lik, alt_fit] = eval_log_lik(alt, tau, ds, spec);
    ++out.models_evaluated;
    ++out.proposals;
    double log_alpha = (alt_lik - chain.log_lik) / t;
    if (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha) {
      chain.gamma = std::move(alt);
      chain.log_lik = alt_lik;
      chain.fit = alt_fit;
      chain.log_prior = log_model_prior(chain.gamma, spec, ds.p);
      ++out.accepts;
    }
  }
  out.accepted = out.accepts > 0;
  return out;
}

/// MC^3 baseline: add/delete or swap, Metropolis under the tempered posterior.
inline MoveOutcome mc3_step(ChainState& chain, double tau, const Dataset& ds,
                            const PriorSpec& spec, Rng& rng) {
  MoveOutcome out;
  out.kind = MoveKind::MC3;
  const double t = chain.temperature;
  const int k = chain.gamma.size();
  ModelIndicator alt = chain.gamma;
  if (rng.uniform() < 0.5) {
    alt.flip(rng.below(ds.p));
  } else {
    if (k == 0 || k == ds.p) {
      ++out.proposals;
      return out;  // swap impossible; counted as rejected, no evaluation
    }
    int drop = chain.gamma.included[rng.below(k)];
    int skip = rng.below(ds.p - k);
    int add = -1;
    for (int j = 0; j < ds.p; ++j) {
      if (chain.gamma.contains(j)) continue;
      if (skip-- == 0) {
        add = j;
        break;
      }
    }
    alt.remove(drop);
    alt.add(add);
  }
  auto [alt_lik, alt_fit] = eval_log_lik(alt, tau, ds, spec);
  double alt_prior = log_model_prior(alt, spec, ds.p);
  ++out.models_evaluated;
  ++out.proposals;
  double log_alpha = (alt_lik + alt_prior - chain.f()) / t;
  if (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha) {
    chain.gamma = std::move(alt);
    chain.log_lik = alt_lik;
    chain.fit = alt_fit;
    chain.log_prior = alt_prior;
    ++out.accepts;
    out.accepted = true;
  }
  return out;
}

/// log Boltzmann-selection probability of chain l given the population's f
/// values: f_l/t_s - logsumexp(f/t_s).
inline double log_selection_prob(const std::vector<double>& fs, double t_s,
                                 int l) {
  double mx = *std::max_element(fs.begin(), fs.end());
  double sum = 0.0;
  for (double f : fs) sum += std::exp((f - mx) / t_s);
  return (fs[l] - mx) / t_s - std::log(sum);
}

/// First parent Boltzmann-weighted at selection temperature t_s, second
/// uniform among the rest.
inline std::pair<int, int> select_parents(const Population& pop, double t_s,
                                          Rng& rng) {
  const int L = pop.L();
  std::vector<double> fs(L);
  for (int l = 0; l < L; ++l) fs[l] = pop.chains[l].f();
  double mx = *std::max_element(fs.begin(), fs.end());
  double total = 0.0;
  std::vector<double> w(L);
  for (int l = 0; l < L; ++l) total += w[l] = std::exp((fs[l] - mx) / t_s);
  double u = rng.uniform() * total;
  int first = L - 1;
  for (int l = 0; l < L; ++l) {
    u -= w[l];
    if (u < 0.0) {
      first = l;
      break;
    }
  }
  int second = rng.below(L - 1);
  if (second >= first) ++second;
  return {first, second};
}

namespace detail {

/// Swap-mask (locus set exchanged between the two parents) per operator.
inline std::vector<int> crossover_mask(const Population& pop,
                                       CrossoverKind kind, int l, int r,
                                       const Dataset& ds, double rho0,
                                       Rng& rng) {
  std::vector<int> loci;
  const int p = ds.p;
  switch (kind) {
    case CrossoverKind::OnePoint: {
      int cut = 1 + rng.below(p - 1);
      for (int j = cut; j < p; ++j) loci.push_back(j);
      break;
    }
    case CrossoverKind::Uniform: {
      for (int j = 0; j < p; ++j)
        if (rng.uniform() < 0.5) loci.push_back(j);
      break;
    }
    case CrossoverKind::Adaptive: {
      // per-locus swap probability = population disagreement frequency
      // 2 m_j (L - m_j) / (L (L-1)); m_j is invariant under state swaps
      // between chains, so the mask probability cancels in the MH ratio
      const int L = pop.L();
      std::vector<int> m(p, 0);
      for (const ChainState& c : pop.chains)
        for (int j : c.gamma.included) ++m[j];
      double denom = static_cast<double>(L) * (L - 1);
      for (int j = 0; j < p; ++j) {
        double d = 2.0 * m[j] * (L - m[j]) / denom;
        if (rng.uniform() < d) loci.push_back(j);
      }
      break;
    }
    case CrossoverKind::Block: {
      int anchor = rng.below(p);
      const auto xa = ds.X.col(anchor);
      double na = xa.norm();
      for (int j = 0; j < p; ++j) {
        if (j == anchor) {
          loci.push_back(j);
          continue;
        }
        double nj = ds.X.col(j).norm();
        if (na < 1e-12 || nj < 1e-12) continue;
        if (std::abs(xa.dot(ds.X.col(j))) >= rho0 * na * nj)
          loci.push_back(j);
      }
      break;
    }
  }
  (void)l;
  (void)r;
  return loci;
}

inline void swap_states(ChainState& a, ChainState& b) {
  std::swap(a.gamma, b.gamma);
  std::swap(a.log_lik, b.log_lik);
  std::swap(a.log_prior, b.log_prior);
  std::swap(a.fit, b.fit);
  // temperatures stay attached to the chain slots
}

}  // namespace detail

/// One crossover move (Eq. T29): Boltzmann parent selection, operator-defined
/// locus exchange, joint Metropolis-Hastings acceptance with the selection
/// probabilities entering the proposal ratio.
inline MoveOutcome crossover(Population& pop, CrossoverKind kind,
                             const Dataset& ds, const PriorSpec& spec,
                             double rho0, double t_s, Rng& rng) {
  MoveOutcome out;
  out.kind = to_move_kind(kind);
  auto [l, r] = select_parents(pop, t_s, rng);
  out.chain_a = l;
  out.chain_b = r;
  ++out.proposals;
  ChainState& cl = pop.chains[l];
  ChainState& cr = pop.chains[r];
  std::vector<int> loci = detail::crossover_mask(pop, kind, l, r, ds, rho0, rng);
  ModelIndicator gl = cl.gamma, gr = cr.gamma;
  for (int j : loci) {
    bool a = gl.contains(j), b = gr.contains(j);
    if (a != b) {
      gl.flip(j);
      gr.flip(j);
    }
  }
  if (gl == cl.gamma && gr == cr.gamma) {
    out.accepted = true;
    out.no_op = true;
    return out;
  }
  auto [lik_l, fit_l] = eval_log_lik(gl, pop.tau, ds, spec);
  auto [lik_r, fit_r] = eval_log_lik(gr, pop.tau, ds, spec);
  out.models_evaluated = 2;
  double prior_l = log_model_prior(gl, spec, ds.p);
  double prior_r = log_model_prior(gr, spec, ds.p);
  double fl_new = lik_l + prior_l, fr_new = lik_r + prior_r;
  const int L = pop.L();
  std::vector<double> fs(L), fs_new(L);
  for (int i = 0; i < L; ++i) fs[i] = fs_new[i] = pop.chains[i].f();
  fs_new[l] = fl_new;
  fs_new[r] = fr_new;
  double log_alpha = (fl_new - cl.f()) / cl.temperature +
                     (fr_new - cr.f()) / cr.temperature +
                     log_selection_prob(fs_new, t_s, l) -
                     log_selection_prob(fs, t_s, l);
  if (!std::isfinite(log_alpha)) {
    out.nan_guard = true;
    return out;
  }
  if (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha) {
    cl.gamma = std::move(gl);
    cl.log_lik = lik_l;
    cl.log_prior = prior_l;
    cl.fit = fit_l;
    cr.gamma = std::move(gr);
    cr.log_lik = lik_r;
    cr.log_prior = prior_r;
    cr.fit = fit_r;
    out.accepted = true;
    ++out.accepts;
  }
  return out;
}

/// Stage-1 exchange acceptance between chain slots l and r.
inline double exchange_alpha1(const Population& pop, int l, int r) {
  const ChainState& cl = pop.chains[l];
  const ChainState& cr = pop.chains[r];
  double e = (cr.f() - cl.f()) * (1.0 / cl.temperature - 1.0 / cr.temperature);
  return std::min(1.0, std::exp(e));
}

/// Delayed-rejection exchange: a bold uniform pair first; if rejected, an
/// adjacent pair sharing the first chain, with the Green-Mira correction
/// factor computed through the pseudo move (stage-1 pair re-applied from the
/// stage-2 proposal).
inline MoveOutcome dr_exchange(Population& pop, Rng& rng) {
  MoveOutcome out;
  out.kind = MoveKind::DRExchangeStage1;
  const int L = pop.L();
  int pair_idx = rng.below(L * (L - 1) / 2);
  int l = 0, r = 1;
  for (int i = 0, h = 0; i < L; ++i)
    for (int j = i + 1; j < L; ++j, ++h)
      if (h == pair_idx) {
        l = i;
        r = j;
      }
  ++out.proposals;
  double a1 = exchange_alpha1(pop, l, r);
  if (rng.uniform() < a1) {
    detail::swap_states(pop.chains[l], pop.chains[r]);
    out.accepted = true;
    ++out.accepts;
    out.chain_a = l;
    out.chain_b = r;
    return out;
  }
  out.kind = MoveKind::DRExchangeStage2;
  int s = l + (l == 0 ? 1 : l == L - 1 ? -1 : (rng.uniform() < 0.5 ? -1 : 1));
  out.chain_a = l;
  out.chain_b = s;
  ChainState& cl = pop.chains[l];
  ChainState& cs = pop.chains[s];
  double core = (cs.f() - cl.f()) * (1.0 / cl.temperature - 1.0 / cs.temperature);
  // pseudo move: alpha1 of the stage-1 pair evaluated from the stage-2
  // proposed state (f values at slots l and s exchanged)
  auto f_after = [&](int idx) {
    if (idx == l) return cs.f();
    if (idx == s) return cl.f();
    return pop.chains[idx].f();
  };
  double e_pseudo = (f_after(r) - f_after(l)) *
                    (1.0 / pop.chains[l].temperature -
                     1.0 / pop.chains[r].temperature);
  double a1_pseudo = std::min(1.0, std::exp(e_pseudo));
  if (a1_pseudo >= 1.0) return out;  // zero numerator: stage 2 rejected
  double log_alpha2 =
      core + std::log1p(-a1_pseudo) - std::log1p(-a1);
  if (!std::isfinite(log_alpha2)) {
    out.nan_guard = true;
    return out;
  }
  if (log_alpha2 >= 0.0 || std::log(rng.uniform()) < log_alpha2) {
    detail::swap_states(cl, cs);
    out.accepted = true;
    ++out.accepts;
  }
  return out;
}

/// Outcome probabilities of the all-exchange operator (Eq. T32): entry 0 is
/// the rejection pseudo-outcome, entry 1+h the h-th pair (l, r) with l < r in
/// lexicographic order. Weights are capped at exp(700) before normalization.
inline std::vector<double> all_exchange_probs(const Population& pop) {
  const int L = pop.L();
  std::vector<double> w;
  w.push_back(1.0);
  for (int l = 0; l < L; ++l)
    for (int r = l + 1; r < L; ++r) {
      const ChainState& cl = pop.chains[l];
      const ChainState& cr = pop.chains[r];
      double e = (cr.f() - cl.f()) *
                 (1.0 / cl.temperature - 1.0 / cr.temperature);
      w.push_back(std::exp(std::min(e, 700.0)));
    }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

inline MoveOutcome all_exchange(Population& pop, Rng& rng) {
  MoveOutcome out;
  out.kind = MoveKind::AllExchange;
  ++out.proposals;
  std::vector<double> probs = all_exchange_probs(pop);
  double u = rng.uniform();
  std::size_t h = 0;
  for (; h + 1 < probs.size(); ++h) {
    u -= probs[h];
    if (u < 0.0) break;
  }
  if (h == 0) return out;  // rejection outcome
  const int L = pop.L();
  std::size_t idx = 1;
  for (int l = 0; l < L; ++l)
    for (int r = l + 1; r < L; ++r, ++idx)
      if (idx == h) {
        detail::swap_states(pop.chains[l], pop.chains[r]);
        out.accepted = true;
        ++out.accepts;
        out.chain_a = l;
        out.chain_b = r;
        return out;
      }
  return out;
}

}  // namespace ess
