#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ess/dataset.hpp"
#include "ess/likelihood.hpp"
#include "ess/priors.hpp"

// Exhaustive enumeration of p(gamma|y, tau) over all 2^p models for small p.
// This is the ground truth the sampler is validated against; it is exposed
// through the `oracle` CLI subcommand as well.

namespace ess {

struct ExactPosterior {
  int p = 0;
  std::vector<double> log_post;   // unnormalized, indexed by bit mask
  std::vector<double> prob;       // normalized posterior per mask
  std::vector<double> inclusion;  // exact marginal inclusion per covariate
  std::vector<double> size_pmf;   // exact posterior of p_gamma
};

inline ExactPosterior enumerate_posterior(const Dataset& ds,
                                          const PriorSpec& spec, double tau) {
  if (ds.p > 20)
    throw std::invalid_argument(
        "exhaustive enumeration supports p <= 20 (2^p models)");
  ExactPosterior ex;
  ex.p = ds.p;
  const std::uint64_t m = 1ull << ds.p;
  ex.log_post.resize(m);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < m; ++mask) {
    ModelIndicator g = ModelIndicator::from_mask(mask, ds.p);
    ex.log_post[mask] =
        log_marginal(g, tau, ds, spec).value + log_model_prior(g, spec, ds.p);
    mx = std::max(mx, ex.log_post[mask]);
  }
  ex.prob.resize(m);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < m; ++mask)
    total += ex.prob[mask] = std::exp(ex.log_post[mask] - mx);
  ex.inclusion.assign(ds.p, 0.0);
  ex.size_pmf.assign(ds.p + 1, 0.0);
  for (std::uint64_t mask = 0; mask < m; ++mask) {
    ex.prob[mask] /= total;
    ex.size_pmf[std::popcount(mask)] += ex.prob[mask];
    for (int j = 0; j < ds.p; ++j)
      if (mask >> j & 1) ex.inclusion[j] += ex.prob[mask];
  }
  return ex;
}

/// Total-variation distance between empirical visit counts (indexed by mask)
/// and the exact posterior.
inline double tv_distance(const std::vector<long>& counts,
                          const ExactPosterior& ex) {
  long n = 0;
  for (long c : counts) n += c;
  double tv = 0.0;
  for (std::size_t mask = 0; mask < ex.prob.size(); ++mask) {
    double emp = mask < counts.size() ? static_cast<double>(counts[mask]) / n
                                      : 0.0;
    tv += std::abs(emp - ex.prob[mask]);
  }
  return 0.5 * tv;
}

}  // namespace ess
