#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pointproc/configuration.hpp"
#include "pointproc/errors.hpp"
#include "pointproc/linalg.hpp"
#include "pointproc/models.hpp"
#include "pointproc/rng.hpp"

namespace pointproc {

struct ChainDiagnostics {
  double birth_acceptance = 0.0;
  double death_acceptance = 0.0;
  long burn_in = 0;
  long steps_per_sample = 0;
  int replicas = 1;
};

// Reproducible batch: same (seed, model, parameters) gives the identical
// batch regardless of how replicas are scheduled, because every replica/draw
// owns a counter-derived stream.
template <class P>
struct SampleBatch {
  std::vector<Configuration<P>> configs;
  std::uint64_t seed = 0;
  std::string model;
  ChainDiagnostics diag;
};

using DiscreteBatch = SampleBatch<Site>;
using ContinuousBatch = SampleBatch<Coord>;

// Exact inversion sampling from the brute-force law.
inline DiscreteBatch sample_discrete(const DiscreteModel& model, long count, std::uint64_t seed) {
  const ExactDistribution dist = model.exact_distribution();
  std::vector<double> cdf(dist.probs().begin(), dist.probs().end());
  for (std::size_t i = 1; i < cdf.size(); ++i) cdf[i] += cdf[i - 1];
  DiscreteBatch batch;
  batch.seed = seed;
  batch.model = model.describe();
  batch.configs.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const double v = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), v);
    const auto mask = static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(
        it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    batch.configs.push_back(from_mask(mask, model.space().size()));
  }
  return batch;
}

// Direct Poisson sampling on a box window: total count Poisson(int z dlambda),
// locations independent with density proportional to z (by thinning).
inline ContinuousBatch sample_poisson_window(const ContinuousModel& model, long count,
                                             std::uint64_t seed) {
  if (model.family() != Family::Poisson)
    throw UnsupportedVariantError("sample_poisson_window requires a Poisson model");
  const BoxWindow& w = model.window();
  const double zmax = model.intensity_bound();
  if (!std::isfinite(zmax)) throw InvalidModelError("intensity must be bounded on the window");
  const double dominating_mean = zmax * w.measure();
  ContinuousBatch batch;
  batch.seed = seed;
  batch.model = model.describe();
  batch.configs.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const long n = rng.poisson(dominating_mean);
    std::vector<Coord> pts;
    for (long j = 0; j < n; ++j) {
      Coord p{0, 0, 0};
      for (int d = 0; d < w.dim; ++d) p[d] = rng.uniform(w.lo[d], w.hi[d]);
      const double accept = zmax > 0.0 ? model.intensity(p) / zmax : 0.0;
      if (rng.uniform() < accept) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    batch.configs.emplace_back(std::move(pts));
  }
  return batch;
}

struct BirthDeathOpts {
  long steps_per_sample = 0;  // 0: 50 * (expected cardinality + 1)
  long burn_in = -1;          // <0: 100 * steps_per_sample
  int replicas = 1;
};

// Birth-death Metropolis-Hastings with stationary law mu. Birth proposes x
// from lambda restricted to the window and accepts with
// min(1, |W| c(x,xi) / (|xi|+1)); death removes a uniform point x and accepts
// with min(1, |xi| / (|W| c(x, xi\x))), where |W| is the lambda-mass of the
// window. A zero intensity in the death denominator means the reverse birth
// is impossible, so the death is accepted outright.
inline ContinuousBatch sample_gibbs_birth_death(const ContinuousModel& model, long count,
                                                std::uint64_t seed,
                                                const BirthDeathOpts& opts = {}) {
  const BoxWindow& w = model.window();
  const double wmass = w.measure();
  const double expected = model.intensity_bound() * wmass;
  const long steps = opts.steps_per_sample > 0
                         ? opts.steps_per_sample
                         : static_cast<long>(50.0 * (expected + 1.0));
  const long burn = opts.burn_in >= 0 ? opts.burn_in : 100 * steps;
  const int replicas = std::max(1, opts.replicas);
  const long per_replica = (count + replicas - 1) / replicas;

  ContinuousBatch batch;
  batch.seed = seed;
  batch.model = model.describe();
  batch.diag.steps_per_sample = steps;
  batch.diag.burn_in = burn;
  batch.diag.replicas = replicas;

  long birth_prop = 0, birth_acc = 0, death_prop = 0, death_acc = 0;
  for (int rep = 0; rep < replicas && static_cast<long>(batch.configs.size()) < count; ++rep) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(rep));
    ContinuousConfig xi;
    long emitted = 0;
    for (long step = 0; emitted < per_replica &&
                        static_cast<long>(batch.configs.size()) < count;
         ++step) {
      if (rng.coin()) {
        ++birth_prop;
        Coord p{0, 0, 0};
        for (int d = 0; d < w.dim; ++d) p[d] = rng.uniform(w.lo[d], w.hi[d]);
        const double c = model.papangelou(p, xi);
        const double ratio = wmass * c / (xi.size() + 1.0);
        if (ratio >= 1.0 || rng.uniform() < ratio) {
          xi = xi.with(p);
          ++birth_acc;
        }
      } else if (!xi.empty()) {
        ++death_prop;
        const auto& pts = xi.points();
        const Coord p = pts[static_cast<std::size_t>(rng.below(pts.size()))];
        const ContinuousConfig rest = xi.without(p);
        const double c = model.papangelou(p, rest);
        bool accept = true;
        if (c > 0.0) {
          const double ratio = static_cast<double>(xi.size()) / (wmass * c);
          accept = ratio >= 1.0 || rng.uniform() < ratio;
        }
        if (accept) {
          xi = rest;
          ++death_acc;
        }
      }
      if (step >= burn && (step - burn) % steps == 0) {
        batch.configs.push_back(xi);
        ++emitted;
      }
    }
  }
  batch.diag.birth_acceptance = birth_prop ? static_cast<double>(birth_acc) / birth_prop : 0.0;
  batch.diag.death_acceptance = death_prop ? static_cast<double>(death_acc) / death_prop : 0.0;
  return batch;
}

// The same birth-death kernel on a discrete model, as an explicit transition
// matrix over all 2^m states. Row-stochastic; used to verify detailed balance
// against the exact law.
inline Matrix birth_death_transition_matrix(const DiscreteModel& model) {
  const int m = model.space().size();
  if (m > 12) throw BoundError("transition matrix supports at most 12 sites");
  const double wmass = model.space().total_weight();
  const int states = 1 << m;
  Matrix t(states);
  for (int a = 0; a < states; ++a) {
    const DiscreteConfig xi = from_mask(static_cast<std::uint32_t>(a), m);
    double stay = 1.0;
    for (Site x = 0; x < m; ++x) {
      if (!xi.contains(x)) {
        // birth of x: proposal mass lambda(x)/|W|, acceptance as above
        double c;
        try {
          c = model.papangelou(x, xi);
        } catch (const DegenerateConfigurationError&) {
          continue;  // unreachable state; leave the row lazily at identity
        }
        const double ratio = std::min(1.0, wmass * c / (xi.size() + 1.0));
        const double p = 0.5 * (model.space().weight(x) / wmass) * ratio;
        t(a, a | (1 << x)) = p;
        stay -= p;
      } else {
        // death of x
        const DiscreteConfig rest = xi.without(x);
        double c;
        try {
          c = model.papangelou(x, rest);
        } catch (const DegenerateConfigurationError&) {
          c = 0.0;
        }
        double ratio = 1.0;
        if (c > 0.0) ratio = std::min(1.0, static_cast<double>(xi.size()) / (wmass * c));
        const double p = 0.5 * (1.0 / xi.size()) * ratio;
        t(a, a & ~(1 << x)) = p;
        stay -= p;
      }
    }
    t(a, a) = stay;
  }
  return t;
}

}  // namespace pointproc
