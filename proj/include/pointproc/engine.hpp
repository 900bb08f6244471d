#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "pointproc/configuration.hpp"
#include "pointproc/models.hpp"
#include "pointproc/stats.hpp"

namespace pointproc {

// Joint statistics of a vector-valued functional of xi. Component 0/1 are by
// convention the two sides of an identity; diff01_se is the standard error of
// their difference under common samples (0 in exact mode).
struct VecStats {
  std::vector<Stat> comp;
  double diff01_se = 0.0;
};

// Expectations summed over the full exact law (the oracle path).
class ExactEngine {
 public:
  explicit ExactEngine(const ExactDistribution& dist) : dist_(&dist) {}

  static constexpr bool is_exact = true;
  using Config = DiscreteConfig;

  template <class G>
  Stat expect(G&& g) const {
    Stat s;
    s.value = dist_->expect(g);
    s.exact = true;
    s.n = dist_->states();
    return s;
  }

  // g fills out[0..ncomp) for one configuration.
  template <class G>
  VecStats expect_vec(int ncomp, G&& g) const {
    VecStats r;
    r.comp.assign(static_cast<std::size_t>(ncomp), Stat{});
    std::vector<double> buf(static_cast<std::size_t>(ncomp));
    dist_->for_each([&](const DiscreteConfig& xi, double p) {
      for (double& b : buf) b = 0.0;
      g(xi, std::span<double>(buf));
      for (int i = 0; i < ncomp; ++i) r.comp[static_cast<std::size_t>(i)].value += p * buf[static_cast<std::size_t>(i)];
    });
    for (auto& c : r.comp) {
      c.exact = true;
      c.n = dist_->states();
    }
    return r;
  }

  const ExactDistribution& distribution() const { return *dist_; }

 private:
  const ExactDistribution* dist_;
};

// Sample-mean expectations over a fixed batch. Sharing one batch across both
// sides of an identity gives the paired (common-random-numbers) error used
// for the pass decision.
template <class P>
class MonteCarloEngine {
 public:
  explicit MonteCarloEngine(std::span<const Configuration<P>> samples) : samples_(samples) {}

  static constexpr bool is_exact = false;
  using Config = Configuration<P>;

  template <class G>
  Stat expect(G&& g) const {
    Stat s;
    s.n = samples_.size();
    if (samples_.empty()) return s;
    double sum = 0.0, sumsq = 0.0;
    for (const auto& xi : samples_) {
      const double v = g(xi);
      sum += v;
      sumsq += v * v;
    }
    const double n = static_cast<double>(samples_.size());
    s.value = sum / n;
    if (samples_.size() > 1) {
      const double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1.0));
      s.se = std::sqrt(var / n);
    }
    return s;
  }

  template <class G>
  VecStats expect_vec(int ncomp, G&& g) const {
    VecStats r;
    r.comp.assign(static_cast<std::size_t>(ncomp), Stat{});
    if (samples_.empty()) return r;
    std::vector<double> sum(static_cast<std::size_t>(ncomp), 0.0);
    std::vector<double> sumsq(static_cast<std::size_t>(ncomp), 0.0);
    double dsum = 0.0, dsumsq = 0.0;
    std::vector<double> buf(static_cast<std::size_t>(ncomp));
    for (const auto& xi : samples_) {
      for (double& b : buf) b = 0.0;
      g(xi, std::span<double>(buf));
      for (int i = 0; i < ncomp; ++i) {
        sum[static_cast<std::size_t>(i)] += buf[static_cast<std::size_t>(i)];
        sumsq[static_cast<std::size_t>(i)] += buf[static_cast<std::size_t>(i)] * buf[static_cast<std::size_t>(i)];
      }
      if (ncomp >= 2) {
        const double d = buf[0] - buf[1];
        dsum += d;
        dsumsq += d * d;
      }
    }
    const double n = static_cast<double>(samples_.size());
    for (int i = 0; i < ncomp; ++i) {
      auto& c = r.comp[static_cast<std::size_t>(i)];
      c.value = sum[static_cast<std::size_t>(i)] / n;
      c.n = samples_.size();
      if (samples_.size() > 1) {
        const double var = std::max(
            0.0, (sumsq[static_cast<std::size_t>(i)] -
                  sum[static_cast<std::size_t>(i)] * sum[static_cast<std::size_t>(i)] / n) /
                     (n - 1.0));
        c.se = std::sqrt(var / n);
      }
    }
    if (ncomp >= 2 && samples_.size() > 1) {
      const double var = std::max(0.0, (dsumsq - dsum * dsum / n) / (n - 1.0));
      r.diff01_se = std::sqrt(var / n);
    }
    return r;
  }

  std::span<const Configuration<P>> samples() const { return samples_; }

 private:
  std::span<const Configuration<P>> samples_;
};

using DiscreteMonteCarloEngine = MonteCarloEngine<Site>;
using ContinuousMonteCarloEngine = MonteCarloEngine<Coord>;

}  // namespace pointproc
