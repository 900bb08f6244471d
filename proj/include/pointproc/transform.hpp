#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pointproc/configuration.hpp"
#include "pointproc/engine.hpp"
#include "pointproc/errors.hpp"
#include "pointproc/integrate.hpp"
#include "pointproc/models.hpp"
#include "pointproc/moments.hpp"
#include "pointproc/report.hpp"

namespace pointproc {

// A random shift x -> tau(x, xi). Deterministic shifts ignore xi. Exvisible
// random shifts declare the structure the hypotheses need: the points the
// rule may move and the zone it may read, which must not overlap.
template <class P>
struct Shift {
  enum class Kind { Deterministic, ExvisibleRandom };

  Kind kind = Kind::Deterministic;
  std::string name = "shift";
  std::function<P(const P&, const Configuration<P>&)> forward;
  std::function<P(const P&, const Configuration<P>&)> inverse;  // empty for forward-only rules
  std::vector<P> moved;           // ExvisibleRandom: points the rule may relocate
  std::vector<P> zone;            // ExvisibleRandom (discrete): sites the rule reads
  double exclusion_radius = 0.0;  // ExvisibleRandom (continuous): reads outside ball(x, r)

  P apply(const P& x, const Configuration<P>& xi) const { return forward(x, xi); }

  P invert(const P& x, const Configuration<P>& xi) const {
    if (!inverse)
      throw UnsupportedVariantError("shift '" + name + "' has no inverse evaluator");
    return inverse(x, xi);
  }
};

using DiscreteShift = Shift<Site>;
using ContinuousShift = Shift<Coord>;

// Deterministic site permutation; image[x] is 0-based.
inline DiscreteShift permutation_shift(std::vector<Site> image) {
  const int m = static_cast<int>(image.size());
  std::vector<Site> inv(static_cast<std::size_t>(m), -1);
  for (Site x = 0; x < m; ++x) {
    const Site y = image[static_cast<std::size_t>(x)];
    if (y < 0 || y >= m || inv[static_cast<std::size_t>(y)] != -1)
      throw BoundError("permutation table must be a bijection on the sites");
    inv[static_cast<std::size_t>(y)] = x;
  }
  DiscreteShift s;
  s.kind = DiscreteShift::Kind::Deterministic;
  s.name = "permutation";
  s.forward = [image](Site x, const DiscreteConfig&) { return image[static_cast<std::size_t>(x)]; };
  s.inverse = [inv](Site x, const DiscreteConfig&) { return inv[static_cast<std::size_t>(x)]; };
  return s;
}

// Exvisible involution: swap sites a and b when the zone site is occupied.
// The zone is disjoint from the moved pair, so the rule never reads the
// configuration at a point it relocates.
inline DiscreteShift conditional_swap_shift(Site a, Site b, Site zone_site) {
  if (a == b || a == zone_site || b == zone_site)
    throw BoundError("conditional swap needs distinct sites with the zone outside the moved pair");
  DiscreteShift s;
  s.kind = DiscreteShift::Kind::ExvisibleRandom;
  s.name = "conditional-swap";
  s.moved = {a, b};
  s.zone = {zone_site};
  s.forward = [a, b, zone_site](Site x, const DiscreteConfig& xi) {
    if (!xi.contains(zone_site)) return x;
    if (x == a) return b;
    if (x == b) return a;
    return x;
  };
  s.inverse = s.forward;  // involution for every zone state
  return s;
}

// Coordinate-wise translation modulo the window; pushes Lebesgue to Lebesgue.
inline ContinuousShift translation_mod_shift(const BoxWindow& w, const Coord& delta) {
  auto wrap = [w](Coord p, const Coord& d, double sign) {
    for (int i = 0; i < w.dim; ++i) {
      const double width = w.hi[i] - w.lo[i];
      double v = std::fmod(p[i] - w.lo[i] + sign * d[i], width);
      if (v < 0) v += width;
      p[i] = w.lo[i] + v;
    }
    return p;
  };
  ContinuousShift s;
  s.kind = ContinuousShift::Kind::Deterministic;
  s.name = "translation-mod";
  s.forward = [wrap, delta](const Coord& x, const ContinuousConfig&) { return wrap(x, delta, 1.0); };
  s.inverse = [wrap, delta](const Coord& x, const ContinuousConfig&) { return wrap(x, delta, -1.0); };
  return s;
}

// Exvisible forward-only rule: translate x by step times the number of points
// of xi outside ball(x, radius), modulo the window.
inline ContinuousShift crowd_translation_shift(const BoxWindow& w, double radius, double step) {
  ContinuousShift s;
  s.kind = ContinuousShift::Kind::ExvisibleRandom;
  s.name = "crowd-translation";
  s.exclusion_radius = radius;
  s.forward = [w, radius, step](const Coord& x, const ContinuousConfig& xi) {
    int outside = 0;
    for (const Coord& y : xi) {
      double d2 = 0.0;
      for (int i = 0; i < w.dim; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
      if (d2 > radius * radius) ++outside;
    }
    Coord p = x;
    for (int i = 0; i < w.dim; ++i) {
      const double width = w.hi[i] - w.lo[i];
      double v = std::fmod(p[i] - w.lo[i] + step * outside, width);
      if (v < 0) v += width;
      p[i] = w.lo[i] + v;
    }
    return p;
  };
  return s;
}

// tau_*(xi): move every point, context fixed to the pre-image configuration.
template <class P>
Configuration<P> push_forward(const Shift<P>& tau, const Configuration<P>& xi) {
  std::vector<P> image;
  image.reserve(static_cast<std::size_t>(xi.size()));
  for (const P& x : xi) image.push_back(tau.apply(x, xi));
  std::sort(image.begin(), image.end());
  if (std::adjacent_find(image.begin(), image.end()) != image.end())
    throw NonInjectiveShiftError("shift '" + tau.name + "' collapsed two points of a configuration");
  return Configuration<P>(std::move(image));
}

namespace detail {

inline std::vector<DiscreteConfig> zone_states(const DiscreteShift& tau) {
  std::vector<DiscreteConfig> states;
  const auto zone = tau.zone;
  const std::uint32_t count = 1u << zone.size();
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    std::vector<Site> pts;
    for (std::size_t i = 0; i < zone.size(); ++i)
      if (mask & (1u << i)) pts.push_back(zone[i]);
    states.emplace_back(std::move(pts));
  }
  return states;
}

}  // namespace detail

// Structural (H1)/(H2) validation on a discrete space: the zone is disjoint
// from the moved points and fixed pointwise, every realized map is a
// bijection, and the declared inverse undoes it at every zone state.
inline void validate_shift(const DiscreteShift& tau, const DiscreteSpace& space) {
  const int m = space.size();
  std::vector<DiscreteConfig> contexts;
  if (tau.kind == DiscreteShift::Kind::Deterministic) {
    contexts.emplace_back();
  } else {
    for (Site x : tau.moved)
      for (Site z : tau.zone)
        if (x == z)
          throw UnsupportedVariantError("shift '" + tau.name +
                                        "' reads the zone it moves; not exvisible");
    contexts = detail::zone_states(tau);
  }
  for (const DiscreteConfig& ctx : contexts) {
    std::vector<Site> seen(static_cast<std::size_t>(m), -1);
    for (Site x = 0; x < m; ++x) {
      const Site y = tau.apply(x, ctx);
      if (y < 0 || y >= m || seen[static_cast<std::size_t>(y)] != -1)
        throw NonInjectiveShiftError("shift '" + tau.name + "' is not a bijection");
      seen[static_cast<std::size_t>(y)] = x;
      if (tau.inverse && tau.invert(y, ctx) != x)
        throw UnsupportedVariantError("shift '" + tau.name + "' inverse does not undo forward");
    }
    for (Site z : tau.zone)
      if (tau.apply(z, ctx) != z)
        throw UnsupportedVariantError("shift '" + tau.name + "' moves its own zone");
  }
}

// sigma = image of lambda. The theorem needs tau(., xi) lambda = sigma for a
// fixed sigma, so every zone state must transport the weights identically.
inline std::vector<double> sigma_weights(const DiscreteShift& tau, const DiscreteSpace& space) {
  validate_shift(tau, space);
  const int m = space.size();
  std::vector<DiscreteConfig> contexts = tau.kind == DiscreteShift::Kind::Deterministic
                                             ? std::vector<DiscreteConfig>{DiscreteConfig{}}
                                             : detail::zone_states(tau);
  std::vector<double> sigma;
  for (const DiscreteConfig& ctx : contexts) {
    std::vector<double> s(static_cast<std::size_t>(m), 0.0);
    for (Site x = 0; x < m; ++x)
      s[static_cast<std::size_t>(tau.apply(x, ctx))] = space.weight(x);
    if (sigma.empty()) {
      sigma = std::move(s);
    } else {
      for (int i = 0; i < m; ++i)
        if (std::fabs(sigma[static_cast<std::size_t>(i)] - s[static_cast<std::size_t>(i)]) > 1e-12)
          throw UnsupportedVariantError(
              "shift '" + tau.name + "' does not push lambda to one fixed sigma");
    }
  }
  return sigma;
}

struct ExvisibilityReport {
  double max_dx_violation = 0.0;  // max |D_x u(x, xi)|
  double max_cycle2 = 0.0;        // max |D_{x1} u(x2, xi) D_{x2} u(x1, xi)|
  double max_cycle3 = 0.0;
  double max_violation() const {
    return std::max(max_dx_violation, std::max(max_cycle2, max_cycle3));
  }
};

// Numeric exvisibility probe over finite test families: the diagonal
// difference D_x u(x, xi) and the cyclic products for k = 2, 3.
template <class P>
ExvisibilityReport check_exvisibility(
    std::span<const std::function<double(const P&, const Configuration<P>&)>> components,
    std::span<const P> pts, std::span<const Configuration<P>> configs) {
  ExvisibilityReport rep;
  auto dop = [](const auto& u, const P& x, const P& y, const Configuration<P>& xi) {
    return u(y, xi.with(x)) - u(y, xi.without(x));
  };
  for (const auto& u : components) {
    for (const auto& xi : configs) {
      for (const P& x : pts)
        rep.max_dx_violation = std::max(rep.max_dx_violation, std::fabs(dop(u, x, x, xi)));
      for (const P& x1 : pts)
        for (const P& x2 : pts) {
          if (x1 == x2) continue;
          const double c2 = dop(u, x1, x2, xi) * dop(u, x2, x1, xi);
          rep.max_cycle2 = std::max(rep.max_cycle2, std::fabs(c2));
          for (const P& x3 : pts) {
            if (x3 == x1 || x3 == x2) continue;
            const double c3 = dop(u, x1, x2, xi) * dop(u, x2, x3, xi) * dop(u, x3, x1, xi);
            rep.max_cycle3 = std::max(rep.max_cycle3, std::fabs(c3));
          }
        }
    }
  }
  return rep;
}

// rho_tau(alpha) = E[chat({tau^{-1}(a, xi) : a in alpha}, xi)], with respect
// to sigma on the target side.
template <class Model, class Engine>
Stat transformed_correlation(const Model& model, const Engine& eng,
                             const Shift<typename Model::Point>& tau,
                             std::span<const typename Model::Point> alpha) {
  using P = typename Model::Point;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (std::size_t j = i + 1; j < alpha.size(); ++j)
      if (alpha[i] == alpha[j]) throw BoundError("target points must be distinct");
  return eng.expect([&](const typename Model::Config& xi) {
    std::vector<P> pre;
    pre.reserve(alpha.size());
    for (const P& a : alpha) pre.push_back(tau.invert(a, xi));
    return model.compound_tuple(pre, xi);
  });
}

// Exact law of tau_* xi on a discrete space, together with sigma weights.
inline ExactDistribution pushforward_law(const DiscreteModel& model, const DiscreteShift& tau) {
  const int m = model.space().size();
  if (m > 12) throw BoundError("exact pushforward supports at most 12 sites");
  const ExactDistribution dist = model.exact_distribution();
  std::vector<double> pushed(dist.states(), 0.0);
  dist.for_each([&](const DiscreteConfig& xi, double p) {
    pushed[to_mask(push_forward(tau, xi))] += p;
  });
  return ExactDistribution(DiscreteSpace(sigma_weights(tau, model.space())), std::move(pushed));
}

inline double total_variation(const ExactDistribution& a, const ExactDistribution& b) {
  if (a.states() != b.states()) throw BoundError("laws live on different spaces");
  double tv = 0.0;
  for (std::uint32_t mask = 0; mask < a.states(); ++mask)
    tv += std::fabs(a.prob(mask) - b.prob(mask));
  return 0.5 * tv;
}

// Correlation function of a discrete law: P(alpha in xi) / prod sigma(alpha).
inline double law_correlation(const ExactDistribution& law, const DiscreteConfig& alpha) {
  double denom = 1.0;
  for (Site x : alpha) denom *= law.space().weight(x);
  return law.subset_probability(alpha) / denom;
}

// Compares the transformed-correlation formula against the exact pushforward
// law, over every distinct target tuple of size <= max_order. lhs is the
// largest absolute gap; rhs is 0.
template <class Engine>
IdentityReport verify_pushforward_law(const DiscreteModel& model, const Engine& eng,
                                      const DiscreteShift& tau, int max_order = 3,
                                      double tol = 1e-10) {
  const ExactDistribution pushed = pushforward_law(model, tau);
  const int m = model.space().size();
  IdentityReport r;
  r.identity = "transform-law";
  r.mode = Engine::is_exact ? CheckMode::Exact : CheckMode::MonteCarlo;
  double max_gap = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    const int order = std::popcount(mask);
    if (order > max_order) continue;
    const DiscreteConfig alpha = from_mask(mask, m);
    const Stat formula = transformed_correlation(model, eng, tau, alpha.points());
    const double direct = law_correlation(pushed, alpha);
    const double gap = std::fabs(formula.value - direct);
    max_gap = std::max(max_gap, gap);
    r.terms.push_back({"alpha=" + to_line(alpha), gap, formula.se});
  }
  r.lhs = max_gap;
  r.rhs = 0.0;
  r.tolerance = tol;
  r.pass = max_gap <= tol;
  r.notes.push_back("max |rho_tau - pushforward correlation| with respect to sigma, orders <= " +
                    std::to_string(max_order));
  return r;
}

// Kernel of the pushed determinantal process under a deterministic bijection:
// K_tau(x, y) = K(tau^{-1} x, tau^{-1} y). Random shifts need not produce a
// determinantal law, so they are rejected.
inline Matrix transform_dpp_kernel(const Matrix& kernel, const DiscreteShift& tau) {
  if (tau.kind != DiscreteShift::Kind::Deterministic)
    throw UnsupportedVariantError("kernel transport requires a deterministic shift");
  const int m = kernel.size();
  Matrix out(m);
  const DiscreteConfig none;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out(i, j) = kernel(tau.invert(i, none), tau.invert(j, none));
  return out;
}

// Monte Carlo variant for continuous models: product moments of the pushed
// samples against the rho_tau-weighted partition sum. Supported for shifts
// that preserve the window's reference measure (sigma = lambda).
inline IdentityReport verify_pushforward_law_mc(const ContinuousModel& model,
                                                std::span<const ContinuousConfig> samples,
                                                const ContinuousShift& tau,
                                                std::span<const PointFn<ContinuousModel>> vs,
                                                const CheckOpts& opts) {
  std::vector<ContinuousConfig> pushed;
  pushed.reserve(samples.size());
  for (const auto& xi : samples) pushed.push_back(push_forward(tau, xi));
  ContinuousMonteCarloEngine pushed_eng{std::span<const ContinuousConfig>(pushed)};
  Stat lhs = pushed_eng.expect([&](const ContinuousConfig& eta) {
    double v = 1.0;
    for (const auto& f : vs) v *= point_sum([&](const Coord& x, const auto&) { return f(x); }, eta);
    return v;
  });
  const int n = static_cast<int>(vs.size());
  double rhs = 0.0;
  for (const Partition& part : enumerate_partitions(n)) {
    double term = 0.0;
    for_each_tuple(model.window(), part.block_count(), opts.quad,
                   [&](std::span<const Coord> xs, double wgt) {
                     double rho_sum = 0.0;
                     for (const auto& xi : samples) {
                       std::vector<Coord> pre;
                       pre.reserve(xs.size());
                       for (const Coord& a : xs) pre.push_back(tau.invert(a, xi));
                       rho_sum += model.compound_tuple(pre, xi);
                     }
                     double prod = rho_sum / static_cast<double>(samples.size());
                     for (int l = 0; l < part.block_count(); ++l)
                       for (int i : part.blocks()[static_cast<std::size_t>(l)])
                         prod *= vs[static_cast<std::size_t>(i - 1)](xs[static_cast<std::size_t>(l)]);
                     term += wgt * prod;
                   });
    rhs += term;
  }
  IdentityReport r = IdentityReport::monte_carlo("transform-law", lhs.value, lhs.se, rhs, 0.0,
                                                 lhs.se, opts.z_crit);
  r.notes.push_back("continuous pushforward check with sigma = lambda");
  return r;
}

}  // namespace pointproc
