#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pointproc/configuration.hpp"
#include "pointproc/errors.hpp"
#include "pointproc/linalg.hpp"
#include "pointproc/stats.hpp"

namespace pointproc {

// J = K (I - K)^{-1}: same eigenvectors as K, eigenvalues k/(1-k).
// The spectrum of K must stay inside [0, 1-eps] so this exists.
inline Matrix build_J(const Matrix& kernel, double eps = 1e-9) {
  if (!kernel.symmetric(1e-9)) throw SpectrumError("kernel must be symmetric");
  const EigenDecomposition d = symmetric_eigen(kernel);
  for (double v : d.values) {
    if (v < -1e-12 || v > 1.0 - eps)
      throw SpectrumError("kernel spectrum must lie in [0, 1-eps]; found eigenvalue " +
                          std::to_string(v));
  }
  return spectral_apply(kernel, [](double v) {
    const double k = std::max(v, 0.0);
    return k / (1.0 - k);
  });
}

// Inverse map K = J (I + J)^{-1}.
inline Matrix kernel_from_J(const Matrix& interaction) {
  return spectral_apply(interaction, [](double j) { return j / (1.0 + j); });
}

enum class Family { Poisson, GibbsPairwise, Determinantal };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Poisson: return "poisson";
    case Family::GibbsPairwise: return "gibbs";
    default: return "determinantal";
  }
}

class DiscreteModel;

// Exact law of a discrete model: one probability per subset, bitmask order.
// This is the brute-force oracle behind every exact expectation.
class ExactDistribution {
 public:
  ExactDistribution(DiscreteSpace space, std::vector<double> probs)
      : space_(std::move(space)), probs_(std::move(probs)) {}

  const DiscreteSpace& space() const { return space_; }
  int sites() const { return space_.size(); }
  std::size_t states() const { return probs_.size(); }
  double prob(std::uint32_t mask) const { return probs_[mask]; }
  double prob(const DiscreteConfig& c) const { return probs_[to_mask(c)]; }
  const std::vector<double>& probs() const { return probs_; }

  // Visit (config, probability) over the support.
  template <class G>
  void for_each(G&& g) const {
    for (std::uint32_t mask = 0; mask < probs_.size(); ++mask) {
      if (probs_[mask] <= 0.0) continue;
      g(from_mask(mask, sites()), probs_[mask]);
    }
  }

  template <class G>
  double expect(G&& g) const {
    double s = 0.0;
    for_each([&](const DiscreteConfig& c, double p) { s += p * g(c); });
    return s;
  }

  // P(alpha subset of xi).
  double subset_probability(const DiscreteConfig& alpha) const {
    const std::uint32_t need = to_mask(alpha);
    double s = 0.0;
    for (std::uint32_t mask = 0; mask < probs_.size(); ++mask)
      if ((mask & need) == need) s += probs_[mask];
    return s;
  }

 private:
  DiscreteSpace space_;
  std::vector<double> probs_;
};

// A point process on a finite site set, via its unnormalized weight w:
//   P(xi) proportional to w(xi) * prod_{x in xi} lambda(x)
//   c(x,xi)  = w(xi u x)/w(xi)          (0 when x in xi)
//   chat(a,xi) = w(a u xi)/w(xi)        (0 when a meets xi)
// The zero-on-overlap convention is what makes the integral identities exact
// on discrete spaces, where {x in xi} has positive measure.
class DiscreteModel {
 public:
  using Point = Site;
  using Config = DiscreteConfig;
  using Space = DiscreteSpace;

  static DiscreteModel poisson(DiscreteSpace space, std::vector<double> activity) {
    check_activity(space, activity);
    DiscreteModel m(std::move(space), Family::Poisson);
    m.activity_ = std::move(activity);
    return m;
  }
  static DiscreteModel poisson(DiscreteSpace space, double activity) {
    std::vector<double> z(static_cast<std::size_t>(space.size()), activity);
    return poisson(std::move(space), std::move(z));
  }

  // Pair potential phi: symmetric, entries in [0, +inf]; +inf encodes a
  // hard-core pair (weight 0), never a floating error.
  static DiscreteModel gibbs(DiscreteSpace space, std::vector<double> activity, Matrix potential) {
    check_activity(space, activity);
    if (potential.size() != space.size())
      throw InvalidModelError("potential must be m x m");
    for (int i = 0; i < potential.size(); ++i)
      for (int j = 0; j < potential.size(); ++j) {
        const double v = potential(i, j);
        if (std::isnan(v) || v < 0.0)
          throw InvalidModelError("pair potential values must lie in [0, +inf]");
        if (potential(i, j) != potential(j, i) &&
            !(std::isinf(potential(i, j)) && std::isinf(potential(j, i))))
          throw InvalidModelError("pair potential must be symmetric");
      }
    DiscreteModel m(std::move(space), Family::GibbsPairwise);
    m.activity_ = std::move(activity);
    m.potential_ = std::move(potential);
    return m;
  }
  static DiscreteModel gibbs(DiscreteSpace space, double activity, Matrix potential) {
    std::vector<double> z(static_cast<std::size_t>(space.size()), activity);
    return gibbs(std::move(space), std::move(z), std::move(potential));
  }

  static DiscreteModel determinantal(DiscreteSpace space, Matrix kernel, double eps = 1e-9) {
    if (kernel.size() != space.size()) throw InvalidModelError("kernel must be m x m");
    DiscreteModel m(std::move(space), Family::Determinantal);
    m.interaction_ = build_J(kernel, eps);  // validates the spectrum
    m.kernel_ = std::move(kernel);
    return m;
  }

  const DiscreteSpace& space() const { return space_; }
  Family family() const { return family_; }
  const std::vector<double>& activity() const { return activity_; }
  const Matrix& kernel() const { return kernel_; }
  const Matrix& interaction() const { return interaction_; }
  const Matrix& potential() const { return potential_; }

  // Unnormalized weight w(xi); w(empty) = 1.
  double weight(const Config& xi) const {
    switch (family_) {
      case Family::Poisson: {
        double w = 1.0;
        for (Site x : xi) w *= activity_[static_cast<std::size_t>(x)];
        return w;
      }
      case Family::GibbsPairwise: {
        const double h = energy(xi);
        if (std::isinf(h)) return 0.0;
        double w = std::exp(-h);
        for (Site x : xi) w *= activity_[static_cast<std::size_t>(x)];
        return w;
      }
      case Family::Determinantal:
      default: {
        const auto& pts = xi.points();
        return determinant(interaction_.submatrix(pts));
      }
    }
  }

  // H(xi) = sum of phi over unordered pairs in xi.
  double energy(const Config& xi) const {
    const auto& pts = xi.points();
    double h = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) h += potential_(pts[i], pts[j]);
    return h;
  }

  // Papangelou intensity c(x, xi).
  double papangelou(Site x, const Config& xi) const {
    if (xi.contains(x)) return 0.0;
    switch (family_) {
      case Family::Poisson:
        return activity_[static_cast<std::size_t>(x)];
      case Family::GibbsPairwise: {
        require_live(xi);
        double h = 0.0;
        for (Site y : xi) h += potential_(x, y);
        return activity_[static_cast<std::size_t>(x)] * std::exp(-h);
      }
      case Family::Determinantal:
      default: {
        const double num = weight(xi.with(x));
        const double den = weight(xi);
        if (den == 0.0)
          throw DegenerateConfigurationError("papangelou conditioned on a zero-weight configuration");
        return num / den;
      }
    }
  }

  // Compound intensity chat(alpha, xi); chat(empty, xi) = 1.
  double compound(const Config& alpha, const Config& xi) const {
    if (alpha.empty()) return 1.0;
    if (alpha.intersects(xi)) return 0.0;
    const double den = weight(xi);
    if (den == 0.0)
      throw DegenerateConfigurationError("compound intensity conditioned on a zero-weight configuration");
    return weight(alpha.unite(xi)) / den;
  }

  // chat over an ordered tuple; 0 on repeated points or overlap with xi.
  // Equals the telescoping product of single-point intensities.
  double compound_tuple(std::span<const Site> pts, const Config& xi) const {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (xi.contains(pts[i])) return 0.0;
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        if (pts[i] == pts[j]) return 0.0;
    }
    std::vector<Site> sel(pts.begin(), pts.end());
    return compound(Config(std::move(sel)), xi);
  }

  // The brute-force law over all 2^m subsets (bitmask order).
  ExactDistribution exact_distribution() const {
    const int m = space_.size();
    if (m > kMaxExactSites)
      throw BoundError("exact distribution requires at most " +
                       std::to_string(kMaxExactSites) + " sites");
    std::vector<double> probs(std::size_t{1} << m, 0.0);
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < probs.size(); ++mask) {
      const DiscreteConfig c = from_mask(mask, m);
      double p = weight(c);
      for (Site x : c) p *= space_.weight(x);
      probs[mask] = p;
      total += p;
    }
    if (!(total > 0.0)) throw InvalidModelError("all configuration weights are zero");
    for (double& p : probs) p /= total;
    return ExactDistribution(space_, std::move(probs));
  }

  std::string describe() const {
    return std::string(pointproc::to_string(family_)) + " on " +
           std::to_string(space_.size()) + " sites";
  }

 private:
  DiscreteModel(DiscreteSpace space, Family f) : space_(std::move(space)), family_(f) {}

  static void check_activity(const DiscreteSpace& space, const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != space.size())
      throw InvalidModelError("activity vector must have one entry per site");
    for (double v : z)
      if (!(v > 0.0)) throw InvalidModelError("activities must be strictly positive");
  }

  void require_live(const Config& xi) const {
    if (std::isinf(energy(xi)))
      throw DegenerateConfigurationError("papangelou conditioned on a zero-weight configuration");
  }

  DiscreteSpace space_;
  Family family_;
  std::vector<double> activity_;
  Matrix potential_;
  Matrix kernel_;
  Matrix interaction_;
};

// Point process on a box window. Poisson with a (bounded) intensity density,
// or pairwise Gibbs with activity z and pair potential phi >= 0.
class ContinuousModel {
 public:
  using Point = Coord;
  using Config = ContinuousConfig;
  using Space = BoxWindow;
  using IntensityFn = std::function<double(const Coord&)>;
  using PotentialFn = std::function<double(const Coord&, const Coord&)>;

  static ContinuousModel poisson(BoxWindow window, double intensity) {
    if (!(intensity >= 0.0) || !std::isfinite(intensity))
      throw InvalidModelError("intensity must be finite and nonnegative");
    ContinuousModel m(std::move(window), Family::Poisson);
    m.intensity_ = [intensity](const Coord&) { return intensity; };
    m.intensity_bound_ = intensity;
    return m;
  }
  static ContinuousModel poisson(BoxWindow window, IntensityFn z, double z_max) {
    if (!(z_max >= 0.0) || !std::isfinite(z_max))
      throw InvalidModelError("intensity bound must be finite and nonnegative");
    ContinuousModel m(std::move(window), Family::Poisson);
    m.intensity_ = std::move(z);
    m.intensity_bound_ = z_max;
    return m;
  }
  static ContinuousModel gibbs(BoxWindow window, double activity, PotentialFn phi) {
    if (!(activity >= 0.0) || !std::isfinite(activity))
      throw InvalidModelError("activity must be finite and nonnegative");
    ContinuousModel m(std::move(window), Family::GibbsPairwise);
    m.intensity_ = [activity](const Coord&) { return activity; };
    m.intensity_bound_ = activity;
    m.potential_ = std::move(phi);
    return m;
  }

  const BoxWindow& window() const { return window_; }
  const BoxWindow& space() const { return window_; }
  Family family() const { return family_; }
  double intensity(const Coord& x) const { return intensity_(x); }
  double intensity_bound() const { return intensity_bound_; }
  const PotentialFn& pair_potential() const { return potential_; }

  double papangelou(const Coord& x, const Config& xi) const {
    if (family_ == Family::Poisson) return intensity_(x);
    double h = 0.0;
    for (const Coord& y : xi) {
      if (y == x) continue;
      h += potential_(x, y);
    }
    return std::isinf(h) ? 0.0 : intensity_(x) * std::exp(-h);
  }

  // Telescoping compound intensity over an ordered tuple. Off the diagonal
  // this is chat of the point set; on coincident points it extends the
  // integrand continuously, which is what tensor quadrature needs. Computed
  // in closed form so the quadrature loops never copy configurations.
  double compound_tuple(std::span<const Coord> pts, const Config& xi) const {
    double z = 1.0;
    for (const Coord& p : pts) z *= intensity_(p);
    if (family_ == Family::Poisson || z == 0.0) return z;
    double h = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (const Coord& y : xi) {
        if (y == pts[i]) continue;
        h += potential_(pts[i], y);
      }
      for (std::size_t j = 0; j < i; ++j) h += potential_(pts[i], pts[j]);
      if (std::isinf(h)) return 0.0;
    }
    return z * std::exp(-h);
  }

  double compound(const Config& alpha, const Config& xi) const {
    return compound_tuple(alpha.points(), xi);
  }

  std::string describe() const {
    return std::string(pointproc::to_string(family_)) + " window dim " +
           std::to_string(window_.dim);
  }

 private:
  ContinuousModel(BoxWindow w, Family f) : window_(std::move(w)), family_(f) {}

  BoxWindow window_;
  Family family_;
  IntensityFn intensity_;
  double intensity_bound_ = 0.0;
  PotentialFn potential_;
};

// rho(alpha) = E[chat(alpha, xi)], against the engine's law.
template <class Model, class Engine>
Stat correlation(const Model& model, const Engine& engine, const typename Model::Config& alpha) {
  return engine.expect([&](const typename Model::Config& xi) { return model.compound(alpha, xi); });
}

// L(f) = E[exp(-sum_{x in xi} f(x))].
template <class Model, class Engine, class F>
Stat laplace_functional(const Model& model, const Engine& engine, F&& f) {
  (void)model;
  return engine.expect([&](const typename Model::Config& xi) {
    double s = 0.0;
    for (const auto& x : xi) s += f(x);
    return std::exp(-s);
  });
}

}  // namespace pointproc
