#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pointproc/errors.hpp"

namespace pointproc {

// Site of a discrete ground space (0-based internally; 1-based in all I/O).
using Site = int;
// Point of a continuous window; coordinates beyond the dimension stay 0.
using Coord = std::array<double, 3>;

inline constexpr int kMaxDiscreteSites = 20;
inline constexpr int kMaxExactSites = 15;

// Finite site set with positive reference weights (the discrete lambda).
struct DiscreteSpace {
  std::vector<double> weights;

  explicit DiscreteSpace(std::vector<double> w) : weights(std::move(w)) {
    if (weights.empty() || static_cast<int>(weights.size()) > kMaxDiscreteSites)
      throw BoundError("discrete space supports 1 to " + std::to_string(kMaxDiscreteSites) +
                       " sites");
    for (double v : weights)
      if (!(v > 0.0)) throw BoundError("all reference weights must be strictly positive");
  }
  static DiscreteSpace uniform(int m, double weight = 1.0) {
    return DiscreteSpace(std::vector<double>(static_cast<std::size_t>(m), weight));
  }

  int size() const { return static_cast<int>(weights.size()); }
  double weight(Site x) const { return weights[static_cast<std::size_t>(x)]; }
  double total_weight() const {
    double s = 0.0;
    for (double v : weights) s += v;
    return s;
  }
};

// Axis-aligned box window with a constant reference density (lambda =
// ref_density * Lebesgue restricted to the box).
struct BoxWindow {
  int dim = 1;
  Coord lo{0.0, 0.0, 0.0};
  Coord hi{1.0, 0.0, 0.0};
  double ref_density = 1.0;

  BoxWindow(int d, Coord lo_, Coord hi_, double density = 1.0)
      : dim(d), lo(lo_), hi(hi_), ref_density(density) {
    if (dim < 1 || dim > 3) throw BoundError("window dimension must be 1, 2 or 3");
    for (int i = 0; i < dim; ++i)
      if (!(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i]))
        throw BoundError("window bounds must be finite with lo < hi");
    if (!(ref_density > 0.0)) throw BoundError("reference density must be positive");
  }
  static BoxWindow unit_interval() { return BoxWindow(1, {0, 0, 0}, {1, 0, 0}); }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= hi[i] - lo[i];
    return v;
  }
  // lambda-mass of the window.
  double measure() const { return ref_density * volume(); }
  bool contains(const Coord& p) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
};

// A finite simple point set, kept sorted so equality is structural.
// Continuous points use exact bit equality: points are only ever produced
// once (by a sampler or a shift) and never re-derived.
template <class P>
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<P> pts) : pts_(std::move(pts)) {
    std::sort(pts_.begin(), pts_.end());
    if (std::adjacent_find(pts_.begin(), pts_.end()) != pts_.end())
      throw BoundError("configurations are simple: duplicate point");
  }

  int size() const { return static_cast<int>(pts_.size()); }
  bool empty() const { return pts_.empty(); }
  const std::vector<P>& points() const { return pts_; }
  auto begin() const { return pts_.begin(); }
  auto end() const { return pts_.end(); }

  bool contains(const P& p) const {
    return std::binary_search(pts_.begin(), pts_.end(), p);
  }

  // xi u x; adding a point already present is the identity.
  Configuration with(const P& p) const {
    if (contains(p)) return *this;
    Configuration c;
    c.pts_ = pts_;
    c.pts_.insert(std::upper_bound(c.pts_.begin(), c.pts_.end(), p), p);
    return c;
  }

  // xi u {pts}; one copy regardless of how many points join.
  Configuration with_all(std::span<const P> pts) const {
    Configuration c = *this;
    for (const P& p : pts) {
      auto it = std::lower_bound(c.pts_.begin(), c.pts_.end(), p);
      if (it == c.pts_.end() || !(*it == p)) c.pts_.insert(it, p);
    }
    return c;
  }

  // xi \ x; removing an absent point is the identity.
  Configuration without(const P& p) const {
    Configuration c;
    c.pts_ = pts_;
    auto it = std::lower_bound(c.pts_.begin(), c.pts_.end(), p);
    if (it != c.pts_.end() && *it == p) c.pts_.erase(it);
    return c;
  }

  Configuration unite(const Configuration& o) const {
    Configuration c = *this;
    for (const P& p : o.pts_) c = c.with(p);
    return c;
  }

  bool intersects(const Configuration& o) const {
    for (const P& p : o.pts_)
      if (contains(p)) return true;
    return false;
  }

  bool subset_of(const Configuration& o) const {
    for (const P& p : pts_)
      if (!o.contains(p)) return false;
    return true;
  }

  bool operator==(const Configuration& o) const { return pts_ == o.pts_; }
  bool operator<(const Configuration& o) const { return pts_ < o.pts_; }

 private:
  std::vector<P> pts_;
};

using DiscreteConfig = Configuration<Site>;
using ContinuousConfig = Configuration<Coord>;

// Bitmask round trip for discrete configurations (bit i = site i occupied).
inline std::uint32_t to_mask(const DiscreteConfig& c) {
  std::uint32_t m = 0;
  for (Site s : c) m |= 1u << s;
  return m;
}
inline DiscreteConfig from_mask(std::uint32_t mask, int m) {
  std::vector<Site> pts;
  for (int s = 0; s < m; ++s)
    if (mask & (1u << s)) pts.push_back(s);
  return DiscreteConfig(std::move(pts));
}

// sum_{x in xi} u(x, xi)
template <class P, class U>
double point_sum(U&& u, const Configuration<P>& xi) {
  double s = 0.0;
  for (const P& x : xi) s += u(x, xi);
  return s;
}

// sum_{x in xi} u(x, xi \ x)
template <class P, class U>
double reduced_point_sum(U&& u, const Configuration<P>& xi) {
  double s = 0.0;
  for (const P& x : xi) s += u(x, xi.without(x));
  return s;
}

// All subsets of xi (or all subsets of size k when k >= 0), in increasing
// bitmask order over xi's sorted points.
template <class P>
std::vector<Configuration<P>> subsets_of(const Configuration<P>& xi, int k = -1) {
  const int n = xi.size();
  if (n > 20) throw BoundError("subsets_of supports at most 20 points");
  const auto& pts = xi.points();
  std::vector<Configuration<P>> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (k >= 0 && std::popcount(mask) != static_cast<unsigned>(k)) continue;
    std::vector<P> sel;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) sel.push_back(pts[static_cast<std::size_t>(i)]);
    out.emplace_back(std::move(sel));
  }
  return out;
}

// Line format used by the CLI sample output: points separated by commas;
// continuous coordinates within one point separated by spaces.
inline std::string to_line(const DiscreteConfig& c) {
  std::string s;
  for (Site x : c) {
    if (!s.empty()) s += ',';
    s += std::to_string(x + 1);
  }
  return s;
}
inline std::string to_line(const ContinuousConfig& c, int dim) {
  std::ostringstream os;
  os.precision(17);
  bool first_pt = true;
  for (const Coord& p : c) {
    if (!first_pt) os << ',';
    first_pt = false;
    for (int i = 0; i < dim; ++i) os << (i ? " " : "") << p[i];
  }
  return os.str();
}

}  // namespace pointproc
