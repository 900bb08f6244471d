#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pointproc/configuration.hpp"
#include "pointproc/errors.hpp"
#include "pointproc/moments.hpp"

namespace pointproc {

// Named u/F/v functions selectable from config files, so experiment configs
// stay declarative. Specs are colon-separated: "name:arg1:arg2".
//
//   F(xi):    one | card | empty-indicator
//   v(x):     const:<c> | site-affine:<a>:<b>        (discrete: a + b*(site+1))
//             const:<c> | coord-affine:<a>:<b>       (continuous: a + b*x_1)
//   u(x,xi):  any v-spec | card-affine:<a>:<b>:<g>   (a + b*(site+1) + g*|xi\x|)
//             site-indicator:<site,...> (1-based)    | box-indicator:<lo>:<hi>
//   compound: geometric:<a>  (a^|alpha|)             | occupancy:<a>:<b>
//             (a^|alpha| / (1 + b*|xi|))

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double num_arg(const std::vector<std::string>& parts, std::size_t i, double fallback) {
  if (i >= parts.size() || parts[i].empty()) return fallback;
  try {
    return std::stod(parts[i]);
  } catch (...) {
    throw ConfigError(0, "bad numeric argument '" + parts[i] + "' in fixture spec");
  }
}

}  // namespace detail

template <class Model>
FunctionalFn<Model> make_functional(const std::string& spec) {
  using Cfg = typename Model::Config;
  const auto parts = detail::split(spec, ':');
  const std::string& name = parts[0];
  if (name == "one") return [](const Cfg&) { return 1.0; };
  if (name == "card") {
    // The identities need a bounded F; on windows the cardinality is a.s.
    // finite but unbounded, so a cap is applied (default 0 = no cap).
    const double cap = detail::num_arg(parts, 1, 0.0);
    if (cap > 0.0)
      return [cap](const Cfg& xi) { return std::min(static_cast<double>(xi.size()), cap); };
    return [](const Cfg& xi) { return static_cast<double>(xi.size()); };
  }
  if (name == "empty-indicator") return [](const Cfg& xi) { return xi.empty() ? 1.0 : 0.0; };
  throw ConfigError(0, "unknown functional fixture '" + name + "'");
}

inline std::function<double(const Site&)> make_point_fn(const DiscreteSpace&,
                                                        const std::string& spec) {
  const auto parts = detail::split(spec, ':');
  const std::string& name = parts[0];
  if (name == "const") {
    const double c = detail::num_arg(parts, 1, 1.0);
    return [c](const Site&) { return c; };
  }
  if (name == "site-affine") {
    const double a = detail::num_arg(parts, 1, 0.5);
    const double b = detail::num_arg(parts, 2, 0.25);
    return [a, b](const Site& x) { return a + b * (x + 1); };
  }
  if (name == "site-indicator") {
    std::vector<Site> sel;
    for (const std::string& tok : detail::split(parts.size() > 1 ? parts[1] : "1", ','))
      sel.push_back(static_cast<Site>(std::stol(tok) - 1));
    return [sel](const Site& x) {
      for (Site s : sel)
        if (s == x) return 1.0;
      return 0.0;
    };
  }
  throw ConfigError(0, "unknown point fixture '" + name + "'");
}

inline std::function<double(const Coord&)> make_point_fn(const BoxWindow&,
                                                         const std::string& spec) {
  const auto parts = detail::split(spec, ':');
  const std::string& name = parts[0];
  if (name == "const") {
    const double c = detail::num_arg(parts, 1, 1.0);
    return [c](const Coord&) { return c; };
  }
  if (name == "coord-affine") {
    const double a = detail::num_arg(parts, 1, 0.5);
    const double b = detail::num_arg(parts, 2, 0.25);
    return [a, b](const Coord& x) { return a + b * x[0]; };
  }
  if (name == "box-indicator") {
    const double lo = detail::num_arg(parts, 1, 0.0);
    const double hi = detail::num_arg(parts, 2, 0.5);
    return [lo, hi](const Coord& x) { return (x[0] >= lo && x[0] <= hi) ? 1.0 : 0.0; };
  }
  throw ConfigError(0, "unknown point fixture '" + name + "'");
}

template <class Model>
ProcessFn<Model> make_process_fn(const Model& model, const std::string& spec) {
  using P = typename Model::Point;
  using Cfg = typename Model::Config;
  const auto parts = detail::split(spec, ':');
  ProcessFn<Model> u;
  u.name = spec;
  if (parts[0] == "card-affine") {
    const double a = detail::num_arg(parts, 1, 0.5);
    const double b = detail::num_arg(parts, 2, 0.0);
    const double g = detail::num_arg(parts, 3, 0.25);
    if constexpr (is_discrete_model<Model>) {
      u.fn = [a, b, g](const P& x, const Cfg& xi) {
        return a + b * (x + 1) + g * xi.without(x).size();
      };
    } else {
      u.fn = [a, b, g](const P& x, const Cfg& xi) {
        return a + b * x[0] + g * xi.without(x).size();
      };
    }
    u.deterministic = false;
    return u;
  }
  auto v = make_point_fn(model.space(), spec);
  u.fn = [v](const P& x, const Cfg&) { return v(x); };
  u.deterministic = true;
  return u;
}

template <class Model>
CompoundFn<Model> make_compound_fn(const std::string& spec) {
  using Cfg = typename Model::Config;
  const auto parts = detail::split(spec, ':');
  const std::string& name = parts[0];
  if (name == "geometric") {
    const double a = detail::num_arg(parts, 1, 0.5);
    return [a](const Cfg& alpha, const Cfg&) { return std::pow(a, alpha.size()); };
  }
  if (name == "occupancy") {
    const double a = detail::num_arg(parts, 1, 0.5);
    const double b = detail::num_arg(parts, 2, 1.0);
    return [a, b](const Cfg& alpha, const Cfg& xi) {
      return std::pow(a, alpha.size()) / (1.0 + b * xi.size());
    };
  }
  throw ConfigError(0, "unknown compound fixture '" + name + "'");
}

// Spot check for the deterministic-in-xi flag: evaluation must not change
// between the empty configuration and a couple of occupied ones.
template <class Model>
bool spot_check_deterministic(const Model& model, const ProcessFn<Model>& u) {
  using Cfg = typename Model::Config;
  Cfg empty;
  std::vector<Cfg> probes{empty};
  if constexpr (is_discrete_model<Model>) {
    probes.push_back(empty.with(0));
    if (model.space().size() > 1) probes.push_back(empty.with(0).with(model.space().size() - 1));
  } else {
    const BoxWindow& w = model.window();
    Coord mid{0, 0, 0};
    for (int i = 0; i < w.dim; ++i) mid[i] = 0.5 * (w.lo[i] + w.hi[i]);
    probes.push_back(empty.with(mid));
  }
  std::vector<typename Model::Point> test_points;
  if constexpr (is_discrete_model<Model>) {
    for (Site x = 0; x < model.space().size(); ++x) test_points.push_back(x);
  } else {
    const BoxWindow& w = model.window();
    Coord q{0, 0, 0};
    for (int i = 0; i < w.dim; ++i) q[i] = w.lo[i] + 0.25 * (w.hi[i] - w.lo[i]);
    test_points.push_back(q);
  }
  for (const auto& x : test_points) {
    const double base = u(x, probes.front());
    for (const auto& xi : probes)
      if (std::fabs(u(x, xi) - base) > 1e-12) return false;
  }
  return true;
}

}  // namespace pointproc
