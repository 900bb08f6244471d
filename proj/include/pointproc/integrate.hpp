#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pointproc/configuration.hpp"

namespace pointproc {

struct QuadratureOpts {
  int nodes_per_axis = 64;  // midpoint rule nodes per axis and per tuple slot
  QuadratureOpts scaled(int factor) const { return QuadratureOpts{nodes_per_axis * factor}; }
};

// integral of f d(lambda): weighted site sum.
template <class F>
double lambda_integral(const DiscreteSpace& s, const QuadratureOpts&, F&& f) {
  double acc = 0.0;
  for (Site x = 0; x < s.size(); ++x) acc += s.weight(x) * f(x);
  return acc;
}

// Midpoint rule on the box, against ref_density * Lebesgue.
template <class F>
double lambda_integral(const BoxWindow& w, const QuadratureOpts& q, F&& f) {
  const int n = q.nodes_per_axis;
  std::array<double, 3> h{0, 0, 0};
  for (int i = 0; i < w.dim; ++i) h[i] = (w.hi[i] - w.lo[i]) / n;
  double cell = w.ref_density;
  for (int i = 0; i < w.dim; ++i) cell *= h[i];
  double acc = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  for (;;) {
    Coord p{0, 0, 0};
    for (int i = 0; i < w.dim; ++i) p[i] = w.lo[i] + (idx[i] + 0.5) * h[i];
    acc += f(p);
    int d = 0;
    while (d < w.dim && ++idx[d] == n) idx[d++] = 0;
    if (d == w.dim) break;
  }
  return acc * cell;
}

// k-fold integral over E^k: visit(tuple, weight) for every ordered tuple.
// Discrete tuples run over DISTINCT sites only; tuples hitting the same site
// twice are not lambda_k-null here and would break the moment identities.
template <class V>
void for_each_tuple(const DiscreteSpace& s, int k, const QuadratureOpts&, V&& visit) {
  std::vector<Site> tuple(static_cast<std::size_t>(k));
  const std::function<void(int, double)> rec = [&](int depth, double wgt) {
    if (depth == k) {
      visit(std::span<const Site>(tuple), wgt);
      return;
    }
    for (Site x = 0; x < s.size(); ++x) {
      bool dup = false;
      for (int i = 0; i < depth; ++i)
        if (tuple[static_cast<std::size_t>(i)] == x) { dup = true; break; }
      if (dup) continue;
      tuple[static_cast<std::size_t>(depth)] = x;
      rec(depth + 1, wgt * s.weight(x));
    }
  };
  rec(0, 1.0);
}

// Tensor midpoint grid over (window)^k; coincident nodes carry vanishing
// measure as the grid refines.
template <class V>
void for_each_tuple(const BoxWindow& w, int k, const QuadratureOpts& q, V&& visit) {
  const int n = q.nodes_per_axis;
  std::array<double, 3> h{0, 0, 0};
  for (int i = 0; i < w.dim; ++i) h[i] = (w.hi[i] - w.lo[i]) / n;
  double cell = w.ref_density;
  for (int i = 0; i < w.dim; ++i) cell *= h[i];
  // Node list for one copy of the window.
  std::vector<Coord> nodes;
  {
    std::array<int, 3> idx{0, 0, 0};
    for (;;) {
      Coord p{0, 0, 0};
      for (int i = 0; i < w.dim; ++i) p[i] = w.lo[i] + (idx[i] + 0.5) * h[i];
      nodes.push_back(p);
      int d = 0;
      while (d < w.dim && ++idx[d] == n) idx[d++] = 0;
      if (d == w.dim) break;
    }
  }
  double wgt = 1.0;
  for (int i = 0; i < k; ++i) wgt *= cell;
  std::vector<Coord> tuple(static_cast<std::size_t>(k));
  std::vector<std::size_t> odo(static_cast<std::size_t>(k), 0);
  for (;;) {
    for (int i = 0; i < k; ++i) tuple[static_cast<std::size_t>(i)] = nodes[odo[static_cast<std::size_t>(i)]];
    visit(std::span<const Coord>(tuple), wgt);
    int d = 0;
    while (d < k && ++odo[static_cast<std::size_t>(d)] == nodes.size()) odo[static_cast<std::size_t>(d++)] = 0;
    if (d == k) break;
  }
}

}  // namespace pointproc
