#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "pointproc/configuration.hpp"
#include "pointproc/engine.hpp"
#include "pointproc/errors.hpp"
#include "pointproc/integrate.hpp"
#include "pointproc/models.hpp"
#include "pointproc/partitions.hpp"
#include "pointproc/report.hpp"

namespace pointproc {

// A process u(x, xi) with the declared properties the identities rely on.
template <class P>
struct ProcessFunction {
  std::function<double(const P&, const Configuration<P>&)> fn;
  bool deterministic = false;  // ignores xi
  bool nonnegative = true;
  bool bounded = true;
  std::string name = "u";

  double operator()(const P& x, const Configuration<P>& xi) const { return fn(x, xi); }
};

template <class Model>
using ProcessFn = ProcessFunction<typename Model::Point>;
template <class Model>
using FunctionalFn = std::function<double(const typename Model::Config&)>;
template <class Model>
using PointFn = std::function<double(const typename Model::Point&)>;
template <class Model>
using CompoundFn =
    std::function<double(const typename Model::Config&, const typename Model::Config&)>;
template <class Model>
using RhoFn = std::function<double(std::span<const typename Model::Point>)>;

struct CheckOpts {
  double exact_rel_tol = 1e-9;  // exact mode: |lhs-rhs| <= tol (1 + |lhs|)
  double z_crit = 4.0;          // mc mode: |lhs-rhs| <= z_crit * combined se
  QuadratureOpts quad{};
  bool refine_quadrature = true;  // continuous: recheck at doubled node count
  int compound_subset_cap = 4;    // continuous compound-GNZ truncation size
};

template <class Model>
inline constexpr bool is_discrete_model = std::is_same_v<typename Model::Point, Site>;

// D_x F(xi) = F(xi u x) - F(xi \ x).
template <class P, class F>
double difference_op(F&& f, const P& x, const Configuration<P>& xi) {
  return f(xi.with(x)) - f(xi.without(x));
}

// u^P(x, xi) = prod_l prod_{i in P_l} u_i(x_l, xi).
template <class P>
double partition_product(std::span<const ProcessFunction<P>> us, const Partition& part,
                         std::span<const P> xs, const Configuration<P>& xi) {
  if (static_cast<int>(xs.size()) != part.block_count())
    throw BoundError("partition_product: one point per block required");
  if (static_cast<int>(us.size()) != part.n())
    throw BoundError("partition_product: one process per element required");
  double prod = 1.0;
  for (int l = 0; l < part.block_count(); ++l)
    for (int i : part.blocks()[static_cast<std::size_t>(l)])
      prod *= us[static_cast<std::size_t>(i - 1)](xs[static_cast<std::size_t>(l)], xi);
  return prod;
}

// int u(y,xi) c(y,xi) lambda(dy): the compensator of u at xi.
template <class Model>
double compensator_integral(const Model& model, const QuadratureOpts& quad,
                            const ProcessFn<Model>& u, const typename Model::Config& xi) {
  return lambda_integral(model.space(), quad, [&](const typename Model::Point& y) {
    const double c = model.papangelou(y, xi);
    return c == 0.0 ? 0.0 : u(y, xi) * c;
  });
}

// int u d(nu) = int u d(xi) - int u c d(lambda).
template <class Model>
double compensated_integral(const Model& model, const QuadratureOpts& quad,
                            const ProcessFn<Model>& u, const typename Model::Config& xi) {
  if (!u.bounded) throw BoundError("compensated_integral requires a bounded process");
  return point_sum(u.fn, xi) - compensator_integral(model, quad, u, xi);
}

// delta(u) = int u(y, xi\y) xi(dy) - int u c d(lambda).
template <class Model>
double divergence(const Model& model, const QuadratureOpts& quad, const ProcessFn<Model>& u,
                  const typename Model::Config& xi) {
  if (!u.bounded) throw BoundError("divergence requires a bounded process");
  return reduced_point_sum(u.fn, xi) - compensator_integral(model, quad, u, xi);
}

// G_k factor: chat of the first k points, times single-point intensities of
// the remaining points given xi plus the first k.
template <class Model>
double g_k_factor(const Model& model, std::span<const typename Model::Point> xs,
                  std::span<const typename Model::Point> zs, const typename Model::Config& xi) {
  double g = model.compound_tuple(xs, xi);
  if (g == 0.0) return 0.0;
  const auto with_xs = xi.with_all(xs);
  for (const auto& z : zs) {
    g *= model.papangelou(z, with_xs);
    if (g == 0.0) return 0.0;
  }
  return g;
}

namespace detail {

// Per-partition inner integrals of the product-moment identity at one xi:
//   int_{E^k} F(xi u x) u^P(x, xi u x) chat(x, xi) lambda_k(dx)
template <class Model>
void moment_rhs_at(const Model& model, const QuadratureOpts& quad,
                   std::span<const Partition> parts, const FunctionalFn<Model>& F,
                   std::span<const ProcessFn<Model>> us, const typename Model::Config& xi,
                   std::span<double> out) {
  using P = typename Model::Point;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const Partition& part = parts[pi];
    double term = 0.0;
    for_each_tuple(model.space(), part.block_count(), quad,
                   [&](std::span<const P> xs, double wgt) {
                     const double chat = model.compound_tuple(xs, xi);
                     if (chat == 0.0) return;
                     const auto up = xi.with_all(xs);
                     term += wgt * chat * F(up) * partition_product<P>(us, part, xs, up);
                   });
    out[pi] = term;
  }
}

// Shared skeleton of the compensated/divergence moment right sides:
//   sum_i (-1)^i C(n,i) sum_{P in T_{n-i}} E[ int chat(x,xi) F(xi u x)
//       prod_l u(x_l, arg_l)^{|P_l|} * (int u c dlambda at xi u x)^i dx ]
// `reduced` selects arg_l = (xi u x) \ x_l (divergence) vs xi u x.
template <class Model>
struct BinomialLayout {
  std::vector<Partition> parts;       // flattened over i
  std::vector<int> binom_i;           // i index per entry; -1 marks the empty-partition term
  std::vector<double> coeff;          // (-1)^i C(n,i)
  std::vector<std::string> labels;
};

template <class Model>
BinomialLayout<Model> binomial_layout(int n) {
  BinomialLayout<Model> lay;
  double binom = 1.0;
  for (int i = 0; i <= n; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    if (n - i >= 1) {
      for (const Partition& p : enumerate_partitions(n - i)) {
        lay.parts.push_back(p);
        lay.binom_i.push_back(i);
        lay.coeff.push_back(sign * binom);
        lay.labels.push_back("i=" + std::to_string(i) + ",P=" + p.to_string());
      }
    } else {
      const std::vector<int> unit{0};
      lay.parts.push_back(Partition::from_rgs(unit));  // placeholder, never evaluated
      lay.binom_i.push_back(-i);  // negative marks the empty-partition term; |value| = i
      lay.coeff.push_back(sign * binom);
      lay.labels.push_back("i=" + std::to_string(i) + ",P={}");
    }
    binom = binom * (n - i) / (i + 1);
  }
  return lay;
}

template <class Model>
void binomial_rhs_at(const Model& model, const QuadratureOpts& quad,
                     const BinomialLayout<Model>& lay, const FunctionalFn<Model>& F,
                     const ProcessFn<Model>& u, bool reduced, const typename Model::Config& xi,
                     std::span<double> out) {
  using P = typename Model::Point;
  for (std::size_t t = 0; t < lay.parts.size(); ++t) {
    if (lay.binom_i[t] < 0) {
      // i = n: E[F * B(xi)^n]; the empty partition contributes no integral.
      const int i = -lay.binom_i[t];
      const double b = compensator_integral(model, quad, u, xi);
      out[t] = F(xi) * std::pow(b, i);
      continue;
    }
    const Partition& part = lay.parts[t];
    const int i = lay.binom_i[t];
    double term = 0.0;
    for_each_tuple(
        model.space(), part.block_count(), quad, [&](std::span<const P> xs, double wgt) {
          const double chat = model.compound_tuple(xs, xi);
          if (chat == 0.0) return;
          const auto up = xi.with_all(xs);
          double val = chat * F(up);
          for (int l = 0; l < part.block_count(); ++l) {
            const auto arg = reduced ? up.without(xs[static_cast<std::size_t>(l)]) : up;
            val *= std::pow(u(xs[static_cast<std::size_t>(l)], arg),
                            static_cast<int>(part.blocks()[static_cast<std::size_t>(l)].size()));
          }
          if (i > 0 && val != 0.0) val *= std::pow(compensator_integral(model, quad, u, up), i);
          term += wgt * val;
        });
    out[t] = term;
  }
}

inline IdentityReport assemble(std::string name, const VecStats& vs, bool exact,
                               const CheckOpts& opts) {
  IdentityReport r = exact ? IdentityReport::exact(std::move(name), vs.comp[0].value,
                                                   vs.comp[1].value, opts.exact_rel_tol)
                           : IdentityReport::monte_carlo(std::move(name), vs.comp[0].value,
                                                         vs.comp[0].se, vs.comp[1].value,
                                                         vs.comp[1].se, vs.diff01_se, opts.z_crit);
  return r;
}

template <class Model>
int max_product_order() {
  return is_discrete_model<Model> ? 4 : 5;
}

}  // namespace detail

// E[F prod_k int u_k d(xi)].
template <class Model, class Engine>
Stat moment_product_lhs(const Model& model, const Engine& eng, const FunctionalFn<Model>& F,
                        std::span<const ProcessFn<Model>> us) {
  (void)model;
  return eng.expect([&](const typename Model::Config& xi) {
    double v = F(xi);
    for (const auto& u : us) {
      if (v == 0.0) break;
      v *= point_sum(u.fn, xi);
    }
    return v;
  });
}

struct RhsEvaluation {
  Stat total;
  std::vector<TermValue> terms;
};

// The partition sum of the product-moment identity, with per-partition terms.
template <class Model, class Engine>
RhsEvaluation moment_product_rhs(const Model& model, const Engine& eng,
                                 const FunctionalFn<Model>& F,
                                 std::span<const ProcessFn<Model>> us,
                                 const QuadratureOpts& quad = {}) {
  const int n = static_cast<int>(us.size());
  if (n < 1 || n > detail::max_product_order<Model>())
    throw BoundError("moment_product supports 1 <= n <= " +
                     std::to_string(detail::max_product_order<Model>()));
  const std::vector<Partition> parts = enumerate_partitions(n);
  const int ncomp = 1 + static_cast<int>(parts.size());
  VecStats vs = eng.expect_vec(ncomp, [&](const typename Model::Config& xi, std::span<double> out) {
    detail::moment_rhs_at(model, quad, parts, F, us, xi, out.subspan(1));
    out[0] = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) out[0] += out[i];
  });
  RhsEvaluation r;
  r.total = vs.comp[0];
  for (std::size_t i = 0; i < parts.size(); ++i)
    r.terms.push_back({"k=" + std::to_string(parts[i].block_count()) + ",P=" + parts[i].to_string(),
                       vs.comp[i + 1].value, vs.comp[i + 1].se});
  return r;
}

// Both sides of the product-moment identity under one engine pass.
template <class Model, class Engine>
IdentityReport check_moment_product(const Model& model, const Engine& eng,
                                    const FunctionalFn<Model>& F,
                                    std::span<const ProcessFn<Model>> us, const CheckOpts& opts,
                                    std::string name = "moment-product") {
  const int n = static_cast<int>(us.size());
  if (n < 1 || n > detail::max_product_order<Model>())
    throw BoundError("moment_product supports 1 <= n <= " +
                     std::to_string(detail::max_product_order<Model>()));
  const std::vector<Partition> parts = enumerate_partitions(n);
  const int ncomp = 2 + static_cast<int>(parts.size());
  auto pass = [&](const QuadratureOpts& quad) {
    return eng.expect_vec(ncomp, [&](const typename Model::Config& xi, std::span<double> out) {
      double lhs = F(xi);
      for (const auto& u : us) {
        if (lhs == 0.0) break;
        lhs *= point_sum(u.fn, xi);
      }
      out[0] = lhs;
      detail::moment_rhs_at(model, quad, parts, F, us, xi, out.subspan(2));
      out[1] = 0.0;
      for (std::size_t i = 2; i < out.size(); ++i) out[1] += out[i];
    });
  };
  VecStats vs = pass(opts.quad);
  std::optional<double> refine_delta;
  if constexpr (!is_discrete_model<Model>) {
    if (opts.refine_quadrature) {
      const VecStats fine = pass(opts.quad.scaled(2));
      refine_delta = std::fabs(fine.comp[1].value - vs.comp[1].value);
      vs = fine;
    }
  }
  IdentityReport r = detail::assemble(std::move(name), vs, Engine::is_exact, opts);
  for (std::size_t i = 0; i < parts.size(); ++i)
    r.terms.push_back({"k=" + std::to_string(parts[i].block_count()) + ",P=" + parts[i].to_string(),
                       vs.comp[i + 2].value, vs.comp[i + 2].se});
  if (refine_delta) {
    r.notes.push_back("quadrature refinement delta = " + std::to_string(*refine_delta));
    if (*refine_delta > 1e-6 * (1.0 + std::fabs(r.rhs)))
      r.notes.push_back("warning: quadrature not resolved at the requested node count");
  }
  return r;
}

// E[sum_{x in xi} u(x, xi\x)] = E[int u(x, xi) c(x, xi) lambda(dx)].
template <class Model, class Engine>
IdentityReport check_gnz(const Model& model, const Engine& eng, const ProcessFn<Model>& u,
                         const CheckOpts& opts) {
  VecStats vs = eng.expect_vec(2, [&](const typename Model::Config& xi, std::span<double> out) {
    out[0] = reduced_point_sum(u.fn, xi);
    out[1] = compensator_integral(model, opts.quad, u, xi);
  });
  return detail::assemble("gnz", vs, Engine::is_exact, opts);
}

// Compound version over finite sub-configurations. The discrete L-integral is
// the exact sum over all site subsets; the continuous one truncates at
// opts.compound_subset_cap points and reports the size of the last term.
template <class Model, class Engine>
IdentityReport check_gnz_compound(const Model& model, const Engine& eng,
                                  const CompoundFn<Model>& u, const CheckOpts& opts) {
  using Cfg = typename Model::Config;
  using P = typename Model::Point;
  double last_term_probe = 0.0;
  VecStats vs;
  if constexpr (is_discrete_model<Model>) {
    const int m = model.space().size();
    if (m > 12) throw BoundError("compound GNZ exact path supports at most 12 sites");
    vs = eng.expect_vec(2, [&](const Cfg& xi, std::span<double> out) {
      double lhs = 0.0;
      for (const Cfg& alpha : subsets_of(xi)) {
        Cfg rest;
        for (Site x : xi)
          if (!alpha.contains(x)) rest = rest.with(x);
        lhs += u(alpha, rest);
      }
      out[0] = lhs;
      double rhs = 0.0;
      for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        const Cfg alpha = from_mask(mask, m);
        const double chat = model.compound(alpha, xi);
        if (chat == 0.0) continue;
        double w = 1.0;
        for (Site x : alpha) w *= model.space().weight(x);
        rhs += w * chat * u(alpha, xi);
      }
      out[1] = rhs;
    });
  } else {
    std::vector<double> factorial{1.0};
    for (int k = 1; k <= opts.compound_subset_cap; ++k)
      factorial.push_back(factorial.back() * k);
    double last_sum = 0.0;
    std::size_t count = 0;
    vs = eng.expect_vec(2, [&](const Cfg& xi, std::span<double> out) {
      double lhs = 0.0;
      for (const Cfg& alpha : subsets_of(xi)) {
        Cfg rest;
        for (const P& x : xi)
          if (!alpha.contains(x)) rest = rest.with(x);
        lhs += u(alpha, rest);
      }
      out[0] = lhs;
      double rhs = u(Cfg{}, xi);  // k = 0 term
      double last = 0.0;
      for (int k = 1; k <= opts.compound_subset_cap; ++k) {
        double term = 0.0;
        for_each_tuple(model.space(), k, opts.quad, [&](std::span<const P> xs, double wgt) {
          const double chat = model.compound_tuple(xs, xi);
          if (chat == 0.0) return;
          Cfg alpha = Cfg{}.with_all(xs);
          term += wgt * chat * u(alpha, xi);
        });
        term /= factorial[static_cast<std::size_t>(k)];
        rhs += term;
        last = term;
      }
      out[1] = rhs;
      last_sum += std::fabs(last);
      ++count;
    });
    last_term_probe = count ? last_sum / static_cast<double>(count) : 0.0;
  }
  IdentityReport r = detail::assemble("gnz-compound", vs, Engine::is_exact, opts);
  if constexpr (!is_discrete_model<Model>) {
    r.notes.push_back("L-series truncated at subset size " +
                      std::to_string(opts.compound_subset_cap) + "; mean |last term| = " +
                      std::to_string(last_term_probe));
  }
  return r;
}

// E[F delta(u)] = E[int D_z F(xi) u(z,xi) c(z,xi) lambda(dz)].
template <class Model, class Engine>
IdentityReport check_duality(const Model& model, const Engine& eng, const FunctionalFn<Model>& F,
                             const ProcessFn<Model>& u, const CheckOpts& opts) {
  using P = typename Model::Point;
  VecStats vs = eng.expect_vec(2, [&](const typename Model::Config& xi, std::span<double> out) {
    out[0] = F(xi) * divergence(model, opts.quad, u, xi);
    out[1] = lambda_integral(model.space(), opts.quad, [&](const P& z) {
      const double c = model.papangelou(z, xi);
      if (c == 0.0) return 0.0;
      return difference_op(F, z, xi) * u(z, xi) * c;
    });
  });
  return detail::assemble("duality", vs, Engine::is_exact, opts);
}

// E[delta(u)^2] against the three-term expansion: the squared-intensity term,
// the pair cross term, and the squared compensator term.
template <class Model, class Engine>
IdentityReport check_skorohod(const Model& model, const Engine& eng, const ProcessFn<Model>& u,
                              const CheckOpts& opts) {
  using P = typename Model::Point;
  VecStats vs = eng.expect_vec(5, [&](const typename Model::Config& xi, std::span<double> out) {
    const double d = divergence(model, opts.quad, u, xi);
    out[0] = d * d;
    out[2] = lambda_integral(model.space(), opts.quad, [&](const P& y) {
      const double c = model.papangelou(y, xi);
      if (c == 0.0) return 0.0;
      const double v = u(y, xi);
      return v * v * c;
    });
    double cross = 0.0;
    for_each_tuple(model.space(), 2, opts.quad, [&](std::span<const P> pr, double wgt) {
      const double chat = model.compound_tuple(pr, xi);
      if (chat == 0.0) return;
      const auto& y = pr[0];
      const auto& z = pr[1];
      cross += wgt * chat * u(y, xi.with(z)) * (u(z, xi.with(y)) - 2.0 * u(z, xi));
    });
    out[3] = cross;
    const double b = compensator_integral(model, opts.quad, u, xi);
    out[4] = b * b;
    out[1] = out[2] + out[3] + out[4];
  });
  IdentityReport r = detail::assemble("skorohod", vs, Engine::is_exact, opts);
  r.terms.push_back({"squared-intensity", vs.comp[2].value, vs.comp[2].se});
  r.terms.push_back({"pair-cross", vs.comp[3].value, vs.comp[3].se});
  r.terms.push_back({"squared-compensator", vs.comp[4].value, vs.comp[4].se});
  return r;
}

// Same isometry with the terms regrouped through the difference operator:
// E[delta(u)^2] = E[int u^2 c] + E[II D_z u(y) D_y u(z) chat({y,z})]
//               - E[II u(z) u(y) c(z) D_z c(y)].
// Pair integrals against chat run over distinct tuples; the last double
// integral is a plain iterated lambda-integral.
template <class Model, class Engine>
IdentityReport check_skorohod_rewrite(const Model& model, const Engine& eng,
                                      const ProcessFn<Model>& u, const CheckOpts& opts) {
  using P = typename Model::Point;
  VecStats vs = eng.expect_vec(5, [&](const typename Model::Config& xi, std::span<double> out) {
    const double d = divergence(model, opts.quad, u, xi);
    out[0] = d * d;
    out[2] = lambda_integral(model.space(), opts.quad, [&](const P& y) {
      const double c = model.papangelou(y, xi);
      if (c == 0.0) return 0.0;
      const double v = u(y, xi);
      return v * v * c;
    });
    double cross = 0.0;
    for_each_tuple(model.space(), 2, opts.quad, [&](std::span<const P> pr, double wgt) {
      const double chat = model.compound_tuple(pr, xi);
      if (chat == 0.0) return;
      const auto& y = pr[0];
      const auto& z = pr[1];
      const double dzu = u(y, xi.with(z)) - u(y, xi.without(z));
      const double dyu = u(z, xi.with(y)) - u(z, xi.without(y));
      cross += wgt * chat * dzu * dyu;
    });
    out[3] = cross;
    out[4] = -lambda_integral(model.space(), opts.quad, [&](const P& z) {
      const double cz = model.papangelou(z, xi);
      if (cz == 0.0) return 0.0;
      const double uz = u(z, xi);
      if (uz == 0.0) return 0.0;
      const double inner = lambda_integral(model.space(), opts.quad, [&](const P& y) {
        const double dc = model.papangelou(y, xi.with(z)) - model.papangelou(y, xi.without(z));
        return dc == 0.0 ? 0.0 : u(y, xi) * dc;
      });
      return uz * cz * inner;
    });
    out[1] = out[2] + out[3] + out[4];
  });
  IdentityReport r = detail::assemble("skorohod-rewrite", vs, Engine::is_exact, opts);
  r.terms.push_back({"squared-intensity", vs.comp[2].value, vs.comp[2].se});
  r.terms.push_back({"difference-cross", vs.comp[3].value, vs.comp[3].se});
  r.terms.push_back({"intensity-gradient", vs.comp[4].value, vs.comp[4].se});
  return r;
}

// E[F (int u dnu)^n] against the binomial-partition expansion.
template <class Model, class Engine>
IdentityReport check_compensated_moment(const Model& model, const Engine& eng,
                                        const FunctionalFn<Model>& F, const ProcessFn<Model>& u,
                                        int n, const CheckOpts& opts) {
  if (n < 1 || n > 4) throw BoundError("compensated moments support 1 <= n <= 4");
  const auto lay = detail::binomial_layout<Model>(n);
  const int ncomp = 2 + static_cast<int>(lay.parts.size());
  VecStats vs = eng.expect_vec(ncomp, [&](const typename Model::Config& xi, std::span<double> out) {
    const double ci = compensated_integral(model, opts.quad, u, xi);
    out[0] = F(xi) * std::pow(ci, n);
    detail::binomial_rhs_at(model, opts.quad, lay, F, u, /*reduced=*/false, xi, out.subspan(2));
    out[1] = 0.0;
    for (std::size_t t = 0; t < lay.parts.size(); ++t) out[1] += lay.coeff[t] * out[2 + t];
  });
  IdentityReport r = detail::assemble("compensated-moment", vs, Engine::is_exact, opts);
  for (std::size_t t = 0; t < lay.parts.size(); ++t)
    r.terms.push_back({lay.labels[t], lay.coeff[t] * vs.comp[2 + t].value, vs.comp[2 + t].se});
  return r;
}

// E[F delta(u)^n] against the same expansion with reduced block arguments.
template <class Model, class Engine>
IdentityReport check_divergence_moment(const Model& model, const Engine& eng,
                                       const FunctionalFn<Model>& F, const ProcessFn<Model>& u,
                                       int n, const CheckOpts& opts) {
  if (n < 1 || n > 3) throw BoundError("divergence moments support 1 <= n <= 3");
  const auto lay = detail::binomial_layout<Model>(n);
  const int ncomp = 2 + static_cast<int>(lay.parts.size());
  VecStats vs = eng.expect_vec(ncomp, [&](const typename Model::Config& xi, std::span<double> out) {
    const double d = divergence(model, opts.quad, u, xi);
    out[0] = F(xi) * std::pow(d, n);
    detail::binomial_rhs_at(model, opts.quad, lay, F, u, /*reduced=*/true, xi, out.subspan(2));
    out[1] = 0.0;
    for (std::size_t t = 0; t < lay.parts.size(); ++t) out[1] += lay.coeff[t] * out[2 + t];
  });
  IdentityReport r = detail::assemble("divergence-moment", vs, Engine::is_exact, opts);
  for (std::size_t t = 0; t < lay.parts.size(); ++t)
    r.terms.push_back({lay.labels[t], lay.coeff[t] * vs.comp[2 + t].value, vs.comp[2 + t].se});
  return r;
}

// E[prod_k int v_k dxi] against the rho-weighted partition sum. When `rho` is
// given (closed form or a transformed law) the right side is deterministic;
// with an exact engine rho comes from the distribution; otherwise both sides
// share the sample batch.
template <class Model, class Engine>
IdentityReport check_correlation_moments(const Model& model, const Engine& eng,
                                         std::span<const PointFn<Model>> vs, const CheckOpts& opts,
                                         const RhoFn<Model>* rho = nullptr,
                                         std::string name = "correlation-moment") {
  using P = typename Model::Point;
  const int n = static_cast<int>(vs.size());
  if (n < 1 || n > detail::max_product_order<Model>())
    throw BoundError("correlation moments support 1 <= n <= " +
                     std::to_string(detail::max_product_order<Model>()));
  std::vector<ProcessFn<Model>> us;
  for (const auto& v : vs) {
    ProcessFn<Model> u;
    u.fn = [v](const P& x, const typename Model::Config&) { return v(x); };
    u.deterministic = true;
    us.push_back(std::move(u));
  }
  RhoFn<Model> rho_local;
  if (rho == nullptr && Engine::is_exact) {
    rho_local = [&model, &eng](std::span<const P> pts) {
      std::vector<P> sel(pts.begin(), pts.end());
      const typename Model::Config alpha(std::move(sel));
      return eng.expect([&](const typename Model::Config& xi) { return model.compound(alpha, xi); }).value;
    };
    rho = &rho_local;
  }
  if (rho == nullptr) {
    // Monte Carlo without a closed form: rho's expectation and the outer one
    // collapse into the product-moment identity over the shared batch.
    FunctionalFn<Model> one = [](const typename Model::Config&) { return 1.0; };
    return check_moment_product(model, eng, one, std::span<const ProcessFn<Model>>(us), opts,
                                std::move(name));
  }
  const std::vector<Partition> parts = enumerate_partitions(n);
  Stat lhs = eng.expect([&](const typename Model::Config& xi) {
    double v = 1.0;
    for (const auto& f : vs) v *= point_sum([&](const P& x, const auto&) { return f(x); }, xi);
    return v;
  });
  std::vector<TermValue> terms;
  double rhs = 0.0;
  for (const Partition& part : parts) {
    double term = 0.0;
    for_each_tuple(model.space(), part.block_count(), opts.quad,
                   [&](std::span<const P> xs, double wgt) {
                     double prod = (*rho)(xs);
                     if (prod == 0.0) return;
                     for (int l = 0; l < part.block_count(); ++l)
                       for (int i : part.blocks()[static_cast<std::size_t>(l)])
                         prod *= vs[static_cast<std::size_t>(i - 1)](xs[static_cast<std::size_t>(l)]);
                     term += wgt * prod;
                   });
    terms.push_back({"k=" + std::to_string(part.block_count()) + ",P=" + part.to_string(), term, 0.0});
    rhs += term;
  }
  IdentityReport r = Engine::is_exact
                         ? IdentityReport::exact(std::move(name), lhs.value, rhs, opts.exact_rel_tol)
                         : IdentityReport::monte_carlo(std::move(name), lhs.value, lhs.se, rhs, 0.0,
                                                       lhs.se, opts.z_crit);
  r.terms = std::move(terms);
  return r;
}

}  // namespace pointproc
