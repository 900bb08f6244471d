// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "pointproc/engine.hpp"
#include "pointproc/moments.hpp"
#include "pointproc/rng.hpp"
#include "pointproc/samplers.hpp"
#include "pointproc/stats.hpp"
#include "pointproc/transform.hpp"
#include "test_fixtures.hpp"

using namespace pointproc;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int idx, const char* what, bool ok, const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, what,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

using DProcess = ProcessFn<DiscreteModel>;
using DFunctional = FunctionalFn<DiscreteModel>;

std::vector<DProcess> u_family() {
  DProcess det;
  det.fn = [](Site x, const DiscreteConfig&) { return 0.4 + 0.3 * (x + 1); };
  det.deterministic = true;
  det.name = "deterministic";
  DProcess card;
  card.fn = [](Site x, const DiscreteConfig& xi) { return 0.5 + 0.25 * xi.without(x).size(); };
  card.name = "card";
  DProcess ind;
  ind.fn = [](Site x, const DiscreteConfig&) { return x == 0 ? 1.0 : 0.0; };
  ind.deterministic = true;
  ind.name = "indicator";
  return {det, card, ind};
}

std::vector<std::pair<std::string, DFunctional>> f_family() {
  return {{"one", [](const DiscreteConfig&) { return 1.0; }},
          {"card", [](const DiscreteConfig& xi) { return static_cast<double>(xi.size()); }},
          {"empty", [](const DiscreteConfig& xi) { return xi.empty() ? 1.0 : 0.0; }}};
}

void criterion1_product_moments() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  CheckOpts opts;
  opts.exact_rel_tol = 1e-9;
  const auto us_all = u_family();
  long checks = 0;
  for (const auto& nm : fixtures::discrete_battery()) {
    const auto dist = nm.model.exact_distribution();
    const ExactEngine eng(dist);
    for (const auto& [fname, F] : f_family()) {
      for (int n = 1; n <= 4; ++n) {
        std::vector<std::vector<DProcess>> combos;
        for (const auto& u : us_all)
          combos.emplace_back(static_cast<std::size_t>(n), u);
        std::vector<DProcess> mixed;
        for (int i = 0; i < n; ++i) mixed.push_back(us_all[static_cast<std::size_t>(i) % 3]);
        combos.push_back(std::move(mixed));
        for (const auto& us : combos) {
          const auto rep = check_moment_product(nm.model, eng, F, us, opts);
          ++checks;
          if (!rep.pass && ok) {
            ok = false;
            detail = nm.name + " F=" + fname + " n=" + std::to_string(n) +
                     " |lhs-rhs|=" + std::to_string(rep.abs_error());
          }
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 60.0) ok = false;
  if (detail.empty())
    detail = std::to_string(checks) + " identities, rel tol 1e-9, " + std::to_string(dt) + " s";
  report(1, "product-moment identity exact on all discrete fixtures", ok, detail);
}

void criterion2_gnz() {
  bool ok = true;
  std::string detail;
  CheckOpts opts;
  opts.exact_rel_tol = 1e-12;
  const CompoundFn<DiscreteModel> geo = [](const DiscreteConfig& a, const DiscreteConfig&) {
    return std::pow(0.5, a.size());
  };
  const CompoundFn<DiscreteModel> occ = [](const DiscreteConfig& a, const DiscreteConfig& xi) {
    return std::pow(0.7, a.size()) / (1.0 + xi.size());
  };
  for (const auto& nm : fixtures::discrete_battery()) {
    const auto dist = nm.model.exact_distribution();
    const ExactEngine eng(dist);
    for (const auto& u : u_family()) {
      const auto rep = check_gnz(nm.model, eng, u, opts);
      if (!rep.pass && ok) {
        ok = false;
        detail = nm.name + " u=" + u.name;
      }
    }
    for (const auto& u2 : {geo, occ}) {
      const auto rep = check_gnz_compound(nm.model, eng, u2, opts);
      if (!rep.pass && ok) {
        ok = false;
        detail = nm.name + " compound";
      }
    }
  }
  report(2, "simple and compound GNZ exact within 1e-12", ok, detail);
}

void criterion3_divergence_suite() {
  bool ok = true;
  std::string detail;
  CheckOpts opts;
  opts.exact_rel_tol = 1e-10;
  for (const auto& nm : fixtures::discrete_battery()) {
    const auto dist = nm.model.exact_distribution();
    const ExactEngine eng(dist);
    for (const auto& [fname, F] : f_family()) {
      for (const auto& u : u_family()) {
        auto note = [&](const char* which, const IdentityReport& r) {
          if (!r.pass && ok) {
            ok = false;
            detail = nm.name + " " + which + " F=" + fname + " u=" + u.name;
          }
        };
        note("duality", check_duality(nm.model, eng, F, u, opts));
        note("skorohod", check_skorohod(nm.model, eng, u, opts));
        for (int n = 1; n <= 4; ++n)
          note("compensated", check_compensated_moment(nm.model, eng, F, u, n, opts));
        for (int n = 1; n <= 3; ++n)
          note("divergence", check_divergence_moment(nm.model, eng, F, u, n, opts));
      }
    }
  }
  // Poisson deterministic case: E[delta(v)^2] = int v^2 z dlambda, both by
  // the closed form and through the isometry evaluator.
  for (double z : {0.5, 1.0}) {
    const auto model = DiscreteModel::poisson(DiscreteSpace::uniform(3), z);
    const auto dist = model.exact_distribution();
    const ExactEngine eng(dist);
    const auto v = u_family()[0];
    double analytic = 0.0;
    for (Site x = 0; x < 3; ++x) {
      const double vx = v(x, DiscreteConfig{});
      analytic += vx * vx * z;
    }
    const double direct = dist.expect([&](const DiscreteConfig& xi) {
      const double d = divergence(model, opts.quad, v, xi);
      return d * d;
    });
    const auto iso = check_skorohod(model, eng, v, opts);
    if (std::fabs(direct - analytic) > 1e-10 * (1.0 + analytic) || !iso.pass ||
        std::fabs(iso.lhs - analytic) > 1e-10 * (1.0 + analytic)) {
      ok = false;
      detail = "poisson closed form (z=" + std::to_string(z) + ")";
    }
  }
  report(3, "duality, Skorohod isometry and the moment expansions exact within 1e-10", ok, detail);
}

void criterion4_combinatorics() {
  bool ok = true;
  std::string detail;
  for (int n = 1; n <= 10 && ok; ++n) {
    if (enumerate_partitions(n).size() != partition_count(n)) {
      ok = false;
      detail = "Bell mismatch at n=" + std::to_string(n);
    }
    for (int k = 1; k <= n && ok; ++k)
      if (enumerate_partitions(n, k).size() != partition_count(n, k)) {
        ok = false;
        detail = "Stirling mismatch at n=" + std::to_string(n);
      }
  }
  // 1000 randomized functions across n <= 7.
  long done = 0;
  for (int n = 1; n <= 7 && ok; ++n) {
    const int reps = n <= 4 ? 200 : 67;
    for (int rep = 0; rep < reps && ok; ++rep, ++done) {
      const std::uint64_t seed = 7777ull * n + rep;
      auto f = [seed](const Partition& p) {
        std::uint64_t h = seed;
        for (int v : p.rgs()) h = splitmix64(h += static_cast<std::uint64_t>(v) + 0x9E37ull);
        return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      };
      if (!check_partition_recursion(n, f, 1e-12).pass) {
        ok = false;
        detail = "recursion failed at n=" + std::to_string(n);
      }
    }
  }
  if (ok && done < 1000) {
    ok = false;
    detail = "only " + std::to_string(done) + " randomized functions";
  }
  // Fiber structure exhaustively for n <= 7.
  for (int n = 1; n <= 7 && ok; ++n) {
    std::vector<Partition> rebuilt;
    for (const Partition& p : enumerate_partitions(n)) {
      const auto fiber = partition_fibers(p);
      if (fiber.size() != static_cast<std::size_t>(p.block_count()) + 1) ok = false;
      for (const Partition& q : fiber) {
        if (!(project_partition(q) == p)) ok = false;
        rebuilt.push_back(q);
      }
    }
    auto expected = enumerate_partitions(n + 1);
    std::sort(rebuilt.begin(), rebuilt.end());
    std::sort(expected.begin(), expected.end());
    if (rebuilt.size() != expected.size() ||
        !std::equal(rebuilt.begin(), rebuilt.end(), expected.begin())) {
      ok = false;
      detail = "fiber structure broken at n=" + std::to_string(n);
    }
  }
  report(4, "partition counts, randomized recursion and fiber structure", ok, detail);
}

void criterion5_continuous_closed_forms() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  const auto model = ContinuousModel::poisson(BoxWindow::unit_interval(), 2.0);
  const double expected[] = {2.0, 6.0, 22.0};
  CheckOpts opts;

  // Quadrature side: the partition sum over the xi-free Poisson intensity.
  const auto small = sample_poisson_window(model, 16, 5);
  const ContinuousMonteCarloEngine seng{std::span<const ContinuousConfig>(small.configs)};
  ProcessFn<ContinuousModel> one;
  one.fn = [](const Coord&, const ContinuousConfig&) { return 1.0; };
  one.deterministic = true;
  const FunctionalFn<ContinuousModel> fone = [](const ContinuousConfig&) { return 1.0; };
  for (int n = 1; n <= 3 && ok; ++n) {
    std::vector<ProcessFn<ContinuousModel>> us(static_cast<std::size_t>(n), one);
    const auto rhs = moment_product_rhs(model, seng, fone, us, opts.quad);
    if (std::fabs(rhs.total.value - expected[n - 1]) > 1e-6 * expected[n - 1] ||
        rhs.total.se > 1e-12) {
      ok = false;
      detail = "rhs n=" + std::to_string(n) + " got " + std::to_string(rhs.total.value);
    }
  }

  // Monte Carlo side at 1e5 samples.
  const auto batch = sample_poisson_window(model, 100000, 31);
  const ContinuousMonteCarloEngine eng{std::span<const ContinuousConfig>(batch.configs)};
  for (int n = 1; n <= 3 && ok; ++n) {
    const Stat lhs = eng.expect([&](const ContinuousConfig& xi) {
      double v = 1.0;
      for (int k = 0; k < n; ++k) v *= xi.size();
      return v;
    });
    if (std::fabs(lhs.value - expected[n - 1]) > 4.0 * lhs.se) {
      ok = false;
      detail = "mc lhs n=" + std::to_string(n);
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 30.0) {
    ok = false;
    detail = "runtime " + std::to_string(dt) + " s";
  }
  if (detail.empty()) detail = std::to_string(dt) + " s";
  report(5, "continuous Poisson moments 2, 6, 22 by quadrature and Monte Carlo", ok, detail);
}

void criterion6_determinantal_ground_truth() {
  const auto model = DiscreteModel::determinantal(DiscreteSpace::uniform(2), fixtures::kernel2());
  const auto dist = model.exact_distribution();
  const ExactEngine eng(dist);
  bool ok = true;
  const double rho = correlation(model, eng, DiscreteConfig({0, 1})).value;
  if (std::fabs(rho - 0.1875) > 1e-12) ok = false;
  const double expect_p[] = {3.0 / 16.0, 5.0 / 16.0, 5.0 / 16.0, 3.0 / 16.0};
  for (std::uint32_t mask = 0; mask < 4; ++mask)
    if (std::fabs(dist.prob(mask) - expect_p[mask]) > 1e-12) ok = false;
  report(6, "determinantal pair correlation det K and probability table", ok);
}

void criterion7_transform() {
  bool ok = true;
  std::string detail;
  // Deterministic swap on diag(0.2, 0.5) lands exactly on determinantal(K_tau).
  const auto swap = permutation_shift({1, 0});
  const auto diag = DiscreteModel::determinantal(DiscreteSpace::uniform(2), fixtures::kernel_diag());
  const auto pushed = pushforward_law(diag, swap);
  const Matrix kt = transform_dpp_kernel(fixtures::kernel_diag(), swap);
  const auto target = DiscreteModel::determinantal(DiscreteSpace::uniform(2), kt).exact_distribution();
  if (total_variation(pushed, target) > 1e-12) {
    ok = false;
    detail = "swap TV";
  }

  // Exvisible 4-site involution against the exact pushforward.
  const auto tau = conditional_swap_shift(0, 1, 3);
  std::vector<fixtures::Named> models;
  models.push_back({"poisson4", DiscreteModel::poisson(DiscreteSpace::uniform(4),
                                                       std::vector<double>{0.7, 0.7, 1.3, 0.4})});
  models.push_back({"gibbs4", DiscreteModel::gibbs(DiscreteSpace::uniform(4), 1.0,
                                                   fixtures::potential_ln2(4))});
  {
    const double v[] = {0.40, 0.10, 0.05, 0.10, 0.10, 0.40, 0.05, 0.10,
                        0.05, 0.05, 0.30, 0.00, 0.10, 0.10, 0.00, 0.35};
    models.push_back({"dpp4", DiscreteModel::determinantal(DiscreteSpace::uniform(4),
                                                           Matrix::from_row_major(4, v))});
  }
  for (const auto& nm : models) {
    const auto dist = nm.model.exact_distribution();
    const ExactEngine eng(dist);
    const auto rep = verify_pushforward_law(nm.model, eng, tau, 3, 1e-10);
    if (!rep.pass && ok) {
      ok = false;
      detail = nm.name + " gap " + std::to_string(rep.lhs);
    }
  }

  // Poisson-to-Poisson: transformed correlations factorize over points.
  const auto pois = DiscreteModel::poisson(DiscreteSpace::uniform(4),
                                           std::vector<double>{0.7, 0.7, 1.3, 0.4});
  const auto pdist = pois.exact_distribution();
  const ExactEngine peng(pdist);
  std::vector<double> first(4);
  for (Site x = 0; x < 4; ++x) {
    const DiscreteConfig single({x});
    first[static_cast<std::size_t>(x)] =
        transformed_correlation(pois, peng, tau, single.points()).value;
  }
  for (std::uint32_t mask = 1; mask < 16u && ok; ++mask) {
    if (std::popcount(mask) > 3) continue;
    const DiscreteConfig alpha = from_mask(mask, 4);
    double prod = 1.0;
    for (Site x : alpha) prod *= first[static_cast<std::size_t>(x)];
    if (std::fabs(transformed_correlation(pois, peng, tau, alpha.points()).value - prod) > 1e-10) {
      ok = false;
      detail = "poisson factorization";
    }
  }
  report(7, "pushforward laws: kernel transport, exvisible involution, Poisson form", ok, detail);
}

void criterion8_samplers() {
  bool ok = true;
  std::string detail;
  // Goodness of fit at 4e4 draws.
  for (const char* which : {"poisson", "dpp"}) {
    const DiscreteModel model =
        std::string(which) == "poisson"
            ? DiscreteModel::poisson(DiscreteSpace::uniform(2), 1.0)
            : DiscreteModel::determinantal(DiscreteSpace::uniform(2), fixtures::kernel2());
    const auto dist = model.exact_distribution();
    const auto batch = sample_discrete(model, 40000, 7);
    std::vector<long> counts(dist.states(), 0);
    for (const auto& cfg : batch.configs) ++counts[to_mask(cfg)];
    const double p = chi_squared_gof_pvalue(counts, dist.probs());
    if (p < 1e-4) {
      ok = false;
      detail = std::string(which) + " gof p=" + std::to_string(p);
    }
  }
  // Zero-potential chain reproduces the Poisson mean.
  const auto freegas = ContinuousModel::gibbs(BoxWindow::unit_interval(), 2.0,
                                              [](const Coord&, const Coord&) { return 0.0; });
  BirthDeathOpts bd;
  bd.replicas = 4;
  const auto chain = sample_gibbs_birth_death(freegas, 4000, 17, bd);
  std::vector<double> card;
  for (const auto& cfg : chain.configs) card.push_back(cfg.size());
  const double mean = mean_of(card);
  const double se = batch_means_se(card);
  if (std::fabs(mean - 2.0) > 4.0 * se) {
    ok = false;
    detail = "chain mean " + std::to_string(mean) + " se " + std::to_string(se);
  }
  // Detailed balance of the discretized kernel.
  const auto model = fixtures::weighted_gibbs3();
  const Matrix t = birth_death_transition_matrix(model);
  const auto dist = model.exact_distribution();
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      if (std::fabs(dist.prob(a) * t(a, b) - dist.prob(b) * t(b, a)) > 1e-12) {
        ok = false;
        detail = "detailed balance";
      }
  report(8, "sampler matches the oracle, chain mean and detailed balance", ok, detail);
}

void criterion9_negative_controls() {
  bool ok = true;
  std::string detail;
  // Distinct-tuple convention: the diagonal-inclusive evaluator must miss.
  const auto model = DiscreteModel::poisson(DiscreteSpace::uniform(1), 1.0);
  const auto dist = model.exact_distribution();
  const ExactEngine eng(dist);
  DProcess one;
  one.fn = [](Site, const DiscreteConfig&) { return 1.0; };
  one.deterministic = true;
  const std::vector<DProcess> two(2, one);
  const FunctionalFn<DiscreteModel> fone = [](const DiscreteConfig&) { return 1.0; };
  const double lhs = moment_product_lhs(model, eng, fone, two).value;
  const double distinct = moment_product_rhs(model, eng, fone, two).total.value;
  // Diagonal-inclusive variant: allow the repeated tuple (1,1), collapsing
  // to the single-site compound intensity.
  double naive = distinct;
  naive += dist.expect([&](const DiscreteConfig& xi) {
    return model.compound(DiscreteConfig({0}), xi);  // the (1,1) tuple term
  });
  if (std::fabs(distinct - lhs) > 1e-9 * (1.0 + std::fabs(lhs))) {
    ok = false;
    detail = "distinct convention off";
  }
  if (std::fabs(naive - lhs) < 0.3) {
    ok = false;
    detail = "naive evaluator unexpectedly matched";
  }
  // Non-exvisible process flagged with violation exactly 1.
  std::vector<std::function<double(const Site&, const DiscreteConfig&)>> comps{
      [](const Site&, const DiscreteConfig& xi) { return static_cast<double>(xi.size()); }};
  std::vector<Site> pts{0, 1, 2};
  std::vector<DiscreteConfig> configs;
  for (std::uint32_t mask = 0; mask < 8u; ++mask) configs.push_back(from_mask(mask, 3));
  const auto rep = check_exvisibility<Site>(comps, pts, configs);
  if (std::fabs(rep.max_dx_violation - 1.0) > 1e-15) {
    ok = false;
    detail = "cardinality violation " + std::to_string(rep.max_dx_violation);
  }
  report(9, "negative controls: diagonal tuples and non-exvisible processes", ok, detail);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  criterion1_product_moments();
  criterion2_gnz();
  criterion3_divergence_suite();
  criterion4_combinatorics();
  criterion5_continuous_closed_forms();
  criterion6_determinantal_ground_truth();
  criterion7_transform();
  criterion8_samplers();
  criterion9_negative_controls();
  std::printf("%d/9 criteria passed in %.1f s\n", 9 - g_failures, seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
