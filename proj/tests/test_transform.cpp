#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pointproc/samplers.hpp"
#include "pointproc/transform.hpp"
#include "test_fixtures.hpp"

using namespace pointproc;

namespace {

Matrix kernel4_swap_symmetric() {
  const double v[] = {0.40, 0.10, 0.05, 0.10,  //
                      0.10, 0.40, 0.05, 0.10,  //
                      0.05, 0.05, 0.30, 0.00,  //
                      0.10, 0.10, 0.00, 0.35};
  return Matrix::from_row_major(4, v);
}

DiscreteShift identity_shift(int m) {
  std::vector<Site> image(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) image[static_cast<std::size_t>(i)] = i;
  return permutation_shift(std::move(image));
}

}  // namespace

TEST_CASE("push forward basics") {
  const auto id = identity_shift(3);
  const DiscreteConfig xi({0, 2});
  CHECK(push_forward(id, xi) == xi);

  const auto swap = permutation_shift({1, 0});
  CHECK(push_forward(swap, DiscreteConfig({0})) == DiscreteConfig({1}));

  DiscreteShift collapse;
  collapse.forward = [](Site, const DiscreteConfig&) { return 0; };
  CHECK_THROWS_AS(push_forward(collapse, DiscreteConfig({0, 1})), NonInjectiveShiftError);
}

TEST_CASE("crowd translation hand fixture") {
  const BoxWindow w = BoxWindow::unit_interval();
  const auto tau = crowd_translation_shift(w, 0.2, 0.01);
  const ContinuousConfig xi({Coord{0.1, 0, 0}, Coord{0.5, 0, 0}});
  const auto img = push_forward(tau, xi);
  REQUIRE(img.size() == 2);
  CHECK(img.points()[0][0] == doctest::Approx(0.11).epsilon(1e-12));
  CHECK(img.points()[1][0] == doctest::Approx(0.51).epsilon(1e-12));
  CHECK_THROWS_AS(tau.invert(Coord{0.5, 0, 0}, xi), UnsupportedVariantError);
}

TEST_CASE("exvisibility checker") {
  std::vector<Site> pts{0, 1, 2, 3};
  std::vector<DiscreteConfig> configs;
  for (std::uint32_t mask = 0; mask < 16u; ++mask) configs.push_back(from_mask(mask, 4));

  using Comp = std::function<double(const Site&, const DiscreteConfig&)>;
  // Deterministic function of the point only.
  std::vector<Comp> det{[](const Site& x, const DiscreteConfig&) { return 0.5 * x; }};
  CHECK(check_exvisibility<Site>(det, pts, configs).max_violation() == 0.0);

  // Simple exvisible process: indicator of A times a functional of xi off A.
  std::vector<Comp> simple{[](const Site& x, const DiscreteConfig& xi) {
    if (x > 1) return 0.0;  // A = {0, 1}
    double f = 0.0;
    for (Site y : xi)
      if (y > 1) f += 1.0;
    return f;
  }};
  CHECK(check_exvisibility<Site>(simple, pts, configs).max_violation() == 0.0);

  // |xi| is not exvisible: the diagonal difference is exactly 1.
  std::vector<Comp> card{
      [](const Site&, const DiscreteConfig& xi) { return static_cast<double>(xi.size()); }};
  const auto rep = check_exvisibility<Site>(card, pts, configs);
  CHECK(rep.max_dx_violation == doctest::Approx(1.0));

  // The conditional swap as a site-valued process has zero diagonal
  // difference and vanishing cyclic products.
  const auto tau = conditional_swap_shift(0, 1, 3);
  std::vector<Comp> shift_comp{[&tau](const Site& x, const DiscreteConfig& xi) {
    return static_cast<double>(tau.apply(x, xi));
  }};
  const auto srep = check_exvisibility<Site>(shift_comp, pts, configs);
  CHECK(srep.max_dx_violation == 0.0);
  CHECK(srep.max_cycle2 == 0.0);
  CHECK(srep.max_cycle3 == 0.0);
}

TEST_CASE("shift validation and sigma") {
  const auto tau = conditional_swap_shift(0, 1, 3);
  const auto sigma = sigma_weights(tau, DiscreteSpace::uniform(4));
  for (double s : sigma) CHECK(s == doctest::Approx(1.0));

  // Swapped sites must carry equal weights for sigma to be well defined.
  CHECK_THROWS_AS(sigma_weights(tau, DiscreteSpace({1.0, 2.0, 1.0, 1.0})),
                  UnsupportedVariantError);
  // Weights elsewhere may differ.
  const auto ok = sigma_weights(tau, DiscreteSpace({1.5, 1.5, 0.5, 2.0}));
  CHECK(ok[3] == doctest::Approx(2.0));

  CHECK_THROWS_AS(conditional_swap_shift(0, 1, 1), BoundError);

  const auto perm = permutation_shift({2, 0, 1});
  const auto psig = sigma_weights(perm, DiscreteSpace({1.0, 2.0, 3.0}));
  CHECK(psig[2] == doctest::Approx(1.0));
  CHECK(psig[0] == doctest::Approx(2.0));
  CHECK(psig[1] == doctest::Approx(3.0));
}

TEST_CASE("transformed correlation requires distinct targets and an inverse") {
  const auto model = DiscreteModel::poisson(DiscreteSpace::uniform(2), 1.0);
  const auto dist = model.exact_distribution();
  const ExactEngine eng(dist);
  const auto id = identity_shift(2);
  const std::vector<Site> doubled{0, 0};
  CHECK_THROWS_AS(transformed_correlation(model, eng, id, doubled), BoundError);
  DiscreteShift fwd_only;
  fwd_only.forward = [](Site x, const DiscreteConfig&) { return x; };
  const std::vector<Site> one{0};
  CHECK_THROWS_AS(transformed_correlation(model, eng, fwd_only, one), UnsupportedVariantError);
}

TEST_CASE("transformed correlation reduces to plain correlation for identity") {
  for (const auto& nm : fixtures::discrete_battery()) {
    const auto dist = nm.model.exact_distribution();
    const ExactEngine eng(dist);
    const auto id = identity_shift(nm.model.space().size());
    const int m = nm.model.space().size();
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
      const DiscreteConfig alpha = from_mask(mask, m);
      const double a = transformed_correlation(nm.model, eng, id, alpha.points()).value;
      const double b = correlation(nm.model, eng, alpha).value;
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
  }
}

TEST_CASE("deterministic shift gives relabeled correlations") {
  const auto model = DiscreteModel::determinantal(DiscreteSpace::uniform(3), fixtures::kernel3());
  const auto dist = model.exact_distribution();
  const ExactEngine eng(dist);
  const auto cyc = permutation_shift({1, 2, 0});
  for (std::uint32_t mask = 1; mask < 8u; ++mask) {
    const DiscreteConfig alpha = from_mask(mask, 3);
    std::vector<Site> pre;
    for (Site a : alpha) pre.push_back(cyc.invert(a, DiscreteConfig{}));
    const double expected = correlation(model, eng, DiscreteConfig(pre)).value;
    const double actual = transformed_correlation(model, eng, cyc, alpha.points()).value;
    CHECK(actual == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("pushforward law under deterministic swaps") {
  const ExactDistribution sym =
      DiscreteModel::determinantal(DiscreteSpace::uniform(2), fixtures::kernel2())
          .exact_distribution();
  const auto model = DiscreteModel::determinantal(DiscreteSpace::uniform(2), fixtures::kernel2());
  const auto swap = permutation_shift({1, 0});
  // The symmetric kernel is invariant under the swap.
  const auto pushed = pushforward_law(model, swap);
  CHECK(total_variation(pushed, sym) <= 1e-12);

  // diag(0.2, 0.5) maps onto determinantal(diag(0.5, 0.2)) exactly.
  const auto diag = DiscreteModel::determinantal(DiscreteSpace::uniform(2), fixtures::kernel_diag());
  const auto pushed_diag = pushforward_law(diag, swap);
  const Matrix kt = transform_dpp_kernel(fixtures::kernel_diag(), swap);
  CHECK(kt(0, 0) == doctest::Approx(0.5));
  CHECK(kt(1, 1) == doctest::Approx(0.2));
  const auto target =
      DiscreteModel::determinantal(DiscreteSpace::uniform(2), kt).exact_distribution();
  CHECK(total_variation(pushed_diag, target) <= 1e-12);
}

TEST_CASE("kernel transport preserves the spectrum") {
  const auto cyc = permutation_shift({1, 2, 0});
  const Matrix k = fixtures::kernel3();
  const Matrix kt = transform_dpp_kernel(k, cyc);
  const auto a = symmetric_eigen(k).values;
  const auto b = symmetric_eigen(kt).values;
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-12);

  const auto id = identity_shift(3);
  const Matrix same = transform_dpp_kernel(k, id);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(same(i, j) == doctest::Approx(k(i, j)));

  CHECK_THROWS_AS(transform_dpp_kernel(k, conditional_swap_shift(0, 1, 2)),
                  UnsupportedVariantError);
}

TEST_CASE("exvisible involution matches the exact pushforward") {
  const auto tau = conditional_swap_shift(0, 1, 3);
  std::vector<fixtures::Named> models;
  models.push_back({"poisson4",
                    DiscreteModel::poisson(DiscreteSpace::uniform(4),
                                           std::vector<double>{0.7, 0.7, 1.3, 0.4})});
  models.push_back({"gibbs4(ln2 on 1-2)",
                    DiscreteModel::gibbs(DiscreteSpace::uniform(4), 1.0, fixtures::potential_ln2(4))});
  models.push_back({"dpp4(swap symmetric)",
                    DiscreteModel::determinantal(DiscreteSpace::uniform(4), kernel4_swap_symmetric())});
  for (const auto& nm : models) {
    const auto dist = nm.model.exact_distribution();
    const ExactEngine eng(dist);
    const auto rep = verify_pushforward_law(nm.model, eng, tau, 3, 1e-10);
    INFO(nm.name << " max gap " << rep.lhs);
    CHECK(rep.pass);
  }
}

TEST_CASE("coupling the moved pair to the zone breaks the formula") {
  // With an interaction between a moved site and the zone site, the value of
  // the shift at a tuple point changes when another tuple point lands in the
  // zone, and the pushforward correlations part ways with the formula. The
  // exact gap for alpha = {1, 4} is 1/14 here.
  Matrix phi(4);
  phi(0, 3) = phi(3, 0) = std::log(2.0);
  const auto model = DiscreteModel::gibbs(DiscreteSpace::uniform(4), 1.0, phi);
  const auto dist = model.exact_distribution();
  const ExactEngine eng(dist);
  const auto tau = conditional_swap_shift(0, 1, 3);

  const DiscreteConfig alpha({0, 3});
  const double formula = transformed_correlation(model, eng, tau, alpha.points()).value;
  const double direct = law_correlation(pushforward_law(model, tau), alpha);
  CHECK(formula == doctest::Approx(2.0 / 14.0).epsilon(1e-12));
  CHECK(direct == doctest::Approx(3.0 / 14.0).epsilon(1e-12));
  CHECK(std::fabs(formula - direct) > 1e-3);

  const auto rep = verify_pushforward_law(model, eng, tau, 3, 1e-10);
  CHECK(!rep.pass);
}

TEST_CASE("poisson correlations stay product form under the exvisible shift") {
  const auto model = DiscreteModel::poisson(DiscreteSpace::uniform(4),
                                            std::vector<double>{0.7, 0.7, 1.3, 0.4});
  const auto dist = model.exact_distribution();
  const ExactEngine eng(dist);
  const auto tau = conditional_swap_shift(0, 1, 3);
  std::vector<double> first_order(4);
  for (Site x = 0; x < 4; ++x) {
    const DiscreteConfig single({x});
    first_order[static_cast<std::size_t>(x)] =
        transformed_correlation(model, eng, tau, single.points()).value;
  }
  for (std::uint32_t mask = 1; mask < 16u; ++mask) {
    if (std::popcount(mask) > 3) continue;
    const DiscreteConfig alpha = from_mask(mask, 4);
    double prod = 1.0;
    for (Site x : alpha) prod *= first_order[static_cast<std::size_t>(x)];
    const double rho = transformed_correlation(model, eng, tau, alpha.points()).value;
    CHECK(std::fabs(rho - prod) <= 1e-10);
  }
}

TEST_CASE("continuous pushforward by translation") {
  const auto model = ContinuousModel::poisson(BoxWindow::unit_interval(), 2.0);
  const auto tau = translation_mod_shift(model.window(), Coord{0.3, 0, 0});
  const auto batch = sample_poisson_window(model, 4000, 12);
  for (const auto& xi : batch.configs) {
    CHECK(push_forward(tau, xi).size() == xi.size());
    for (const Coord& x : xi)  // forward then inverse returns the point
      CHECK(std::fabs(tau.invert(tau.apply(x, xi), xi)[0] - x[0]) <= 1e-12);
  }

  CheckOpts opts;
  opts.quad.nodes_per_axis = 32;
  const PointFn<ContinuousModel> one = [](const Coord&) { return 1.0; };
  const PointFn<ContinuousModel> slope = [](const Coord& x) { return 0.5 + x[0]; };
  std::vector<PointFn<ContinuousModel>> vs{one, slope};
  const auto rep = verify_pushforward_law_mc(model, batch.configs, tau, vs, opts);
  CHECK(rep.pass);
}
