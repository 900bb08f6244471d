#pragma once

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pointproc/config.hpp"
#include "pointproc/engine.hpp"
#include "pointproc/errors.hpp"
#include "pointproc/fixtures.hpp"
#include "pointproc/models.hpp"
#include "pointproc/moments.hpp"
#include "pointproc/report.hpp"
#include "pointproc/report_json.hpp"
#include "pointproc/rng.hpp"
#include "pointproc/samplers.hpp"
#include "pointproc/transform.hpp"

namespace pointproc {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

using AnyModel = std::variant<DiscreteModel, ContinuousModel>;

inline AnyModel build_model(const ModelSpec& ms) {
  auto activity_vec = [&](int m) {
    if (ms.activity.empty()) return std::vector<double>(static_cast<std::size_t>(m), 1.0);
    if (ms.activity.size() == 1)
      return std::vector<double>(static_cast<std::size_t>(m), ms.activity[0]);
    if (static_cast<int>(ms.activity.size()) != m)
      throw ConfigError(0, "activity needs 1 or m entries");
    return ms.activity;
  };
  auto discrete_space = [&]() {
    if (ms.sites < 1) throw ConfigError(0, "discrete models need sites >= 1");
    std::vector<double> w = ms.weights.empty()
                                ? std::vector<double>(static_cast<std::size_t>(ms.sites), 1.0)
                                : ms.weights;
    if (static_cast<int>(w.size()) != ms.sites)
      throw ConfigError(0, "weights needs one entry per site");
    return DiscreteSpace(std::move(w));
  };
  auto box_window = [&]() {
    if (ms.window.empty() || ms.window.size() % 2 != 0 || ms.window.size() > 6)
      throw ConfigError(0, "window needs [lo1, hi1, ...] with 1 to 3 axes");
    const int dim = static_cast<int>(ms.window.size() / 2);
    Coord lo{0, 0, 0}, hi{0, 0, 0};
    for (int i = 0; i < dim; ++i) {
      lo[i] = ms.window[static_cast<std::size_t>(2 * i)];
      hi[i] = ms.window[static_cast<std::size_t>(2 * i + 1)];
    }
    return BoxWindow(dim, lo, hi, ms.ref_density);
  };

  if (ms.family == "poisson") {
    return DiscreteModel::poisson(discrete_space(), activity_vec(ms.sites));
  }
  if (ms.family == "gibbs") {
    if (static_cast<int>(ms.potential.size()) != ms.sites * ms.sites)
      throw ConfigError(0, "gibbs needs a row-major m*m potential");
    return DiscreteModel::gibbs(discrete_space(), activity_vec(ms.sites),
                                Matrix::from_row_major(ms.sites, ms.potential));
  }
  if (ms.family == "determinantal") {
    if (static_cast<int>(ms.kernel.size()) != ms.sites * ms.sites)
      throw ConfigError(0, "determinantal needs a row-major m*m kernel");
    return DiscreteModel::determinantal(discrete_space(),
                                        Matrix::from_row_major(ms.sites, ms.kernel));
  }
  if (ms.family == "poisson-window") {
    return ContinuousModel::poisson(box_window(), ms.intensity);
  }
  if (ms.family == "gibbs-window") {
    const double r = ms.hardcore_radius;
    const BoxWindow w = box_window();
    const int dim = w.dim;
    ContinuousModel::PotentialFn phi = [r, dim](const Coord& a, const Coord& b) {
      if (r <= 0.0) return 0.0;
      double d2 = 0.0;
      for (int i = 0; i < dim; ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
      return d2 < r * r ? std::numeric_limits<double>::infinity() : 0.0;
    };
    return ContinuousModel::gibbs(w, ms.intensity, std::move(phi));
  }
  throw ConfigError(0, "unknown model family '" + ms.family + "'");
}

inline DiscreteShift build_discrete_shift(const ShiftSpec& ss, int sites) {
  if (ss.kind == "permutation") {
    if (static_cast<int>(ss.perm.size()) != sites)
      throw ConfigError(0, "perm needs one (1-based) image per site");
    std::vector<Site> image;
    for (int v : ss.perm) image.push_back(static_cast<Site>(v - 1));
    return permutation_shift(std::move(image));
  }
  if (ss.kind == "conditional-swap") {
    return conditional_swap_shift(static_cast<Site>(ss.swap_a - 1),
                                  static_cast<Site>(ss.swap_b - 1),
                                  static_cast<Site>(ss.zone - 1));
  }
  throw ConfigError(0, "unknown discrete shift kind '" + ss.kind + "'");
}

inline ContinuousShift build_continuous_shift(const ShiftSpec& ss, const BoxWindow& w) {
  if (ss.kind == "translation") {
    Coord d{0, 0, 0};
    for (int i = 0; i < w.dim && i < static_cast<int>(ss.delta.size()); ++i)
      d[i] = ss.delta[static_cast<std::size_t>(i)];
    return translation_mod_shift(w, d);
  }
  throw ConfigError(0, "unknown continuous shift kind '" + ss.kind + "'");
}

namespace detail {

inline double random_partition_value(const Partition& p, std::uint64_t seed) {
  std::uint64_t h = seed ^ 0x6C62272E07BB0142ull;
  for (int v : p.rgs()) {
    h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h = splitmix64(h);
  }
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

inline std::function<double(const Partition&)> partition_fixture(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts[0] == "ones" || parts[0] == "one") return [](const Partition&) { return 1.0; };
  if (parts[0] == "blocks")
    return [](const Partition& p) { return static_cast<double>(p.block_count()); };
  if (parts[0] == "random") {
    const std::uint64_t seed = parts.size() > 1 ? std::stoull(parts[1]) : 7;
    return [seed](const Partition& p) { return random_partition_value(p, seed); };
  }
  throw ConfigError(0, "unknown partition fixture '" + spec + "'");
}

template <class Model, class Engine>
IdentityReport run_one_check(const Model& model, const Engine& eng, const CheckSpec& spec,
                             const std::optional<ShiftSpec>& shift_spec, const EstimatorSpec& est) {
  CheckOpts opts;
  opts.quad.nodes_per_axis = est.quad_nodes;
  if (spec.tolerance) {
    if (Engine::is_exact)
      opts.exact_rel_tol = *spec.tolerance;
    else
      opts.z_crit = *spec.tolerance;
  }
  auto u_at = [&](std::size_t i) {
    const std::string s = i < spec.us.size() ? spec.us[i]
                          : spec.us.empty()  ? std::string("const:1")
                                             : spec.us.back();
    auto u = make_process_fn(model, s);
    if (u.deterministic && !spot_check_deterministic(model, u))
      throw ConfigError(spec.line, "fixture '" + s + "' is flagged deterministic but reads xi");
    return u;
  };
  // On windows the bare cardinality functional is unbounded; cap it and say so.
  std::string f_spec = spec.F;
  std::string f_note;
  if constexpr (!is_discrete_model<Model>) {
    if (f_spec == "card") {
      f_spec = "card:64";
      f_note = "F = card truncated at 64 (configurable via card:<cap>)";
    }
  }
  auto F = [&]() { return make_functional<Model>(f_spec); };
  auto annotate = [&](IdentityReport r) {
    if (!f_note.empty()) r.notes.push_back(f_note);
    return r;
  };

  if (spec.kind == "gnz") return check_gnz(model, eng, u_at(0), opts);
  if (spec.kind == "gnz-compound")
    return check_gnz_compound(model, eng, make_compound_fn<Model>(spec.compound), opts);
  if (spec.kind == "moment-product" || spec.kind == "moment-power") {
    std::vector<ProcessFn<Model>> us;
    for (int i = 0; i < std::max(spec.n, 1); ++i)
      us.push_back(spec.kind == "moment-power" ? u_at(0) : u_at(static_cast<std::size_t>(i)));
    return annotate(check_moment_product(model, eng, F(), std::span<const ProcessFn<Model>>(us),
                                         opts, spec.kind));
  }
  if (spec.kind == "compensated-moment")
    return annotate(check_compensated_moment(model, eng, F(), u_at(0), std::max(spec.n, 1), opts));
  if (spec.kind == "divergence-moment")
    return annotate(check_divergence_moment(model, eng, F(), u_at(0), std::max(spec.n, 1), opts));
  if (spec.kind == "duality") return annotate(check_duality(model, eng, F(), u_at(0), opts));
  if (spec.kind == "skorohod") return check_skorohod(model, eng, u_at(0), opts);
  if (spec.kind == "skorohod-rewrite") return check_skorohod_rewrite(model, eng, u_at(0), opts);
  if (spec.kind == "correlation-moment") {
    std::vector<PointFn<Model>> vs;
    for (int i = 0; i < std::max(spec.n, 1); ++i) {
      const std::string s = static_cast<std::size_t>(i) < spec.vs.size()
                                ? spec.vs[static_cast<std::size_t>(i)]
                            : spec.vs.empty() ? std::string("const:1")
                                              : spec.vs.back();
      vs.push_back(make_point_fn(model.space(), s));
    }
    return check_correlation_moments(model, eng, std::span<const PointFn<Model>>(vs), opts);
  }
  if (spec.kind == "partition-recursion") {
    return check_partition_recursion(std::max(spec.n, 1), partition_fixture(spec.F == "one" ? "ones" : spec.F),
                                     spec.tolerance.value_or(1e-12));
  }
  if (spec.kind == "transform-law") {
    if (!shift_spec) throw ConfigError(spec.line, "transform-law needs a [shift] table");
    if constexpr (is_discrete_model<Model>) {
      const DiscreteShift tau = build_discrete_shift(*shift_spec, model.space().size());
      return verify_pushforward_law(model, eng, tau, 3, spec.tolerance.value_or(1e-10));
    } else {
      const ContinuousShift tau = build_continuous_shift(*shift_spec, model.window());
      std::vector<PointFn<Model>> vs;
      for (int i = 0; i < std::max(spec.n, 2); ++i)
        vs.push_back(make_point_fn(model.space(), "const:1"));
      return verify_pushforward_law_mc(model, eng.samples(), tau,
                                       std::span<const PointFn<Model>>(vs), opts);
    }
  }
  throw ConfigError(spec.line, "unknown check kind '" + spec.kind + "'");
}

template <class Model, class Engine>
std::vector<IdentityReport> run_checks(const Model& model, const Engine& eng,
                                       const ExperimentConfig& cfg, int parallel) {
  std::vector<IdentityReport> out(cfg.checks.size());
  auto run_index = [&](std::size_t i) {
    try {
      out[i] = run_one_check(model, eng, cfg.checks[i], cfg.shift, cfg.estimator);
    } catch (const ConfigError&) {
      throw;  // configuration problems abort the run (exit 2)
    } catch (const std::exception& e) {
      IdentityReport r;
      r.identity = cfg.checks[i].kind;
      r.pass = false;
      r.notes.push_back(std::string("check aborted: ") + e.what());
      out[i] = r;
    }
  };
  if (parallel <= 1) {
    for (std::size_t i = 0; i < cfg.checks.size(); ++i) run_index(i);
    return out;
  }
  std::vector<std::future<void>> slots;
  for (std::size_t i = 0; i < cfg.checks.size(); ++i) {
    if (static_cast<int>(slots.size()) >= parallel) {
      slots.front().get();
      slots.erase(slots.begin());
    }
    slots.push_back(std::async(std::launch::async, run_index, i));
  }
  for (auto& s : slots) s.get();
  return out;
}

inline std::string resolve_out_dir(const ExperimentConfig& cfg, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("POINTPROC_OUT_DIR")) return env;
  return "out";
}

inline void write_reports(const std::vector<IdentityReport>& reports, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir + "/report.csv");
  csv << csv_header() << "\n";
  for (const auto& r : reports) csv << csv_row(r) << "\n";
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(to_json(r));
  std::ofstream js(dir + "/report.json");
  js << j.dump(2) << "\n";
}

}  // namespace detail

// verify <config>: run every configured identity check, write report.csv and
// report.json, exit 0 only if everything passed.
inline int run_verify(const std::string& config_path, const std::string& out_override,
                      int parallel, std::ostream& diag) {
  std::vector<IdentityReport> reports;
  std::string out_dir;
  try {
    const ExperimentConfig cfg = parse_experiment_config(toml::parse_file(config_path));
    out_dir = detail::resolve_out_dir(cfg, out_override);
    const AnyModel model = build_model(cfg.model);
    if (cfg.estimator.mode == "exact") {
      const DiscreteModel* dm = std::get_if<DiscreteModel>(&model);
      if (!dm) throw ConfigError(0, "exact mode needs a discrete model");
      if (dm->space().size() > kMaxExactSites)
        throw ConfigError(0, "exact mode supports at most 15 sites");
      const ExactDistribution dist = dm->exact_distribution();
      const ExactEngine eng(dist);
      reports = detail::run_checks(*dm, eng, cfg, parallel);
    } else if (const DiscreteModel* dm = std::get_if<DiscreteModel>(&model)) {
      const DiscreteBatch batch = sample_discrete(*dm, cfg.estimator.samples, cfg.estimator.seed);
      const DiscreteMonteCarloEngine eng{std::span<const DiscreteConfig>(batch.configs)};
      reports = detail::run_checks(*dm, eng, cfg, parallel);
    } else {
      const ContinuousModel& cm = std::get<ContinuousModel>(model);
      ContinuousBatch batch;
      if (cm.family() == Family::Poisson) {
        batch = sample_poisson_window(cm, cfg.estimator.samples, cfg.estimator.seed);
      } else {
        BirthDeathOpts bd;
        bd.burn_in = cfg.estimator.burn_in;
        bd.steps_per_sample = cfg.estimator.steps_per_sample;
        bd.replicas = cfg.estimator.replicas;
        batch = sample_gibbs_birth_death(cm, cfg.estimator.samples, cfg.estimator.seed, bd);
      }
      const ContinuousMonteCarloEngine eng{std::span<const ContinuousConfig>(batch.configs)};
      reports = detail::run_checks(cm, eng, cfg, parallel);
    }
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  detail::write_reports(reports, out_dir);
  for (const auto& r : reports)
    diag << (r.pass ? "pass " : "FAIL ") << r.identity << " lhs=" << r.lhs << " rhs=" << r.rhs
         << "\n";
  const bool all_pass =
      std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  return all_pass ? kExitPass : kExitCheckFailed;
}

// sample <config>: write a reproducible batch in the line format plus a JSON
// metadata sidecar.
inline int run_sample(const std::string& config_path, const std::string& out_override,
                      std::ostream& diag) {
  try {
    const ExperimentConfig cfg = parse_experiment_config(toml::parse_file(config_path));
    const std::string dir = detail::resolve_out_dir(cfg, out_override);
    std::filesystem::create_directories(dir);
    const AnyModel model = build_model(cfg.model);
    std::ofstream lines(dir + "/samples.txt");
    nlohmann::json meta;
    meta["seed"] = cfg.estimator.seed;
    meta["count"] = cfg.sample_count;
    lines << "# pointproc configurations v1\n";
    if (const DiscreteModel* dm = std::get_if<DiscreteModel>(&model)) {
      const DiscreteBatch b = sample_discrete(*dm, cfg.sample_count, cfg.estimator.seed);
      for (const auto& c : b.configs) lines << to_line(c) << "\n";
      meta["model"] = b.model;
    } else {
      const ContinuousModel& cm = std::get<ContinuousModel>(model);
      ContinuousBatch b;
      if (cm.family() == Family::Poisson) {
        b = sample_poisson_window(cm, cfg.sample_count, cfg.estimator.seed);
      } else {
        BirthDeathOpts bd;
        bd.burn_in = cfg.estimator.burn_in;
        bd.steps_per_sample = cfg.estimator.steps_per_sample;
        bd.replicas = cfg.estimator.replicas;
        b = sample_gibbs_birth_death(cm, cfg.sample_count, cfg.estimator.seed, bd);
        meta["birth_acceptance"] = b.diag.birth_acceptance;
        meta["death_acceptance"] = b.diag.death_acceptance;
        meta["burn_in"] = b.diag.burn_in;
        meta["steps_per_sample"] = b.diag.steps_per_sample;
      }
      for (const auto& c : b.configs) lines << to_line(c, cm.window().dim) << "\n";
      meta["model"] = b.model;
    }
    std::ofstream ms(dir + "/samples.meta.json");
    ms << meta.dump(2) << "\n";
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitPass;
}

// oracle <config>: dump the exact law, low-order correlation functions, and
// the intensity tables for a discrete model.
inline int run_oracle(const std::string& config_path, const std::string& out_override,
                      std::ostream& diag) {
  try {
    const ExperimentConfig cfg = parse_experiment_config(toml::parse_file(config_path));
    const std::string dir = detail::resolve_out_dir(cfg, out_override);
    const AnyModel model = build_model(cfg.model);
    const DiscreteModel* dm = std::get_if<DiscreteModel>(&model);
    if (!dm) throw UnsupportedVariantError("oracle dumps need a discrete model");
    const ExactDistribution dist = dm->exact_distribution();
    const int m = dist.sites();
    nlohmann::json j;
    j["sites"] = m;
    j["family"] = to_string(dm->family());
    nlohmann::json probs = nlohmann::json::array();
    for (std::uint32_t mask = 0; mask < dist.states(); ++mask)
      probs.push_back({{"subset", to_line(from_mask(mask, m))}, {"p", dist.prob(mask)}});
    j["probabilities"] = probs;
    nlohmann::json rho = nlohmann::json::array();
    const ExactEngine eng(dist);
    for (std::uint32_t mask = 1; mask < dist.states(); ++mask) {
      if (std::popcount(mask) > 3) continue;
      const DiscreteConfig alpha = from_mask(mask, m);
      rho.push_back({{"alpha", to_line(alpha)},
                     {"rho", correlation(*dm, eng, alpha).value}});
    }
    j["correlations"] = rho;
    nlohmann::json ctab = nlohmann::json::array();
    dist.for_each([&](const DiscreteConfig& xi, double) {
      nlohmann::json row;
      row["xi"] = to_line(xi);
      nlohmann::json cs = nlohmann::json::array();
      for (Site x = 0; x < m; ++x) cs.push_back(dm->papangelou(x, xi));
      row["c"] = cs;
      ctab.push_back(row);
    });
    j["papangelou"] = ctab;
    nlohmann::json chat = nlohmann::json::array();
    for (std::uint32_t mask = 0; mask < dist.states(); ++mask) {
      const DiscreteConfig alpha = from_mask(mask, m);
      chat.push_back({{"alpha", to_line(alpha)},
                      {"chat_empty", dm->compound(alpha, DiscreteConfig{})}});
    }
    j["compound_at_empty"] = chat;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/oracle.json");
    out << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    diag << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitPass;
}

}  // namespace pointproc
