#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace pointproc {

struct Stat {
  double value = 0.0;
  double se = 0.0;       // standard error of the mean (0 in exact mode)
  std::size_t n = 0;     // terms / samples aggregated
  bool exact = false;
};

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(n - 1);
}

inline double standard_error(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  return std::sqrt(sample_variance(xs) / static_cast<double>(n));
}

// Standard error of a correlated chain mean via non-overlapping batch means.
inline double batch_means_se(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 4) return standard_error(xs);
  const std::size_t nbatches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t len = n / nbatches;
  std::vector<double> means;
  means.reserve(nbatches);
  for (std::size_t b = 0; b < nbatches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += xs[i];
    means.push_back(s / static_cast<double>(len));
  }
  return standard_error(means);
}

namespace detail {

// Regularized lower incomplete gamma P(a,x); series + continued fraction.
inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q(a,x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace detail

// Upper tail of the chi-squared distribution with `dof` degrees of freedom.
inline double chi_squared_tail(double stat, double dof) {
  if (stat <= 0.0) return 1.0;
  return 1.0 - detail::gamma_p(0.5 * dof, 0.5 * stat);
}

// Pearson goodness-of-fit p-value for observed counts against probabilities.
// Cells with expected count below `min_expected` are pooled into a spill cell.
inline double chi_squared_gof_pvalue(std::span<const long> observed,
                                     std::span<const double> probs,
                                     double min_expected = 5.0) {
  long total = 0;
  for (long o : observed) total += o;
  if (total == 0) return 1.0;
  double stat = 0.0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * static_cast<double>(total);
    if (e < min_expected) {
      pooled_obs += static_cast<double>(observed[i]);
      pooled_exp += e;
      continue;
    }
    const double d = static_cast<double>(observed[i]) - e;
    stat += d * d / e;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    const double d = pooled_obs - pooled_exp;
    stat += d * d / pooled_exp;
    ++cells;
  }
  if (cells < 2) return 1.0;
  return chi_squared_tail(stat, static_cast<double>(cells - 1));
}

}  // namespace pointproc
