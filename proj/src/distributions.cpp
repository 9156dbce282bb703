#include "wedgepower/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "wedgepower/errors.hpp"

namespace wedgepower {

namespace {

constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxFractionIterations = 200000;

// lgamma(x) - Stirling approximation, valid for x >= 10.
double stirling_correction(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 -
                inv2 * (1.0 / 360.0 -
                        inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
}

// log B(a, b) without the cancellation lgamma(b) - lgamma(a + b) suffers for
// large b.
double log_beta(double a, double b) {
  if (a > b) std::swap(a, b);
  if (b < 10.0) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  }
  const double c = a + b;
  if (a < 10.0) {
    return std::lgamma(a) - (b - 0.5) * std::log1p(a / b) - a * std::log(c) + a +
           stirling_correction(b) - stirling_correction(c);
  }
  return 0.5 * std::log(2.0 * std::numbers::pi) + (a - 0.5) * std::log(a / c) -
         (b - 0.5) * std::log1p(a / b) - 0.5 * std::log(c) + stirling_correction(a) +
         stirling_correction(b) - stirling_correction(c);
}

// Continued fraction for I_x(a, b) (modified Lentz). Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxFractionIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEpsilon) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

struct BetaPair {
  double p;
  double q;
};

// I_x(a, b) and its complement; y = 1 - x is passed separately so callers that
// know it exactly do not lose digits.
BetaPair incomplete_beta_pair(double a, double b, double x, double y) {
  if (x <= 0.0) return {0.0, 1.0};
  if (y <= 0.0) return {1.0, 0.0};
  const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double p = std::clamp(front * beta_fraction(a, b, x) / a, 0.0, 1.0);
    return {p, 1.0 - p};
  }
  const double q = std::clamp(front * beta_fraction(b, a, y) / b, 0.0, 1.0);
  return {1.0 - q, q};
}

void check_beta_args(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("incomplete beta requires a > 0 and b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("incomplete beta requires 0 <= x <= 1");
  }
}

void check_df(int ndf, int ddf) {
  if (ndf < 1 || ddf < 1) {
    throw DomainError("F distribution requires ndf >= 1 and ddf >= 1");
  }
}

void check_x(double x) {
  if (std::isnan(x) || x < 0.0) {
    throw DomainError("F distribution argument must be >= 0");
  }
}

// Beta argument of the F(ndf, ddf) variate x, and its complement.
BetaPair f_to_beta(double x, int ndf, int ddf) {
  const double nx = ndf * x;
  const double denom = nx + ddf;
  return {nx / denom, ddf / denom};
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  check_beta_args(a, b, x);
  return incomplete_beta_pair(a, b, x, 1.0 - x).p;
}

double regularized_incomplete_beta_complement(double a, double b, double x) {
  check_beta_args(a, b, x);
  return incomplete_beta_pair(a, b, x, 1.0 - x).q;
}

double central_f_cdf(double x, int ndf, int ddf) {
  check_df(ndf, ddf);
  check_x(x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const auto [z, y] = f_to_beta(x, ndf, ddf);
  return incomplete_beta_pair(0.5 * ndf, 0.5 * ddf, z, y).p;
}

double central_f_sf(double x, int ndf, int ddf) {
  check_df(ndf, ddf);
  check_x(x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const auto [z, y] = f_to_beta(x, ndf, ddf);
  return incomplete_beta_pair(0.5 * ndf, 0.5 * ddf, z, y).q;
}

double central_f_pdf(double x, int ndf, int ddf) {
  check_df(ndf, ddf);
  check_x(x);
  if (x == 0.0) {
    if (ndf == 1) return std::numeric_limits<double>::infinity();
    return ndf == 2 ? 1.0 : 0.0;
  }
  if (std::isinf(x)) return 0.0;
  const double a = 0.5 * ndf;
  const double b = 0.5 * ddf;
  const auto [z, y] = f_to_beta(x, ndf, ddf);
  return std::exp(a * std::log(z) + b * std::log(y) - log_beta(a, b)) / x;
}

double central_f_quantile(double p, int ndf, int ddf) {
  check_df(ndf, ddf);
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("F quantile requires 0 < p < 1");
  }
  // Solve on whichever tail keeps full relative precision.
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  auto excess = [&](double x) {
    return upper ? target - central_f_sf(x, ndf, ddf) : central_f_cdf(x, ndf, ddf) - target;
  };

  double lo = 0.0;
  double hi = 1.0;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("F quantile bracket overflow");
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double g = excess(x);
    if (g == 0.0) return x;
    if (g < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (std::fabs(g) <= 1e-15 * std::max(target, 1e-300) || hi - lo <= 4e-16 * hi) break;
    const double slope = central_f_pdf(x, ndf, ddf);
    double next = (slope > 0.0 && std::isfinite(slope)) ? x - g / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

SeriesResult noncentral_f_series(double x, int ndf, int ddf, double lambda,
                                 const SeriesOptions& options) {
  check_df(ndf, ddf);
  check_x(x);
  if (std::isnan(lambda) || lambda < 0.0) {
    throw DomainError("noncentrality must be >= 0");
  }
  SeriesResult out;
  if (x == 0.0) return out;
  if (std::isinf(x)) {
    out.cdf = 1.0;
    return out;
  }

  const double a = 0.5 * ndf;
  const double b = 0.5 * ddf;
  const auto [z, y] = f_to_beta(x, ndf, ddf);

  if (lambda == 0.0) {
    out.cdf = incomplete_beta_pair(a, b, z, y).p;
    out.terms = 1;
    return out;
  }

  // Sum outward from the Poisson mode so the largest weights come first.
  const double mu = 0.5 * lambda;
  const auto mode = static_cast<long>(std::floor(mu));
  const double mode_weight =
      std::exp(-mu + static_cast<double>(mode) * std::log(mu) - std::lgamma(mode + 1.0));

  double sum = 0.0;
  double mass = 0.0;

  double w = mode_weight;
  for (long j = mode; j >= 0 && out.terms < options.max_terms; --j) {
    sum += w * incomplete_beta_pair(a + j, b, z, y).p;
    mass += w;
    ++out.terms;
    // Below the mode successive weights shrink by at least j / mu, so the
    // unsummed lower mass is bounded by a geometric series.
    const double ratio = static_cast<double>(j) / mu;
    const double lower_left = ratio < 1.0 ? w * ratio / (1.0 - ratio) : w * j;
    if (j < mode && lower_left <= 0.01 * options.tolerance) break;
    w *= ratio;
  }

  w = mode_weight;
  for (long j = mode + 1; out.terms < options.max_terms; ++j) {
    if (1.0 - mass <= options.tolerance) break;
    w *= mu / static_cast<double>(j);
    if (w == 0.0 && j > mode + 1) break;
    sum += w * incomplete_beta_pair(a + j, b, z, y).p;
    mass += w;
    ++out.terms;
  }

  out.cdf = std::clamp(sum, 0.0, 1.0);
  out.tail_bound = std::max(0.0, 1.0 - mass);
  return out;
}

double noncentral_f_cdf(double x, int ndf, int ddf, double lambda) {
  const SeriesResult series = noncentral_f_series(x, ndf, ddf, lambda);
  if (series.tail_bound > 1e-10) {
    throw std::runtime_error("noncentral F series did not reach its tolerance (lambda=" +
                             std::to_string(lambda) + ")");
  }
  return series.cdf;
}

PowerResult power_from_f(double fvalue, int ndf, int ddf, double alpha) {
  check_df(ndf, ddf);
  if (std::isnan(fvalue) || fvalue < 0.0) {
    throw DomainError("F value must be >= 0");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1)");
  }
  PowerResult out;
  out.fvalue = fvalue;
  out.ndf = ndf;
  out.ddf = ddf;
  out.alpha = alpha;
  out.lambda = ndf * fvalue;
  out.fcrit = central_f_quantile(1.0 - alpha, ndf, ddf);
  out.power = out.lambda == 0.0 ? central_f_sf(out.fcrit, ndf, ddf)
                                : 1.0 - noncentral_f_cdf(out.fcrit, ndf, ddf, out.lambda);
  return out;
}

}  // namespace wedgepower
