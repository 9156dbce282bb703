#pragma once

#include <cstddef>

namespace wedgepower {

// -------------------------------------------------------------------------
// Central and noncentral F machinery
// -------------------------------------------------------------------------

/// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

/// Complement 1 - I_x(a, b), evaluated without cancellation.
double regularized_incomplete_beta_complement(double a, double b, double x);

double central_f_cdf(double x, int ndf, int ddf);

/// Upper tail P(F > x), accurate where the CDF is close to one.
double central_f_sf(double x, int ndf, int ddf);

double central_f_pdf(double x, int ndf, int ddf);

double central_f_quantile(double p, int ndf, int ddf);

struct SeriesOptions {
  /// Stop once the Poisson mass not yet summed falls below this bound.
  double tolerance = 1e-12;
  /// Hard cap on the number of mixture terms.
  std::size_t max_terms = 200000;
};

struct SeriesResult {
  double cdf = 0.0;
  std::size_t terms = 0;
  /// Poisson mass left out of the sum; an upper bound on the truncation error.
  double tail_bound = 0.0;
};

/// Poisson(lambda/2) mixture of central beta terms. Never throws on budget
/// exhaustion; inspect tail_bound instead.
SeriesResult noncentral_f_series(double x, int ndf, int ddf, double lambda,
                                 const SeriesOptions& options = {});

/// Noncentral F CDF with a guaranteed truncation error of at most 1e-10.
double noncentral_f_cdf(double x, int ndf, int ddf, double lambda);

/// Outcome of an F test under a given noncentrality.
struct PowerResult {
  double fvalue = 0.0;
  int ndf = 1;
  int ddf = 1;
  double lambda = 0.0;
  double fcrit = 0.0;
  double power = 0.0;
  double alpha = 0.05;
};

/// lambda = ndf * fvalue, fcrit = F^{-1}(1 - alpha), power = 1 - F_nc(fcrit).
PowerResult power_from_f(double fvalue, int ndf, int ddf, double alpha);

}  // namespace wedgepower
