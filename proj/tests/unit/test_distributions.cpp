#include <doctest.h>

#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/non_central_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "wedgepower/distributions.hpp"
#include "wedgepower/errors.hpp"

using namespace wedgepower;

namespace {

double quadrature_ibeta(double a, double b, double x) {
  auto f = [&](double t) { return std::pow(t, a - 1.0) * std::pow(1.0 - t, b - 1.0); };
  const double num = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, x, 15, 1e-14);
  const double den = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
  return num / den;
}

}  // namespace

TEST_CASE("incomplete beta against quadrature and Boost") {
  CHECK(regularized_incomplete_beta(3, 5, 0.4) == doctest::Approx(quadrature_ibeta(3, 5, 0.4)).epsilon(1e-12));
  for (double a : {0.5, 1.0, 2.5, 16.0, 120.0}) {
    for (double b : {0.5, 3.0, 22.5, 500.0}) {
      for (double x : {1e-4, 0.1, 0.37, 0.5, 0.9, 0.9999}) {
        const double want = boost::math::ibeta(a, b, x);
        CHECK(regularized_incomplete_beta(a, b, x) == doctest::Approx(want).epsilon(1e-10));
        CHECK(regularized_incomplete_beta(a, b, x) + regularized_incomplete_beta_complement(a, b, x) ==
              doctest::Approx(1.0).epsilon(1e-13));
      }
    }
  }
  CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, 1.5), DomainError);
}

TEST_CASE("central F quantile matches bisection on an independent CDF") {
  const boost::math::fisher_f_distribution<double> f132(1, 32);
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (boost::math::cdf(f132, mid) < 0.95 ? lo : hi) = mid;
  }
  CHECK(central_f_quantile(0.95, 1, 32) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
  CHECK(std::round(central_f_quantile(0.95, 1, 32) * 1000) / 1000 == doctest::Approx(4.149));
}

TEST_CASE("central F round trips") {
  for (int ndf : {1, 2, 3, 7}) {
    for (int ddf : {1, 5, 32, 45, 236, 100000}) {
      for (double p : {1e-6, 0.01, 0.05, 0.5, 0.8, 0.95, 0.999, 1 - 1e-9}) {
        const double x = central_f_quantile(p, ndf, ddf);
        CHECK(central_f_cdf(x, ndf, ddf) == doctest::Approx(p).epsilon(1e-9));
        const boost::math::fisher_f_distribution<double> ref(ndf, ddf);
        CHECK(central_f_cdf(x, ndf, ddf) == doctest::Approx(boost::math::cdf(ref, x)).epsilon(1e-9));
      }
      CHECK(central_f_sf(2.0, ndf, ddf) == doctest::Approx(1.0 - central_f_cdf(2.0, ndf, ddf)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(central_f_quantile(1.0, 1, 10), DomainError);
  CHECK_THROWS_AS(central_f_cdf(1.0, 0, 10), DomainError);
}

TEST_CASE("central F density integrates to the CDF") {
  auto pdf = [](double x) { return central_f_pdf(x, 3, 20); };
  const double area = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(pdf, 0.0, 2.5, 15, 1e-13);
  CHECK(area == doctest::Approx(central_f_cdf(2.5, 3, 20)).epsilon(1e-10));
}

TEST_CASE("noncentral F reduces to central at lambda 0") {
  for (int ddf : {3, 32, 500}) {
    for (double x : {0.1, 1.0, 4.149, 12.0}) {
      CHECK(std::fabs(noncentral_f_cdf(x, 1, ddf, 0.0) - central_f_cdf(x, 1, ddf)) < 1e-10);
      CHECK(std::fabs(noncentral_f_cdf(x, 2, ddf, 0.0) - central_f_cdf(x, 2, ddf)) < 1e-10);
    }
  }
}

TEST_CASE("noncentral F against Boost") {
  for (int ndf : {1, 2, 4}) {
    for (int ddf : {7, 10, 45, 226}) {
      for (double lambda : {0.5, 8.5, 11.574, 60.0, 400.0}) {
        const boost::math::non_central_f_distribution<double> ref(ndf, ddf, lambda);
        for (double x : {0.5, 4.0, 10.0, 40.0}) {
          CHECK(noncentral_f_cdf(x, ndf, ddf, lambda) == doctest::Approx(boost::math::cdf(ref, x)).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("doubling the series budget does not move the result") {
  SeriesOptions base;
  SeriesOptions doubled;
  doubled.max_terms = 2 * base.max_terms;
  doubled.tolerance = base.tolerance * 1e-2;
  for (double lambda : {0.1, 10.0, 250.0, 3000.0}) {
    const auto a = noncentral_f_series(3.0, 2, 40, lambda, base);
    const auto b = noncentral_f_series(3.0, 2, 40, lambda, doubled);
    CHECK(std::fabs(a.cdf - b.cdf) < 1e-11);
    CHECK(a.tail_bound <= base.tolerance);
  }
}

TEST_CASE("power at large ddf approaches the normal-theory value") {
  const boost::math::normal_distribution<double> z;
  const double root = std::sqrt(8.5);
  const double zc = boost::math::quantile(z, 0.975);
  const double want = boost::math::cdf(z, root - zc) + boost::math::cdf(z, -root - zc);
  CHECK(power_from_f(8.5, 1, 1000000, 0.05).power == doctest::Approx(want).epsilon(1e-4));
}

TEST_CASE("power from F reproduces the individually randomized example") {
  const auto r = power_from_f(8.5, 1, 32, 0.05);
  CHECK(r.lambda == doctest::Approx(8.5));
  CHECK(r.fcrit == doctest::Approx(4.149).epsilon(1e-3));
  CHECK(std::round(r.power * 1000) / 1000 == doctest::Approx(0.807));
  CHECK(power_from_f(0.0, 1, 32, 0.05).power == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_THROWS_AS(power_from_f(-1.0, 1, 32, 0.05), DomainError);
  CHECK_THROWS_AS(power_from_f(1.0, 1, 32, 1.0), DomainError);
}
