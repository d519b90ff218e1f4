#include "igpk/special.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/ellint_2.hpp>

#include "igpk/error.hpp"

namespace igpk {

namespace {

constexpr int kMaxSeriesTerms = 100000;
constexpr double kAsymptoticSwitch = 30.0;

bool is_nonpositive_integer(double v) { return v <= 0.0 && std::floor(v) == v; }

// Ascending series sum_k (a)_k / (b)_k x^k / k!, starting at term index first.
double ascending_series(double a, double b, double x, int first) {
  double term = 1.0;
  for (int k = 0; k < first; ++k) term *= (a + k) / (b + k) * x / (k + 1);
  double sum = 0.0;
  for (int k = first; k < kMaxSeriesTerms; ++k) {
    sum += term;
    if (term == 0.0) return sum;
    const double next = term * (a + k) / (b + k) * x / (k + 1);
    if (std::abs(next) <= 1e-17 * std::abs(sum) && std::abs(next) <= std::abs(term)) {
      return sum + next;
    }
    term = next;
  }
  throw NumericError("1F1 series did not converge");
}

// Large negative argument: Gamma(b)/Gamma(b-a) y^{-a} sum_s (a)_s (a-b+1)_s / s! y^{-s},
// y = -x, summed up to its smallest term.
double asymptotic_negative(double a, double b, double x) {
  const double y = -x;
  double term = 1.0;
  double sum = 1.0;
  for (int s = 0; s < 200; ++s) {
    const double next = term * (a + s) * (a - b + 1 + s) / ((s + 1) * y);
    if (std::abs(next) >= std::abs(term) || std::abs(next) <= 1e-17 * std::abs(sum)) break;
    sum += next;
    term = next;
  }
  return std::tgamma(b) / std::tgamma(b - a) * std::pow(y, -a) * sum;
}

}  // namespace

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kummer_1f1(double a, double b, double x) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(x)) {
    throw DomainError("1F1 arguments must be finite");
  }
  if (is_nonpositive_integer(b)) throw DomainError("1F1 undefined for nonpositive integer b");
  if (x == 0.0) return 1.0;
  if (is_nonpositive_integer(a) || x > 0.0) return ascending_series(a, b, x, 0);
  if (x >= -kAsymptoticSwitch || is_nonpositive_integer(b - a)) {
    return std::exp(x) * ascending_series(b - a, b, -x, 0);
  }
  return asymptotic_negative(a, b, x);
}

double surrogate_transform(double base_gamma, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("surrogate rho must be positive");
  if (!(base_gamma >= 0.0)) throw DomainError("surrogate base variogram must be nonnegative");
  if (base_gamma >= 1.0) throw DomainError("surrogate base variogram reached its unit sill");
  return rho * base_gamma / (1.0 - base_gamma);
}

double surrogate_inverse(double surrogate_gamma, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("surrogate rho must be positive");
  if (!(surrogate_gamma >= 0.0)) throw DomainError("surrogate variogram must be nonnegative");
  if (std::isinf(surrogate_gamma)) return 1.0;
  const double u = surrogate_gamma / rho;
  return u / (1.0 + u);
}

std::pair<double, double> surrogate_and_inverse(double base_gamma, double rho) {
  const double g = surrogate_transform(base_gamma, rho);
  return {g, surrogate_inverse(g, rho)};
}

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
constexpr double kQuadTol = 1e-13;
constexpr unsigned kQuadDepth = 15;
constexpr double kTail = 40.0;  // Gaussian weight beyond 40 std-devs is below 1e-300

// Sum of adaptive integrals over consecutive pieces; the accumulated error
// estimate is checked against the total.
template <class F>
double integrate_pieces(F f, std::initializer_list<double> cuts) {
  double total = 0.0;
  double err_total = 0.0;
  const double* p = cuts.begin();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(p[i + 1] > p[i])) continue;
    double err = 0.0;
    total += Quad::integrate(f, p[i], p[i + 1], kQuadDepth, kQuadTol, &err);
    err_total += err;
  }
  if (!std::isfinite(total) || err_total > 1e-9 * std::abs(total) + 1e-300) {
    throw NumericError("quadrature did not reach its tolerance");
  }
  return total;
}

// E|d + W| - E|W| for W ~ N(0, tau^2). Pairing w with -w, the integrand
// vanishes for |w| > d, leaving 2 (d - w) phi(w) on [0, d]. Integrated in
// x = w / d so the error estimate is not swamped by its absolute floor.
double increment_mean_1d(double d, double tau) {
  const double norm = 1.0 / (tau * std::sqrt(2.0 * std::numbers::pi));
  auto f = [&](double x) {
    const double w = d * x;
    return 2.0 * (1.0 - x) * norm * std::exp(-0.5 * (w / tau) * (w / tau));
  };
  return d * d * integrate_pieces(f, {0.0, std::min(1.0, kTail * tau / d), 1.0});
}

// E|d + W| - E|W| for W ~ N(0, tau^2 I_2). The radius rho is Rayleigh(tau);
// the mean over the uniform angle of |d + rho u| is (2/pi)(d + rho) E(k) with
// k = 2 sqrt(d rho) / (d + rho), which has a logarithmic kink at rho = d.
double increment_mean_2d(double d, double tau) {
  // For rho >> d the angular mean exceeds rho by only ~d^2 / (4 rho); there it
  // is rho (2F1(-1/2, -1/2; 1; q^2) - 1), q = d / rho, summed without the 1.
  auto excess = [&](double rho) {
    const double q = d / rho;
    if (q <= 0.5) {
      const double x = q * q;
      double t = 1.0;
      double xk = 1.0;
      double sum = 0.0;
      for (int k = 1; k < 60; ++k) {
        t *= (k - 1.5) / k;
        xk *= x;
        const double term = t * t * xk;
        sum += term;
        if (term <= 1e-17 * sum) break;
      }
      return rho * sum;
    }
    const double k = 2.0 * std::sqrt(d * rho) / (d + rho);
    return 2.0 / std::numbers::pi * (d + rho) * boost::math::ellint_2(std::min(k, 1.0)) - rho;
  };
  auto f = [&](double rho) {
    return excess(rho) * rho / (tau * tau) * std::exp(-0.5 * (rho / tau) * (rho / tau));
  };
  return integrate_pieces(f, {0.0, d, std::max(d, kTail * tau)});
}

}  // namespace

double convolved_variogram_oracle(double sigma2, double r, int dim, double d) {
  if (!(sigma2 > 0.0) || !(r > 0.0)) throw DomainError("oracle needs positive sigma2 and r");
  if (dim != 1 && dim != 2) throw DomainError("oracle supports dim 1 and 2 only");
  d = std::abs(d);
  if (d == 0.0) return 0.0;
  const double tau = std::numbers::sqrt2 * r;
  if (dim == 1) return 0.5 * sigma2 * increment_mean_1d(d, tau);
  return sigma2 * increment_mean_2d(d, tau);
}

}  // namespace igpk
