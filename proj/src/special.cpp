#include "qpinem/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/multiprecision/mpfr.hpp>

#include "qpinem/error.hpp"

namespace qpinem::special {

namespace {

constexpr double kRescaleAbove = 1e200;
const double kLogRescale = std::log(kRescaleAbove);

int miller_start(int max_order, double spread) {
  const int base = std::max(max_order, static_cast<int>(std::ceil(spread))) + 1;
  const int start = base + 20 + static_cast<int>(std::sqrt(60.0 * base));
  return start + (start % 2);
}

// Value stored as v * exp(scale).
double unscale(double v, double scale) {
  if (v == 0.0) return 0.0;
  const double lg = std::log(std::abs(v)) + scale;
  if (lg < -745.0) return 0.0;
  return std::copysign(std::exp(lg), v);
}

}  // namespace

std::vector<double> bessel_j_sequence(double x, int max_order) {
  if (max_order < 0) throw ConfigError("bessel_j_sequence: negative order");
  std::vector<double> out(max_order + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double ax = std::abs(x);
  const int start = miller_start(max_order, ax);
  std::vector<double> work(start + 2, 0.0);
  work[start + 1] = 0.0;
  work[start] = 1e-280;
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    work[k - 1] = (2.0 * k / ax) * work[k] - work[k + 1];
    if (std::abs(work[k - 1]) > kRescaleAbove) {
      for (int j = k - 1; j <= start; ++j) work[j] /= kRescaleAbove;
    }
  }
  for (int k = 2; k <= start; k += 2) norm += work[k];
  norm = work[0] + 2.0 * norm;
  for (int k = 0; k <= max_order; ++k) {
    out[k] = work[k] / norm;
    // J_k(-x) = (-1)^k J_k(x)
    if (x < 0 && (k % 2 == 1)) out[k] = -out[k];
  }
  return out;
}

std::vector<double> bessel_i_scaled_sequence(double x, int max_order) {
  if (max_order < 0 || x < 0) {
    throw ConfigError("bessel_i_scaled_sequence: needs x >= 0, order >= 0");
  }
  std::vector<double> out(max_order + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int start = miller_start(max_order, std::sqrt(80.0 * x) + 10.0);
  std::vector<double> work(start + 2, 0.0);
  work[start] = 1e-280;
  for (int k = start; k >= 1; --k) {
    work[k - 1] = (2.0 * k / x) * work[k] + work[k + 1];
    if (work[k - 1] > kRescaleAbove) {
      for (int j = k - 1; j <= start; ++j) work[j] /= kRescaleAbove;
    }
  }
  double norm = 0.0;
  for (int k = 1; k <= start; ++k) norm += work[k];
  norm = work[0] + 2.0 * norm;
  for (int k = 0; k <= max_order; ++k) out[k] = work[k] / norm;
  return out;
}

std::vector<double> laguerre_chain(int order, double x, int count) {
  if (order < 0 || x < 0) {
    throw ConfigError("laguerre_chain: needs order >= 0 and x >= 0");
  }
  std::vector<double> out(std::max(count, 0), 0.0);
  if (count <= 0) return out;
  if (x == 0.0) {
    if (order == 0) std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  const double a = order;
  double scale = -0.5 * x + 0.5 * a * std::log(x) - 0.5 * std::lgamma(a + 1.0);
  double prev = 0.0;
  double cur = 1.0;
  out[0] = unscale(cur, scale);
  for (int n = 0; n + 1 < count; ++n) {
    const double nn = n;
    const double next =
        ((2.0 * nn + 1.0 + a - x) * cur - std::sqrt(nn * (nn + a)) * prev) /
        std::sqrt((nn + 1.0) * (nn + 1.0 + a));
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur /= kRescaleAbove;
      prev /= kRescaleAbove;
      scale += kLogRescale;
    }
    out[n + 1] = unscale(cur, scale);
  }
  return out;
}

double laguerre_normalized(int degree, int order, double x) {
  if (degree < 0) return 0.0;
  return laguerre_chain(order, x, degree + 1).back();
}

std::vector<double> quadrature_eigenfunctions(double x, int count) {
  std::vector<double> out(std::max(count, 0), 0.0);
  if (count <= 0) return out;
  const double y = std::numbers::sqrt2 * x;
  // psi_n(x) = 2^{1/4} h_n(sqrt(2) x) with h_n the Hermite functions.
  double scale = 0.25 * std::log(2.0) - 0.25 * std::log(std::numbers::pi) -
                 0.5 * y * y;
  double prev = 0.0;
  double cur = 1.0;
  out[0] = unscale(cur, scale);
  for (int n = 0; n + 1 < count; ++n) {
    const double next = std::sqrt(2.0 / (n + 1.0)) * y * cur -
                        std::sqrt(n / (n + 1.0)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescaleAbove) {
      cur /= kRescaleAbove;
      prev /= kRescaleAbove;
      scale += kLogRescale;
    }
    out[n + 1] = unscale(cur, scale);
  }
  return out;
}

double log_factorial(int n) {
  if (n < 0) throw ConfigError("log_factorial: negative argument");
  return std::lgamma(n + 1.0);
}

double log_odd_double_factorial(int odd) {
  if (odd == -1) return 0.0;
  if (odd < -1 || odd % 2 == 0) {
    throw ConfigError("log_odd_double_factorial: argument must be odd >= -1");
  }
  const int j = (odd + 1) / 2;  // (2j-1)!! = (2j)! / (2^j j!)
  return std::lgamma(2.0 * j + 1.0) - j * std::log(2.0) - std::lgamma(j + 1.0);
}

double hypergeometric_2f2_scaled(double a1, double a2, double b1, double b2,
                                 double z, double log_prefactor) {
  using boost::multiprecision::mpfr_float;
  const unsigned digits =
      40u + static_cast<unsigned>(std::ceil(std::abs(z) / std::log(10.0)));
  mpfr_float::default_precision(digits);

  const mpfr_float zz(z);
  mpfr_float term(1);
  mpfr_float sum(1);
  const mpfr_float eps = boost::multiprecision::pow(mpfr_float(10), -static_cast<int>(digits) + 5);
  const int max_terms = 100000;
  int j = 0;
  for (; j < max_terms; ++j) {
    term *= (mpfr_float(a1) + j) * (mpfr_float(a2) + j) /
            ((mpfr_float(b1) + j) * (mpfr_float(b2) + j) * (j + 1)) * zz;
    sum += term;
    if (j > std::abs(z) + 10 && abs(term) <= eps * abs(sum)) break;
  }
  if (j == max_terms) throw NumericalError("2F2 series did not converge");
  const mpfr_float result = sum * exp(mpfr_float(log_prefactor));
  return result.convert_to<double>();
}

}  // namespace qpinem::special
