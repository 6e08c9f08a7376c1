#include "dissem/special_fn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "dissem/errors.hpp"

namespace dissem {

namespace {

// Lanczos approximation, g = 7, nine terms. std::lgamma is avoided because
// glibc's version writes the global signgam and races under threads.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_log_gamma(double x) {
  // valid for x >= 0.5
  const double y = x - 1.0;
  double a = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (y + static_cast<double>(i));
  const double t = y + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (y + 0.5) * std::log(t) - t + std::log(a);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
// Returns false if the budget ran out before convergence.
bool beta_cf(double x, double a, double b, const Accuracy& acc, double& out) {
  constexpr double tiny = 1e-300;
  const double eps = std::min(acc.rel_tol, 1e-15);
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (std::uint64_t m = 1; m <= acc.max_terms; ++m) {
    const double md = static_cast<double>(m);
    const double m2 = 2.0 * md;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) {
      out = h;
      return true;
    }
  }
  return false;
}

// I_x(a,b) on the side where the continued fraction converges fast.
double inc_beta_lower_side(double x, double a, double b, const Accuracy& acc) {
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  double cf = 0.0;
  if (beta_cf(x, a, b, acc, cf)) return std::exp(log_front) * cf / a;
  // x^a (1-x)^b / (a B(a,b)) * 2F1(a+b, 1; a+1; x)
  return std::exp(log_front) / a * gauss_2f1_series(a + b, 1.0, a + 1.0, x, acc);
}

void check_args(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError(fmt::format("incomplete beta needs a, b > 0 (a={}, b={})", a, b));
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError(fmt::format("incomplete beta needs 0 <= x <= 1 (x={})", x));
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) throw DomainError(fmt::format("log_gamma needs x > 0 (x={})", x));
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - lanczos_log_gamma(1.0 - x);
  }
  return lanczos_log_gamma(x);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError(fmt::format("log_beta needs a, b > 0 (a={}, b={})", a, b));
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double reg_inc_beta(double x, double a, double b, const Accuracy& acc) {
  check_args(x, a, b);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return inc_beta_lower_side(x, a, b, acc);
  return 1.0 - inc_beta_lower_side(1.0 - x, b, a, acc);
}

double reg_inc_beta_upper(double x, double a, double b, const Accuracy& acc) {
  check_args(x, a, b);
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return 1.0 - inc_beta_lower_side(x, a, b, acc);
  return inc_beta_lower_side(1.0 - x, b, a, acc);
}

double gauss_2f1_series(double a, double b, double c, double z, const Accuracy& acc) {
  if (c <= 0.0 && c == std::floor(c))
    throw DomainError(fmt::format("2F1 undefined for c = {}", c));
  if (!(z >= 0.0 && z < 1.0)) throw DomainError(fmt::format("2F1 series needs 0 <= z < 1 (z={})", z));
  if (z == 0.0) return 1.0;
  double term = 1.0;
  double sum = 1.0;
  double comp = 0.0;
  for (std::uint64_t k = 0; k < acc.max_terms; ++k) {
    const double kd = static_cast<double>(k);
    const double next = term * (a + kd) * (b + kd) / ((c + kd) * (kd + 1.0)) * z;
    // Neumaier step; long sums of positive terms otherwise drift
    const double t = sum + next;
    comp += std::fabs(sum) >= std::fabs(next) ? (sum - t) + next : (next - t) + sum;
    sum = t;
    const bool shrinking = std::fabs(next) <= std::fabs(term);
    term = next;
    if (term == 0.0 || (shrinking && std::fabs(term) < acc.rel_tol * std::fabs(sum + comp))) return sum + comp;
  }
  throw ConvergenceError(fmt::format("2F1({}, {}; {}; {}) did not converge in {} terms", a, b, c, z, acc.max_terms));
}

}  // namespace dissem
