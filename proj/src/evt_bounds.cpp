#include "dissem/evt_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "dissem/errors.hpp"
#include "dissem/special_fn.hpp"

namespace dissem {

namespace {

void check_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("need 0 < p < 1 (p={})", p));
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Bisection right of a stationary point where f > 0, toward f < 0 as a grows.
template <class F>
RootSolution bisect_right(F&& f, double start, double target) {
  double lo = start;
  double hi = 2.0 * lo;
  int guard = 0;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (++guard > 1100) throw InfeasibleError("root bracket expansion did not terminate");
  }
  RootSolution r;
  r.target = target;
  r.lo = lo;
  r.hi = hi;
  double a = lo;
  double b = hi;
  for (int it = 0; it < 400 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * b; ++it) {
    const double mid = 0.5 * (a + b);
    if (f(mid) > 0.0)
      a = mid;
    else
      b = mid;
  }
  const double fa = f(a);
  const double fb = f(b);
  r.alpha = std::fabs(fa) <= std::fabs(fb) ? a : b;
  r.residual = std::fabs(std::min(std::fabs(fa), std::fabs(fb)));
  return r;
}

double log_base(double v, double base) { return std::log(v) / std::log(base); }

}  // namespace

double g_alpha(double p, double target, double alpha) {
  check_p(p);
  if (!(target > 0.0)) throw DomainError(fmt::format("root target must be positive ({})", target));
  if (!(alpha >= 1.0)) throw DomainError(fmt::format("g_alpha needs alpha >= 1 ({})", alpha));
  const double lhs = -std::log(target) + xlogx(alpha) - xlogx(alpha - 1.0) + (alpha - 1.0) * std::log(p) +
                     std::log1p(-p);
  return std::expm1(lhs);
}

double root_target(int K, int M) {
  if (K < 2 || M < 1) throw DomainError(fmt::format("root target needs K >= 2, M >= 1 (K={}, M={})", K, M));
  return std::pow(static_cast<double>(K), -1.0 / M);
}

RootSolution solve_alpha(double p, double target) {
  check_p(p);
  if (!(target > 0.0)) throw DomainError(fmt::format("root target must be positive ({})", target));
  const double peak = 1.0 / (1.0 - p);
  // A peak value within rounding of zero leaves no root distinct from the peak.
  if (!(g_alpha(p, target, peak) > 1e-12))
    throw InfeasibleError(fmt::format("no root right of 1/(1-p) for p={}, target={}", p, target));
  auto g = [&](double a) { return g_alpha(p, target, a); };
  double start = peak + 1e-9;
  if (!(g(start) > 0.0)) start = peak;
  return bisect_right(g, start, target);
}

DeltaBeta delta_beta(double p, double alpha) {
  check_p(p);
  if (!(alpha > 1.0 / (1.0 - p)))
    throw DomainError(fmt::format("delta_beta needs alpha > 1/(1-p) (alpha={}, p={})", alpha, p));
  const double delta = alpha * p / (alpha - 1.0);
  const double C = 1.0 / (1.0 - delta);
  const double beta = log_base(std::sqrt(2.0 * std::numbers::pi / (delta * p)) * (alpha - 1.0) / C, delta);
  return {delta, beta};
}

double upper_bn(std::uint64_t n, double p, int M, int K) {
  TreeSpec{K, n, p, M}.validate();
  const double m = static_cast<double>(M) * exact_log(n, K);
  const RootSolution r = solve_alpha(p, root_target(K, M));
  const DeltaBeta db = delta_beta(p, r.alpha);
  return r.alpha * m + log_base(std::sqrt(m), db.delta) + db.beta;
}

double lower_bn_for_m(double n, int m, double p) {
  check_p(p);
  if (m < 1) throw DomainError(fmt::format("lower normalizer needs m >= 1 (m={})", m));
  if (!(n >= 2.0)) throw DomainError(fmt::format("lower normalizer needs n >= 2 (n={})", n));
  const double ln_inv_p = -std::log(p);
  const double odds = (1.0 - p) / p;
  const double lg_n = std::log(n) / ln_inv_p;
  if (m == 1) return lg_n;
  const double psi = lg_n + (m - 1) * std::log(odds) / ln_inv_p;
  if (!(psi > 0.0)) throw DomainError(fmt::format("lower normalizer: non-positive centering for m={}, p={}", m, p));
  return lg_n + (m - 1) * std::log(odds * psi) / ln_inv_p - log_gamma(m) / ln_inv_p;
}

double lower_bn_hat_for_m(double n, int m) {
  if (m < 1) throw DomainError(fmt::format("lower normalizer needs m >= 1 (m={})", m));
  if (!(n > std::numbers::e)) throw DomainError(fmt::format("hat normalizer needs ln ln n defined (n={})", n));
  const double log2_n = std::log2(n);
  if (m == 1) return log2_n;
  const double log2_fact = log_gamma(m) / std::numbers::ln2;
  const double psi_hat = log2_n + (m - 1) * std::log(std::log(n)) - log2_fact;
  if (!(psi_hat > 0.0)) throw DomainError("hat normalizer: non-positive centering");
  return log2_n + (m - 1) * std::log2(psi_hat) - log2_fact;
}

LowerBn lower_bn(std::uint64_t n, std::uint64_t k_n, double p, int M, int K, LowerVariant variant,
                 double sufficiency_threshold) {
  TreeSpec{K, n, p, M}.validate();
  const int L = exact_log(k_n, K);
  if (L < 1 || k_n > n)
    throw DomainError(fmt::format("k_n={} must be a power of K={} with 1 < k_n <= n={}", k_n, K, n));
  const int m = M * L;
  const double ln_n = std::log(static_cast<double>(n));
  LowerBn out;
  out.sufficiency_ratio = ln_n > 1.0 ? static_cast<double>(m) * m * std::log(ln_n) / ln_n : INFINITY;
  out.sufficiency_exceeded = out.sufficiency_ratio > sufficiency_threshold;
  out.value = variant == LowerVariant::standard ? lower_bn_for_m(static_cast<double>(n), m, p)
                                                : lower_bn_hat_for_m(static_cast<double>(n), m);
  return out;
}

std::uint64_t default_kn(std::uint64_t n, int K) {
  const int h = exact_log(n, K);
  if (h < 1) throw DomainError(fmt::format("n={} is not a positive power of K={}", n, K));
  if (h == 1) return n;
  const double ln_n = std::log(static_cast<double>(n));
  const double lnln = ln_n > 1.0 ? std::log(ln_n) : 0.0;
  int L = 1;
  while (L + 1 < h && static_cast<double>(L + 1) * (L + 1) * lnln <= 0.5 * ln_n) ++L;
  return int_pow(K, L);
}

std::uint64_t figure_kn(int N, double p) {
  if (N < 1) throw DomainError(fmt::format("figure_kn needs N >= 1 (N={})", N));
  auto near = [p](double v) { return std::fabs(p - v) < 1e-12; };
  int L;
  if (near(0.1) || near(0.5))
    L = N <= 10 ? 4 : 7;
  else if (near(0.2))
    L = 4;
  else
    return default_kn(int_pow(2, N), 2);
  L = std::max(1, std::min(L, N - 1));
  return int_pow(2, L);
}

BoundsReport expectation_bounds(const TreeSpec& spec, std::uint64_t k_n, LowerVariant variant) {
  const int h = spec.height();
  const double p = spec.p;
  const double M = spec.M;
  const double lnK = std::log(static_cast<double>(spec.K));
  const double ln_inv_p = -std::log(p);
  BoundsReport r;
  r.spec = spec;
  r.k_n = k_n;
  r.alpha_root = solve_alpha(p, root_target(spec.K, spec.M));
  const DeltaBeta db = delta_beta(p, r.alpha_root.alpha);
  r.delta = db.delta;
  r.beta = db.beta;
  r.b_n_upper = upper_bn(spec.n, p, spec.M, spec.K);
  const LowerBn lb = lower_bn(spec.n, k_n, p, spec.M, spec.K, LowerVariant::standard);
  r.b_n_lower = lb.value;
  r.sufficiency_exceeded = lb.sufficiency_exceeded;
  try {
    r.b_n_lower_hat = lower_bn(spec.n, k_n, p, spec.M, spec.K, LowerVariant::hat).value;
  } catch (const DomainError&) {
    r.b_n_lower_hat = NAN;
  }
  const int L = exact_log(k_n, spec.K);
  r.lower_trivial = M * h / (1.0 - p);
  const double b_low = variant == LowerVariant::standard ? r.b_n_lower : r.b_n_lower_hat;
  r.lower_main = M * (h - L) / (1.0 - p) + kEulerGamma / ln_inv_p + b_low;
  r.lower_claim_a =
      M * (h - 1) / (1.0 - p) + kEulerGamma / ln_inv_p + lower_bn_for_m(static_cast<double>(spec.n), spec.M, p);
  r.upper_main = r.b_n_upper + kEulerGamma / -std::log(r.delta) + 1.0;
  r.scaling_lo = M / ((1.0 - p) * lnK) + 1.0 / ln_inv_p;
  r.scaling_hi = r.alpha_root.alpha * M / lnK;
  r.scaling_lo_log2 = r.scaling_lo * std::numbers::ln2;
  r.scaling_hi_log2 = r.scaling_hi * std::numbers::ln2;
  return r;
}

double tail_time_bound(const TreeSpec& spec, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError(fmt::format("tail bound needs 0 < eps < 1 (eps={})", eps));
  spec.validate();
  const RootSolution r = solve_alpha(spec.p, root_target(spec.K, spec.M));
  const DeltaBeta db = delta_beta(spec.p, r.alpha);
  return upper_bn(spec.n, spec.p, spec.M, spec.K) + log_base(-std::log1p(-eps), db.delta);
}

RootSolution solve_alpha_growing(double p, double K_n) {
  check_p(p);
  if (!(K_n > 1.0)) throw DomainError(fmt::format("growing root needs K_n > 1 (K_n={})", K_n));
  const double lnK = std::log(K_n);
  const double c = 1.0 / lnK;
  auto f = [&](double a) {
    return c * std::log(lnK) + xlogx(a) - xlogx(a - c) + (a - c) * std::log(p) + c * std::log1p(-p) + 1.0;
  };
  const double peak = c / (1.0 - p);
  if (!(f(peak) > 0.0)) throw InfeasibleError(fmt::format("no growing-height root for p={}, K_n={}", p, K_n));
  double start = peak * (1.0 + 1e-9);
  if (!(f(start) > 0.0)) start = peak;
  return bisect_right(f, start, std::exp(-1.0));
}

GrowingKReport growing_k_bounds(std::uint64_t n, std::uint64_t K_n, double p, GrowingMode mode) {
  check_p(p);
  if (K_n < 2) throw DomainError(fmt::format("growing tree needs K_n >= 2 (K_n={})", K_n));
  const int h = exact_log(n, static_cast<int>(K_n));
  if (K_n > static_cast<std::uint64_t>(INT32_MAX) || h < 1)
    throw DomainError(fmt::format("n={} is not an integer power of K_n={}", n, K_n));
  const double nd = static_cast<double>(n);
  const double ln_n = std::log(nd);
  const double ln_inv_p = -std::log(p);
  GrowingKReport r;
  r.mode = mode;
  r.n = n;
  r.K_n = K_n;
  r.p = p;
  r.h = h;
  r.lower = (h - 1) / (1.0 - p) + ln_n / ln_inv_p + kEulerGamma / ln_inv_p;
  if (mode == GrowingMode::constant_h) {
    r.alpha = 1.0 / ln_inv_p;
    r.delta = p;
    r.b_n = lower_bn_for_m(nd, h, p);
    r.upper = r.b_n + kEulerGamma / ln_inv_p + 1.0;
    r.scaling_lo = 1.0 / ln_inv_p;
    r.scaling_hi = 1.0 / ln_inv_p;
    r.notes.push_back("upper uses +gamma/ln(1/p), matching the Gumbel sandwich sign");
    return r;
  }
  const double lnK = std::log(static_cast<double>(K_n));
  const double c = 1.0 / lnK;
  const RootSolution root = solve_alpha_growing(p, static_cast<double>(K_n));
  const double a = root.alpha;
  r.alpha = a;
  r.delta = a * p / (a - c);
  const double C = 1.0 / (1.0 - r.delta);
  r.beta = log_base((a - c) / C * std::sqrt(2.0 * std::numbers::pi / (r.delta * p)), r.delta);
  r.b_n = a * ln_n + log_base(std::sqrt(ln_n * lnK), r.delta) + r.beta;
  r.upper = r.b_n + kEulerGamma / -std::log(r.delta) + 1.0;
  r.scaling_lo = c / (1.0 - p) + 1.0 / ln_inv_p;
  r.scaling_hi = a;
  r.notes.push_back("delta = alpha p / (alpha - 1/ln K_n), carrying the factor p");
  return r;
}

RootWindow large_m_root_window(double p, int M) {
  check_p(p);
  if (M < 1) throw DomainError(fmt::format("large-M window needs M >= 1 (M={})", M));
  const double peak = 1.0 / (1.0 - p);
  const double target = root_target(2, M);
  const RootSolution root = solve_alpha(p, target);
  RootWindow w{peak, peak + 1.0, 0.0, false};
  for (int k = 49; k >= 0; --k) {
    const double s = 0.01 * k;
    const double eps = std::pow(static_cast<double>(M), -s);
    if (g_alpha(p, target, peak + eps) < 0.0) {
      w.hi = peak + eps;
      w.s = s;
      break;
    }
  }
  w.contains_root = root.alpha > w.lo && root.alpha <= w.hi;
  return w;
}

}  // namespace dissem
