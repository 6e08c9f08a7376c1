#pragma once

// Reference computations built from first principles, sharing no code with
// the library: long double products, binomial sums, tanh-sinh quadrature and
// brute-force enumeration.

#include <cmath>
#include <vector>

namespace oracle {

inline long double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0L;
  long double c = 1.0L;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

inline long double powl_int(long double b, long e) {
  long double r = 1.0L;
  for (long i = 0; i < e; ++i) r *= b;
  return r;
}

// Pr(X = x) for trials until the m-th success, failure probability p.
inline double nb_pmf(long x, int m, double p) {
  if (x < m) return 0.0;
  return static_cast<double>(choose(static_cast<int>(x - 1), m - 1) * powl_int(p, x - m) *
                             powl_int(1.0L - p, m));
}

inline double nb_cdf(long x, int m, double p) {
  long double s = 0.0L;
  for (long k = m; k <= x; ++k) s += nb_pmf(k, m, p);
  return static_cast<double>(s);
}

// I_x(a, b) for integer a, b as a binomial upper sum.
inline double inc_beta_binomial(double x, int a, int b) {
  const int n = a + b - 1;
  long double s = 0.0L;
  for (int j = a; j <= n; ++j) s += choose(n, j) * powl_int(x, j) * powl_int(1.0L - x, n - j);
  return static_cast<double>(s);
}

// I_x(a, b) by tanh-sinh quadrature of the beta density over [0, x]; the
// substitution clusters nodes at both ends, so endpoint singularities are harmless.
inline double inc_beta_quadrature(double x, double a, double b) {
  const double lnB = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double half_pi = 2.0 * std::atan(1.0);
  const double h = 1.0 / 128.0;
  long double s = 0.0L;
  for (int k = -6 * 128; k <= 6 * 128; ++k) {
    const double u = half_pi * std::sinh(k * h);
    const double hi = 2.0 / (1.0 + std::exp(-2.0 * u));  // 1 + tanh(u)
    const double c = std::cosh(u);
    const double w = half_pi * std::cosh(k * h) / (c * c);
    const double t = 0.5 * x * hi;
    const double one_minus_t = 1.0 - t;
    if (t <= 0.0 || one_minus_t <= 0.0 || w == 0.0) continue;
    const double dens = std::exp((a - 1) * std::log(t) + (b - 1) * std::log(one_minus_t) - lnB);
    s += static_cast<long double>(w) * dens;
  }
  return static_cast<double>(s * h * 0.5 * x);
}

// Pr(X > t) read either at floor(t) or through the incomplete beta at real t.
inline double nb_tail_at(double t, int m, double p, bool smooth) {
  if (m == 0) return t < 0 ? 1.0 : 0.0;
  if (!smooth) return t < m ? 1.0 : 1.0 - nb_cdf(static_cast<long>(std::floor(t)), m, p);
  return t <= m - 1 ? 1.0 : inc_beta_quadrature(p, t - m + 1, m);
}

// Pr(W + min(Z1, Z2) > u) by summing over the law of the minimum.
inline double joint_bruteforce(int shared, int own, double u, double p, bool smooth, long kmax = 400) {
  long double s = 0.0L;
  for (long k1 = own; k1 <= kmax; ++k1) {
    const double f1 = nb_pmf(k1, own, p);
    if (f1 == 0.0) continue;
    for (long k2 = own; k2 <= kmax; ++k2) {
      const double f2 = nb_pmf(k2, own, p);
      if (f2 == 0.0) continue;
      const long k = k1 < k2 ? k1 : k2;
      s += static_cast<long double>(f1) * f2 * nb_tail_at(u - k, shared, p, smooth);
    }
  }
  return static_cast<double>(s);
}

struct Certified {
  double partial;
  double remainder_bound;
  double upper() const { return partial + remainder_bound; }
};

// sum_k f[k] k(k-1)...(k-m+1), cut where the term ratio p k(k+1)/(k-m+1)^2
// (decreasing in k, limit p) is below (1+p)/2 and the tail is negligible.
inline Certified falling_moment(int m, double p) {
  auto term = [&](long k) {
    long double f = 1.0L;
    for (int j = 0; j < m; ++j) f *= (k - j);
    return static_cast<long double>(nb_pmf(k, m, p)) * f;
  };
  auto ratio = [&](long k) { return p * double(k) * (k + 1) / (double(k - m + 1) * (k - m + 1)); };
  long double s = 0.0L;
  long k = m;
  for (;; ++k) {
    s += term(k);
    if (ratio(k + 1) < 0.5 * (1 + p) && term(k + 1) < 1e-18L * s) break;
  }
  const double r = ratio(k + 1);
  return {static_cast<double>(s), static_cast<double>(term(k + 1) / (1.0L - r))};
}

// sum_k p^-k Pr(min(Z1, Z2) = k) for Z ~ NB(m, p). The summand is at most
// p^-k F(k-1)^2 <= p^-k f[k]^2 / (1 - rho_k)^2 with rho_k = p k/(k-m+1),
// whose successive ratio p (k/(k-m+1))^2 decreases in k.
inline Certified minmin_pgf(int m, double p) {
  // Tails by backward summation so that tiny values keep relative precision.
  const long cap = m + 2500;
  std::vector<long double> tail(cap + 2, 0.0L);  // tail[k] = Pr(Z > k)
  for (long k = cap; k >= 0; --k) tail[k] = tail[k + 1] + static_cast<long double>(nb_pmf(k + 1, m, p));
  auto dominating = [&](long k) {
    const long double rho = p * double(k) / double(k - m + 1);
    const long double f = nb_pmf(k, m, p);
    return powl_int(1.0L / p, k) * f * f / ((1.0L - rho) * (1.0L - rho));
  };
  auto ratio = [&](long k) {
    const double q = double(k) / double(k - m + 1);
    return p * q * q;
  };
  long double s = 0.0L;
  long k = m;
  for (; k < cap; ++k) {
    s += powl_int(1.0L / p, k) * (tail[k - 1] * tail[k - 1] - tail[k] * tail[k]);
    if (ratio(k + 1) < 0.5 * (1 + p) && p * (k + 1) / double(k + 2 - m) < 0.5 * (1 + p) &&
        dominating(k + 1) < 1e-15L * s)
      break;
  }
  const double r = ratio(k + 1);
  return {static_cast<double>(s), static_cast<double>(dominating(k + 1) / (1.0L - r))};
}

// Pr(max of K i.i.d. geometrics <= x).
inline double geometric_max_cdf(long x, int K, double p) {
  if (x < 1) return 0.0;
  return std::pow(1.0 - std::pow(p, static_cast<double>(x)), K);
}

// Law of the completion time of a complete K-ary tree by direct recursion on
// probability vectors (index = slot), truncated at xmax.
inline std::vector<double> tree_law(int K, int height, int M, double p, long xmax) {
  std::vector<double> edge(xmax + 1, 0.0);
  for (long x = 0; x <= xmax; ++x) edge[x] = nb_pmf(x, M, p);
  std::vector<double> cdf(xmax + 1, 1.0);  // height 0: completion at 0
  for (int level = 0; level < height; ++level) {
    std::vector<double> child(xmax + 1, 0.0);
    for (long x = 0; x <= xmax; ++x) {
      long double s = 0.0L;
      for (long w = 0; w <= x; ++w) s += static_cast<long double>(edge[w]) * cdf[x - w];
      child[x] = std::pow(static_cast<double>(s), K);
    }
    cdf = child;
  }
  std::vector<double> pmf(xmax + 1, 0.0);
  for (long x = 0; x <= xmax; ++x) pmf[x] = cdf[x] - (x ? cdf[x - 1] : 0.0);
  return pmf;
}

inline double law_mean(const std::vector<double>& pmf) {
  long double s = 0.0L;
  for (std::size_t x = 0; x < pmf.size(); ++x) s += static_cast<long double>(x) * pmf[x];
  return static_cast<double>(s);
}

}  // namespace oracle
