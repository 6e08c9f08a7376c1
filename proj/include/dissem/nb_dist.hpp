#pragma once

#include <span>

#include "dissem/special_fn.hpp"

namespace dissem {

// Trials until the m-th success; p is the per-trial failure probability.
struct NBParams {
  int m = 1;
  double p = 0.5;
  void validate() const;
};

double nb_log_pmf(long x, const NBParams& nb);
double nb_pmf(long x, const NBParams& nb);
double nb_cdf(long x, const NBParams& nb);
// Pr(X > x), evaluated directly so that small tails keep full precision.
double nb_tail(long x, const NBParams& nb);
double nb_mean(const NBParams& nb);

// Continuous CDF through the integer nodes of a discrete CDF: the hazard
// h[k] = -ln(1 - F[k]) is linearly interpolated and F_c = 1 - exp(-h_c).
// cdf[i] is F at the integer first + i.
double anderson_envelope(std::span<const double> cdf, long first, double x);

// Continuous tail I_p(x - m + 1, m) for real x > m - 1; equals nb_tail at integers.
double nb_tail_envelope(double x, const NBParams& nb, const Accuracy& acc = {});

// Continuous density extension Gamma(x)/(Gamma(m) Gamma(x-m+1)) (1-p)^m p^(x-m).
double nb_pmf_continuous(double x, const NBParams& nb);

struct TailConstant {
  double ratio;  // exact Pr(X > b) / Pr(X = b + 1) at b = a m + d
  double limit;  // 1 / (1 - a p / (a - 1))
};
TailConstant tail_constant(const NBParams& nb, double a, double d);

struct GeneralTail {
  double phi;          // evaluation point of the tail
  double psi;          // centering term of the exponent
  double eps;          // product correction; tends to 1 for slowly growing m
  double approx;       // (p^x / n^alpha) * eps
  bool unreliable;     // |eps - 1| above the configured threshold
};
GeneralTail asymptotic_tail_general(double n, int m, double alpha, double x, double p,
                                    double eps_threshold = 0.5);

double asymptotic_tail_stirling(int m, double a, double d, double p);

}  // namespace dissem
