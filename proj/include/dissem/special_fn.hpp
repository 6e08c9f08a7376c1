#pragma once

#include <cstdint>

namespace dissem {

struct Accuracy {
  double rel_tol = 1e-12;
  std::uint64_t max_terms = 10'000'000;
};

// ln Gamma(x) for x > 0. Exactly 0 at x = 1 and x = 2.
double log_gamma(double x);

// ln B(a, b).
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double x, double a, double b, const Accuracy& acc = {});

// Upper tail 1 - I_x(a, b) computed without cancellation, i.e. I_{1-x}(b, a).
double reg_inc_beta_upper(double x, double a, double b, const Accuracy& acc = {});

// Partial sums of the Gauss series 2F1(a, b; c; z) for 0 <= z < 1.
double gauss_2f1_series(double a, double b, double c, double z, const Accuracy& acc = {});

}  // namespace dissem
