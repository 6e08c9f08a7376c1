#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dissem/tree_spec.hpp"

namespace dissem {

inline constexpr double kEulerGamma = 0.57721566490153286061;

// g_p(alpha) = (1/target) alpha^alpha / (alpha-1)^(alpha-1) p^(alpha-1) (1-p) - 1
double g_alpha(double p, double target, double alpha);

struct RootSolution {
  double alpha = 0;
  double target = 0;
  double residual = 0;
  double lo = 0;
  double hi = 0;
};

// Unique root of g_p right of 1/(1-p).
RootSolution solve_alpha(double p, double target);

// Target K^(-1/M) used for M messages on a K-ary tree.
double root_target(int K, int M);

struct DeltaBeta {
  double delta;
  double beta;
};
DeltaBeta delta_beta(double p, double alpha);

double upper_bn(std::uint64_t n, double p, int M = 1, int K = 2);

enum class LowerVariant { standard, hat };

struct LowerBn {
  double value = 0;
  double sufficiency_ratio = 0;  // m^2 ln ln n / ln n with m = M log_K k_n
  bool sufficiency_exceeded = false;
};

LowerBn lower_bn(std::uint64_t n, std::uint64_t k_n, double p, int M = 1, int K = 2,
                 LowerVariant variant = LowerVariant::standard, double sufficiency_threshold = 0.5);

// Lower normalizer for an arbitrary NB success count m.
double lower_bn_for_m(double n, int m, double p);
double lower_bn_hat_for_m(double n, int m);

// Largest power of K with (log_K k)^2 ln ln n <= 0.5 ln n and k < n (at least K).
std::uint64_t default_kn(std::uint64_t n, int K = 2);

// The per-p schedule used for the expected-completion figures:
// log2 k_n = 4 for N <= 10 and 7 beyond at p = 0.1 and 0.5; 4 throughout at p = 0.2.
// Other p fall back to default_kn. Clamped to k_n < n.
std::uint64_t figure_kn(int N, double p);

struct BoundsReport {
  TreeSpec spec;
  std::uint64_t k_n = 0;
  RootSolution alpha_root;
  double delta = 0;
  double beta = 0;
  double b_n_upper = 0;
  double b_n_lower = 0;
  double b_n_lower_hat = 0;
  double lower_trivial = 0;
  double lower_claim_a = 0;
  double lower_main = 0;
  double upper_main = 0;
  // leading constants per ln n and per log2 n
  double scaling_lo = 0;
  double scaling_hi = 0;
  double scaling_lo_log2 = 0;
  double scaling_hi_log2 = 0;
  bool sufficiency_exceeded = false;
};

// lower_main uses the chosen lower normalizer variant.
BoundsReport expectation_bounds(const TreeSpec& spec, std::uint64_t k_n,
                                LowerVariant variant = LowerVariant::standard);

// T with Pr(completion > T) <= eps asymptotically.
double tail_time_bound(const TreeSpec& spec, double eps);

enum class GrowingMode { constant_h, growing_h };

struct GrowingKReport {
  GrowingMode mode;
  std::uint64_t n = 0;
  std::uint64_t K_n = 0;
  double p = 0;
  int h = 0;
  double alpha = 0;  // growing_h: root per ln n; constant_h: 1/ln(1/p)
  double delta = 0;
  double beta = 0;
  double b_n = 0;
  double lower = 0;
  double upper = 0;
  double scaling_lo = 0;  // per ln n
  double scaling_hi = 0;
  std::vector<std::string> notes;
};

GrowingKReport growing_k_bounds(std::uint64_t n, std::uint64_t K_n, double p, GrowingMode mode);

// Root of the growing-height equation with c = 1/ln K_n.
RootSolution solve_alpha_growing(double p, double K_n);

struct RootWindow {
  double lo;
  double hi;
  double s;            // exponent of the grid point M^-s that closed the window
  bool contains_root;  // solved alpha_{p,M} lies in (lo, hi]
};

RootWindow large_m_root_window(double p, int M);

}  // namespace dissem
