#pragma once

#include <cstdint>

namespace dissem {

// How Pr(W > t) is read at non-integer t: through the continuous tail
// envelope (node-exact at integers) or as the integer step function.
enum class SharedTail { envelope, discrete };

struct JointTailQuery {
  std::uint64_t n = 0;
  std::uint64_t k_n = 0;
  int i = 1;  // hops not shared by the pair, 1 <= i <= log_K k_n - 1
  double x = 0;
  double p = 0.1;
  double trunc_tol = 1e-12;
  int K = 2;
  SharedTail lattice = SharedTail::envelope;
};

struct JointTail {
  double value = 0;
  double remainder_bound = 0;  // the neglected mass is at most this
  long terms = 0;
};

// Pr(W + min(Z1, Z2) > u) with W ~ NB(shared_hops, p) (W = 0 when shared_hops = 0)
// and Z1, Z2 ~ NB(own_hops, p) independent.
JointTail joint_exceedance(int shared_hops, int own_hops, double u, double p, double trunc_tol = 1e-12,
                           bool smooth_shared = true, long max_terms = 10'000'000);

// Level u = lower normalizer (M = 1) + x for a query.
double joint_level(const JointTailQuery& q);

JointTail joint_tail_exact(const JointTailQuery& q);

struct JointBound {
  double value = 0;
  bool has_vanishing_term = true;  // a (1 + o(1)) factor on n^(-2 alpha) is not included
};

JointBound joint_tail_bound(const JointTailQuery& q, double alpha = 0.75);

enum class AlphaMethod { exact, bound };

// n * sum_i (K-1) K^(i-1) Pr(Y_1 > u, Y_{K^i} > u) over i = 1 .. log_K k_n - 1.
double dprime_alpha_n(std::uint64_t n, std::uint64_t k_n, double p, double x, AlphaMethod method, int K = 2,
                      double trunc_tol = 1e-12, double alpha = 0.75,
                      SharedTail lattice = SharedTail::envelope);

// The same sum for a tree with K_n = n^(1/h) children per node and fixed
// height h, where blocks are the K_n top-level subtrees.
double growing_k_alpha_n(std::uint64_t n, int h, double p, double x, double trunc_tol = 1e-12,
                         SharedTail lattice = SharedTail::envelope);

}  // namespace dissem
