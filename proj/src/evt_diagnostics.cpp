#include "dissem/evt_diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dissem/errors.hpp"
#include "dissem/evt_bounds.hpp"
#include "dissem/nb_dist.hpp"

namespace dissem {

namespace {

// Pr(W > t) for W ~ NB(m, p), m = 0 meaning W = 0. With `smooth` the
// continuous envelope replaces the step function between integer nodes.
double shared_tail(int m, double t, double p, bool smooth) {
  if (m == 0) return t < 0.0 ? 1.0 : 0.0;
  if (smooth) return t > m - 1.0 ? nb_tail_envelope(t, NBParams{m, p}) : 1.0;
  const double ft = std::floor(t);
  if (ft < m) return 1.0;
  return nb_tail(static_cast<long>(ft), NBParams{m, p});
}

int query_levels(const JointTailQuery& q) {
  if (q.K < 2) throw DomainError(fmt::format("joint tail needs K >= 2 (K={})", q.K));
  const int L = exact_log(q.k_n, q.K);
  if (L < 1 || q.k_n >= q.n || exact_log(q.n, q.K) < 1)
    throw DomainError(fmt::format("joint tail needs powers of K with 1 < k_n < n (k_n={}, n={})", q.k_n, q.n));
  if (q.i < 1 || q.i > L - 1)
    throw DomainError(fmt::format("joint tail index i={} outside 1..{}", q.i, L - 1));
  if (!(q.trunc_tol > 0.0)) throw DomainError("joint tail needs trunc_tol > 0");
  return L;
}

}  // namespace

JointTail joint_exceedance(int shared_hops, int own_hops, double u, double p, double trunc_tol, bool smooth_shared,
                           long max_terms) {
  if (shared_hops < 0 || own_hops < 1)
    throw DomainError(fmt::format("joint exceedance needs shared >= 0, own >= 1 ({}, {})", shared_hops, own_hops));
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("joint exceedance needs 0 < p < 1 (p={})", p));
  if (!(trunc_tol > 0.0)) throw DomainError("joint exceedance needs trunc_tol > 0");
  const NBParams z{own_hops, p};
  JointTail out;
  double sum = 0.0;
  double prev_sq = 1.0;  // Pr(min(Z1, Z2) > k - 1)
  for (long k = own_hops; out.terms < max_terms; ++k) {
    const double tail_k = nb_tail(k, z);
    const double sq = tail_k * tail_k;
    sum += shared_tail(shared_hops, u - static_cast<double>(k), p, smooth_shared) * (prev_sq - sq);
    prev_sq = sq;
    ++out.terms;
    if (sum > 0.0 && sq <= trunc_tol * sum) {
      out.value = sum;
      out.remainder_bound = sq;
      return out;
    }
    if (sq == 0.0) {
      out.value = sum;
      return out;
    }
  }
  throw ConvergenceError(fmt::format("joint exceedance did not reach tolerance {} in {} terms", trunc_tol, max_terms));
}

double joint_level(const JointTailQuery& q) {
  query_levels(q);
  return lower_bn(q.n, q.k_n, q.p, 1, q.K).value + q.x;
}

JointTail joint_tail_exact(const JointTailQuery& q) {
  const int L = query_levels(q);
  return joint_exceedance(L - q.i, q.i, joint_level(q), q.p, q.trunc_tol, q.lattice == SharedTail::envelope);
}

JointBound joint_tail_bound(const JointTailQuery& q, double alpha) {
  const int L = query_levels(q);
  if (!(alpha > 0.5 && alpha < 1.0)) throw DomainError(fmt::format("joint bound needs 1/2 < alpha < 1 ({})", alpha));
  const double p = q.p;
  const double nd = static_cast<double>(q.n);
  const double ln_inv_p = -std::log(p);
  const double lg_n = std::log(nd) / ln_inv_p;
  const double psi = lg_n + (L - 1) * std::log((1.0 - p) / p) / ln_inv_p;
  const double C = std::max(1.0 / lg_n, 1.0 / psi);
  JointBound b;
  b.value = 2.0 * std::pow(p, q.x) / nd * std::pow(C * psi, L - 1) * std::pow(C * 4.0 / (1.0 - p) * L, q.i) +
            std::pow(nd, -2.0 * alpha);
  return b;
}

double dprime_alpha_n(std::uint64_t n, std::uint64_t k_n, double p, double x, AlphaMethod method, int K,
                      double trunc_tol, double alpha, SharedTail lattice) {
  const int L = exact_log(k_n, K);
  if (L < 1 || k_n >= n) throw DomainError(fmt::format("alpha_n needs 1 < k_n < n, powers of K (k_n={})", k_n));
  double sum = 0.0;
  for (int i = 1; i <= L - 1; ++i) {
    const JointTailQuery q{n, k_n, i, x, p, trunc_tol, K, lattice};
    const double pr = method == AlphaMethod::exact ? joint_tail_exact(q).value : joint_tail_bound(q, alpha).value;
    sum += (K - 1) * std::pow(static_cast<double>(K), i - 1) * pr;
  }
  return static_cast<double>(n) * sum;
}

double growing_k_alpha_n(std::uint64_t n, int h, double p, double x, double trunc_tol, SharedTail lattice) {
  if (h < 2) throw DomainError(fmt::format("growing-K sum needs h >= 2 (h={})", h));
  const double nd = static_cast<double>(n);
  const auto K_n = static_cast<std::uint64_t>(std::llround(std::pow(nd, 1.0 / h)));
  if (K_n < 2 || int_pow(static_cast<int>(K_n), h) != n)
    throw DomainError(fmt::format("n={} is not an integer h-th power (h={})", n, h));
  const double u = lower_bn_for_m(nd, h, p) + x;
  const double kd = static_cast<double>(K_n);
  double sum = 0.0;
  for (int i = 1; i <= h - 1; ++i) {
    const double pr = joint_exceedance(h - i, i, u, p, trunc_tol, lattice == SharedTail::envelope).value;
    sum += std::pow(kd, i - 2) * pr;
  }
  return nd * kd * (kd - 1.0) / 2.0 * sum;
}

}  // namespace dissem
