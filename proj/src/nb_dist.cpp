#include "dissem/nb_dist.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "dissem/errors.hpp"

namespace dissem {

void NBParams::validate() const {
  if (m < 1) throw DomainError(fmt::format("NB needs m >= 1 (m={})", m));
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("NB needs 0 < p < 1 (p={})", p));
}

namespace {

void check_support(long x, const NBParams& nb) {
  nb.validate();
  if (x < nb.m) throw DomainError(fmt::format("x={} below NB support start m={}", x, nb.m));
}

double log_choose(double n, double k) {
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

}  // namespace

double nb_log_pmf(long x, const NBParams& nb) {
  check_support(x, nb);
  const double xd = static_cast<double>(x);
  const double md = nb.m;
  return log_choose(xd - 1.0, md - 1.0) + (xd - md) * std::log(nb.p) + md * std::log1p(-nb.p);
}

double nb_pmf(long x, const NBParams& nb) { return std::exp(nb_log_pmf(x, nb)); }

double nb_cdf(long x, const NBParams& nb) {
  check_support(x, nb);
  return reg_inc_beta(1.0 - nb.p, nb.m, static_cast<double>(x - nb.m + 1));
}

double nb_tail(long x, const NBParams& nb) {
  check_support(x, nb);
  return reg_inc_beta(nb.p, static_cast<double>(x - nb.m + 1), nb.m);
}

double nb_mean(const NBParams& nb) {
  nb.validate();
  return nb.m / (1.0 - nb.p);
}

double anderson_envelope(std::span<const double> cdf, long first, double x) {
  if (cdf.empty()) throw DomainError("anderson_envelope: empty CDF table");
  if (x < static_cast<double>(first))
    throw DomainError(fmt::format("anderson_envelope: x={} below support start {}", x, first));
  const double off = x - static_cast<double>(first);
  const auto last = static_cast<double>(cdf.size() - 1);
  if (off > last) throw DomainError(fmt::format("anderson_envelope: x={} beyond tabulated range", x));
  const auto k = static_cast<std::size_t>(std::floor(off));
  const double frac = off - static_cast<double>(k);
  if (frac == 0.0) return cdf[k];
  auto hazard = [](double f) {
    return f >= 1.0 ? std::numeric_limits<double>::infinity() : -std::log1p(-f);
  };
  const double h0 = hazard(cdf[k]);
  const double h1 = hazard(cdf[k + 1]);
  if (std::isinf(h1)) return 1.0;
  return -std::expm1(-(h0 + frac * (h1 - h0)));
}

double nb_tail_envelope(double x, const NBParams& nb, const Accuracy& acc) {
  nb.validate();
  if (!(x > nb.m - 1.0))
    throw DomainError(fmt::format("tail envelope needs x > m - 1 (x={}, m={})", x, nb.m));
  return reg_inc_beta(nb.p, x - nb.m + 1.0, nb.m, acc);
}

double nb_pmf_continuous(double x, const NBParams& nb) {
  nb.validate();
  if (!(x > nb.m - 1.0)) throw DomainError(fmt::format("continuous pmf needs x > m - 1 (x={})", x));
  const double md = nb.m;
  const double lg = log_gamma(x) - log_gamma(md) - log_gamma(x - md + 1.0);
  return std::exp(lg + md * std::log1p(-nb.p) + (x - md) * std::log(nb.p));
}

TailConstant tail_constant(const NBParams& nb, double a, double d) {
  nb.validate();
  if (!(a > 1.0 / (1.0 - nb.p)))
    throw DomainError(fmt::format("tail_constant needs a > 1/(1-p) (a={}, p={})", a, nb.p));
  const double b = a * nb.m + d;
  const double ratio = nb_tail_envelope(b, nb) / nb_pmf_continuous(b + 1.0, nb);
  const double limit = 1.0 / (1.0 - a * nb.p / (a - 1.0));
  return {ratio, limit};
}

GeneralTail asymptotic_tail_general(double n, int m, double alpha, double x, double p,
                                    double eps_threshold) {
  NBParams{m, p}.validate();
  if (!(n >= 2.0)) throw DomainError(fmt::format("asymptotic tail needs n >= 2 (n={})", n));
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError(fmt::format("asymptotic tail needs 0 < alpha <= 1 (alpha={})", alpha));
  const double ln_inv_p = -std::log(p);
  auto lg = [&](double v) { return std::log(v) / ln_inv_p; };
  const double odds = (1.0 - p) / p;
  const double md = m;
  const double psi = alpha * lg(n) + (md - 1.0) * lg(odds);
  if (!(psi > 0.0)) throw DomainError("asymptotic tail: centering term is not positive");
  const double phi = alpha * lg(n) + (md - 1.0) * lg(odds * psi) - log_gamma(md) / ln_inv_p + x;
  double log_eps = 0.0;
  for (int j = 0; j < m; ++j) {
    const double f = phi - j;
    if (!(f > 0.0)) throw DomainError("asymptotic tail: evaluation point inside the first m trials");
    log_eps += std::log(f / psi);
  }
  const double eps = std::exp(log_eps);
  const double approx = std::exp(x * std::log(p) - alpha * std::log(n)) * eps;
  return {phi, psi, eps, approx, std::fabs(eps - 1.0) > eps_threshold};
}

double asymptotic_tail_stirling(int m, double a, double d, double p) {
  const NBParams nb{m, p};
  const TailConstant tc = tail_constant(nb, a, d);
  const double delta = a * p / (a - 1.0);
  const double md = m;
  const double log_rate = a * std::log(a) - (a - 1.0) * std::log(a - 1.0) + (a - 1.0) * std::log(p) + std::log1p(-p);
  const double log_val = md * log_rate + d * std::log(delta) - 0.5 * std::log(md) - std::log(a - 1.0) +
                         0.5 * std::log(delta * p / (2.0 * std::numbers::pi));
  return tc.ratio * std::exp(log_val);
}

}  // namespace dissem
