// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is the number of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dissem/cli/commands.hpp"
#include "dissem/evt_bounds.hpp"
#include "dissem/evt_diagnostics.hpp"
#include "dissem/nb_dist.hpp"
#include "dissem/tree_sim.hpp"
#include "oracles.hpp"

using namespace dissem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 1;  // the tool's default master seed

struct Report {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, std::string line) {
    pass = pass && ok;
    lines.push_back(fmt::format("    {} {}", ok ? "ok  " : "FAIL", line));
  }
  void info(std::string line) { lines.push_back(fmt::format("    info {}", line)); }
};

// ln((2m-1)!/(m-1)!) through std::lgamma rather than the library.
double log_factorial_ratio(int m) { return std::lgamma(2.0 * m) - std::lgamma(double(m)); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Report roots() {
  constexpr double kTol = 1e-3;
  constexpr double kMaxSeconds = 1e-3;
  Report r;
  const std::pair<double, double> want[] = {{0.1, 1.78807}, {0.2, 2.25379}, {0.5, 4.4035}};
  for (auto [p, a] : want) {
    const auto t0 = Clock::now();
    const RootSolution s = solve_alpha(p, 0.5);
    const double dt = seconds_since(t0);
    r.check(std::fabs(s.alpha - a) <= kTol && dt < kMaxSeconds,
            fmt::format("p={} alpha={:.6f} want {} +-{} in {:.1f} us", p, s.alpha, a, kTol, dt * 1e6));
  }
  return r;
}

Report scaling() {
  constexpr double kTol = 0.005;
  constexpr double kPeakTol = 1e-10;
  Report r;
  const BoundsReport b = expectation_bounds({2, 1u << 20, 0.1, 1}, 16);
  r.check(std::fabs(b.scaling_lo_log2 - 1.412) <= kTol, fmt::format("lower {:.5f} want 1.412", b.scaling_lo_log2));
  r.check(std::fabs(b.scaling_hi_log2 - 1.788) <= kTol, fmt::format("upper {:.5f} want 1.788", b.scaling_hi_log2));
  double worst = 0;
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    worst = std::max(worst, std::fabs(g_alpha(p, 0.5, 1 / (1 - p)) - 1.0));
  }
  r.check(worst <= kPeakTol, fmt::format("max |g_p(1/(1-p)) - 1| over p=0.01..0.99 is {:.2e}", worst));
  return r;
}

Report defining_limits() {
  constexpr double kUpperLo = 0.7, kUpperHi = 1.4;
  constexpr double kLowerLo = 0.5, kLowerHi = 2.0;
  constexpr int kLogKn = 7;
  Report r;
  const std::uint64_t n = 1u << 20;
  const double nd = static_cast<double>(n);
  for (double p : {0.1, 0.2}) {
    const double delta = delta_beta(p, solve_alpha(p, 0.5).alpha).delta;
    const double b_up = upper_bn(n, p);
    const double b_low = lower_bn(n, 1u << kLogKn, p).value;
    for (double x : {-1.0, 0.0, 1.0}) {
      const double up = nd * nb_tail_envelope(b_up + x, {20, p}) / std::pow(delta, x);
      r.check(up >= kUpperLo && up <= kUpperHi,
              fmt::format("upper p={} x={:+} n*tail/delta^x = {:.4f} in [{}, {}]", p, x, up, kUpperLo, kUpperHi));
    }
    for (double x : {-1.0, 0.0, 1.0}) {
      const double low = nd * nb_tail_envelope(b_low + x, {kLogKn, p}) / std::pow(p, x);
      r.check(low >= kLowerLo && low <= kLowerHi,
              fmt::format("lower p={} x={:+} n*tail/p^x = {:.4f} in [{}, {}]", p, x, low, kLowerLo, kLowerHi));
    }
    const LowerBn lb = lower_bn(n, 1u << kLogKn, p);
    r.info(fmt::format("p={} lower normalizer sufficiency ratio m^2 lnln n/ln n = {:.2f}", p, lb.sufficiency_ratio));
  }
  return r;
}

Report iid_sandwich() {
  constexpr std::uint64_t kReps = 5'000;
  constexpr double kSe = 3.0;
  constexpr double kMaxSeconds = 120.0;
  Report r;
  const auto t0 = Clock::now();
  for (double p : {0.1, 0.5, 0.7})
    for (int N : {8, 12, 16, 20}) {
      const TreeSpec s{2, 1ull << N, p, 1};
      SimConfig c;
      c.replications = kReps;
      c.master_seed = kSeed;
      c.mode = SimMode::iid;
      c.sampler = SamplerChoice::inverse_cdf;
      c.threads = 0;
      const SimEstimate e = estimate(c, s).estimate;
      const double delta = delta_beta(p, solve_alpha(p, 0.5).alpha).delta;
      const double lo = upper_bn(s.n, p) + kEulerGamma / std::log(1 / delta);
      const double se = *e.std_err;
      r.check(e.mean >= lo - kSe * se && e.mean <= lo + 1 + kSe * se,
              fmt::format("p={} N={} mean={:.4f} se={:.4f} window [{:.4f}, {:.4f}]", p, N, e.mean, se, lo, lo + 1));
    }
  const double dt = seconds_since(t0);
  r.check(dt < kMaxSeconds, fmt::format("runtime {:.1f} s < {} s", dt, kMaxSeconds));
  return r;
}

Report bracketing() {
  constexpr std::uint64_t kReps = 10'000;
  constexpr double kSe = 3.0;
  constexpr double kMaxSeconds = 600.0;
  Report r;
  const auto t0 = Clock::now();
  for (double p : {0.1, 0.2, 0.5})
    for (int N : {6, 10, 14}) {
      const TreeSpec s{2, 1ull << N, p, 1};
      const std::uint64_t k_n = default_kn(s.n, 2);
      const BoundsReport b = expectation_bounds(s, k_n);
      SimConfig c;
      c.replications = kReps;
      c.master_seed = kSeed;
      c.mode = SimMode::tree;
      c.threads = 0;
      const SimEstimate e = estimate(c, s).estimate;
      const double se = *e.std_err;
      r.check(b.lower_main - kSe * se <= e.mean && e.mean <= b.upper_main + kSe * se,
              fmt::format("p={} N={} k_n={} mean={:.4f} se={:.4f} bounds [{:.4f}, {:.4f}]", p, N, k_n, e.mean, se,
                          b.lower_main, b.upper_main));
    }
  const double dt = seconds_since(t0);
  r.check(dt < kMaxSeconds, fmt::format("runtime {:.1f} s < {} s", dt, kMaxSeconds));
  return r;
}

Report ordering() {
  constexpr std::uint64_t kReps = 10'000;
  constexpr double kSe = 3.0;
  Report r;
  const TreeSpec base{2, 1u << 10, 0.1, 1};
  for (double p : {0.1, 0.5}) {
    TreeSpec s = base;
    s.p = p;
    auto run = [&](SimMode mode, std::uint64_t k_n) {
      SimConfig c;
      c.replications = kReps;
      c.master_seed = kSeed;  // paired across the three objects
      c.mode = mode;
      c.k_n = k_n;
      c.threads = 0;
      return estimate(c, s).estimate;
    };
    const SimEstimate tree = run(SimMode::tree, 0);
    const SimEstimate iid = run(SimMode::iid, 0);
    for (std::uint64_t k_n : {default_kn(s.n, 2), std::uint64_t{16}}) {
      const SimEstimate low = run(SimMode::lower_construct, k_n);
      const double se1 = std::hypot(*low.std_err, *tree.std_err);
      r.check(low.mean <= tree.mean + kSe * se1, fmt::format("p={} k_n={} lower-construct {:.4f} <= tree {:.4f} (3 se = {:.4f})",
                                                             p, k_n, low.mean, tree.mean, kSe * se1));
    }
    const double se2 = std::hypot(*tree.std_err, *iid.std_err);
    r.check(tree.mean <= iid.mean + kSe * se2,
            fmt::format("p={} tree {:.4f} <= iid {:.4f} (3 se = {:.4f})", p, tree.mean, iid.mean, kSe * se2));
  }
  return r;
}

Report tail_bound() {
  constexpr std::uint64_t kReps = 100'000;
  Report r;
  const TreeSpec s{2, 1u << 10, 0.1, 1};
  SimConfig c;
  c.replications = kReps;
  c.master_seed = kSeed;
  c.threads = 0;
  c.mode = SimMode::tree;
  const Ecdf tree = estimate(c, s).ecdf;
  c.mode = SimMode::iid;
  const Ecdf iid = estimate(c, s).ecdf;
  const MaxLawTable tree_law = MaxLawTable::tree_max(2, 10, 1, 0.1, 1);
  const MaxLawTable iid_law = MaxLawTable::iid_nb_max(s.n, 10, 0.1);
  for (double eps : {0.2, 0.05, 0.01}) {
    const double T = tail_time_bound(s, eps);
    const long q = tree.quantile(1 - eps);
    r.check(q <= T, fmt::format("eps={} empirical completion-time quantile {} <= bound {:.4f}", eps, q, T));
    const long qe = tree_law.quantile(1 - eps);
    r.info(fmt::format("eps={} exact completion-time quantile {} (Pr(M_n <= {}) = {:.5f})", eps, qe, qe,
                       tree_law.cdf(qe)));
    r.info(fmt::format("eps={} i.i.d. maximum: empirical quantile {}, exact {}, bound {:.4f}", eps,
                       iid.quantile(1 - eps), iid_law.quantile(1 - eps), T));
  }
  return r;
}

Report distribution_engine() {
  constexpr double kCdfTol = 1e-10;
  constexpr double kTailConstantTol = 0.02;
  Report r;
  double worst = 0;
  for (int m = 1; m <= 12; ++m)
    for (double p : {0.1, 0.2, 0.5, 0.7}) {
      long double acc = 0.0L;
      for (long x = m; x <= 300; ++x) {
        acc += oracle::nb_pmf(x, m, p);
        worst = std::max(worst, std::fabs(nb_cdf(x, {m, p}) - static_cast<double>(acc)));
      }
    }
  r.check(worst <= kCdfTol, fmt::format("max |nb_cdf - pmf sum| over m<=12, x<=300 = {:.2e}", worst));

  bool moment_ok = true;
  double moment_slack = 1e300;
  for (int m = 1; m <= 8; ++m)
    for (double p : {0.1, 0.3, 0.5}) {
      const auto s = oracle::falling_moment(m, p);
      const double bound = std::exp(log_factorial_ratio(m) - m * std::log1p(-p));
      moment_ok = moment_ok && s.upper() <= bound * (1 + 1e-12);
      moment_slack = std::min(moment_slack, bound / s.upper());
    }
  r.check(moment_ok, fmt::format("factorial-moment inequality, m<=8, p in {{0.1,0.3,0.5}}: min bound/sum = {:.3f}",
                                 moment_slack));

  bool pgf_ok = true;
  double pgf_slack = 1e300;
  for (int m = 1; m <= 6; ++m)
    for (double p : {0.3, 0.5, 0.7}) {
      const auto s = oracle::minmin_pgf(m, p);
      const double bound = 2 * std::pow(4 / p, m);
      pgf_ok = pgf_ok && s.upper() < bound;
      pgf_slack = std::min(pgf_slack, bound / s.upper());
    }
  r.check(pgf_ok, fmt::format("min-of-two generating function bound, m<=6, p in {{0.3,0.5,0.7}}: min bound/sum = {:.3f}",
                              pgf_slack));

  const double alpha = solve_alpha(0.1, 0.5).alpha;
  const TailConstant tc = tail_constant({40, 0.1}, alpha, 0.0);
  const double rel = std::fabs(tc.ratio / tc.limit - 1);
  r.check(rel <= kTailConstantTol,
          fmt::format("tail constant m=40: ratio {:.5f} vs C {:.5f} (rel {:.4f})", tc.ratio, tc.limit, rel));
  return r;
}

Report diagnostics() {
  Report r;
  double prev = INFINITY;
  bool down = true;
  std::string trail;
  for (int N = 12; N <= 20; ++N) {
    const double a = dprime_alpha_n(1ull << N, 16, 0.1, 0.0, AlphaMethod::exact);
    down = down && a < prev;
    prev = a;
    trail += fmt::format(" {:.4f}", a);
  }
  r.check(down, "alpha_n strictly decreasing over n=2^12..2^20:" + trail);

  prev = -INFINITY;
  bool up = true;
  trail.clear();
  for (int N = 8; N <= 22; N += 2) {
    const double v = growing_k_alpha_n(1ull << N, 2, 0.1, 0.0);
    up = up && v > prev;
    prev = v;
    trail += fmt::format(" {:.3f}", v);
  }
  r.check(up, "growing-arity sum (K_n = sqrt n, h = 2) strictly increasing over n=2^8..2^22:" + trail);
  return r;
}

Report determinism() {
  using namespace dissem::cli;
  Report r;
  for (Command cmd : {Command::simulate, Command::tail, Command::y_convergence}) {
    ExperimentConfig c;
    c.command = cmd;
    c.p = {0.1, 0.5};
    c.n_exp = {8, 12};
    c.kn_exp = {4};
    c.reps = 2000;
    c.eps = {0.2, 0.05, 0.01};
    c.seed = 20240601;
    c.threads = 1;
    const std::string serial = run(c).body;
    c.threads = 4;
    const std::string parallel = run(c).body;
    const std::string again = run(c).body;
    r.check(serial == parallel && parallel == again,
            fmt::format("{}: bodies identical for 1 and 4 threads and on rerun ({} bytes)", command_name(cmd),
                        serial.size()));
  }
  return r;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Report()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "root reproduction", roots},
      {2, "scaling constants", scaling},
      {3, "defining limits", defining_limits},
      {4, "i.i.d. sandwich", iid_sandwich},
      {5, "bracketing of the tree process", bracketing},
      {6, "ordering chain", ordering},
      {7, "tail bound", tail_bound},
      {8, "distribution engine", distribution_engine},
      {9, "dependence diagnostics", diagnostics},
      {10, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Report r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.check(false, fmt::format("threw: {}", e.what()));
    }
    failed += r.pass ? 0 : 1;
    std::printf("%s criterion %d: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0));
    for (const auto& l : r.lines) std::printf("%s\n", l.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed;
}
