#include "dissem/tree_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "dissem/errors.hpp"
#include "dissem/nb_dist.hpp"

namespace dissem {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

Engine replication_engine(std::uint64_t master, std::uint64_t index) {
  return Engine(replication_seed(master, index));
}

double uniform_open0(Engine& eng) {
  return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

namespace {

// Geometric draws with ln p hoisted out of the inner loops.
struct GeomDraw {
  double inv_log_p;
  explicit GeomDraw(double p) : inv_log_p(1.0 / std::log(p)) {}
  long operator()(Engine& eng) const {
    const double k = std::ceil(std::log(uniform_open0(eng)) * inv_log_p);
    return k < 1.0 ? 1L : static_cast<long>(k);
  }
  long nb(int m, Engine& eng) const {
    long s = 0;
    for (int i = 0; i < m; ++i) s += (*this)(eng);
    return s;
  }
};

void check_leaves(const TreeSpec& spec, const SimLimits& limits) {
  if (spec.n > limits.max_leaves)
    throw ResourceError(fmt::format("n={} exceeds the leaf budget {}", spec.n, limits.max_leaves));
}

int subtree_height(const TreeSpec& spec, std::uint64_t k_n) {
  const int L = exact_log(k_n, spec.K);
  if (L < 1 || k_n > spec.n)
    throw DomainError(fmt::format("k_n={} must be a power of K={} with 1 < k_n <= n={}", k_n, spec.K, spec.n));
  return L;
}

// Reduces the lowest `levels` levels of the tree bottom-up and returns the
// maximum over the remaining n / K^levels subtree completion times.
long reduce_bottom_up(const TreeSpec& spec, int levels, Engine& eng) {
  const GeomDraw g(spec.p);
  const auto K = static_cast<std::uint64_t>(spec.K);
  thread_local std::vector<long> cur;
  std::uint64_t count = spec.n / K;
  cur.resize(count);
  for (std::uint64_t j = 0; j < count; ++j) {
    long v = 0;
    for (std::uint64_t k = 0; k < K; ++k) v = std::max(v, g.nb(spec.M, eng));
    cur[j] = v;
  }
  for (int lvl = 2; lvl <= levels; ++lvl) {
    count /= K;
    for (std::uint64_t j = 0; j < count; ++j) {
      long v = 0;
      for (std::uint64_t k = 0; k < K; ++k) v = std::max(v, cur[j * K + k] + g.nb(spec.M, eng));
      cur[j] = v;
    }
  }
  return *std::max_element(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(count));
}

}  // namespace

long sample_geometric(double p, Engine& eng) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("geometric needs 0 < p < 1 (p={})", p));
  return GeomDraw(p)(eng);
}

long sample_nb(int m, double p, Engine& eng) {
  NBParams{m, p}.validate();
  return GeomDraw(p).nb(m, eng);
}

long sample_edge_delay(const TreeSpec& spec, Engine& eng) { return sample_nb(spec.M, spec.p, eng); }

Completion sample_completion(const TreeSpec& spec, Engine& eng, bool keep_leaf_times, const SimLimits& limits) {
  const int h = spec.height();
  check_leaves(spec, limits);
  Completion out;
  if (!keep_leaf_times) {
    out.max = reduce_bottom_up(spec, h, eng);
    return out;
  }
  // Top-down: one level of partial path sums at a time.
  const GeomDraw g(spec.p);
  const auto K = static_cast<std::uint64_t>(spec.K);
  std::vector<long> level{0};
  for (int d = 0; d < h; ++d) {
    std::vector<long> next(level.size() * K);
    for (std::size_t j = 0; j < level.size(); ++j)
      for (std::uint64_t k = 0; k < K; ++k) next[j * K + k] = level[j] + g.nb(spec.M, eng);
    level.swap(next);
  }
  out.max = *std::max_element(level.begin(), level.end());
  out.leaf_times = std::move(level);
  return out;
}

long sample_subtree_y(const TreeSpec& spec, std::uint64_t k_n, Engine& eng, const SimLimits& limits) {
  spec.validate();
  const int L = subtree_height(spec, k_n);
  check_leaves(spec, limits);
  return reduce_bottom_up(spec, L, eng);
}

long sample_lower_construct(const TreeSpec& spec, std::uint64_t k_n, Engine& eng, const SimLimits& limits) {
  const int h = spec.height();
  const int L = subtree_height(spec, k_n);
  const long y = sample_subtree_y(spec, k_n, eng, limits);
  const int shared = spec.M * (h - L);
  return y + (shared > 0 ? GeomDraw(spec.p).nb(shared, eng) : 0L);
}

long sample_iid_max(const TreeSpec& spec, Engine& eng) {
  const int h = spec.height();
  const GeomDraw g(spec.p);
  const int m = spec.M * h;
  long v = 0;
  for (std::uint64_t i = 0; i < spec.n; ++i) v = std::max(v, g.nb(m, eng));
  return v;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kTableTail = 1e-18;

// First x with copies * Pr(NB(m, p) > x) below the table cut-off.
long table_end(double copies, int m, double p) {
  const NBParams nb{m, p};
  long x = m;
  while (copies * nb_tail(x, nb) >= kTableTail) {
    ++x;
    if (x > 100'000'000L) throw ConvergenceError("max-law table did not reach its tail cut-off");
  }
  return x;
}

}  // namespace

MaxLawTable MaxLawTable::iid_nb_max(std::uint64_t copies, int m, double p) {
  const NBParams nb{m, p};
  nb.validate();
  if (copies < 1) throw DomainError("iid max needs at least one copy");
  const double c = static_cast<double>(copies);
  const long end = table_end(c, m, p);
  std::vector<double> lc(static_cast<std::size_t>(end) + 1, -std::numeric_limits<double>::infinity());
  for (long x = m; x <= end; ++x) lc[static_cast<std::size_t>(x)] = c * std::log1p(-nb_tail(x, nb));
  lc.back() = 0.0;
  return MaxLawTable(std::move(lc));
}

MaxLawTable MaxLawTable::tree_max(int K, int height, int M, double p, std::uint64_t copies) {
  const NBParams edge{M, p};
  edge.validate();
  if (K < 2 || height < 1 || copies < 1) throw DomainError("tree max law needs K >= 2, height >= 1, copies >= 1");
  const double leaves = static_cast<double>(copies) * std::pow(static_cast<double>(K), height);
  // Union bound over leaves caps the table length.
  const long end = table_end(leaves, M * height, p);
  const auto size = static_cast<std::size_t>(end) + 1;
  std::vector<double> f(size, 0.0), fbar(size, 1.0);
  for (long w = M; w <= end; ++w) {
    f[static_cast<std::size_t>(w)] = nb_pmf(w, edge);
    fbar[static_cast<std::size_t>(w)] = nb_tail(w, edge);
  }
  // Survival of a subtree's completion time, height 0 first.
  std::vector<double> surv(size, 0.0), branch(size);
  for (int lvl = 1; lvl <= height; ++lvl) {
    for (std::size_t x = 0; x < size; ++x) {
      double b = fbar[x];
      for (std::size_t w = static_cast<std::size_t>(M); w <= x; ++w) b += f[w] * surv[x - w];
      branch[x] = std::min(b, 1.0);
    }
    for (std::size_t x = 0; x < size; ++x)
      surv[x] = branch[x] >= 1.0 ? 1.0 : -std::expm1(K * std::log1p(-branch[x]));
  }
  std::vector<double> lc(size);
  const double c = static_cast<double>(copies);
  for (std::size_t x = 0; x < size; ++x)
    lc[x] = surv[x] >= 1.0 ? -std::numeric_limits<double>::infinity() : c * std::log1p(-surv[x]);
  lc.back() = 0.0;
  return MaxLawTable(std::move(lc));
}

long MaxLawTable::sample(Engine& eng) const {
  const double lu = std::log(uniform_open0(eng));
  const auto it = std::lower_bound(log_cdf_.begin(), log_cdf_.end(), lu);
  if (it == log_cdf_.end()) return static_cast<long>(log_cdf_.size()) - 1;
  return static_cast<long>(it - log_cdf_.begin());
}

double MaxLawTable::cdf(long x) const {
  if (x < 0) return 0.0;
  if (static_cast<std::size_t>(x) >= log_cdf_.size()) return 1.0;
  return std::exp(log_cdf_[static_cast<std::size_t>(x)]);
}

double MaxLawTable::mean() const {
  double s = 0.0;
  for (double lc : log_cdf_) s += -std::expm1(lc);
  return s;
}

long MaxLawTable::quantile(double q) const {
  for (std::size_t x = 0; x < log_cdf_.size(); ++x)
    if (std::exp(log_cdf_[x]) >= q) return static_cast<long>(x);
  return static_cast<long>(log_cdf_.size()) - 1;
}

// ---------------------------------------------------------------------------

Ecdf Ecdf::from_samples(std::vector<long> samples) {
  Ecdf e;
  if (samples.empty()) return e;
  std::sort(samples.begin(), samples.end());
  const double total = static_cast<double>(samples.size());
  std::uint64_t seen = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ++seen;
    if (i + 1 == samples.size() || samples[i + 1] != samples[i]) {
      e.support.push_back(samples[i]);
      e.cum_count.push_back(seen);
      e.cum_prob.push_back(static_cast<double>(seen) / total);
    }
  }
  e.cum_prob.back() = 1.0;
  return e;
}

double Ecdf::at(long x) const {
  const auto it = std::upper_bound(support.begin(), support.end(), x);
  if (it == support.begin()) return 0.0;
  return cum_prob[static_cast<std::size_t>(it - support.begin()) - 1];
}

long Ecdf::quantile(double q) const {
  if (support.empty()) throw DomainError("quantile of an empty sample");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError(fmt::format("quantile level must lie in (0, 1] (q={})", q));
  // Work in counts so that q * total does not round past an integer.
  const double total = static_cast<double>(cum_count.back());
  const auto need = static_cast<std::uint64_t>(std::ceil(q * total - 1e-9 * total));
  for (std::size_t i = 0; i < support.size(); ++i)
    if (cum_count[i] >= need) return support[i];
  return support.back();
}

SimEstimate summarize(const std::vector<long>& samples, std::uint64_t seed) {
  SimEstimate s;
  s.count = samples.size();
  s.seed = seed;
  if (samples.empty()) return s;
  auto neumaier = [&](auto&& term) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double v = term(static_cast<double>(samples[i]));
      const double t = sum + v;
      comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
    return sum + comp;
  };
  const double n = static_cast<double>(samples.size());
  s.mean = neumaier([](double v) { return v; }) / n;
  if (samples.size() > 1) {
    const double ss = neumaier([&](double v) { return (v - s.mean) * (v - s.mean); });
    const double se = std::sqrt(ss / (n - 1.0) / n);
    s.std_err = se;
    s.ci95 = std::make_pair(s.mean - 1.96 * se, s.mean + 1.96 * se);
  }
  return s;
}

EstimateResult estimate(const SimConfig& config, const TreeSpec& spec) {
  const int h = spec.height();
  if (config.replications < 1) throw DomainError("at least one replication is required");
  const bool uses_kn = config.mode == SimMode::lower_construct || config.mode == SimMode::subtree_y;
  int L = 0;
  if (uses_kn) L = subtree_height(spec, config.k_n);

  auto want_table = [&](std::uint64_t copies, std::uint64_t threshold) {
    if (config.sampler == SamplerChoice::direct) return false;
    if (config.sampler == SamplerChoice::inverse_cdf) return true;
    return copies > threshold;
  };

  MaxLawTable table;
  bool use_table = false;
  if (config.mode == SimMode::iid && want_table(spec.n, 64)) {
    table = MaxLawTable::iid_nb_max(spec.n, spec.M * h, spec.p);
    use_table = true;
  } else if (uses_kn && want_table(spec.n / config.k_n, 4096)) {
    table = MaxLawTable::tree_max(spec.K, L, spec.M, spec.p, spec.n / config.k_n);
    use_table = true;
  }
  if (!use_table && config.mode != SimMode::iid) check_leaves(spec, config.limits);

  const GeomDraw shared_draw(spec.p);
  const int shared = spec.M * (h - L);
  auto one = [&](Engine& eng) -> long {
    switch (config.mode) {
      case SimMode::tree:
        return reduce_bottom_up(spec, h, eng);
      case SimMode::iid:
        return use_table ? table.sample(eng) : sample_iid_max(spec, eng);
      case SimMode::subtree_y:
        return use_table ? table.sample(eng) : reduce_bottom_up(spec, L, eng);
      case SimMode::lower_construct: {
        const long y = use_table ? table.sample(eng) : reduce_bottom_up(spec, L, eng);
        return y + (shared > 0 ? shared_draw.nb(shared, eng) : 0L);
      }
    }
    return 0;
  };

  return run_replications(config.replications, config.master_seed, config.threads, one);
}

EstimateResult run_replications(std::uint64_t reps, std::uint64_t master_seed, unsigned threads,
                                const std::function<long(Engine&)>& one) {
  if (reps < 1) throw DomainError("at least one replication is required");
  std::vector<long> samples(reps);
  std::atomic<std::uint64_t> next{0};
  std::mutex err_mu;
  std::uint64_t err_index = UINT64_MAX;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= reps) return;
      try {
        Engine eng = replication_engine(master_seed, i);
        samples[i] = one(eng);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, reps));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);

  EstimateResult r;
  r.estimate = summarize(samples, master_seed);
  r.ecdf = Ecdf::from_samples(samples);
  r.samples = std::move(samples);
  return r;
}

}  // namespace dissem
