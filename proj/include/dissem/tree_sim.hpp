#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "dissem/tree_spec.hpp"

namespace dissem {

// Every replication owns a std::mt19937_64 seeded with
// splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15).
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);
Engine replication_engine(std::uint64_t master, std::uint64_t index);

// Uniform on (0, 1] from the top 53 bits of one draw.
double uniform_open0(Engine& eng);

long sample_geometric(double p, Engine& eng);
long sample_nb(int m, double p, Engine& eng);
long sample_edge_delay(const TreeSpec& spec, Engine& eng);

struct SimLimits {
  std::uint64_t max_leaves = std::uint64_t{1} << 24;
};

struct Completion {
  long max = 0;
  std::vector<long> leaf_times;  // filled only on request
};

// Completion time of the whole tree. Without leaf times the tree is reduced
// bottom-up in place, holding n/K partial maxima at most.
Completion sample_completion(const TreeSpec& spec, Engine& eng, bool keep_leaf_times = false,
                             const SimLimits& limits = {});

// Y: max over n/k_n independent subtrees of height log_K k_n.
long sample_subtree_y(const TreeSpec& spec, std::uint64_t k_n, Engine& eng, const SimLimits& limits = {});

// W + Y with W ~ NB(M log_K(n/k_n), p) on the shared path (W = 0 when k_n = n).
long sample_lower_construct(const TreeSpec& spec, std::uint64_t k_n, Engine& eng,
                            const SimLimits& limits = {});

// Max of n i.i.d. NB(M log_K n, p) by n direct draws.
long sample_iid_max(const TreeSpec& spec, Engine& eng);

// Exact law of a maximum held as log Pr(V <= x) for x = 0..size-1; mass
// beyond the table is below 1e-18 and is folded into the last entry.
class MaxLawTable {
 public:
  MaxLawTable() = default;
  explicit MaxLawTable(std::vector<double> log_cdf) : log_cdf_(std::move(log_cdf)) {}

  // Max of `copies` i.i.d. NB(m, p).
  static MaxLawTable iid_nb_max(std::uint64_t copies, int m, double p);
  // Max of `copies` independent K-ary trees of the given height with NB(M, p) edges.
  static MaxLawTable tree_max(int K, int height, int M, double p, std::uint64_t copies);

  long sample(Engine& eng) const;
  double cdf(long x) const;
  double mean() const;
  // Smallest x with Pr(V <= x) >= q.
  long quantile(double q) const;
  std::size_t size() const { return log_cdf_.size(); }

 private:
  std::vector<double> log_cdf_;
};

enum class SimMode { tree, lower_construct, iid, subtree_y };

enum class SamplerChoice { automatic, direct, inverse_cdf };

struct SimConfig {
  std::uint64_t replications = 10'000;
  std::uint64_t master_seed = 1;
  std::uint64_t k_n = 0;  // used by lower_construct and subtree_y
  SimMode mode = SimMode::tree;
  SamplerChoice sampler = SamplerChoice::automatic;
  unsigned threads = 1;  // 0 selects hardware concurrency
  SimLimits limits;
};

struct SimEstimate {
  double mean = 0;
  std::optional<double> std_err;                   // absent for a single replication
  std::optional<std::pair<double, double>> ci95;   // mean -/+ 1.96 std_err
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
};

struct Ecdf {
  std::vector<long> support;
  std::vector<double> cum_prob;
  std::vector<std::uint64_t> cum_count;

  static Ecdf from_samples(std::vector<long> samples);
  double at(long x) const;        // empirical Pr(V <= x)
  long quantile(double q) const;  // smallest support value with Pr(V <= x) >= q
};

struct EstimateResult {
  SimEstimate estimate;
  Ecdf ecdf;
  std::vector<long> samples;  // indexed by replication
};

EstimateResult estimate(const SimConfig& config, const TreeSpec& spec);

// Runs `one` for replications 0..reps-1, each with its own engine, and
// reduces in replication order. threads = 0 selects hardware concurrency.
EstimateResult run_replications(std::uint64_t reps, std::uint64_t master_seed, unsigned threads,
                                const std::function<long(Engine&)>& one);

// Order-fixed summary of samples indexed by replication.
SimEstimate summarize(const std::vector<long>& samples, std::uint64_t seed);

}  // namespace dissem
