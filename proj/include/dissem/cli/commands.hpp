#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dissem/evt_bounds.hpp"
#include "dissem/evt_diagnostics.hpp"
#include "dissem/tree_sim.hpp"

namespace dissem::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSeedEnvVar = "DISSEM_SEED";

enum class Command { roots, bounds, simulate, tail, y_convergence, iid_sandwich, diagnostics };

std::string command_name(Command c);
Command parse_command(const std::string& name);

// How k_n is chosen when no explicit --kn-exp list is given.
enum class KnRule { heuristic, figure };

struct ExperimentConfig {
  Command command = Command::bounds;
  std::vector<double> p{0.1};
  std::vector<int> n_exp{10};  // n = K^N
  std::vector<int> K{2};
  std::vector<int> M{1};
  std::vector<int> kn_exp;  // explicit log_K k_n values; rows with kn_exp >= N are skipped
  KnRule kn_rule = KnRule::heuristic;
  std::uint64_t reps = 10'000;
  bool scale_reps = false;  // reps * 2^(14 - N) beyond N = 14, floor 100
  std::uint64_t seed = 1;
  std::string seed_source = "default";
  std::vector<double> eps{0.1, 0.01, 0.001};
  LowerVariant variant = LowerVariant::standard;
  std::optional<SimMode> mode;  // simulate: tree; tail: tree and iid
  double x = 0;
  SharedTail lattice = SharedTail::envelope;
  unsigned threads = 1;  // 0 selects hardware concurrency; never affects output
  std::string preset;

  // Throws DomainError naming the first offending field.
  void validate() const;
  // Single-line rendering of every output-relevant field.
  std::string describe() const;
};

// Overwrites command and grids with those pinned for a figure preset.
void apply_preset(ExperimentConfig& config, const std::string& preset);
const std::vector<std::string>& preset_names();

// "4:23,30" style integer lists.
std::vector<int> parse_int_list(const std::string& text);
// Comma separated reals.
std::vector<double> parse_double_list(const std::string& text);

std::uint64_t reps_for(const ExperimentConfig& config, int N);

struct CommandOutput {
  std::string header;  // "# ..." line, LF terminated
  std::string body;    // column line and rows
  std::size_t rows = 0;
  std::size_t failed_rows = 0;  // infeasible rows, recorded and skipped
  std::size_t fatal_rows = 0;   // rows that raised any other error

  std::string text() const { return header + body; }
};

CommandOutput run(const ExperimentConfig& config);

}  // namespace dissem::cli
