// Command line front end: one CSV per invocation, on stdout or --out.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dissem/cli/commands.hpp"
#include "dissem/errors.hpp"

namespace {

using namespace dissem;
using namespace dissem::cli;

struct Flags {
  std::string p, n_exp, K, M, kn_exp, kn_rule, eps, variant, mode, lattice, figures, out;
  std::uint64_t reps = 0, seed = 0;
  unsigned threads = 1;
  bool scale_reps = false;
  double x = 0;
  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

// Config files split "a,b" into several values; join them back.
CLI::Option* add_list(CLI::App& app, const std::string& name, std::string& target, const std::string& help) {
  return app.add_option(name, target, help)
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::Join)
      ->expected(1, CLI::detail::expected_max_vector_size);
}

void add_flags(CLI::App& app, Flags& f) {
  f.opts["p"] = add_list(app, "--p", f.p, "loss probabilities, comma separated");
  f.opts["n-exp"] = add_list(app, "--n-exp", f.n_exp, "tree heights N (n = K^N), e.g. 4:23 or 5,10,15");
  f.opts["K"] = add_list(app, "--K", f.K, "tree arities");
  f.opts["M"] = add_list(app, "--M", f.M, "message counts");
  f.opts["kn-exp"] = add_list(app, "--kn-exp", f.kn_exp, "log_K k_n values");
  f.opts["kn-rule"] = app.add_option("--kn-rule", f.kn_rule, "k_n rule without --kn-exp")
                          ->check(CLI::IsMember({"heuristic", "figure"}));
  f.opts["reps"] = app.add_option("--reps", f.reps, "replications per row");
  f.opts["scale-reps"] = app.add_flag("--scale-reps", f.scale_reps, "halve reps per unit N beyond 14 (floor 100)");
  f.opts["seed"] = app.add_option("--seed", f.seed, fmt::format("master seed (default ${} or 1)", kSeedEnvVar));
  f.opts["eps"] = add_list(app, "--eps", f.eps, "tail probabilities");
  f.opts["variant"] =
      app.add_option("--variant", f.variant, "lower normalizer")->check(CLI::IsMember({"standard", "hat"}));
  f.opts["mode"] = app.add_option("--mode", f.mode, "simulated object")
                       ->check(CLI::IsMember({"tree", "lower", "iid", "y"}));
  f.opts["x"] = app.add_option("--x", f.x, "level offset for diagnostics");
  f.opts["lattice"] = app.add_option("--lattice", f.lattice, "shared-path tail reading")
                          ->check(CLI::IsMember({"envelope", "discrete"}));
  f.opts["threads"] = app.add_option("--threads", f.threads, "worker threads, 0 = all cores");
  f.opts["figures"] = app.add_option("--figures", f.figures, "figure preset")->check(CLI::IsMember(preset_names()));
  f.opts["out"] = app.add_option("--out", f.out, "output CSV path (default stdout)");
}

void apply_flags(ExperimentConfig& c, const Flags& f) {
  if (f.given("p")) c.p = parse_double_list(f.p);
  if (f.given("n-exp")) c.n_exp = parse_int_list(f.n_exp);
  if (f.given("K")) c.K = parse_int_list(f.K);
  if (f.given("M")) c.M = parse_int_list(f.M);
  if (f.given("kn-exp")) c.kn_exp = parse_int_list(f.kn_exp);
  if (f.given("kn-rule")) c.kn_rule = f.kn_rule == "figure" ? KnRule::figure : KnRule::heuristic;
  if (f.given("reps")) c.reps = f.reps;
  if (f.given("scale-reps")) c.scale_reps = f.scale_reps;
  if (f.given("eps")) c.eps = parse_double_list(f.eps);
  if (f.given("variant")) c.variant = f.variant == "hat" ? LowerVariant::hat : LowerVariant::standard;
  if (f.given("mode")) {
    static const std::map<std::string, SimMode> modes{
        {"tree", SimMode::tree}, {"lower", SimMode::lower_construct}, {"iid", SimMode::iid}, {"y", SimMode::subtree_y}};
    c.mode = modes.at(f.mode);
  }
  if (f.given("x")) c.x = f.x;
  if (f.given("lattice")) c.lattice = f.lattice == "discrete" ? SharedTail::discrete : SharedTail::envelope;
  if (f.given("threads")) c.threads = f.threads;
  if (f.given("seed")) {
    c.seed = f.seed;
    c.seed_source = "option";
  }
}

// Options before the subcommand apply first; the subcommand's own options win.
ExperimentConfig build(const Flags& top, const Flags* sub_flags, std::optional<Command> sub) {
  ExperimentConfig c;
  if (sub) c.command = *sub;
  const Flags& preset_from = sub_flags && sub_flags->given("figures") ? *sub_flags : top;
  if (preset_from.given("figures")) {
    apply_preset(c, preset_from.figures);
    if (sub && *sub != c.command)
      throw DomainError(fmt::format("preset {} belongs to '{}', not '{}'", preset_from.figures,
                                    command_name(c.command), command_name(*sub)));
  } else if (!sub) {
    throw DomainError("a subcommand or --figures is required");
  }
  apply_flags(c, top);
  if (sub_flags) apply_flags(c, *sub_flags);

  if (c.seed_source == "default") {
    if (const char* env = std::getenv(kSeedEnvVar)) {
      try {
        std::size_t used = 0;
        c.seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
      } catch (const std::exception&) {
        throw DomainError(fmt::format("{}='{}' is not an unsigned integer", kSeedEnvVar, env));
      }
      c.seed_source = fmt::format("env:{}={}", kSeedEnvVar, env);
    }
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Completion-time bounds and simulation for reliable dissemination over lossy K-ary trees"};
  app.set_config("--config", "", "key = value file with one [section] per subcommand");
  app.require_subcommand(0, 1);

  Flags top;
  add_flags(app, top);
  std::map<std::string, Flags> sub_flags;
  std::map<CLI::App*, Command> sub_cmds;
  for (Command cmd : {Command::roots, Command::bounds, Command::simulate, Command::tail, Command::y_convergence,
                      Command::iid_sandwich, Command::diagnostics}) {
    const std::string name = command_name(cmd);
    CLI::App* sub = app.add_subcommand(name, fmt::format("write the {} table", name));
    add_flags(*sub, sub_flags[name]);
    sub_cmds[sub] = cmd;
  }

  CLI11_PARSE(app, argc, argv);

  const Flags* flags = nullptr;
  std::optional<Command> cmd;
  for (auto& [sub, c] : sub_cmds)
    if (sub->parsed()) {
      cmd = c;
      flags = &sub_flags.at(command_name(c));
    }
  const std::string out_path = flags && flags->given("out") ? flags->out : top.given("out") ? top.out : "";

  ExperimentConfig config;
  try {
    config = build(top, flags, cmd);
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "dissem: " << e.what() << '\n';
    return 1;
  }

  CommandOutput result;
  try {
    result = run(config);
  } catch (const std::exception& e) {
    std::cerr << "dissem: " << e.what() << '\n';
    return 2;
  }

  if (!out_path.empty()) {
    std::ofstream file(out_path, std::ios::binary);
    file << result.text();
    if (!file) {
      std::cerr << "dissem: cannot write " << out_path << '\n';
      return 1;
    }
  } else {
    std::cout << result.text();
  }
  std::cerr << fmt::format("dissem: {} rows, {} infeasible, {} failed\n", result.rows, result.failed_rows,
                           result.fatal_rows);
  return result.fatal_rows > 0 ? 2 : 0;
}
