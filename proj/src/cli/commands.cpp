#include "dissem/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>

#include <fmt/format.h>

#include "dissem/cli/csv.hpp"
#include "dissem/errors.hpp"

namespace dissem::cli {

namespace {

struct CommandEntry {
  Command cmd;
  const char* name;
};

constexpr CommandEntry kCommands[] = {
    {Command::roots, "roots"},
    {Command::bounds, "bounds"},
    {Command::simulate, "simulate"},
    {Command::tail, "tail"},
    {Command::y_convergence, "y-convergence"},
    {Command::iid_sandwich, "iid-sandwich"},
    {Command::diagnostics, "diagnostics"},
};

std::string mode_name(SimMode m) {
  switch (m) {
    case SimMode::tree:
      return "tree";
    case SimMode::lower_construct:
      return "lower";
    case SimMode::iid:
      return "iid";
    case SimMode::subtree_y:
      return "y";
  }
  return "?";
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& fmt_one) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_one(v[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  return join(v, [](int x) { return std::to_string(x); });
}

std::string join_doubles(const std::vector<double>& v) {
  return join(v, [](double x) { return format_number(x); });
}

std::string num(double v) { return format_number(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(long v) { return std::to_string(v); }

// One CSV under construction. Each row carries key fields, computed value
// fields and a trailing status; a failing row keeps its keys and leaves the
// values empty.
class Sheet {
 public:
  Sheet(std::vector<std::string> keys, std::vector<std::string> values)
      : n_keys_(keys.size()), n_values_(values.size()), table_(concat(keys, values)) {}

  void row(std::vector<std::string> keys, const std::function<std::vector<std::string>()>& compute) {
    std::vector<std::string> values;
    std::string status = "ok";
    try {
      values = compute();
      if (values.size() != n_values_)
        throw std::logic_error(fmt::format("{} values for {} columns", values.size(), n_values_));
    } catch (const InfeasibleError& e) {
      values.assign(n_values_, "");
      status = fmt::format("infeasible: {}", e.what());
      ++failed_;
    } catch (const std::exception& e) {
      values.assign(n_values_, "");
      status = fmt::format("error: {}", e.what());
      ++fatal_;
    }
    if (keys.size() != n_keys_) throw std::logic_error("key width mismatch");
    keys.insert(keys.end(), values.begin(), values.end());
    keys.push_back(std::move(status));
    table_.add_row(std::move(keys));
  }

  void finish(CommandOutput& out) const {
    out.body = table_.str();
    out.rows = table_.rows();
    out.failed_rows = failed_;
    out.fatal_rows = fatal_;
  }

 private:
  static std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    a.push_back("status");
    return a;
  }

  std::size_t n_keys_;
  std::size_t n_values_;
  CsvTable table_;
  std::size_t failed_ = 0;
  std::size_t fatal_ = 0;
};

struct KnChoice {
  int L;
  std::uint64_t k_n;
};

std::vector<KnChoice> kn_choices(const ExperimentConfig& c, int N, int K, double p) {
  std::vector<KnChoice> out;
  if (!c.kn_exp.empty()) {
    for (int e : c.kn_exp)
      if (e < N) out.push_back({e, int_pow(K, e)});
    return out;
  }
  const std::uint64_t n = int_pow(K, N);
  const std::uint64_t k = (c.kn_rule == KnRule::figure && K == 2) ? figure_kn(N, p) : default_kn(n, K);
  out.push_back({exact_log(k, K), k});
  return out;
}

template <class F>
void for_each_spec(const ExperimentConfig& c, F&& f) {
  for (int K : c.K)
    for (int M : c.M)
      for (double p : c.p)
        for (int N : c.n_exp) f(TreeSpec{K, int_pow(K, N), p, M}, N);
}

SimConfig sim_config(const ExperimentConfig& c, int N, SimMode mode, std::uint64_t k_n) {
  SimConfig s;
  s.replications = reps_for(c, N);
  s.master_seed = c.seed;
  s.k_n = k_n;
  s.mode = mode;
  s.threads = c.threads;
  return s;
}

std::vector<std::string> spec_keys(const TreeSpec& s, int N) {
  return {num(N), num(s.n), num(s.p), num(s.K), num(s.M)};
}

std::vector<std::string> with(std::vector<std::string> a, std::initializer_list<std::string> more) {
  a.insert(a.end(), more.begin(), more.end());
  return a;
}

void cmd_roots(const ExperimentConfig& c, CommandOutput& out) {
  Sheet sheet({"p", "K", "M"}, {"target", "alpha", "residual", "alpha_max", "alpha_star_lower_exists"});
  for (int K : c.K)
    for (int M : c.M)
      for (double p : c.p)
        sheet.row({num(p), num(K), num(M)}, [&] {
          const double target = root_target(K, M);
          const RootSolution r = solve_alpha(p, target);
          return std::vector<std::string>{num(target), num(r.alpha), num(r.residual), num(1.0 / (1.0 - p)), "1"};
        });
  sheet.finish(out);
}

void cmd_bounds(const ExperimentConfig& c, CommandOutput& out) {
  Sheet sheet({"N", "n", "p", "K", "M", "k_n"},
              {"alpha", "residual", "delta", "beta", "b_n_upper", "b_n_lower", "b_n_lower_hat", "lower_trivial",
               "lower_claim_a", "lower_main", "upper_main", "scaling_lo_ln", "scaling_hi_ln", "scaling_lo_log2",
               "scaling_hi_log2", "sufficiency_exceeded"});
  for_each_spec(c, [&](const TreeSpec& s, int N) {
    for (const KnChoice& kc : kn_choices(c, N, s.K, s.p))
      sheet.row(with(spec_keys(s, N), {num(kc.k_n)}), [&] {
        const BoundsReport r = expectation_bounds(s, kc.k_n, c.variant);
        return std::vector<std::string>{num(r.alpha_root.alpha), num(r.alpha_root.residual), num(r.delta),
                                        num(r.beta), num(r.b_n_upper), num(r.b_n_lower),
                                        num(r.b_n_lower_hat), num(r.lower_trivial), num(r.lower_claim_a),
                                        num(r.lower_main), num(r.upper_main), num(r.scaling_lo),
                                        num(r.scaling_hi), num(r.scaling_lo_log2), num(r.scaling_hi_log2),
                                        r.sufficiency_exceeded ? "1" : "0"};
      });
  });
  sheet.finish(out);
}

void cmd_simulate(const ExperimentConfig& c, CommandOutput& out) {
  const SimMode mode = c.mode.value_or(SimMode::tree);
  Sheet sheet({"N", "n", "p", "K", "M", "k_n", "mode", "reps", "seed"},
              {"mean", "std_err", "ci95_lo", "ci95_hi", "lower_trivial", "lower_claim_a", "lower_main",
               "upper_main"});
  for_each_spec(c, [&](const TreeSpec& s, int N) {
    for (const KnChoice& kc : kn_choices(c, N, s.K, s.p))
      sheet.row(with(spec_keys(s, N), {num(kc.k_n), mode_name(mode), num(reps_for(c, N)), num(c.seed)}), [&] {
        const BoundsReport r = expectation_bounds(s, kc.k_n, c.variant);
        const SimEstimate e = estimate(sim_config(c, N, mode, kc.k_n), s).estimate;
        std::optional<double> lo, hi;
        if (e.ci95) {
          lo = e.ci95->first;
          hi = e.ci95->second;
        }
        return std::vector<std::string>{num(e.mean),        format_number(e.std_err), format_number(lo),
                                        format_number(hi),  num(r.lower_trivial),     num(r.lower_claim_a),
                                        num(r.lower_main),  num(r.upper_main)};
      });
  });
  sheet.finish(out);
}

// Samples computed once per spec and shared by its per-eps rows; a failure is
// replayed into each of them.
struct SharedRun {
  std::optional<Ecdf> ecdf;
  std::exception_ptr error;

  static SharedRun make(const std::function<Ecdf()>& f) {
    SharedRun r;
    try {
      r.ecdf = f();
    } catch (...) {
      r.error = std::current_exception();
    }
    return r;
  }
  std::optional<long> quantile(double q) const {
    if (error) std::rethrow_exception(error);
    if (!ecdf) return std::nullopt;
    return ecdf->quantile(q);
  }
};

std::string opt_num(std::optional<long> v) { return v ? num(*v) : std::string{}; }
std::string opt_gap(double bound, std::optional<long> v) {
  return v ? num(bound - static_cast<double>(*v)) : std::string{};
}

void cmd_tail(const ExperimentConfig& c, CommandOutput& out) {
  const bool want_tree = !c.mode || *c.mode == SimMode::tree;
  const bool want_iid = !c.mode || *c.mode == SimMode::iid;
  Sheet sheet({"N", "n", "p", "K", "M", "eps", "reps", "seed"},
              {"quantile_tree", "quantile_iid", "tail_bound", "gap_tree", "gap_iid"});
  for_each_spec(c, [&](const TreeSpec& s, int N) {
    auto run_mode = [&](bool wanted, SimMode m) {
      if (!wanted) return SharedRun{};
      return SharedRun::make([&] { return estimate(sim_config(c, N, m, 0), s).ecdf; });
    };
    const SharedRun tree = run_mode(want_tree, SimMode::tree);
    const SharedRun iid = run_mode(want_iid, SimMode::iid);
    for (double eps : c.eps)
      sheet.row(with(spec_keys(s, N), {num(eps), num(reps_for(c, N)), num(c.seed)}), [&] {
        const double bound = tail_time_bound(s, eps);
        const auto qt = tree.quantile(1.0 - eps);
        const auto qi = iid.quantile(1.0 - eps);
        return std::vector<std::string>{opt_num(qt), opt_num(qi), num(bound), opt_gap(bound, qt),
                                        opt_gap(bound, qi)};
      });
  });
  sheet.finish(out);
}

void cmd_y_convergence(const ExperimentConfig& c, CommandOutput& out) {
  Sheet sheet({"N", "n", "p", "K", "M", "k_n", "reps", "seed"},
              {"mean_y", "std_err_y", "exact_y", "mean_y_iid", "std_err_y_iid", "exact_y_iid", "lo_standard",
               "hi_standard", "lo_hat", "hi_hat"});
  for_each_spec(c, [&](const TreeSpec& s, int N) {
    for (const KnChoice& kc : kn_choices(c, N, s.K, s.p))
      sheet.row(with(spec_keys(s, N), {num(kc.k_n), num(reps_for(c, N)), num(c.seed)}), [&] {
        const SimEstimate y = estimate(sim_config(c, N, SimMode::subtree_y, kc.k_n), s).estimate;
        const MaxLawTable iid = MaxLawTable::iid_nb_max(s.n, s.M * kc.L, s.p);
        const SimEstimate yh =
            run_replications(reps_for(c, N), c.seed, c.threads, [&](Engine& e) { return iid.sample(e); }).estimate;
        const MaxLawTable exact_y = MaxLawTable::tree_max(s.K, kc.L, s.M, s.p, s.n / kc.k_n);
        const double shift = kEulerGamma / std::log(1.0 / s.p);
        const double b_std = lower_bn(s.n, kc.k_n, s.p, s.M, s.K, LowerVariant::standard).value;
        double b_hat = NAN;
        try {
          b_hat = lower_bn(s.n, kc.k_n, s.p, s.M, s.K, LowerVariant::hat).value;
        } catch (const DomainError&) {
        }
        return std::vector<std::string>{num(y.mean),       format_number(y.std_err), num(exact_y.mean()),
                                        num(yh.mean),      format_number(yh.std_err), num(iid.mean()),
                                        num(b_std + shift), num(b_std + shift + 1.0), num(b_hat + shift),
                                        num(b_hat + shift + 1.0)};
      });
  });
  sheet.finish(out);
}

void cmd_iid_sandwich(const ExperimentConfig& c, CommandOutput& out) {
  Sheet sheet({"N", "n", "p", "K", "M", "reps", "seed"},
              {"mean", "std_err", "exact_mean", "lo", "hi", "within_3se"});
  for_each_spec(c, [&](const TreeSpec& s, int N) {
    sheet.row(with(spec_keys(s, N), {num(reps_for(c, N)), num(c.seed)}), [&] {
      const SimEstimate e = estimate(sim_config(c, N, SimMode::iid, 0), s).estimate;
      const double exact = MaxLawTable::iid_nb_max(s.n, s.M * s.height(), s.p).mean();
      const RootSolution root = solve_alpha(s.p, root_target(s.K, s.M));
      const DeltaBeta db = delta_beta(s.p, root.alpha);
      const double lo = upper_bn(s.n, s.p, s.M, s.K) + kEulerGamma / std::log(1.0 / db.delta);
      const double se = e.std_err.value_or(0.0);
      const bool inside = e.mean >= lo - 3 * se && e.mean <= lo + 1.0 + 3 * se;
      return std::vector<std::string>{num(e.mean),   format_number(e.std_err), num(exact),
                                      num(lo),       num(lo + 1.0),            inside ? "1" : "0"};
    });
  });
  sheet.finish(out);
}

void cmd_diagnostics(const ExperimentConfig& c, CommandOutput& out) {
  constexpr double kTol = 1e-12;
  Sheet sheet({"kind", "N", "n", "p", "K", "k_n", "i", "x"}, {"exact", "bound", "remainder_bound", "terms"});
  for (int K : c.K)
    for (double p : c.p)
      for (int N : c.n_exp) {
        const std::uint64_t n = int_pow(K, N);
        auto keys = [&](const char* kind, std::uint64_t k_n, int i) {
          return std::vector<std::string>{kind, num(N), num(n), num(p), num(K), num(k_n), num(i), num(c.x)};
        };
        for (const KnChoice& kc : kn_choices(c, N, K, p)) {
          for (int i = 1; i <= kc.L - 1; ++i)
            sheet.row(keys("joint", kc.k_n, i), [&] {
              JointTailQuery q;
              q.n = n;
              q.k_n = kc.k_n;
              q.i = i;
              q.x = c.x;
              q.p = p;
              q.trunc_tol = kTol;
              q.K = K;
              q.lattice = c.lattice;
              const JointTail t = joint_tail_exact(q);
              const JointBound jb = joint_tail_bound(q);
              return std::vector<std::string>{num(t.value), num(jb.value), num(t.remainder_bound), num(t.terms)};
            });
          sheet.row(keys("alpha_n", kc.k_n, 0), [&] {
            const double ex = dprime_alpha_n(n, kc.k_n, p, c.x, AlphaMethod::exact, K, kTol, 0.75, c.lattice);
            const double bd = dprime_alpha_n(n, kc.k_n, p, c.x, AlphaMethod::bound, K, kTol, 0.75, c.lattice);
            return std::vector<std::string>{num(ex), num(bd), "", ""};
          });
        }
        // Fixed height 2 with K_n = sqrt(n) children per node.
        if (K == 2 && N % 2 == 0)
          sheet.row(keys("growing_k", int_pow(2, N / 2), 2), [&] {
            return std::vector<std::string>{num(growing_k_alpha_n(n, 2, p, c.x, kTol, c.lattice)), "", "", ""};
          });
      }
  sheet.finish(out);
}

}  // namespace

std::string command_name(Command c) {
  for (const auto& e : kCommands)
    if (e.cmd == c) return e.name;
  return "?";
}

Command parse_command(const std::string& name) {
  for (const auto& e : kCommands)
    if (name == e.name) return e.cmd;
  throw DomainError(fmt::format("unknown command '{}'", name));
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    if (item.empty()) throw DomainError(fmt::format("empty item in list '{}'", text));
    std::size_t used = 0;
    try {
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos) {
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw DomainError("");
      } else {
        const std::string a = item.substr(0, colon), b = item.substr(colon + 1);
        std::size_t ua = 0, ub = 0;
        const int lo = std::stoi(a, &ua), hi = std::stoi(b, &ub);
        if (ua != a.size() || ub != b.size() || hi < lo) throw DomainError("");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::exception&) {
      throw DomainError(fmt::format("bad integer list item '{}'", item));
    }
    pos = comma + 1;
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw DomainError(fmt::format("bad number '{}' in '{}'", item, text));
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

std::uint64_t reps_for(const ExperimentConfig& c, int N) {
  if (!c.scale_reps || N <= 14) return c.reps;
  const int shift = std::min(N - 14, 63);
  return std::min<std::uint64_t>(c.reps, std::max<std::uint64_t>(100, c.reps >> shift));
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw DomainError(msg); };
  if (p.empty()) fail("p: empty list");
  for (double v : p)
    if (!(v > 0.0 && v < 1.0)) fail(fmt::format("p: {} outside (0, 1)", v));
  if (command != Command::roots && n_exp.empty()) fail("n-exp: empty list");
  if (K.empty()) fail("K: empty list");
  if (M.empty()) fail("M: empty list");
  for (int k : K)
    if (k < 2) fail(fmt::format("K: {} below 2", k));
  for (int m : M)
    if (m < 1) fail(fmt::format("M: {} below 1", m));
  for (int e : kn_exp)
    if (e < 1) fail(fmt::format("kn-exp: {} below 1", e));
  if (reps < 1) fail("reps: at least one replication is required");
  for (double e : eps)
    if (!(e > 0.0 && e < 1.0)) fail(fmt::format("eps: {} outside (0, 1)", e));
  if (command == Command::tail && eps.empty()) fail("eps: empty list");
  if (command == Command::tail && mode && *mode != SimMode::tree && *mode != SimMode::iid)
    fail("mode: tail supports tree or iid");
  if (command == Command::roots) return;

  const std::uint64_t leaf_cap = SimLimits{}.max_leaves;
  const bool simulates_tree = (command == Command::simulate && mode.value_or(SimMode::tree) == SimMode::tree) ||
                              (command == Command::tail && (!mode || *mode == SimMode::tree));
  for (int k : K)
    for (int N : n_exp) {
      if (N < 1) fail(fmt::format("n-exp: {} below 1", N));
      std::uint64_t n = 0;
      try {
        n = int_pow(k, N);
      } catch (const std::exception&) {
        fail(fmt::format("n-exp: {}^{} overflows", k, N));
      }
      if (simulates_tree && n > leaf_cap)
        fail(fmt::format("n-exp: {}^{} leaves exceed the simulation cap of {}", k, N, leaf_cap));
    }
}

std::string ExperimentConfig::describe() const {
  std::string kn = kn_exp.empty() ? (kn_rule == KnRule::figure ? "figure" : "heuristic") : join_ints(kn_exp);
  return fmt::format(
      "command={} preset={} p={} n_exp={} K={} M={} kn={} reps={} scale_reps={} seed={} seed_source={} eps={} "
      "variant={} mode={} x={} lattice={}",
      command_name(command), preset.empty() ? "none" : preset, join_doubles(p), join_ints(n_exp), join_ints(K),
      join_ints(M), kn, reps, scale_reps ? 1 : 0, seed, seed_source, join_doubles(eps),
      variant == LowerVariant::hat ? "hat" : "standard", mode ? mode_name(*mode) : "default", format_number(x),
      lattice == SharedTail::discrete ? "discrete" : "envelope");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig-expected-p01", "fig-tail",         "fig-y-convergence",
                                              "fig-roots",        "fig-alpha-bounds", "fig-iid-sandwich"};
  return names;
}

void apply_preset(ExperimentConfig& c, const std::string& preset) {
  auto range = [](int lo, int hi) {
    std::vector<int> v;
    for (int i = lo; i <= hi; ++i) v.push_back(i);
    return v;
  };
  auto hundredths = [](int lo, int hi) {
    std::vector<double> v;
    for (int i = lo; i <= hi; ++i) v.push_back(i / 100.0);
    return v;
  };
  c.K = {2};
  c.M = {1};
  c.kn_exp.clear();
  c.kn_rule = KnRule::heuristic;
  c.scale_reps = false;
  c.mode.reset();
  if (preset == "fig-expected-p01") {
    c.command = Command::simulate;
    c.p = {0.1};
    c.n_exp = range(4, 23);
    c.kn_rule = KnRule::figure;
    c.reps = 10'000;
    c.scale_reps = true;
  } else if (preset == "fig-tail") {
    c.command = Command::tail;
    c.p = {0.1, 0.2, 0.5};
    c.n_exp = {5, 10, 15};
    c.eps.clear();
    for (int j = 0; j <= 12; ++j) c.eps.push_back(std::pow(10.0, -1.0 - j / 4.0));
    c.reps = 100'000;
    c.scale_reps = true;
  } else if (preset == "fig-y-convergence") {
    c.command = Command::y_convergence;
    c.p = {0.05, 0.1, 0.5};
    c.kn_exp = {4, 7, 10};
    c.n_exp = range(5, 23);
    c.reps = 500;
  } else if (preset == "fig-roots") {
    c.command = Command::roots;
    c.p = hundredths(1, 95);
    c.M = {1, 4};
  } else if (preset == "fig-alpha-bounds") {
    c.command = Command::bounds;
    c.p = hundredths(1, 50);
    c.n_exp = {20};
  } else if (preset == "fig-iid-sandwich") {
    c.command = Command::iid_sandwich;
    c.p = {0.1, 0.5, 0.7};
    c.n_exp = range(4, 23);
    c.reps = 5'000;
  } else {
    throw DomainError(fmt::format("unknown preset '{}'", preset));
  }
  c.preset = preset;
}

CommandOutput run(const ExperimentConfig& config) {
  config.validate();
  CommandOutput out;
  out.header = fmt::format("# dissem {} {}\n", kToolVersion, config.describe());
  switch (config.command) {
    case Command::roots:
      cmd_roots(config, out);
      break;
    case Command::bounds:
      cmd_bounds(config, out);
      break;
    case Command::simulate:
      cmd_simulate(config, out);
      break;
    case Command::tail:
      cmd_tail(config, out);
      break;
    case Command::y_convergence:
      cmd_y_convergence(config, out);
      break;
    case Command::iid_sandwich:
      cmd_iid_sandwich(config, out);
      break;
    case Command::diagnostics:
      cmd_diagnostics(config, out);
      break;
  }
  return out;
}

}  // namespace dissem::cli
