// bhc: bipartite hardcore model toolkit.
// Subcommands wrap the library one-to-one; every output embeds the tool
// version, the resolved configuration and the seed, and identical command
// lines with identical seeds produce byte-identical files.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bhc/diagnostics.hpp"
#include "bhc/exact_oracle.hpp"
#include "bhc/graph.hpp"
#include "bhc/ising_reduction.hpp"
#include "bhc/json_writer.hpp"
#include "bhc/recursion.hpp"
#include "bhc/rng.hpp"
#include "bhc/samplers.hpp"
#include "bhc/uniqueness.hpp"
#include "bhc/version.hpp"

namespace {

using namespace bhc;

struct OutputTarget {
  std::string path;  // empty = stdout

  void write(const std::string& content) const {
    if (path.empty()) {
      std::fwrite(content.data(), 1, content.size(), stdout);
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
  }
};

OracleOptions oracle_options() {
  OracleOptions opt;
  if (const char* cap = std::getenv("BHC_ENUM_CAP")) {
    int v = std::atoi(cap);
    if (v > 0) opt.enum_cap = v;
  }
  return opt;
}

std::string fmt(double v) { return JsonWriter::format_double(v); }

void emit_config(JsonWriter& w, const std::vector<std::pair<std::string, std::string>>& kv) {
  w.key("config").begin_object();
  for (const auto& [k, v] : kv) w.kv(k, v);
  w.end_object();
}

std::vector<uint64_t> parse_times(const std::string& spec) {
  std::vector<uint64_t> times;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    times.push_back(std::stoull(tok));
  }
  if (times.empty()) throw CLI::ValidationError("--times", "no time points");
  return times;
}

std::string spin_string(uint64_t mask, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += (mask >> i & 1) ? '+' : '-';
  return s;
}

int run_threshold(double d, std::optional<double> w, std::optional<double> alpha,
                  std::optional<double> delta, const OutputTarget& out) {
  JsonWriter j;
  j.begin_object();
  j.kv("tool", "bhc threshold");
  j.kv("version", kVersion);
  if (w.has_value() == (alpha.has_value() && delta.has_value()))
    throw CLI::ValidationError(
        "threshold", "pass either --w (closed form) or --alpha and --delta");
  if (w) {
    auto [lc, ac] = closed_form_pair(d, *w);
    emit_config(j, {{"mode", "closed_form"}, {"d", fmt(d)}, {"w", fmt(*w)}});
    j.kv("lambda_c", lc);
    j.kv("alpha_c", ac);
    j.kv("lambda_low", low_temp_threshold(d, *w));
  } else {
    ThresholdReport rep = solve_critical_system(d, *alpha, *delta);
    emit_config(j, {{"mode", "implicit"},
                    {"d", fmt(d)},
                    {"alpha", fmt(*alpha)},
                    {"delta", fmt(*delta)}});
    j.kv("branch", rep.always_unique ? "always-unique" : "critical");
    j.kv("branch_bound", rep.branch_bound);
    j.kv("lambda_2c", rep.lambda_2c);
    if (!rep.always_unique) {
      j.kv("w_delta", rep.w_delta);
      j.kv("x_c", rep.x_c);
      j.kv("w_c", rep.w_c);
      j.kv("t_residual", rep.t_residual);
      j.kv("m_residual", rep.m_residual);
    }
  }
  j.end_object();
  out.write(j.str() + "\n");
  return 0;
}

int run_check(double lambda, double d, std::optional<double> alpha,
              std::optional<double> w, double delta, const OutputTarget& out) {
  const double a = alpha.value_or(lambda);
  JsonWriter j;
  j.begin_object();
  j.kv("tool", "bhc check");
  j.kv("version", kVersion);
  emit_config(j, {{"lambda", fmt(lambda)},
                  {"d", fmt(d)},
                  {"alpha", fmt(a)},
                  {"w", w ? fmt(*w) : std::string("all")},
                  {"delta", fmt(delta)}});
  if (w) {
    TreeParams p{d, *w, lambda, a, delta};
    FixpointReport rep = find_fixpoints(p);
    j.kv("delta_unique", rep.delta_unique);
    j.kv("max_fprime", rep.max_fprime);
    j.key("fixpoints").begin_array();
    for (const auto& fp : rep.fixpoints) {
      j.begin_object();
      j.kv("x", fp.x);
      j.kv("fprime", fp.fprime);
      j.end_object();
    }
    j.end_array();
  } else {
    ThresholdReport rep = solve_critical_system(d, a, delta);
    bool verdict = is_delta_unique(lambda, d, a, delta);
    j.kv("delta_unique", verdict);
    j.kv("lambda_2c", rep.lambda_2c);
    j.kv("branch", rep.always_unique ? "always-unique" : "critical");
  }
  j.end_object();
  out.write(j.str() + "\n");
  return 0;
}

int run_phase(double d, double w_min, double w_max, int steps,
              const OutputTarget& out) {
  if (steps < 1) throw CLI::ValidationError("--steps", "must be >= 1");
  std::vector<double> grid;
  for (int i = 0; i < steps; ++i)
    grid.push_back(steps == 1 ? w_min
                              : w_min + (w_max - w_min) * i / (steps - 1));
  auto rows = phase_table(d, grid);
  std::string csv;
  csv += "# bhc phase v" + std::string(kVersion) + " d=" + fmt(d) +
         " w_min=" + fmt(w_min) + " w_max=" + fmt(w_max) +
         " steps=" + std::to_string(steps) + "\n";
  csv += phase_table_csv(rows);
  out.write(csv);
  return 0;
}

int run_exact(const std::string& graph_path, double lambda, double alpha,
              const std::string& what, const std::string& side_name,
              const OutputTarget& out) {
  BipartiteGraph g = load_graph_file(graph_path);
  Fugacities f{lambda, alpha};
  OracleOptions opt = oracle_options();
  JsonWriter j;
  j.begin_object();
  j.kv("tool", "bhc exact");
  j.kv("version", kVersion);
  emit_config(j, {{"graph", graph_path},
                  {"lambda", fmt(lambda)},
                  {"alpha", fmt(alpha)},
                  {"what", what},
                  {"side", side_name}});
  if (what == "Z") {
    j.kv("log_Z", log_partition_function(g, f, opt));
    j.kv("Z", partition_function(g, f, opt));
  } else if (what == "marginals") {
    j.key("marginals").begin_array();
    for (int u = 0; u < g.n_left(); ++u)
      j.value(conditional_marginal(g, f, {}, u, opt));
    j.end_array();
  } else if (what == "dist") {
    Side side = side_name == "L" ? Side::L
                                 : side_name == "R" ? Side::R : Side::Full;
    ExactDistribution dist = dist_side(g, f, side, opt);
    j.key("entries").begin_array();
    for (const auto& [mask, p] : dist.entries) {
      j.begin_object();
      j.kv("mask", mask);
      if (side == Side::Full) {
        j.kv("left", spin_string(mask, g.n_left()));
        j.kv("right", spin_string(mask >> g.n_left(), g.n_right()));
      } else {
        j.kv("spins", spin_string(mask, side == Side::L ? g.n_left()
                                                        : g.n_right()));
      }
      j.kv("p", p);
      j.end_object();
    }
    j.end_array();
  } else {
    throw CLI::ValidationError("--what", "must be Z, marginals, or dist");
  }
  j.end_object();
  out.write(j.str() + "\n");
  return 0;
}

ChainKind parse_chain(const std::string& name) {
  if (name == "nu") return ChainKind::Nu;
  if (name == "mu") return ChainKind::Mu;
  if (name == "block") return ChainKind::Block;
  if (name == "field") return ChainKind::Field;
  throw CLI::ValidationError("--sampler", "must be nu, mu, block, or field");
}

struct SamplerArgs {
  std::string graph_path;
  double lambda = 1.0;
  double alpha = 1.0;
  std::string sampler = "nu";
  uint64_t seed = 0;
  long steps = -1;  // per sample, single-site chains
  double theta = 0.5;
  int T = -1;
  long m = -1;
  std::string inner = "glauber";
  double eps = 0.01;  // only feeds the T/m defaults
};

FieldDynamicsParams field_params(const SamplerArgs& a, const BipartiteGraph& g) {
  FieldDynamicsParams p;
  p.theta = a.theta;
  const int nl = g.n_left();
  p.T = a.T > 0 ? a.T
                : static_cast<int>(std::ceil(10.0 * std::log(1.0 / a.eps)));
  p.m = a.m > 0 ? a.m
                : static_cast<long>(
                      std::ceil(21.0 * nl * std::log(std::max(2, nl))));
  p.inner_mode = a.inner == "exact" ? FieldDynamicsParams::InnerMode::Exact
                                    : FieldDynamicsParams::InnerMode::Glauber;
  return p;
}

long default_steps(ChainKind kind, const BipartiteGraph& g) {
  const long n = kind == ChainKind::Mu ? g.n_left() + g.n_right() : g.n_left();
  return static_cast<long>(std::ceil(21.0 * n * std::log(std::max<long>(2, n))));
}

int run_sample(const SamplerArgs& a, uint64_t n_samples, int jobs,
               const OutputTarget& out) {
  BipartiteGraph g = load_graph_file(a.graph_path);
  Fugacities f{a.lambda, a.alpha};
  ChainKind kind = parse_chain(a.sampler);
  const bool with_right = kind != ChainKind::Nu;
  FieldDynamicsParams fp = field_params(a, g);
  const long steps = a.steps > 0 ? a.steps : default_steps(kind, g);

  std::string header;
  header += "# bhc sample v" + std::string(kVersion) + "\n";
  header += "# graph=" + a.graph_path + " lambda=" + fmt(a.lambda) +
            " alpha=" + fmt(a.alpha) + " sampler=" + a.sampler + "\n";
  if (kind == ChainKind::Field)
    header += "# theta=" + fmt(fp.theta) + " T=" + std::to_string(fp.T) +
              " m=" + std::to_string(fp.m) + " inner=" + a.inner + "\n";
  else
    header += "# steps=" + std::to_string(steps) + "\n";
  header += "# seed=" + std::to_string(a.seed) +
            " n_samples=" + std::to_string(n_samples) + "\n";
  header += std::string("# columns: L[0..") + std::to_string(g.n_left() - 1) +
            "]" +
            (with_right ? " R[0.." + std::to_string(g.n_right() - 1) + "]"
                        : "") +
            "\n";

  // independent replica per sample, seeded by index
  std::vector<std::string> lines(n_samples);
  auto emit_line = [&](const ChainState& s) {
    std::string line;
    for (int u = 0; u < g.n_left(); ++u) {
      if (u) line += ' ';
      line += s.spins_left[u] > 0 ? "+1" : "-1";
    }
    if (s.has_right())
      for (int v = 0; v < g.n_right(); ++v) {
        line += ' ';
        line += s.spins_right[v] > 0 ? "+1" : "-1";
      }
    return line;
  };
  auto run_range = [&](uint64_t lo, uint64_t hi) {
    GlauberNu nu(g, f);
    GlauberMu mu(g, f);
    BlockDynamics block(g, f);
    FieldDynamics field(g, f, fp, oracle_options());
    Rng root(a.seed);
    for (uint64_t i = lo; i < hi; ++i) {
      Rng child = root.split(i);
      if (kind == ChainKind::Field) {
        lines[i] = emit_line(field.run(child.seed()));
        continue;
      }
      ChainState s = make_all_minus_state(g, with_right, child.seed());
      for (long t = 0; t < steps; ++t) {
        if (kind == ChainKind::Nu)
          nu.step(s);
        else if (kind == ChainKind::Mu)
          mu.step(s);
        else
          block.step(s);
      }
      lines[i] = emit_line(s);
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1 || n_samples < 2) {
    run_range(0, n_samples);
  } else {
    std::vector<std::thread> threads;
    for (int jj = 0; jj < jobs; ++jj) {
      uint64_t lo = n_samples * jj / jobs;
      uint64_t hi = n_samples * (jj + 1) / jobs;
      threads.emplace_back([&, lo, hi]() { run_range(lo, hi); });
    }
    for (auto& t : threads) t.join();
  }

  std::string dump = header;
  for (const auto& line : lines) {
    dump += line;
    dump += '\n';
  }
  out.write(dump);
  return 0;
}

int run_tv_test(const SamplerArgs& a, uint64_t replicas,
                const std::string& times_spec, int jobs,
                const OutputTarget& out) {
  BipartiteGraph g = load_graph_file(a.graph_path);
  Fugacities f{a.lambda, a.alpha};
  ChainKind kind = parse_chain(a.sampler);
  FieldDynamicsParams fp = field_params(a, g);
  auto times = parse_times(times_spec);
  MixingCurve curve = mixing_curve(kind, g, f, times, replicas, a.seed,
                                   kind == ChainKind::Field ? &fp : nullptr,
                                   jobs, oracle_options());
  std::string csv;
  csv += "# bhc tv-test v" + std::string(kVersion) + " graph=" + a.graph_path +
         " lambda=" + fmt(a.lambda) + " alpha=" + fmt(a.alpha) +
         " sampler=" + a.sampler + " seed=" + std::to_string(a.seed) +
         " start=all-minus\n";
  csv += mixing_curve_csv(curve);
  out.write(csv);
  return 0;
}

int run_si_check(const std::string& graph_path, double lambda, double alpha,
                 double delta, int max_pinned, const OutputTarget& out) {
  BipartiteGraph g = load_graph_file(graph_path);
  Fugacities f{lambda, alpha};
  SIReport rep = si_check(g, f, delta, PinningPolicy::AllUpToK, max_pinned,
                          oracle_options());
  JsonWriter j;
  j.begin_object();
  j.kv("tool", "bhc si-check");
  j.kv("version", kVersion);
  emit_config(j, {{"graph", graph_path},
                  {"lambda", fmt(lambda)},
                  {"alpha", fmt(alpha)},
                  {"delta", fmt(delta)},
                  {"max_pinned", std::to_string(max_pinned)}});
  j.kv("applicable", rep.applicable);
  j.kv("Delta", rep.Delta);
  j.kv("eta", rep.eta);
  if (rep.applicable) {
    j.kv("global_max", rep.global_max);
    j.kv("pass", rep.pass);
    j.key("worst").begin_object();
    j.key("pinned").begin_array();
    for (int u : rep.worst.pinned_vertices) j.value(u);
    j.end_array();
    j.key("values").begin_array();
    for (int s : rep.worst.pinned_values) j.value(s);
    j.end_array();
    j.kv("max_eig", rep.worst.max_eig);
    j.end_object();
    j.key("pinnings").begin_array();
    for (const auto& r : rep.records) {
      j.begin_object();
      j.key("pinned").begin_array();
      for (int u : r.pinned_vertices) j.value(u);
      j.end_array();
      j.key("values").begin_array();
      for (int s : r.pinned_values) j.value(s);
      j.end_array();
      j.kv("max_eig", r.max_eig);
      j.end_object();
    }
    j.end_array();
  } else {
    j.kv("note", "bound inapplicable: parameters are not delta-unique");
  }
  j.end_object();
  out.write(j.str() + "\n");
  return 0;
}

int run_ising_reduce(const std::string& graph_path, double lambda,
                     std::optional<double> lambda_right, bool verify,
                     const OutputTarget& out) {
  BipartiteGraph g = load_graph_file(graph_path);
  IsingInstance inst = lambda_right ? reduce_general(g, lambda, *lambda_right)
                                    : reduce(g, lambda);
  JsonWriter j;
  j.begin_object();
  j.kv("tool", "bhc ising-reduce");
  j.kv("version", kVersion);
  emit_config(j, {{"graph", graph_path},
                  {"lambda", fmt(lambda)},
                  {"lambda_right", fmt(lambda_right.value_or(lambda))},
                  {"verify", verify ? "true" : "false"}});
  j.key("vertices").begin_array();
  for (int v : inst.vertices) j.value(v);
  j.end_array();
  j.key("lambda_star").begin_array();
  for (double l : inst.lambda_star) j.value(l);
  j.end_array();
  j.key("edges").begin_array();
  for (const auto& e : inst.edges) {
    j.begin_object();
    j.kv("u", e.u);
    j.kv("v", e.v);
    j.kv("shared", e.shared);
    j.kv("beta_star", e.beta_star);
    j.end_object();
  }
  j.end_array();
  j.key("removal_log").begin_array();
  for (const auto& r : inst.removal_log) {
    j.begin_object();
    j.kv("rule", r.rule == RemovalRecord::Rule::Isolated
                     ? "isolated"
                     : "degree1-folded");
    j.kv("vertex", r.vertex);
    if (r.rule == RemovalRecord::Rule::Degree1Folded) {
      j.kv("folded_into", r.folded_into);
      j.kv("beta_star", r.beta_star);
    }
    j.kv("lambda_star", r.lambda_star);
    j.end_object();
  }
  j.end_array();
  j.kv("fields_consistent", inst.fields_consistent());
  if (verify) {
    Fugacities f{lambda, lambda_right.value_or(lambda)};
    j.kv("max_deviation", verify_reduction(g, f, inst, oracle_options()));
  }
  j.end_object();
  out.write(j.str() + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bipartite hardcore model toolkit"};
  app.require_subcommand(1);

  // threshold
  auto* th = app.add_subcommand("threshold", "critical thresholds");
  double th_d = 2.0;
  std::optional<double> th_w, th_alpha, th_delta;
  std::string th_out;
  th->add_option("--d", th_d, "left branching number")->required();
  th->add_option("--w", th_w, "right branching number (closed form mode)");
  th->add_option("--alpha", th_alpha, "right fugacity (implicit mode)");
  th->add_option("--delta", th_delta, "uniqueness gap (implicit mode)");
  th->add_option("--out", th_out, "output file (default stdout)");

  // check
  auto* ck = app.add_subcommand("check", "delta-uniqueness verdict");
  double ck_lambda = 1.0, ck_d = 2.0, ck_delta = 0.0;
  std::optional<double> ck_alpha, ck_w;
  std::string ck_out;
  ck->add_option("--lambda", ck_lambda)->required();
  ck->add_option("--d", ck_d)->required();
  ck->add_option("--alpha", ck_alpha, "defaults to lambda");
  ck->add_option("--w", ck_w, "check a single w instead of all w");
  ck->add_option("--delta", ck_delta)->required();
  ck->add_option("--out", ck_out);

  // phase
  auto* ph = app.add_subcommand("phase", "phase diagram table");
  double ph_d = 2.0, ph_wmin = 1.0, ph_wmax = 8.0;
  int ph_steps = 64;
  std::string ph_out;
  ph->add_option("--d", ph_d)->required();
  ph->add_option("--w-min", ph_wmin);
  ph->add_option("--w-max", ph_wmax);
  ph->add_option("--steps", ph_steps);
  ph->add_option("--out", ph_out);

  // exact
  auto* ex = app.add_subcommand("exact", "brute-force oracle");
  std::string ex_graph, ex_what = "Z", ex_side = "L", ex_out;
  double ex_lambda = 1.0, ex_alpha = 1.0;
  ex->add_option("--graph", ex_graph)->required();
  ex->add_option("--lambda", ex_lambda)->required();
  ex->add_option("--alpha", ex_alpha)->required();
  ex->add_option("--what", ex_what, "Z | marginals | dist");
  ex->add_option("--side", ex_side, "L | R | full (for dist)");
  ex->add_option("--out", ex_out);

  // sample
  auto* sa = app.add_subcommand("sample", "draw samples");
  SamplerArgs sa_args;
  uint64_t sa_n = 1;
  int sa_jobs = 1;
  std::string sa_out;
  sa->add_option("--graph", sa_args.graph_path)->required();
  sa->add_option("--lambda", sa_args.lambda)->required();
  sa->add_option("--alpha", sa_args.alpha)->required();
  sa->add_option("--sampler", sa_args.sampler, "nu | mu | block | field")
      ->required();
  sa->add_option("--n-samples", sa_n)->required();
  sa->add_option("--seed", sa_args.seed)->required();
  sa->add_option("--steps", sa_args.steps, "single-site steps per sample");
  sa->add_option("--theta", sa_args.theta, "field dynamics retention");
  sa->add_option("--T", sa_args.T, "field dynamics outer iterations");
  sa->add_option("--m", sa_args.m, "field dynamics inner steps");
  sa->add_option("--inner", sa_args.inner, "glauber | exact");
  sa->add_option("--eps", sa_args.eps, "accuracy target for defaults");
  sa->add_option("--jobs", sa_jobs, "parallel replicas");
  sa->add_option("--out", sa_out);

  // tv-test
  auto* tv = app.add_subcommand("tv-test", "empirical mixing curve");
  SamplerArgs tv_args;
  uint64_t tv_replicas = 1000;
  std::string tv_times = "1,10,100", tv_out;
  int tv_jobs = 1;
  tv->add_option("--graph", tv_args.graph_path)->required();
  tv->add_option("--lambda", tv_args.lambda)->required();
  tv->add_option("--alpha", tv_args.alpha)->required();
  tv->add_option("--sampler", tv_args.sampler)->required();
  tv->add_option("--replicas", tv_replicas)->required();
  tv->add_option("--times", tv_times, "comma-separated time points")->required();
  tv->add_option("--seed", tv_args.seed)->required();
  tv->add_option("--theta", tv_args.theta);
  tv->add_option("--m", tv_args.m);
  tv->add_option("--inner", tv_args.inner);
  tv->add_option("--jobs", tv_jobs);
  tv->add_option("--out", tv_out);

  // si-check
  auto* si = app.add_subcommand("si-check", "spectral independence check");
  std::string si_graph, si_out;
  double si_lambda = 1.0, si_alpha = 1.0, si_delta = 0.1;
  int si_k = -1;
  si->add_option("--graph", si_graph)->required();
  si->add_option("--lambda", si_lambda)->required();
  si->add_option("--alpha", si_alpha)->required();
  si->add_option("--delta", si_delta)->required();
  si->add_option("--max-pinned", si_k, "defaults to nL-2");
  si->add_option("--out", si_out);

  // ising-reduce
  auto* ir = app.add_subcommand("ising-reduce", "Delta=2 Ising reduction");
  std::string ir_graph, ir_out;
  double ir_lambda = 1.0;
  std::optional<double> ir_lambda_right;
  bool ir_verify = false;
  ir->add_option("--graph", ir_graph)->required();
  ir->add_option("--lambda", ir_lambda)->required();
  ir->add_option("--lambda-right", ir_lambda_right,
                 "verified general-fugacity extension");
  ir->add_flag("--verify", ir_verify, "compare against the exact oracle");
  ir->add_option("--out", ir_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (th->parsed())
      return run_threshold(th_d, th_w, th_alpha, th_delta, {th_out});
    if (ck->parsed())
      return run_check(ck_lambda, ck_d, ck_alpha, ck_w, ck_delta, {ck_out});
    if (ph->parsed()) return run_phase(ph_d, ph_wmin, ph_wmax, ph_steps, {ph_out});
    if (ex->parsed())
      return run_exact(ex_graph, ex_lambda, ex_alpha, ex_what, ex_side, {ex_out});
    if (sa->parsed()) return run_sample(sa_args, sa_n, sa_jobs, {sa_out});
    if (tv->parsed())
      return run_tv_test(tv_args, tv_replicas, tv_times, tv_jobs, {tv_out});
    if (si->parsed())
      return run_si_check(si_graph, si_lambda, si_alpha, si_delta, si_k, {si_out});
    if (ir->parsed())
      return run_ising_reduce(ir_graph, ir_lambda, ir_lambda_right, ir_verify,
                              {ir_out});
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
