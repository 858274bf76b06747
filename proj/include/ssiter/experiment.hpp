#pragma once

// Experiment drivers behind the command-line tool: topology generation,
// single bound-checked runs, (delta x iterations) heatmaps and output
// distribution reports. Configuration is a flat key=value file; every driver
// is a pure function of its config, so identical configs give byte-identical
// CSV regardless of thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ssiter/analysis.hpp"
#include "ssiter/async_engine.hpp"
#include "ssiter/errors.hpp"
#include "ssiter/inputs.hpp"
#include "ssiter/linalg.hpp"
#include "ssiter/random.hpp"
#include "ssiter/sync_engine.hpp"
#include "ssiter/topology.hpp"

namespace ssiter {

// Configuration or usage problem (exit status 1 in the CLI).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct TopologySpec {
  std::string kind = "circle";  // circle | unit-disc | file
  std::size_t n = 100;
  double diag = 3.0;
  double off = -1.0;
  double side = 10.0;
  double radius = 1.0;
  double ratio = 0.97;
  std::uint64_t seed = 1;
  std::string path;
};

struct ExperimentConfig {
  TopologySpec topology;

  std::string input = "box";        // constant | box | gaussian
  double delta = 0.1;
  double variance = 1.0;            // gaussian: covariance = variance * I ...
  std::string covariance_path;      // ... unless a matrix file is given
  std::string center = "random";    // random (uniform[-1,1]^n) or comma list
  std::string sequence = "uniform"; // box only: uniform | plus | alternating | random-signs

  std::string engine = "sync";      // sync | async
  std::string policy = "random-fair";  // round-robin | random-fair
  std::size_t fair_window = 5;

  std::vector<double> deltas;
  std::vector<std::size_t> iterations;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  std::size_t rounds = 200;
  std::size_t burn_in = 0;          // 0: ceil(log 1e-6 / log ||B||)
  double initial_scale = 1.0;       // initial outputs (and registers) uniform in [-s, s]
  std::size_t threads = 1;
  std::string out;
  std::vector<std::uint64_t> snapshots;

  ExperimentConfig() {
    for (int i = 0; i < 8; ++i) deltas.push_back(std::pow(10.0, -3.0 + 3.0 * i / 7.0));
    for (std::size_t i = 0; i <= 10; ++i) iterations.push_back(std::size_t{1} << i);
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return d;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range: '" + v + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

inline void require_one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options)
    if (v == o) return;
  throw ConfigError(key + ": unsupported value '" + v + "'");
}

}  // namespace detail

/// Applies one key=value setting.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string& v = value;
  if (key == "topology") { require_one_of(key, v, {"circle", "unit-disc", "file"}); c.topology.kind = v; }
  else if (key == "n") c.topology.n = parse_count(key, v);
  else if (key == "diag") c.topology.diag = parse_real(key, v);
  else if (key == "off") c.topology.off = parse_real(key, v);
  else if (key == "side") c.topology.side = parse_real(key, v);
  else if (key == "radius") c.topology.radius = parse_real(key, v);
  else if (key == "ratio") c.topology.ratio = parse_real(key, v);
  else if (key == "topology_seed") c.topology.seed = parse_count(key, v);
  else if (key == "matrix") { c.topology.path = v; c.topology.kind = "file"; }
  else if (key == "input") { require_one_of(key, v, {"constant", "box", "gaussian"}); c.input = v; }
  else if (key == "delta") c.delta = parse_real(key, v);
  else if (key == "variance") c.variance = parse_real(key, v);
  else if (key == "covariance") c.covariance_path = v;
  else if (key == "center") c.center = v;
  else if (key == "sequence") { require_one_of(key, v, {"uniform", "plus", "alternating", "random-signs"}); c.sequence = v; }
  else if (key == "engine") { require_one_of(key, v, {"sync", "async"}); c.engine = v; }
  else if (key == "policy") { require_one_of(key, v, {"round-robin", "random-fair"}); c.policy = v; }
  else if (key == "fair_window") c.fair_window = parse_count(key, v);
  else if (key == "deltas") {
    c.deltas.clear();
    for (const auto& s : split_list(v)) c.deltas.push_back(parse_real(key, s));
  } else if (key == "iterations") {
    c.iterations.clear();
    for (const auto& s : split_list(v)) c.iterations.push_back(parse_count(key, s));
  }
  else if (key == "trials") c.trials = parse_count(key, v);
  else if (key == "seed") c.seed = parse_count(key, v);
  else if (key == "rounds") c.rounds = parse_count(key, v);
  else if (key == "burn_in") c.burn_in = parse_count(key, v);
  else if (key == "initial_scale") c.initial_scale = parse_real(key, v);
  else if (key == "threads") c.threads = parse_count(key, v);
  else if (key == "out") c.out = v;
  else if (key == "snapshots") {
    c.snapshots.clear();
    for (const auto& s : split_list(v)) c.snapshots.push_back(parse_count(key, s));
  }
  else throw ConfigError("unknown setting '" + key + "'");
}

/// "key = value" lines; '#' starts a comment.
inline void parse_config(std::istream& in, ExperimentConfig& c) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
    try {
      apply_setting(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig c;
  parse_config(in, c);
  return c;
}

/// Every setting as key = value; parse_config(config_text(c)) reproduces c.
inline std::string config_text(const ExperimentConfig& c) {
  auto join_reals = [](const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
    return s;
  };
  auto join_counts = [](const auto& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
    return s;
  };
  std::ostringstream os;
  os << "topology = " << c.topology.kind << '\n'
     << "n = " << c.topology.n << '\n'
     << "diag = " << format_double(c.topology.diag) << '\n'
     << "off = " << format_double(c.topology.off) << '\n'
     << "side = " << format_double(c.topology.side) << '\n'
     << "radius = " << format_double(c.topology.radius) << '\n'
     << "ratio = " << format_double(c.topology.ratio) << '\n'
     << "topology_seed = " << c.topology.seed << '\n';
  if (!c.topology.path.empty()) os << "matrix = " << c.topology.path << '\n';
  os << "input = " << c.input << '\n'
     << "delta = " << format_double(c.delta) << '\n'
     << "variance = " << format_double(c.variance) << '\n';
  if (!c.covariance_path.empty()) os << "covariance = " << c.covariance_path << '\n';
  os << "center = " << c.center << '\n'
     << "sequence = " << c.sequence << '\n'
     << "engine = " << c.engine << '\n'
     << "policy = " << c.policy << '\n'
     << "fair_window = " << c.fair_window << '\n'
     << "deltas = " << join_reals(c.deltas) << '\n'
     << "iterations = " << join_counts(c.iterations) << '\n'
     << "trials = " << c.trials << '\n'
     << "seed = " << c.seed << '\n'
     << "rounds = " << c.rounds << '\n'
     << "burn_in = " << c.burn_in << '\n'
     << "initial_scale = " << format_double(c.initial_scale) << '\n'
     << "threads = " << c.threads << '\n';
  if (!c.snapshots.empty()) os << "snapshots = " << join_counts(c.snapshots) << '\n';
  return os.str();
}

inline void validate(const ExperimentConfig& c) {
  if (c.deltas.empty() || c.iterations.empty()) throw ConfigError("grid must be nonempty");
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.fair_window < 1) throw ConfigError("fair_window must be >= 1");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (!(c.delta >= 0.0)) throw ConfigError("delta must be >= 0");
  for (double d : c.deltas)
    if (!(d >= 0.0)) throw ConfigError("deltas must be >= 0");
  if (!(c.initial_scale >= 0.0)) throw ConfigError("initial_scale must be >= 0");
}

// ---------------------------------------------------------------------------
// Shared pieces

inline WeightedGraph build_topology(const TopologySpec& t) {
  if (t.kind == "circle") return build_circle(t.n, t.diag, t.off);
  if (t.kind == "unit-disc") return build_unit_disc(t.n, t.side, t.radius, t.ratio, t.seed);
  if (t.kind == "file") {
    if (t.path.empty()) throw ConfigError("topology=file needs matrix=<path>");
    return load_graph(t.path);
  }
  throw ConfigError("unknown topology '" + t.kind + "'");
}

/// The split of a graph the bound checkers accept.
inline JacobiSplit checked_split(const WeightedGraph& g) {
  JacobiSplit split = jacobi_split(g.w);
  if (!g.dominant || !(split.norm_b < 1.0)) {
    throw NotContractive(split.norm_b, "matrix is not normalized diagonally dominant (||B||_inf = " + format_double(split.norm_b) +
                  "); convergence envelopes do not apply");
  }
  return split;
}

inline Vector uniform_vector(std::size_t n, double lo, double hi, std::uint64_t key) {
  random::CounterRng rng(key);
  Vector v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Vector resolve_center(const ExperimentConfig& c, std::size_t n, std::uint64_t key) {
  if (c.center == "random") return uniform_vector(n, -1.0, 1.0, key);
  const auto items = detail::split_list(c.center);
  if (items.size() == 1) return Vector(n, detail::parse_real("center", items[0]));
  if (items.size() != n) throw ConfigError("center has " + std::to_string(items.size()) + " entries, graph has " + std::to_string(n));
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = detail::parse_real("center", items[i]);
  return v;
}

inline Matrix resolve_covariance(const ExperimentConfig& c, std::size_t n) {
  if (!c.covariance_path.empty()) {
    std::ifstream in(c.covariance_path);
    if (!in) throw ConfigError("cannot open covariance file: " + c.covariance_path);
    Matrix s = read_matrix(in);
    detail::require_same(s.size(), n, "covariance dimension");
    return s;
  }
  if (!(c.variance >= 0.0)) throw BadCovariance("variance must be >= 0");
  return c.variance * Matrix::identity(n);
}

inline InputModel make_input_model(const ExperimentConfig& c, const Vector& v, std::uint64_t seed) {
  if (c.input == "constant") return constant_model(v);
  if (c.input == "box") return box_model(v, c.delta, seed);
  return gaussian_model(v, resolve_covariance(c, v.size()), seed);
}

inline SchedulePolicy make_policy(const ExperimentConfig& c, std::uint64_t seed) {
  if (c.policy == "round-robin") return SchedulePolicy::round_robin();
  return SchedulePolicy::random_fair(c.fair_window, seed);
}

// ---------------------------------------------------------------------------
// gen-topology

struct TopologySummary {
  WeightedGraph graph;
  double norm_a = 0.0;
  double norm_b = 0.0;
  std::string text;
};

inline TopologySummary cmd_gen_topology(const ExperimentConfig& c) {
  TopologySummary s{build_topology(c.topology), 0.0, 0.0, {}};
  const JacobiSplit split = jacobi_split(s.graph.w);
  s.norm_a = split.norm_a;
  s.norm_b = split.norm_b;
  std::ostringstream os;
  os << "nodes " << s.graph.size() << '\n'
     << "norm_a " << format_double(s.norm_a) << '\n'
     << "norm_b " << format_double(s.norm_b) << '\n'
     << "dominant " << (s.graph.dominant ? "true" : "false") << '\n'
     << "connected " << (s.graph.connected ? "true" : "false") << '\n';
  s.text = os.str();
  return s;
}

// ---------------------------------------------------------------------------
// run

struct RunReport {
  BoundReport bound;
  std::string trace_csv;    // sync: round,node,input,output; async: step log
  std::string bound_csv;
  std::string summary;
  std::size_t stale_reads = 0;

  bool violated() const { return bound.violations > 0 || stale_reads > 0; }
};

inline RunReport cmd_run(const ExperimentConfig& c) {
  validate(c);
  if (c.input == "gaussian") throw ConfigError("run checks box envelopes; use input=constant or input=box");
  if (c.rounds < 1) throw ConfigError("rounds must be >= 1");
  const WeightedGraph g = build_topology(c.topology);
  const JacobiSplit split = checked_split(g);
  const std::size_t n = g.size();
  const Vector v = resolve_center(c, n, random::derive({c.seed, 0x63656e746572ULL}));
  const Vector u = solve_exact(g.w, v);
  const double delta = c.input == "constant" ? 0.0 : c.delta;
  const std::uint64_t input_seed = random::derive({c.seed, 0x696e707574ULL});

  RunReport rep;
  std::ostringstream trace_out, bound_out, summary;
  std::vector<double> observed;
  double z = 0.0;
  EngineKind kind = EngineKind::kSync;

  if (c.engine == "sync") {
    InputSequence seq;
    if (c.input == "box" && c.sequence != "uniform") {
      SignPattern signs = c.sequence == "plus" ? constant_signs(n, c.rounds, 1)
                          : c.sequence == "alternating" ? alternating_signs(n, c.rounds)
                                                        : random_signs(n, c.rounds, input_seed);
      seq = adversarial_box_sequence(v, delta, c.rounds, signs);
    } else {
      seq = gen_sequence(make_input_model(c, v, input_seed), n, c.rounds);
    }
    const Configuration initial{uniform_vector(n, -c.initial_scale, c.initial_scale,
                                               random::derive({c.seed, 0x696e6974ULL})), 0};
    const RunTrace trace = run_sync(g, seq, initial);
    write_trace_csv(trace_out, trace);
    observed = error_trace(trace, u).norms;
    z = observed.front();
  } else {
    kind = EngineKind::kAsync;
    if (c.input == "box" && c.sequence != "uniform") throw ConfigError("async runs sample inputs per node; use sequence=uniform");
    RegisterBank bank(g);
    const AsyncInitial init = random_initial(bank, n, c.initial_scale, random::derive({c.seed, 0x696e6974ULL}));
    AsyncRunOptions opts;
    opts.max_rounds = c.rounds;
    opts.snapshot_steps = c.snapshots;
    const AsyncTrace trace = run_async(g, make_input_model(c, v, input_seed), init,
                                       make_policy(c, random::derive({c.seed, 0x7363686564ULL})), opts);
    write_step_log_csv(trace_out, trace.steps, bank);
    if (!trace.snapshots.empty()) {
      trace_out << '\n';
      write_snapshots_csv(trace_out, trace.snapshots);
    }
    z = initial_error(bank, init, u);
    observed.push_back(inf_norm(init.outputs - u));
    for (const auto& o : trace.round_outputs) observed.push_back(inf_norm(o - u));
    rep.stale_reads = check_staleness(trace.steps, trace.boundaries).size();
  }

  const std::vector<double> env = envelope(bound_params(split, delta, z, kind), observed.size() - 1);
  rep.bound = check_bound(observed, env, z);
  write_bound_report_csv(bound_out, rep.bound);

  summary << "engine " << c.engine << '\n'
          << "norm_a " << format_double(split.norm_a) << '\n'
          << "norm_b " << format_double(split.norm_b) << '\n'
          << "delta " << format_double(delta) << '\n'
          << "z " << format_double(z) << '\n'
          << "rounds " << (observed.size() - 1) << '\n'
          << "violations " << rep.bound.violations << '\n'
          << "max_violation " << format_double(rep.bound.max_violation) << '\n'
          << "stale_reads " << rep.stale_reads << '\n'
          << "final_error " << format_double(observed.back()) << '\n';
  rep.trace_csv = trace_out.str();
  rep.bound_csv = bound_out.str();
  rep.summary = summary.str();
  return rep;
}

// ---------------------------------------------------------------------------
// heatmap

struct HeatmapGrid {
  std::vector<double> deltas;
  std::vector<std::size_t> iterations;
  std::vector<double> mean;    // row-major: delta x iterations
  std::vector<double> stderr_; // standard error of each cell mean
  std::size_t trials = 0;

  double cell(std::size_t d, std::size_t it) const { return mean[d * iterations.size() + it]; }
  double error(std::size_t d, std::size_t it) const { return stderr_[d * iterations.size() + it]; }
};

namespace detail {

// Final ||O(L) - u||_inf of one heatmap trial. The random numbers depend on
// the trial only (common random numbers across the whole grid): delta scales
// the same unit deviations, and the box deviations are indexed backwards from
// the final round, so runs of different lengths share their last deviations.
inline double heatmap_trial(const ExperimentConfig& c, const WeightedGraph& g, double delta, std::size_t length,
                            std::size_t trial) {
  const std::size_t n = g.size();
  const std::uint64_t key = random::derive({c.seed, 0x6865617470ULL, trial});
  const Vector v = uniform_vector(n, -1.0, 1.0, random::derive({key, 0x63656e746572ULL}));
  const Vector u = solve_exact(g.w, v);
  const Vector initial = uniform_vector(n, -c.initial_scale, c.initial_scale, random::derive({key, 0x696e6974ULL}));
  const std::uint64_t input_seed = random::derive({key, 0x696e707574ULL});
  if (length == 0) return inf_norm(initial - u);

  if (c.engine == "sync") {
    const InputStream stream(box_model(v, delta, input_seed), n);
    SyncEngine engine(g, initial);
    for (std::size_t r = 1; r <= length; ++r) engine.step(stream.vector_at(length - r + 1));
    return inf_norm(engine.state().outputs - u);
  }
  RegisterBank bank(g);
  AsyncInitial init = random_initial(bank, n, c.initial_scale, random::derive({key, 0x696e6974ULL}));
  AsyncRunOptions opts;
  opts.max_rounds = length;
  opts.record_steps = false;
  const AsyncTrace trace = run_async(g, box_model(v, delta, input_seed), init,
                                     make_policy(c, random::derive({key, 0x7363686564ULL})), opts);
  return inf_norm(trace.round_outputs.back() - u);
}

}  // namespace detail

inline HeatmapGrid cmd_heatmap(const ExperimentConfig& c) {
  validate(c);
  const WeightedGraph g = build_topology(c.topology);
  checked_split(g);

  HeatmapGrid grid;
  grid.deltas = c.deltas;
  grid.iterations = c.iterations;
  grid.trials = c.trials;
  const std::size_t cells = c.deltas.size() * c.iterations.size();
  grid.mean.assign(cells, 0.0);
  grid.stderr_.assign(cells, 0.0);

  auto work = [&](std::size_t worker) {
    for (std::size_t cell = worker; cell < cells; cell += c.threads) {
      const std::size_t d = cell / c.iterations.size();
      const std::size_t it = cell % c.iterations.size();
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t t = 0; t < c.trials; ++t) {
        const double e = detail::heatmap_trial(c, g, c.deltas[d], c.iterations[it], t);
        sum += e;
        sum_sq += e * e;
      }
      const double k = static_cast<double>(c.trials);
      const double mean = sum / k;
      const double var = c.trials > 1 ? std::max(0.0, (sum_sq - k * mean * mean) / (k - 1.0)) : 0.0;
      grid.mean[cell] = mean;
      grid.stderr_[cell] = std::sqrt(var / k);
    }
  };

  if (c.threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < c.threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  return grid;
}

inline std::string heatmap_csv(const HeatmapGrid& grid) {
  std::ostringstream os;
  os << "delta,log10_delta,iterations,log10_iterations,mean_error,std_error,trials\n";
  for (std::size_t d = 0; d < grid.deltas.size(); ++d) {
    for (std::size_t it = 0; it < grid.iterations.size(); ++it) {
      const double iters = static_cast<double>(grid.iterations[it]);
      os << format_double(grid.deltas[d]) << ',' << format_double(std::log10(grid.deltas[d])) << ','
         << grid.iterations[it] << ',' << format_double(std::log10(iters)) << ','
         << format_double(grid.cell(d, it)) << ',' << format_double(grid.error(d, it)) << ',' << grid.trials << '\n';
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// dist

struct DistReport {
  DistributionSpec estimate;
  DistributionSpec theory;          // N(W^-1 v, W^-1 S W^-T)
  Matrix stationary_covariance;     // stationary law of the synchronous recursion
  std::size_t burn_in = 0;
  std::size_t samples = 0;
  double covariance_error = 0.0;          // relative Frobenius vs theory
  double thinned_covariance_error = 0.0;  // same, every burn_in-th sample
  double stationary_error = 0.0;          // relative Frobenius vs stationary_covariance
  double max_mean_error = 0.0;
  // Off-diagonal pairs whose sample covariance has the sign of the reference
  // (pairs with a zero reference entry are skipped).
  std::size_t sign_pairs_theory = 0, sign_agree_theory = 0;
  std::size_t sign_pairs_stationary = 0, sign_agree_stationary = 0;
  double max_abs_correlation = 0.0;  // largest off-diagonal sample correlation
  std::vector<Vector> sample_rows;
  std::string report_csv;
  std::string samples_csv;
};

inline DistReport cmd_dist(const ExperimentConfig& c, bool keep_samples = true) {
  validate(c);
  if (c.input != "gaussian") throw ConfigError("dist needs input=gaussian");
  if (c.rounds < 2) throw ConfigError("rounds must be >= 2");
  const WeightedGraph g = build_topology(c.topology);
  const JacobiSplit split = checked_split(g);
  const std::size_t n = g.size();
  const Vector v = resolve_center(c, n, random::derive({c.seed, 0x63656e746572ULL}));
  const Matrix sigma = resolve_covariance(c, n);
  const InputModel model = gaussian_model(v, sigma, random::derive({c.seed, 0x696e707574ULL}));

  DistReport rep;
  rep.burn_in = c.burn_in != 0 ? c.burn_in : default_burn_in(split.norm_b);
  const std::size_t total = rep.burn_in + c.rounds;
  std::vector<Vector> samples;
  samples.reserve(c.rounds);

  if (c.engine == "sync") {
    InputStream stream(model, n);
    SyncEngine engine(g, uniform_vector(n, -c.initial_scale, c.initial_scale, random::derive({c.seed, 0x696e6974ULL})));
    for (std::size_t r = 1; r <= total; ++r) {
      engine.step(stream.vector_at(r));
      if (r > rep.burn_in) samples.push_back(engine.state().outputs);
    }
  } else {
    RegisterBank bank(g);
    const AsyncInitial init = random_initial(bank, n, c.initial_scale, random::derive({c.seed, 0x696e6974ULL}));
    AsyncRunOptions opts;
    opts.max_rounds = total;
    opts.record_steps = false;
    AsyncTrace trace = run_async(g, model, init, make_policy(c, random::derive({c.seed, 0x7363686564ULL})), opts);
    samples.assign(trace.round_outputs.begin() + static_cast<std::ptrdiff_t>(rep.burn_in), trace.round_outputs.end());
  }

  rep.samples = samples.size();
  rep.estimate = estimate_output_distribution(samples, 0);
  rep.theory = theoretical_output_distribution(g, {v, sigma});
  rep.stationary_covariance = stationary_output_covariance(split, sigma);
  rep.covariance_error = relative_frobenius_error(rep.estimate.covariance, rep.theory.covariance);
  rep.stationary_error = relative_frobenius_error(rep.estimate.covariance, rep.stationary_covariance);
  rep.max_mean_error = inf_norm(rep.estimate.mean - rep.theory.mean);

  auto count_signs = [&](const Matrix& ref, std::size_t& pairs, std::size_t& agree) {
    const double floor = 1e-12 * std::max(1.0, frobenius_norm(ref));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::abs(ref(i, j)) <= floor) continue;
        ++pairs;
        if ((ref(i, j) > 0.0) == (rep.estimate.covariance(i, j) > 0.0)) ++agree;
      }
    }
  };
  count_signs(rep.theory.covariance, rep.sign_pairs_theory, rep.sign_agree_theory);
  count_signs(rep.stationary_covariance, rep.sign_pairs_stationary, rep.sign_agree_stationary);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double denom = std::sqrt(rep.estimate.covariance(i, i) * rep.estimate.covariance(j, j));
      if (denom > 0.0) rep.max_abs_correlation = std::max(rep.max_abs_correlation, std::abs(rep.estimate.covariance(i, j)) / denom);
    }
  }

  std::vector<Vector> thinned;
  const std::size_t stride = std::max<std::size_t>(1, rep.burn_in);
  for (std::size_t k = 0; k < samples.size(); k += stride) thinned.push_back(samples[k]);
  rep.thinned_covariance_error =
      thinned.size() >= 2 ? relative_frobenius_error(estimate_output_distribution(thinned, 0).covariance, rep.theory.covariance)
                          : 0.0;

  std::ostringstream os;
  os << "quantity,i,j,value\n";
  write_distribution_csv(os, rep.estimate, "sample");
  write_distribution_csv(os, rep.theory, "theory");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      os << "stationary_covariance," << i << ',' << j << ',' << format_double(rep.stationary_covariance(i, j)) << '\n';
  os << "burn_in,,," << rep.burn_in << '\n'
     << "samples,,," << rep.samples << '\n'
     << "max_mean_error,,," << format_double(rep.max_mean_error) << '\n'
     << "covariance_rel_frobenius_error,,," << format_double(rep.covariance_error) << '\n'
     << "thinned_covariance_rel_frobenius_error,,," << format_double(rep.thinned_covariance_error) << '\n'
     << "stationary_covariance_rel_frobenius_error,,," << format_double(rep.stationary_error) << '\n'
     << "max_abs_sample_correlation,,," << format_double(rep.max_abs_correlation) << '\n'
     << "offdiag_sign_agreement_theory,,," << rep.sign_agree_theory << '/' << rep.sign_pairs_theory << '\n'
     << "offdiag_sign_agreement_stationary,,," << rep.sign_agree_stationary << '/' << rep.sign_pairs_stationary << '\n';
  rep.report_csv = os.str();

  if (keep_samples) {
    std::ostringstream ss;
    ss << "round";
    for (std::size_t i = 0; i < n; ++i) ss << ",o" << i;
    ss << '\n';
    for (std::size_t k = 0; k < samples.size(); ++k) {
      ss << (rep.burn_in + k + 1);
      for (std::size_t i = 0; i < n; ++i) ss << ',' << format_double(samples[k][i]);
      ss << '\n';
    }
    rep.samples_csv = ss.str();
    rep.sample_rows = std::move(samples);
  }
  return rep;
}

}  // namespace ssiter
