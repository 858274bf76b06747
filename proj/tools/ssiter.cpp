// Command-line front end: gen-topology, run, heatmap, dist.
//
// Exit status: 0 ok, 1 usage or parse error, 2 envelope violation,
// 3 numerical refusal.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssiter/ssiter.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;
constexpr int kRefusal = 3;

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> engine;
  std::optional<std::string> policy;
  std::optional<std::size_t> fair_window;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.sets, "override one setting (key=value); repeatable");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output path or prefix");
  cmd->add_option("--engine", f.engine, "sync | async");
  cmd->add_option("--policy", f.policy, "round-robin | random-fair");
  cmd->add_option("--fair-window", f.fair_window, "fairness window K");
  cmd->add_option("--trials", f.trials, "trials per heatmap cell");
  cmd->add_option("--burn-in", f.burn_in, "rounds discarded before sampling (0: automatic)");
  cmd->add_option("--threads", f.threads, "worker threads");
}

ssiter::ExperimentConfig resolve(const CommonFlags& f, const char* seed_key = "seed") {
  ssiter::ExperimentConfig c = f.config.empty() ? ssiter::ExperimentConfig{} : ssiter::load_config(f.config);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ssiter::ConfigError("--set expects key=value, got '" + kv + "'");
    ssiter::apply_setting(c, ssiter::detail::trim(kv.substr(0, eq)), ssiter::detail::trim(kv.substr(eq + 1)));
  }
  if (f.seed) ssiter::apply_setting(c, seed_key, std::to_string(*f.seed));
  if (f.out) c.out = *f.out;
  if (f.engine) ssiter::apply_setting(c, "engine", *f.engine);
  if (f.policy) ssiter::apply_setting(c, "policy", *f.policy);
  if (f.fair_window) c.fair_window = *f.fair_window;
  if (f.trials) c.trials = *f.trials;
  if (f.burn_in) c.burn_in = *f.burn_in;
  if (f.threads) c.threads = *f.threads;
  return c;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ssiter::Error("cannot write " + path);
  out << text;
  if (!out) throw ssiter::Error("write failed: " + path);
}

int gen_topology(const CommonFlags& f) {
  ssiter::ExperimentConfig c = resolve(f, "topology_seed");
  const ssiter::TopologySummary s = ssiter::cmd_gen_topology(c);
  if (c.out.empty()) {
    ssiter::write_matrix(std::cout, s.graph.w);
    std::cerr << s.text;
  } else {
    ssiter::save_graph(c.out, s.graph);
    std::cout << s.text;
  }
  return kOk;
}

int run(const CommonFlags& f) {
  const ssiter::ExperimentConfig c = resolve(f);
  const ssiter::RunReport rep = ssiter::cmd_run(c);
  if (c.out.empty()) {
    std::cout << rep.bound_csv;
  } else {
    write_file(c.out + ".trace.csv", rep.trace_csv);
    write_file(c.out + ".bound.csv", rep.bound_csv);
    write_file(c.out + ".config.txt", ssiter::config_text(c));
  }
  std::cerr << rep.summary;
  return rep.violated() ? kViolation : kOk;
}

int heatmap(const CommonFlags& f) {
  const ssiter::ExperimentConfig c = resolve(f);
  const std::string csv = ssiter::heatmap_csv(ssiter::cmd_heatmap(c));
  if (c.out.empty()) {
    std::cout << csv;
  } else {
    write_file(c.out + ".heatmap.csv", csv);
    write_file(c.out + ".config.txt", ssiter::config_text(c));
  }
  return kOk;
}

int dist(const CommonFlags& f) {
  const ssiter::ExperimentConfig c = resolve(f);
  const ssiter::DistReport rep = ssiter::cmd_dist(c, !c.out.empty());
  if (c.out.empty()) {
    std::cout << rep.report_csv;
  } else {
    write_file(c.out + ".report.csv", rep.report_csv);
    write_file(c.out + ".samples.csv", rep.samples_csv);
    write_file(c.out + ".config.txt", ssiter::config_text(c));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-stabilizing Jacobi iteration simulator"};
  app.require_subcommand(1);

  CommonFlags gen_flags, run_flags, heat_flags, dist_flags;
  CLI::App* gen = app.add_subcommand("gen-topology", "generate a weight matrix and print its norms");
  add_common(gen, gen_flags);
  std::optional<std::string> kind;
  std::optional<std::string> n, diag, off, side, radius, ratio;
  gen->add_option("--kind", kind, "circle | unit-disc");
  gen->add_option("--n", n, "number of nodes");
  gen->add_option("--diag", diag, "circle diagonal");
  gen->add_option("--off", off, "circle off-diagonal");
  gen->add_option("--side", side, "unit-disc square side");
  gen->add_option("--radius", radius, "unit-disc connection radius");
  gen->add_option("--ratio", ratio, "unit-disc off-diagonal row sum / diagonal bound");

  CLI::App* run_cmd = app.add_subcommand("run", "single run checked against the convergence envelope");
  add_common(run_cmd, run_flags);
  CLI::App* heat = app.add_subcommand("heatmap", "mean final error over a (delta, iterations) grid");
  add_common(heat, heat_flags);
  CLI::App* dist_cmd = app.add_subcommand("dist", "output distribution under Gaussian inputs");
  add_common(dist_cmd, dist_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      const std::pair<const char*, std::optional<std::string>*> params[] = {
          {"topology", &kind}, {"n", &n}, {"diag", &diag}, {"off", &off},
          {"side", &side}, {"radius", &radius}, {"ratio", &ratio}};
      for (const auto& [key, value] : params)
        if (*value) gen_flags.sets.push_back(std::string(key) + "=" + **value);
      return gen_topology(gen_flags);
    }
    if (*run_cmd) return run(run_flags);
    if (*heat) return heatmap(heat_flags);
    return dist(dist_flags);
  } catch (const ssiter::NotContractive& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kRefusal;
  } catch (const ssiter::Singular& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kRefusal;
  } catch (const ssiter::ZeroDiagonal& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kRefusal;
  } catch (const ssiter::DominanceViolated& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kRefusal;
  } catch (const ssiter::BadCovariance& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kRefusal;
  } catch (const ssiter::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
