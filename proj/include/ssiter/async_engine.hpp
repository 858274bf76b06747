#pragma once

// Asynchronous shared-register execution of the self-stabilizing iteration.
//
// Every directed dependency j -> i (w_ij != 0) owns a register R(j,i) written
// by j and read by i. A node's program cycles forever through
//
//   line 04   O := w_ii * I            (samples the input; local)
//   line 06   temp := R(j,i)           (one register read per neighbor j)
//   line 07   O := O + w_ij * temp     (local)
//   line 03   R(i,k) := O              (one register write per reader k)
//
// and every one of these is a separate atomic step, so exactly one register
// or one local variable changes per step. The cycle is entered at line 04;
// a node's unit of work ("sweep") is one read/update phase followed by the
// write phase publishing its result. Rounds close at the first step where
// every node has completed a sweep that started after the previous boundary.
//
// The interleaving is simulated sequentially; this is the model, not an
// approximation of a threaded execution.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ssiter/errors.hpp"
#include "ssiter/inputs.hpp"
#include "ssiter/linalg.hpp"
#include "ssiter/random.hpp"
#include "ssiter/topology.hpp"

namespace ssiter {

enum class Line : std::uint8_t { kWrite = 3, kReset = 4, kRead = 6, kUpdate = 7 };

inline constexpr std::int64_t kInitialWrite = -1;

// One register per directed dependency edge.
class RegisterBank {
 public:
  struct Edge {
    std::size_t writer;
    std::size_t reader;
  };

  RegisterBank() = default;

  explicit RegisterBank(const WeightedGraph& g) : reads_(g.size()), writes_(g.size()) {
    const std::size_t n = g.size();
    std::vector<std::vector<std::size_t>> readers(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j : g.adjacency[i]) readers[j].push_back(i);
    std::vector<std::vector<std::size_t>> id_of(n);
    for (std::size_t j = 0; j < n; ++j) {
      std::sort(readers[j].begin(), readers[j].end());
      for (std::size_t i : readers[j]) {
        writes_[j].push_back(edges_.size());
        edges_.push_back({j, i});
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : g.adjacency[i]) {
        const auto& w = writes_[j];
        const auto it = std::find_if(w.begin(), w.end(), [&](std::size_t id) { return edges_[id].reader == i; });
        reads_[i].push_back(*it);
      }
    }
    value_.assign(edges_.size(), 0.0);
    written_at_.assign(edges_.size(), kInitialWrite);
  }

  std::size_t size() const noexcept { return edges_.size(); }
  const Edge& edge(std::size_t id) const { return edges_[id]; }

  /// Registers node i reads, aligned with adjacency[i].
  const std::vector<std::size_t>& reads_of(std::size_t i) const { return reads_[i]; }
  /// Registers node i writes, ascending by reader.
  const std::vector<std::size_t>& writes_of(std::size_t i) const { return writes_[i]; }

  double value(std::size_t id) const { return value_[id]; }
  std::int64_t written_at(std::size_t id) const { return written_at_[id]; }
  const std::vector<double>& values() const noexcept { return value_; }

  void write(std::size_t id, double v, std::int64_t step) {
    value_[id] = v;
    written_at_[id] = step;
  }

  void set_initial(std::vector<double> values) {
    detail::require_same(values.size(), value_.size(), "initial registers");
    value_ = std::move(values);
    std::fill(written_at_.begin(), written_at_.end(), kInitialWrite);
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> reads_;
  std::vector<std::vector<std::size_t>> writes_;
  std::vector<double> value_;
  std::vector<std::int64_t> written_at_;
};

struct NodeProgram {
  Line pc = Line::kReset;
  std::size_t cursor = 0;   // neighbor / reader position inside the current loop
  double value = 0.0;       // O_{p_i}, mutated in place by lines 04 and 07
  double temp = 0.0;
  double output = 0.0;      // O_{p_i} as of the last completed read/update phase
  std::uint64_t sweeps = 0; // executions of line 04; indexes the input stream
};

struct StepRecord {
  std::uint64_t step = 0;
  std::size_t node = 0;
  Line line = Line::kReset;
  std::int64_t target = -1;  // register id, or -1 for a local variable
  double value = 0.0;        // value written / read / assigned
  std::int64_t source_step = kInitialWrite;  // reads: step that wrote the value read
  bool sweep_end = false;    // this step completes the node's sweep
};

/// Arbitrary starting state: local outputs plus register contents.
struct AsyncInitial {
  Vector outputs;
  std::vector<double> registers;
};

/// Registers hold the writer's current output, as if every node had just
/// finished a write phase.
inline AsyncInitial consistent_initial(const RegisterBank& bank, const Vector& outputs) {
  AsyncInitial init{outputs, std::vector<double>(bank.size())};
  for (std::size_t id = 0; id < bank.size(); ++id) init.registers[id] = outputs[bank.edge(id).writer];
  return init;
}

/// Outputs and registers uniform in [-z0, z0].
inline AsyncInitial random_initial(const RegisterBank& bank, std::size_t n, double z0, std::uint64_t seed) {
  random::CounterRng rng(random::derive({seed, 0x696e6974ULL}));
  AsyncInitial init{Vector(n), std::vector<double>(bank.size())};
  for (std::size_t i = 0; i < n; ++i) init.outputs[i] = rng.uniform(-z0, z0);
  for (auto& r : init.registers) r = rng.uniform(-z0, z0);
  return init;
}

/// max over node outputs and register contents of the distance to u
/// (a register written by node j is compared with u_j).
inline double initial_error(const RegisterBank& bank, const AsyncInitial& init, const Vector& u) {
  double z = inf_norm(init.outputs - u);
  for (std::size_t id = 0; id < bank.size(); ++id)
    z = std::max(z, std::abs(init.registers[id] - u[bank.edge(id).writer]));
  return z;
}

/// Same measure between two starting states.
inline double initial_distance(const RegisterBank& bank, const AsyncInitial& a, const AsyncInitial& b) {
  double d = inf_norm(a.outputs - b.outputs);
  for (std::size_t id = 0; id < bank.size(); ++id) d = std::max(d, std::abs(a.registers[id] - b.registers[id]));
  return d;
}

// ---------------------------------------------------------------------------
// System state and the atomic step

class AsyncSystem {
 public:
  AsyncSystem(const WeightedGraph& g, InputStream inputs)
      : weights_(node_weights(g)), bank_(g), inputs_(std::move(inputs)), nodes_(g.size()) {
    detail::require_same(inputs_.size(), g.size(), "input stream dimension");
    if (!inputs_.per_node_independent())
      throw BadCovariance("asynchronous sampling requires independent per-node inputs (diagonal covariance)");
  }

  void reset(const AsyncInitial& init) {
    detail::require_same(init.outputs.size(), nodes_.size(), "initial outputs");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      nodes_[i] = NodeProgram{};
      nodes_[i].value = nodes_[i].output = init.outputs[i];
    }
    bank_.set_initial(init.registers);
    step_ = 0;
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  std::uint64_t steps_taken() const noexcept { return step_; }
  const RegisterBank& registers() const noexcept { return bank_; }
  const NodeProgram& node(std::size_t i) const { return nodes_[i]; }
  const NodeWeights& weights() const noexcept { return weights_; }

  Vector outputs() const {
    Vector o(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) o[i] = nodes_[i].output;
    return o;
  }

  /// Atomic steps in node i's sweep (04, 06/07 per neighbor, 03 per reader).
  std::size_t sweep_length(std::size_t i) const {
    return 1 + 2 * bank_.reads_of(i).size() + bank_.writes_of(i).size();
  }

  /// Advances node i by exactly one atomic step.
  StepRecord step(std::size_t i) {
    NodeProgram& p = nodes_[i];
    const auto& reads = bank_.reads_of(i);
    const auto& writes = bank_.writes_of(i);
    StepRecord rec;
    rec.step = step_;
    rec.node = i;
    rec.line = p.pc;

    switch (p.pc) {
      case Line::kReset: {
        ++p.sweeps;
        p.value = weights_.self_weight[i] * inputs_.node_value(i, p.sweeps);
        rec.value = p.value;
        p.cursor = 0;
        if (reads.empty()) finish_compute(p, writes, rec);
        else p.pc = Line::kRead;
        break;
      }
      case Line::kRead: {
        const std::size_t id = reads[p.cursor];
        p.temp = bank_.value(id);
        rec.target = static_cast<std::int64_t>(id);
        rec.value = p.temp;
        rec.source_step = bank_.written_at(id);
        p.pc = Line::kUpdate;
        break;
      }
      case Line::kUpdate: {
        p.value = p.value + weights_.neighbor_weight[i][p.cursor].weight * p.temp;
        rec.value = p.value;
        if (++p.cursor == reads.size()) finish_compute(p, writes, rec);
        else p.pc = Line::kRead;
        break;
      }
      case Line::kWrite: {
        const std::size_t id = writes[p.cursor];
        bank_.write(id, p.value, static_cast<std::int64_t>(step_));
        rec.target = static_cast<std::int64_t>(id);
        rec.value = p.value;
        if (++p.cursor == writes.size()) {
          p.pc = Line::kReset;
          rec.sweep_end = true;
        }
        break;
      }
    }
    ++step_;
    return rec;
  }

 private:
  static void finish_compute(NodeProgram& p, const std::vector<std::size_t>& writes, StepRecord& rec) {
    p.output = p.value;
    p.cursor = 0;
    if (writes.empty()) {
      p.pc = Line::kReset;
      rec.sweep_end = true;
    } else {
      p.pc = Line::kWrite;
    }
  }

  NodeWeights weights_;
  RegisterBank bank_;
  InputStream inputs_;
  std::vector<NodeProgram> nodes_;
  std::uint64_t step_ = 0;
};

// ---------------------------------------------------------------------------
// Scheduling

struct SchedulePolicy {
  enum class Kind { kRoundRobin, kRandomFair };
  Kind kind = Kind::kRoundRobin;
  std::size_t fair_window = 1;  // K: every node steps at least once per K*n steps
  std::uint64_t seed = 0;

  static SchedulePolicy round_robin() { return {Kind::kRoundRobin, 1, 0}; }
  static SchedulePolicy random_fair(std::size_t k, std::uint64_t seed) { return {Kind::kRandomFair, k, seed}; }
};

// RoundRobin: node t mod n takes step t.
// RandomFair: a uniformly random node, unless that choice would make some
// node miss its deadline (last step + K*n); then the earliest deadline goes.
class Scheduler {
 public:
  Scheduler(SchedulePolicy policy, std::size_t n)
      : policy_(policy), n_(n), rng_(random::derive({policy.seed, 0x7363686564ULL})),
        last_(n, -1) {
    if (n == 0) throw Error("scheduler needs at least one node");
    if (policy_.fair_window < 1) throw Error("fair window K must be >= 1");
  }

  std::size_t next() {
    std::size_t chosen = 0;
    if (policy_.kind == SchedulePolicy::Kind::kRoundRobin) {
      chosen = static_cast<std::size_t>(t_ % n_);
    } else {
      chosen = static_cast<std::size_t>(rng_.below(n_));
      if (!feasible_after(chosen)) chosen = earliest_deadline();
    }
    last_[chosen] = t_;
    ++t_;
    return chosen;
  }

  std::int64_t window() const noexcept { return static_cast<std::int64_t>(policy_.fair_window * n_); }

 private:
  std::int64_t deadline(std::size_t i) const { return last_[i] + window(); }

  bool feasible_after(std::size_t chosen) {
    scratch_.clear();
    for (std::size_t i = 0; i < n_; ++i) scratch_.push_back(i == chosen ? t_ + window() : deadline(i));
    std::sort(scratch_.begin(), scratch_.end());
    for (std::size_t m = 0; m < n_; ++m)
      if (scratch_[m] < t_ + static_cast<std::int64_t>(m) + 1) return false;
    return true;
  }

  std::size_t earliest_deadline() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n_; ++i)
      if (deadline(i) < deadline(best)) best = i;
    return best;
  }

  SchedulePolicy policy_;
  std::size_t n_;
  random::CounterRng rng_;
  std::vector<std::int64_t> last_;
  std::int64_t t_ = 0;
  std::vector<std::int64_t> scratch_;
};

// ---------------------------------------------------------------------------
// Rounds

// Online round detection. Feed every step in order; returns true when the
// step closes a round.
class RoundTracker {
 public:
  explicit RoundTracker(std::size_t n) : started_(n, false), done_(n, false), remaining_(n) {}

  bool observe(const StepRecord& rec) {
    const std::size_t i = rec.node;
    if (rec.line == Line::kReset && !done_[i]) started_[i] = true;
    if (rec.sweep_end && started_[i] && !done_[i]) {
      done_[i] = true;
      if (--remaining_ == 0) {
        std::fill(started_.begin(), started_.end(), false);
        std::fill(done_.begin(), done_.end(), false);
        remaining_ = started_.size();
        return true;
      }
    }
    return false;
  }

 private:
  std::vector<bool> started_;
  std::vector<bool> done_;
  std::size_t remaining_;
};

/// Step indices at which rounds close (the last step of each round).
inline std::vector<std::uint64_t> detect_rounds(const std::vector<StepRecord>& steps, std::size_t n) {
  if (steps.empty()) throw Error("detect_rounds needs a nonempty step log");
  RoundTracker tracker(n);
  std::vector<std::uint64_t> boundaries;
  for (const auto& rec : steps)
    if (tracker.observe(rec)) boundaries.push_back(rec.step);
  return boundaries;
}

/// Round a step belongs to: 1 + number of boundaries strictly before it.
/// Initial register contents (step -1) belong to round 0.
inline std::size_t round_of(const std::vector<std::uint64_t>& boundaries, std::int64_t step) {
  if (step < 0) return 0;
  const auto it = std::lower_bound(boundaries.begin(), boundaries.end(), static_cast<std::uint64_t>(step));
  return 1 + static_cast<std::size_t>(it - boundaries.begin());
}

struct StaleRead {
  std::uint64_t step;
  std::size_t read_round;
  std::size_t write_round;
};

/// Reads in round k+1 must see values written no earlier than round k.
inline std::vector<StaleRead> check_staleness(const std::vector<StepRecord>& steps,
                                              const std::vector<std::uint64_t>& boundaries) {
  std::vector<StaleRead> bad;
  for (const auto& rec : steps) {
    if (rec.line != Line::kRead) continue;
    const std::size_t rr = round_of(boundaries, static_cast<std::int64_t>(rec.step));
    const std::size_t wr = round_of(boundaries, rec.source_step);
    if (wr + 1 < rr) bad.push_back({rec.step, rr, wr});
  }
  return bad;
}

// ---------------------------------------------------------------------------
// Runs

struct AsyncSnapshot {
  std::uint64_t step = 0;  // number of steps executed before the snapshot
  std::vector<double> values;
  Vector outputs;
  std::vector<double> registers;
};

struct AsyncRunOptions {
  std::uint64_t total_steps = 0;  // 0: no step limit
  std::size_t max_rounds = 0;     // 0: no round limit
  bool record_steps = true;
  std::vector<std::uint64_t> snapshot_steps;  // take a snapshot after this many steps
};

struct AsyncTrace {
  std::vector<StepRecord> steps;          // empty unless recorded
  std::vector<std::uint64_t> boundaries;  // last step of each round
  std::vector<Vector> round_outputs;      // published outputs at each boundary
  Vector initial_outputs;
  std::vector<AsyncSnapshot> snapshots;
  std::uint64_t steps_taken = 0;
};

inline AsyncSnapshot snapshot(const AsyncSystem& sys) {
  AsyncSnapshot s;
  s.step = sys.steps_taken();
  for (std::size_t i = 0; i < sys.size(); ++i) s.values.push_back(sys.node(i).value);
  s.outputs = sys.outputs();
  s.registers = sys.registers().values();
  return s;
}

inline AsyncTrace run_async(const WeightedGraph& g, const InputModel& model, const AsyncInitial& initial,
                            const SchedulePolicy& policy, const AsyncRunOptions& opts) {
  if (opts.total_steps == 0 && opts.max_rounds == 0) throw Error("run_async needs a step or round limit");
  AsyncSystem sys(g, InputStream(model, g.size()));
  sys.reset(initial);
  Scheduler sched(policy, g.size());
  RoundTracker tracker(g.size());

  AsyncTrace trace;
  trace.initial_outputs = initial.outputs;
  auto snaps = opts.snapshot_steps;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&] {
    while (next_snap < snaps.size() && snaps[next_snap] == sys.steps_taken()) {
      trace.snapshots.push_back(snapshot(sys));
      ++next_snap;
    }
  };
  take_snapshots();

  while (true) {
    if (opts.total_steps != 0 && sys.steps_taken() >= opts.total_steps) break;
    if (opts.max_rounds != 0 && trace.boundaries.size() >= opts.max_rounds) break;
    const StepRecord rec = sys.step(sched.next());
    if (tracker.observe(rec)) {
      trace.boundaries.push_back(rec.step);
      trace.round_outputs.push_back(sys.outputs());
    }
    if (opts.record_steps) trace.steps.push_back(rec);
    take_snapshots();
  }
  trace.steps_taken = sys.steps_taken();
  return trace;
}

inline const char* line_name(Line line) {
  switch (line) {
    case Line::kWrite: return "03";
    case Line::kReset: return "04";
    case Line::kRead: return "06";
    case Line::kUpdate: return "07";
  }
  return "??";
}

// CSV: step,node,line,target,value. Targets are R_<writer>_<reader> for
// registers, O for the node's accumulator.
inline void write_step_log_csv(std::ostream& out, const std::vector<StepRecord>& steps, const RegisterBank& bank) {
  out << "step,node,line,target,value\n";
  for (const auto& r : steps) {
    out << r.step << ',' << r.node << ',' << line_name(r.line) << ',';
    if (r.target >= 0) {
      const auto& e = bank.edge(static_cast<std::size_t>(r.target));
      out << "R_" << e.writer << '_' << e.reader;
    } else {
      out << 'O';
    }
    out << ',' << format_double(r.value) << '\n';
  }
}

// CSV: step,kind,index,value with kind in {value, output, register}.
inline void write_snapshots_csv(std::ostream& out, const std::vector<AsyncSnapshot>& snaps) {
  out << "step,kind,index,value\n";
  for (const auto& s : snaps) {
    for (std::size_t i = 0; i < s.values.size(); ++i) out << s.step << ",value," << i << ',' << format_double(s.values[i]) << '\n';
    for (std::size_t i = 0; i < s.outputs.size(); ++i) out << s.step << ",output," << i << ',' << format_double(s.outputs[i]) << '\n';
    for (std::size_t i = 0; i < s.registers.size(); ++i) out << s.step << ",register," << i << ',' << format_double(s.registers[i]) << '\n';
  }
}

}  // namespace ssiter
