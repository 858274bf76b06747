#pragma once

// Synchronous rounds of the self-stabilizing iteration. Round r+1 reads only
// O(r), so a double-buffered configuration models the send/receive exchange
// exactly; no message queue is materialized.

#include <cstddef>
#include <ostream>
#include <utility>
#include <vector>

#include "ssiter/errors.hpp"
#include "ssiter/inputs.hpp"
#include "ssiter/linalg.hpp"
#include "ssiter/topology.hpp"

namespace ssiter {

struct Configuration {
  Vector outputs;
  std::size_t round_index = 0;
};

struct RunTrace {
  Configuration initial;
  std::vector<Vector> inputs;          // I(1..len)
  std::vector<Configuration> rounds;   // O(1..len)

  std::size_t size() const noexcept { return rounds.size(); }
  const Vector& output(std::size_t r) const {
    return r == 0 ? initial.outputs : rounds[r - 1].outputs;
  }
};

/// One synchronous round. Node i touches only its own input and the previous
/// outputs of its neighbors, accumulated in ascending neighbor order.
inline Configuration sync_round(const NodeWeights& weights, const Vector& input,
                                const Configuration& prev) {
  const std::size_t n = weights.self_weight.size();
  detail::require_same(input.size(), n, "sync_round input");
  detail::require_same(prev.outputs.size(), n, "sync_round configuration");
  Configuration next{Vector(n), prev.round_index + 1};
  for (std::size_t i = 0; i < n; ++i) {
    double o = weights.self_weight[i] * input[i];
    for (const auto& e : weights.neighbor_weight[i]) o = o + e.weight * prev.outputs[e.neighbor];
    next.outputs[i] = o;
  }
  return next;
}

// Stateful runner for long runs that do not need the whole trace.
class SyncEngine {
 public:
  SyncEngine(const WeightedGraph& g, Vector initial)
      : weights_(node_weights(g)), state_{std::move(initial), 0} {
    detail::require_same(state_.outputs.size(), g.size(), "initial configuration");
  }

  const Configuration& step(const Vector& input) {
    state_ = sync_round(weights_, input, state_);
    return state_;
  }

  const Configuration& state() const noexcept { return state_; }
  const NodeWeights& weights() const noexcept { return weights_; }

 private:
  NodeWeights weights_;
  Configuration state_;
};

inline RunTrace run_sync(const WeightedGraph& g, const InputSequence& seq, const Configuration& initial) {
  if (seq.size() < 1) throw Error("run_sync needs at least one input vector");
  SyncEngine engine(g, initial.outputs);
  RunTrace trace;
  trace.initial = {initial.outputs, 0};
  trace.inputs = seq.vectors;
  trace.rounds.reserve(seq.size());
  for (const auto& input : seq.vectors) trace.rounds.push_back(engine.step(input));
  return trace;
}

// CSV: round,node,input,output. Round 0 is the initial configuration and has
// an empty input field.
inline void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "round,node,input,output\n";
  const std::size_t n = trace.initial.outputs.size();
  for (std::size_t i = 0; i < n; ++i) out << "0," << i << ",," << format_double(trace.initial.outputs[i]) << '\n';
  for (std::size_t r = 1; r <= trace.size(); ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      out << r << ',' << i << ',' << format_double(trace.inputs[r - 1][i]) << ','
          << format_double(trace.rounds[r - 1].outputs[i]) << '\n';
    }
  }
}

}  // namespace ssiter
