#pragma once

// Weighted communication graphs: circle, random unit disc and file-loaded.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "ssiter/errors.hpp"
#include "ssiter/linalg.hpp"
#include "ssiter/random.hpp"

namespace ssiter {

struct WeightedGraph {
  Matrix w;
  /// adjacency[i] = { j != i : w(i,j) != 0 }, ascending.
  std::vector<std::vector<std::size_t>> adjacency;
  bool dominant = false;
  bool connected = true;

  std::size_t size() const noexcept { return w.size(); }
};

/// Per-node weights each node carries as part of its program.
struct NodeWeights {
  struct Edge {
    std::size_t neighbor;
    double weight;
  };
  std::vector<double> self_weight;
  std::vector<std::vector<Edge>> neighbor_weight;  // same order as adjacency
};

namespace detail {

inline std::vector<std::vector<std::size_t>> adjacency_of(const Matrix& w) {
  std::vector<std::vector<std::size_t>> adj(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j)
      if (j != i && w(i, j) != 0.0) adj[i].push_back(j);
  return adj;
}

// Weak connectivity of the undirected shadow of the adjacency.
inline bool is_connected(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  if (n == 0) return true;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : adj[i]) {
      const std::size_t a = find(i), b = find(j);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
  }
  return components == 1;
}

}  // namespace detail

inline WeightedGraph make_graph(Matrix w) {
  WeightedGraph g;
  g.adjacency = detail::adjacency_of(w);
  g.connected = detail::is_connected(g.adjacency);
  g.dominant = is_normalized_diag_dominant(w);
  g.w = std::move(w);
  return g;
}

/// Circulant ring: W_ii = diag, W_i,i+-1 = off (mod n).
inline WeightedGraph build_circle(std::size_t n, double diag, double off) {
  if (n < 3) throw DominanceViolated("circle needs at least 3 nodes");
  if (off == 0.0) throw DominanceViolated("circle off-diagonal weight must be nonzero");
  if (!(std::abs(diag) >= 1.0) || !(std::abs(diag) > 2.0 * std::abs(off))) {
    throw DominanceViolated("circle weights violate normalized diagonal dominance (|diag| >= 1, |diag| > 2|off|)");
  }
  Matrix w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w(i, i) = diag;
    w(i, (i + 1) % n) = off;
    w(i, (i + n - 1) % n) = off;
  }
  return make_graph(std::move(w));
}

/// Random geometric graph on [0, side]^2. Edge weights are drawn per directed
/// edge uniformly in [-1, 1]; the diagonal is max(1, rowsum / ratio), which
/// makes every row of B sum to at most ratio in absolute value.
inline WeightedGraph build_unit_disc(std::size_t n, double side, double radius,
                                     double dominance_ratio, std::uint64_t seed) {
  if (n < 2) throw DominanceViolated("unit disc needs at least 2 nodes");
  if (!(side > 0.0)) throw DominanceViolated("unit disc side must be positive");
  if (!(dominance_ratio > 0.0 && dominance_ratio < 1.0))
    throw DominanceViolated("dominance ratio must lie in (0, 1)");

  random::CounterRng rng(random::derive({seed, 0x756e6974646973ULL}));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(0.0, side);
    y[i] = rng.uniform(0.0, side);
  }

  Matrix w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (std::hypot(x[i] - x[j], y[i] - y[j]) <= radius) {
        double v = rng.uniform(-1.0, 1.0);
        while (v == 0.0) v = rng.uniform(-1.0, 1.0);
        w(i, j) = v;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row += std::abs(w(i, j));
    w(i, i) = std::max(1.0, row / dominance_ratio);
  }
  return make_graph(std::move(w));
}

/// Parses the matrix text format. Non-dominant matrices load fine; the
/// `dominant` flag records the check.
inline WeightedGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file: " + path);
  return make_graph(read_matrix(in));
}

inline void save_graph(const std::string& path, const WeightedGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write matrix file: " + path);
  write_matrix(out, g.w);
  if (!out) throw Error("failed writing matrix file: " + path);
}

inline NodeWeights node_weights(const WeightedGraph& g) {
  const std::size_t n = g.size();
  NodeWeights nw;
  nw.self_weight.resize(n);
  nw.neighbor_weight.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double wii = g.w(i, i);
    if (wii == 0.0) throw ZeroDiagonal(i);
    nw.self_weight[i] = 1.0 / wii;
    for (std::size_t j : g.adjacency[i]) {
      nw.neighbor_weight[i].push_back({j, jacobi_offdiag(g.w(i, j), wii)});
    }
  }
  return nw;
}

}  // namespace ssiter
