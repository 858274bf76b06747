#pragma once

// Input sequences I(1), I(2), ... : constant, delta-bounded box and Gaussian.
//
// Draws come from a counter-based stream addressed by (node, index), where
// index is the 1-based round (sync) or the node's own sweep count (async).
// A synchronous run and an asynchronous run with the same model therefore see
// the same logical values.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ssiter/errors.hpp"
#include "ssiter/linalg.hpp"
#include "ssiter/random.hpp"

namespace ssiter {

struct ConstantInput {
  Vector center;
};

struct BoxInput {
  Vector center;
  double delta = 0.0;
};

struct GaussianInput {
  Vector mean;
  Matrix covariance;
};

struct InputModel {
  std::variant<ConstantInput, BoxInput, GaussianInput> variant;
  std::uint64_t seed = 0;

  const Vector& center() const {
    return std::visit(
        [](const auto& m) -> const Vector& {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GaussianInput>) {
            return m.mean;
          } else {
            return m.center;
          }
        },
        variant);
  }
};

inline InputModel constant_model(Vector v) { return {ConstantInput{std::move(v)}, 0}; }

inline InputModel box_model(Vector v, double delta, std::uint64_t seed) {
  return {BoxInput{std::move(v), delta}, seed};
}

inline InputModel gaussian_model(Vector mean, Matrix covariance, std::uint64_t seed) {
  return {GaussianInput{std::move(mean), std::move(covariance)}, seed};
}

struct InputSequence {
  Vector center;
  std::vector<Vector> vectors;     // I(1..len)
  std::vector<Vector> deviations;  // D(r) = I(r) - v

  std::size_t size() const noexcept { return vectors.size(); }
};

/// True iff every ||I(r) - v||_inf <= delta.
inline bool is_delta_bounded(const InputSequence& seq, const Vector& v, double delta) {
  for (const auto& x : seq.vectors)
    if (inf_norm(x - v) > delta) return false;
  return true;
}

class InputStream {
 public:
  InputStream(InputModel model, std::size_t n) : model_(std::move(model)), n_(n) {
    detail::require_same(model_.center().size(), n, "input model dimension");
    if (const auto* box = std::get_if<BoxInput>(&model_.variant)) {
      if (!(box->delta >= 0.0)) throw Error("box radius delta must be >= 0");
    }
    if (const auto* g = std::get_if<GaussianInput>(&model_.variant)) {
      detail::require_same(g->covariance.size(), n, "covariance dimension");
      factor_ = cholesky_psd(g->covariance);
      diagonal_ = true;
      for (std::size_t i = 0; i < n && diagonal_; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j && g->covariance(i, j) != 0.0) {
            diagonal_ = false;
            break;
          }
    }
  }

  std::size_t size() const noexcept { return n_; }
  const InputModel& model() const noexcept { return model_; }
  const Vector& center() const { return model_.center(); }

  /// Inputs of distinct nodes are drawn independently (constant, box, or
  /// Gaussian with diagonal covariance). Required for per-node sampling.
  bool per_node_independent() const noexcept { return diagonal_; }

  /// Value of node i at the given 1-based index.
  double node_value(std::size_t i, std::uint64_t index) const {
    return std::visit(
        [&](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ConstantInput>) {
            return m.center[i];
          } else if constexpr (std::is_same_v<M, BoxInput>) {
            const double u = random::uniform01(key(index), i);
            return m.center[i] + m.delta * (2.0 * u - 1.0);
          } else {
            if (!diagonal_) throw BadCovariance("per-node sampling requires a diagonal covariance");
            return m.mean[i] + factor_(i, i) * random::standard_normal(key(index), i);
          }
        },
        model_.variant);
  }

  /// Whole input vector at the given 1-based index.
  Vector vector_at(std::uint64_t index) const {
    Vector x(n_);
    if (diagonal_) {
      for (std::size_t i = 0; i < n_; ++i) x[i] = node_value(i, index);
      return x;
    }
    const auto& g = std::get<GaussianInput>(model_.variant);
    Vector z(n_);
    for (std::size_t i = 0; i < n_; ++i) z[i] = random::standard_normal(key(index), i);
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += factor_(i, j) * z[j];
      x[i] = g.mean[i] + acc;
    }
    return x;
  }

 private:
  std::uint64_t key(std::uint64_t index) const {
    return random::derive({model_.seed, 0x696e707574ULL, index});
  }

  InputModel model_;
  std::size_t n_;
  Matrix factor_;
  bool diagonal_ = true;
};

/// I(1..len) from the model.
inline InputSequence gen_sequence(const InputModel& model, std::size_t n, std::size_t len) {
  if (len < 1) throw Error("input sequence length must be >= 1");
  InputStream stream(model, n);
  InputSequence seq;
  seq.center = stream.center();
  seq.vectors.reserve(len);
  seq.deviations.reserve(len);
  for (std::size_t r = 1; r <= len; ++r) {
    seq.vectors.push_back(stream.vector_at(r));
    seq.deviations.push_back(seq.vectors.back() - seq.center);
  }
  return seq;
}

/// Per-round, per-coordinate signs (+1 / -1) of an adversarial box sequence.
using SignPattern = std::vector<std::vector<int>>;

inline SignPattern constant_signs(std::size_t n, std::size_t len, int sign) {
  return SignPattern(len, std::vector<int>(n, sign));
}

/// +1 on odd rounds, -1 on even rounds.
inline SignPattern alternating_signs(std::size_t n, std::size_t len) {
  SignPattern p(len, std::vector<int>(n));
  for (std::size_t r = 0; r < len; ++r)
    for (auto& s : p[r]) s = (r % 2 == 0) ? 1 : -1;
  return p;
}

inline SignPattern random_signs(std::size_t n, std::size_t len, std::uint64_t seed) {
  random::CounterRng rng(random::derive({seed, 0x7369676e73ULL}));
  SignPattern p(len, std::vector<int>(n));
  for (auto& row : p)
    for (auto& s : row) s = rng.uniform() < 0.5 ? -1 : 1;
  return p;
}

/// Every coordinate of D(r) is exactly +-delta.
inline InputSequence adversarial_box_sequence(const Vector& v, double delta, std::size_t len,
                                              const SignPattern& signs) {
  if (!(delta >= 0.0)) throw Error("box radius delta must be >= 0");
  if (signs.size() < len) throw DimensionMismatch("sign pattern shorter than sequence");
  InputSequence seq;
  seq.center = v;
  for (std::size_t r = 0; r < len; ++r) {
    detail::require_same(signs[r].size(), v.size(), "sign pattern width");
    Vector d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = signs[r][i] >= 0 ? delta : -delta;
    seq.vectors.push_back(v + d);
    seq.deviations.push_back(std::move(d));
  }
  return seq;
}

// CSV: header "round,x0,...,x{n-1}", then one row per round.
inline void write_sequence_csv(std::ostream& out, const InputSequence& seq) {
  const std::size_t n = seq.center.size();
  out << "round";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t r = 0; r < seq.size(); ++r) {
    out << (r + 1);
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(seq.vectors[r][i]);
    out << '\n';
  }
}

/// Loads a sequence dumped by write_sequence_csv; deviations are taken
/// relative to the supplied center.
inline InputSequence read_sequence_csv(std::istream& in, const Vector& center) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing CSV header");
  ++line_no;
  InputSequence seq;
  seq.center = center;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');  // round
    Vector x(center.size());
    std::size_t i = 0;
    while (std::getline(ls, cell, ',')) {
      if (i >= center.size()) throw DimensionMismatch("CSV row " + std::to_string(line_no) + " too wide");
      try {
        x[i++] = std::stod(cell);
      } catch (const std::exception&) {
        throw ParseError(line_no, "not a number: '" + cell + "'");
      }
    }
    if (i != center.size()) throw DimensionMismatch("CSV row " + std::to_string(line_no) + " too narrow");
    seq.deviations.push_back(x - center);
    seq.vectors.push_back(std::move(x));
  }
  return seq;
}

}  // namespace ssiter
