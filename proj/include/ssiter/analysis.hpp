#pragma once

// Error traces, convergence envelopes, the closed-form error recursion, and
// output-distribution laws, plus the checks comparing them with runs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ssiter/errors.hpp"
#include "ssiter/linalg.hpp"
#include "ssiter/sync_engine.hpp"
#include "ssiter/topology.hpp"

namespace ssiter {

enum class EngineKind { kSync, kAsync };

/// Envelope eps(dt) = delta * c1 + c2^dt * z.
struct BoundParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double z = 0.0;
  double delta = 0.0;
  EngineKind variant = EngineKind::kSync;

  double at(std::size_t dt) const { return delta * c1 + std::pow(c2, static_cast<double>(dt)) * z; }
};

/// Sync: c1 = ||A|| / (1 - ||B||). Async: c1 = 1 / (1 - ||B||). c2 = ||B||.
inline BoundParams bound_params(const JacobiSplit& split, double delta, double z, EngineKind variant) {
  if (!(split.norm_b < 1.0)) throw NotContractive(split.norm_b);
  const double num = variant == EngineKind::kSync ? split.norm_a : 1.0;
  return {num / (1.0 - split.norm_b), split.norm_b, z, delta, variant};
}

inline std::vector<double> envelope(const BoundParams& p, std::size_t horizon) {
  std::vector<double> e(horizon + 1);
  for (std::size_t dt = 0; dt <= horizon; ++dt) e[dt] = p.at(dt);
  return e;
}

inline std::vector<double> sync_envelope(const JacobiSplit& split, double delta, double z, std::size_t horizon) {
  return envelope(bound_params(split, delta, z, EngineKind::kSync), horizon);
}

inline std::vector<double> async_envelope(const JacobiSplit& split, double delta, double z, std::size_t rounds) {
  return envelope(bound_params(split, delta, z, EngineKind::kAsync), rounds);
}

// ---------------------------------------------------------------------------
// Error traces

struct ErrorTrace {
  std::vector<Vector> c;       // c(dt) = O(dt) - u, dt = 0..len
  std::vector<double> norms;   // ||c(dt)||_inf

  std::size_t size() const noexcept { return norms.size(); }
};

inline ErrorTrace error_trace(const std::vector<Vector>& outputs, const Vector& u) {
  ErrorTrace e;
  e.c.reserve(outputs.size());
  e.norms.reserve(outputs.size());
  for (const auto& o : outputs) {
    e.c.push_back(o - u);
    e.norms.push_back(inf_norm(e.c.back()));
  }
  return e;
}

/// Includes dt = 0 (the initial configuration).
inline ErrorTrace error_trace(const RunTrace& trace, const Vector& u) {
  std::vector<Vector> outputs;
  outputs.reserve(trace.size() + 1);
  for (std::size_t r = 0; r <= trace.size(); ++r) outputs.push_back(trace.output(r));
  return error_trace(outputs, u);
}

// ---------------------------------------------------------------------------
// Closed form: c(dt) = sum_{j=0}^{dt-1} B^j A D(dt-j) + B^dt c(0)
// evaluated term by term from explicit powers of B. deviations[k] is D(k+1).

inline Vector closed_form_error(const JacobiSplit& split, std::span<const Vector> deviations, const Vector& c0,
                                std::size_t dt) {
  if (deviations.size() < dt) throw DimensionMismatch("closed_form_error: fewer deviations than rounds");
  const std::size_t n = c0.size();
  Vector sum(n);
  Matrix power = Matrix::identity(n);  // B^j
  for (std::size_t j = 0; j < dt; ++j) {
    sum = sum + power * (split.a * deviations[dt - j - 1]);
    power = power * split.b;
  }
  return sum + power * c0;
}

// Same sum with the powers B^0..B^horizon cached, for checking every round of
// a long run.
class ClosedFormOracle {
 public:
  ClosedFormOracle(const JacobiSplit& split, std::span<const Vector> deviations, Vector c0)
      : c0_(std::move(c0)) {
    const std::size_t horizon = deviations.size();
    powers_.reserve(horizon + 1);
    powers_.push_back(Matrix::identity(c0_.size()));
    for (std::size_t j = 1; j <= horizon; ++j) powers_.push_back(powers_.back() * split.b);
    driven_.reserve(horizon);
    for (const auto& d : deviations) driven_.push_back(split.a * d);
  }

  std::size_t horizon() const noexcept { return driven_.size(); }

  Vector at(std::size_t dt) const {
    if (dt > horizon()) throw DimensionMismatch("closed-form oracle horizon exceeded");
    Vector sum(c0_.size());
    for (std::size_t j = 0; j < dt; ++j) sum = sum + powers_[j] * driven_[dt - j - 1];
    return sum + powers_[dt] * c0_;
  }

 private:
  Vector c0_;
  std::vector<Matrix> powers_;
  std::vector<Vector> driven_;
};

// ---------------------------------------------------------------------------
// Distributions

struct DistributionSpec {
  Vector mean;
  Matrix covariance;
};

/// Limit law of the output under i.i.d. N(v, S) inputs as stated for the
/// scheme: N(W^-1 v, W^-1 S W^-T).
inline DistributionSpec theoretical_output_distribution(const WeightedGraph& g, const DistributionSpec& input) {
  detail::require_same(input.mean.size(), g.size(), "input mean");
  detail::require_same(input.covariance.size(), g.size(), "input covariance");
  cholesky_psd(input.covariance);
  const Matrix winv = mat_inverse(g.w);
  return {solve_exact(g.w, input.mean), symmetrized(winv * input.covariance * transpose(winv))};
}

/// Law of O(k+1) given O(k): N(A v + B O(k), A S A^T).
inline DistributionSpec per_round_distribution(const JacobiSplit& split, const Vector& v, const Matrix& sigma_v,
                                               const Vector& prev_out) {
  return {split.a * v + split.b * prev_out, split.a * sigma_v * transpose(split.a)};
}

/// Stationary covariance of the synchronous recursion O(k+1) = A I + B O(k)
/// with independent rounds: C = sum_j B^j A S A^T B^jT, the solution of
/// C = B C B^T + A S A^T. Computed by squaring (S_{k+1} = S_k + M S_k M^T,
/// M <- M^2).
inline Matrix stationary_output_covariance(const JacobiSplit& split, const Matrix& sigma_v) {
  if (!(split.norm_b < 1.0)) throw NotContractive(split.norm_b);
  Matrix s = split.a * sigma_v * transpose(split.a);
  Matrix m = split.b;
  for (int k = 0; k < 64 && inf_norm(m) > 1e-18; ++k) {
    s = s + m * s * transpose(m);
    m = m * m;
  }
  return symmetrized(s);
}

/// Unbiased sample mean and covariance of samples[burn_in..].
inline DistributionSpec estimate_output_distribution(std::span<const Vector> samples, std::size_t burn_in) {
  if (samples.size() < burn_in + 2) throw TooFewSamples("need at least two samples after burn-in");
  const std::size_t n = samples.front().size();
  const auto used = samples.subspan(burn_in);
  const double count = static_cast<double>(used.size());
  Vector mean(n);
  for (const auto& s : used)
    for (std::size_t i = 0; i < n; ++i) mean[i] += s[i];
  for (std::size_t i = 0; i < n; ++i) mean[i] /= count;
  Matrix cov(n);
  for (const auto& s : used) {
    for (std::size_t i = 0; i < n; ++i) {
      const double di = s[i] - mean[i];
      for (std::size_t j = 0; j <= i; ++j) cov(i, j) += di * (s[j] - mean[j]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cov(i, j) /= (count - 1.0);
      cov(j, i) = cov(i, j);
    }
  }
  return {mean, cov};
}

/// Uses the outputs O(burn_in+1..len) of a synchronous trace.
inline DistributionSpec estimate_output_distribution(const RunTrace& trace, std::size_t burn_in) {
  std::vector<Vector> samples;
  samples.reserve(trace.size());
  for (const auto& c : trace.rounds) samples.push_back(c.outputs);
  return estimate_output_distribution(samples, burn_in);
}

/// ceil(log(1e-6) / log ||B||): rounds after which the initial-state term is
/// below 1e-6 of its starting size.
inline std::size_t default_burn_in(double norm_b) {
  if (!(norm_b < 1.0)) throw NotContractive(norm_b);
  if (norm_b <= 0.0) return 1;
  return static_cast<std::size_t>(std::ceil(std::log(1e-6) / std::log(norm_b)));
}

inline double relative_frobenius_error(const Matrix& estimate, const Matrix& reference) {
  const double ref = frobenius_norm(reference);
  const double diff = frobenius_norm(estimate - reference);
  return ref == 0.0 ? diff : diff / ref;
}

// ---------------------------------------------------------------------------
// Bound checking

struct BoundReport {
  struct Row {
    std::size_t dt;
    double observed;
    double envelope;
    double slack;  // envelope - observed
    bool violated;
  };
  std::vector<Row> rows;
  std::size_t violations = 0;
  double max_violation = 0.0;  // max(observed - envelope), 0 if none exceeds
  double tolerance = 0.0;

  /// First dt at which the envelope drops below threshold.
  std::optional<std::size_t> first_below(double threshold) const {
    for (const auto& r : rows)
      if (r.envelope < threshold) return r.dt;
    return std::nullopt;
  }
};

/// Flags rounds with observed > envelope + 1e-9 * max(1, z).
inline BoundReport check_bound(std::span<const double> observed, std::span<const double> env, double z) {
  if (observed.size() != env.size()) throw DimensionMismatch("check_bound: trace and envelope lengths differ");
  BoundReport rep;
  rep.tolerance = 1e-9 * std::max(1.0, z);
  for (std::size_t dt = 0; dt < observed.size(); ++dt) {
    const bool bad = observed[dt] > env[dt] + rep.tolerance;
    rep.rows.push_back({dt, observed[dt], env[dt], env[dt] - observed[dt], bad});
    if (bad) ++rep.violations;
    rep.max_violation = std::max(rep.max_violation, observed[dt] - env[dt]);
  }
  return rep;
}

inline void write_bound_report_csv(std::ostream& out, const BoundReport& rep) {
  out << "dt,observed,envelope,slack,violated\n";
  for (const auto& r : rep.rows) {
    out << r.dt << ',' << format_double(r.observed) << ',' << format_double(r.envelope) << ','
        << format_double(r.slack) << ',' << (r.violated ? 1 : 0) << '\n';
  }
}

// CSV: kind,i,j,value with kind in {mean, covariance}; j empty for means.
inline void write_distribution_csv(std::ostream& out, const DistributionSpec& d, const char* label) {
  for (std::size_t i = 0; i < d.mean.size(); ++i) out << label << "_mean," << i << ",," << format_double(d.mean[i]) << '\n';
  for (std::size_t i = 0; i < d.covariance.size(); ++i)
    for (std::size_t j = 0; j < d.covariance.size(); ++j)
      out << label << "_covariance," << i << ',' << j << ',' << format_double(d.covariance(i, j)) << '\n';
}

}  // namespace ssiter
