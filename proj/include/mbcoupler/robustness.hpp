// Copyright 2026 The mbcoupler Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mbcoupler/gadget.hpp"
#include "mbcoupler/parallel.hpp"
#include "mbcoupler/rng.hpp"
#include "mbcoupler/spin.hpp"

namespace mbc {

// Tolerance analysis for the two-loop coupler: relative mutual-inductance
// mismatches on the outer loop (all 2N circuits) and on the inner loop (the
// N ancillae) perturb the nominal couplings to first order.

struct MismatchSample {
  std::vector<double> outer;  // 2N entries: logical 0..N-1, ancilla N..2N-1
  std::vector<double> inner;  // N entries, one per ancilla
};

// Sample k of a seeded batch: 3N independent unit normals from the
// per-sample stream, outer entries first, then inner.
inline MismatchSample draw_mismatch_sample(int N, std::uint64_t seed,
                                           std::uint64_t index) {
  Xoshiro256ss rng = sample_stream(seed, index);
  MismatchSample m;
  m.outer.resize(static_cast<std::size_t>(2 * N));
  m.inner.resize(static_cast<std::size_t>(N));
  for (auto& v : m.outer) v = rng.gaussian();
  for (auto& v : m.inner) v = rng.gaussian();
  return m;
}

namespace detail {

inline void check_two_loop_kind(const GadgetSpec& spec, const char* op) {
  if (spec.kind == GadgetKind::three_local_single_ancilla)
    throw std::invalid_argument(std::string(op) +
                                ": mismatch model covers the two-loop design "
                                "(n-local or symmetric kinds)");
}

}  // namespace detail

// First-order perturbation from the mismatches: every outer-loop coupling
// J_kl is scaled by (1 + eps_k + eps_l), so logical-logical and
// logical-ancilla pairs gain J_a (eps_k + eps_l); the inner loop's imperfect
// cancellation leaves -J_a (eps_i + eps_j) between ancilla pairs. Cross
// terms eps_k eps_l are dropped.
inline IsingHamiltonian build_error_hamiltonian(const GadgetSpec& spec,
                                                const MismatchSample& m) {
  detail::check_two_loop_kind(spec, "build_error_hamiltonian");
  const int N = spec.N;
  if (m.outer.size() != static_cast<std::size_t>(2 * N) ||
      m.inner.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument(
        "build_error_hamiltonian: sample sized for N = " +
        std::to_string(m.inner.size()) + ", spec has N = " + std::to_string(N));
  IsingHamiltonian err(2 * N);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      err.add_pair(i, j,
                   spec.J_a * (m.outer[static_cast<std::size_t>(i)] +
                               m.outer[static_cast<std::size_t>(j)]));
  for (int i = 0; i < N; ++i)
    for (int a = 0; a < N; ++a)
      err.add_pair(i, N + a,
                   spec.J_a * (m.outer[static_cast<std::size_t>(i)] +
                               m.outer[static_cast<std::size_t>(N + a)]));
  for (int a = 0; a < N; ++a)
    for (int b = a + 1; b < N; ++b)
      err.add_pair(N + a, N + b,
                   -spec.J_a * (m.inner[static_cast<std::size_t>(a)] +
                                m.inner[static_cast<std::size_t>(b)]));
  return err;
}

// Ancilla field adjustments: each delta cancels the mean, over the 2^N
// counting states, of the error field seen by that ancilla. Logical fields
// are never touched. Linear in err.
inline std::vector<double> correct_ancilla_fields(const GadgetSpec& spec,
                                                  const IsingHamiltonian& err) {
  detail::check_two_loop_kind(spec, "correct_ancilla_fields");
  const int N = spec.N;
  if (err.n() != 2 * N)
    throw std::invalid_argument("correct_ancilla_fields: error Hamiltonian must"
                                " cover all 2N spins");
  std::vector<double> mean_field(static_cast<std::size_t>(N), 0.0);
  const std::uint64_t sectors = std::uint64_t{1} << N;
  for (std::uint64_t lc = 0; lc < sectors; ++lc) {
    const int k = std::popcount(lc);
    const std::uint64_t bits = lc | (counting_ancilla_bits(spec, k) << N);
    for (const Term& t : err.terms()) {
      const double value =
          (std::popcount(t.support & ~bits) & 1) ? -t.weight : t.weight;
      for (int a = 0; a < N; ++a)
        if ((t.support >> (N + a)) & 1) {
          // Field on ancilla a: term value divided by the ancilla's spin.
          const int s = (bits >> (N + a)) & 1 ? +1 : -1;
          mean_field[static_cast<std::size_t>(a)] += value * s;
        }
    }
  }
  std::vector<double> delta(static_cast<std::size_t>(N));
  for (int a = 0; a < N; ++a)
    delta[static_cast<std::size_t>(a)] =
        -mean_field[static_cast<std::size_t>(a)] / static_cast<double>(sectors);
  return delta;
}

struct FailureVerdict {
  bool failed = false;
  double margin = 0.0;  // min spurious energy - max non-spurious energy
  std::vector<double> correction;  // ancilla field deltas actually applied
};

namespace detail {

// min over spurious configurations minus max over non-spurious ones, where
// non-spurious means the ancillae hold the canonical counting pattern of the
// logical sector (which forces total magnetization zero).
inline double spurious_margin(const IsingHamiltonian& h_tot,
                              const GadgetSpec& spec) {
  const int N = spec.N;
  const std::uint64_t count = std::uint64_t{1} << (2 * N);
  const std::uint64_t logical_mask = (std::uint64_t{1} << N) - 1;
  double min_spurious = 0.0, max_counting = 0.0;
  bool seen_spurious = false, seen_counting = false;
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const std::uint64_t lc = bits & logical_mask;
    const std::uint64_t anc = bits >> N;
    const double e = h_tot.energy_bits(bits);
    if (anc == counting_ancilla_bits(spec, std::popcount(lc))) {
      if (!seen_counting || e > max_counting) max_counting = e;
      seen_counting = true;
    } else {
      if (!seen_spurious || e < min_spurious) min_spurious = e;
      seen_spurious = true;
    }
  }
  return min_spurious - max_counting;
}

// Caches the gadget, the unit error Hamiltonian, and the unit correction so
// that sweeping sigma only rescales weights. The correction is linear in the
// error, so delta(sigma * err) = sigma * delta(err).
class MarginEvaluator {
 public:
  MarginEvaluator(const GadgetSpec& spec, const MismatchSample& m, bool correct)
      : spec_(spec),
        gadget_(build_gadget(spec)),
        err_(build_error_hamiltonian(spec, m)),
        correct_(correct) {
    if (correct_) unit_delta_ = correct_ancilla_fields(spec, err_);
    check_enumerable(2 * spec.N);
  }

  double margin(double sigma) const {
    IsingHamiltonian h_tot = gadget_;
    h_tot.add_scaled(err_, sigma);
    if (correct_)
      for (int a = 0; a < spec_.N; ++a)
        h_tot.add_field(spec_.N + a,
                        sigma * unit_delta_[static_cast<std::size_t>(a)]);
    return spurious_margin(h_tot, spec_);
  }

  std::vector<double> correction(double sigma) const {
    std::vector<double> out(static_cast<std::size_t>(spec_.N), 0.0);
    if (correct_)
      for (int a = 0; a < spec_.N; ++a)
        out[static_cast<std::size_t>(a)] =
            sigma * unit_delta_[static_cast<std::size_t>(a)];
    return out;
  }

 private:
  GadgetSpec spec_;
  IsingHamiltonian gadget_;
  IsingHamiltonian err_;
  bool correct_;
  std::vector<double> unit_delta_;
};

}  // namespace detail

// Builds H_tot = gadget + sigma_rel * error (+ ancilla field correction when
// requested), enumerates, and reports whether any spurious state fell below
// the non-spurious band.
inline FailureVerdict failure_check(const GadgetSpec& spec, double sigma_rel,
                                    const MismatchSample& m, bool correct) {
  detail::MarginEvaluator eval(spec, m, correct);
  FailureVerdict v;
  v.margin = eval.margin(sigma_rel);
  v.failed = v.margin < 0.0;
  v.correction = eval.correction(sigma_rel);
  return v;
}

// Mismatch scale at which the margin crosses zero along the fixed sample
// direction, located by bisection to 1e-6. Energies are linear in sigma, so
// the margin is concave and the non-failing set is an interval starting at
// zero. nullopt means no crossing below sigma = 1 (reported as ">= 1").
inline std::optional<double> critical_sigma(const GadgetSpec& spec,
                                            const MismatchSample& m,
                                            bool correct) {
  detail::MarginEvaluator eval(spec, m, correct);
  if (eval.margin(0.0) < 0.0) return 0.0;
  if (eval.margin(1.0) >= 0.0) return std::nullopt;
  double lo = 0.0, hi = 1.0;
  while (hi - lo >= 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (eval.margin(mid) < 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

struct YieldPoint {
  double sigma = 0.0;
  int samples = 0;
  int passes = 0;
  double yield = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 95% Wilson interval
};

namespace detail {

inline std::pair<double, double> wilson_interval(int passes, int samples) {
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = samples, p = static_cast<double>(passes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace detail

// Fraction of seeded mismatch samples that do not fail at each sigma, in
// corrected mode by default. Sample k is drawn once from (seed, k) and reused
// across the grid; results are independent of thread count.
inline std::vector<YieldPoint> yield_curve(const GadgetSpec& spec,
                                           std::span<const double> sigma_grid,
                                           int samples, std::uint64_t seed,
                                           bool correct = true,
                                           int threads = 0) {
  if (samples < 1)
    throw std::invalid_argument("yield_curve: samples must be >= 1");
  std::vector<std::atomic<int>> passes(sigma_grid.size());
  for (auto& c : passes) c.store(0);
  parallel_for(static_cast<std::uint64_t>(samples), threads,
               [&](std::uint64_t k) {
                 const MismatchSample m =
                     draw_mismatch_sample(spec.N, seed, k);
                 detail::MarginEvaluator eval(spec, m, correct);
                 for (std::size_t g = 0; g < sigma_grid.size(); ++g)
                   if (eval.margin(sigma_grid[g]) >= 0.0)
                     passes[g].fetch_add(1, std::memory_order_relaxed);
               });
  std::vector<YieldPoint> out(sigma_grid.size());
  for (std::size_t g = 0; g < sigma_grid.size(); ++g) {
    out[g].sigma = sigma_grid[g];
    out[g].samples = samples;
    out[g].passes = passes[g].load();
    out[g].yield = static_cast<double>(out[g].passes) / samples;
    const auto ci = detail::wilson_interval(out[g].passes, samples);
    out[g].ci_low = ci.first;
    out[g].ci_high = ci.second;
  }
  return out;
}

// Smallest critical sigma over a seeded batch; samples with no crossing
// below 1 are counted separately.
struct CriticalSigmaBatch {
  std::vector<std::optional<double>> values;  // per sample index
  double min_sigma = 0.0;                     // over samples with a crossing
  int no_crossing = 0;
};

inline CriticalSigmaBatch critical_sigma_batch(const GadgetSpec& spec,
                                               int samples, std::uint64_t seed,
                                               bool correct, int threads = 0) {
  if (samples < 1)
    throw std::invalid_argument("critical_sigma_batch: samples must be >= 1");
  CriticalSigmaBatch batch;
  batch.values.resize(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::uint64_t>(samples), threads,
               [&](std::uint64_t k) {
                 const MismatchSample m =
                     draw_mismatch_sample(spec.N, seed, k);
                 batch.values[k] = critical_sigma(spec, m, correct);
               });
  bool any = false;
  for (const auto& v : batch.values) {
    if (!v) {
      ++batch.no_crossing;
    } else if (!any || *v < batch.min_sigma) {
      batch.min_sigma = *v;
      any = true;
    }
  }
  if (!any) batch.min_sigma = 1.0;
  return batch;
}

// Which unordered triples of the 2N outer-loop circuits carry the three-body
// term. outer_all keeps every triple; outer_minus_ancilla removes triples
// internal to the ancilla set (treating them as cancelled by the inner loop
// at the same order).
enum class TripleSet { outer_all, outer_minus_ancilla };

// Largest |E3 / E2| the coupler tolerates before a spurious state drops below
// the highest non-spurious one. E2 is the mean pairwise coupling of the
// gadget; the three-body term sign either matches or opposes it.
inline double three_body_tolerance(const GadgetSpec& spec, bool same_sign,
                                   TripleSet convention = TripleSet::outer_all) {
  detail::check_two_loop_kind(spec, "three_body_tolerance");
  const IsingHamiltonian gadget = build_gadget(spec);
  check_enumerable(2 * spec.N);

  double e2 = 0.0;
  int pairs = 0;
  for (const Term& t : gadget.terms())
    if (t.order() == 2) {
      e2 += t.weight;
      ++pairs;
    }
  e2 /= std::max(pairs, 1);

  const int n = 2 * spec.N;
  IsingHamiltonian triples(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        if (convention == TripleSet::outer_minus_ancilla && i >= spec.N)
          continue;  // i >= N implies j, k >= N: ancilla-internal triple
        triples.add_term({i, j, k}, 1.0);
      }

  const double direction = (same_sign ? 1.0 : -1.0) * std::abs(e2);
  const auto margin = [&](double ratio) {
    IsingHamiltonian h_tot = gadget;
    h_tot.add_scaled(triples, direction * ratio);
    return detail::spurious_margin(h_tot, spec);
  };

  if (margin(0.0) < 0.0) return 0.0;
  double hi = 0.25;
  while (margin(hi) >= 0.0) {
    hi *= 2.0;
    if (hi > 64.0)
      throw std::runtime_error(
          "three_body_tolerance: no failure up to |E3/E2| = 64");
  }
  double lo = hi * 0.5 >= 0.25 ? hi * 0.5 : 0.0;
  while (hi - lo >= 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) < 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Analytic lower bound on the correctable relative mismatch,
//   min(|J_a - q_0| - |J_N|, q_0 - |J_N|) / (|J_a| (2N(N-1) + 2N(2N-1))).
// Simple but not necessarily tight.
inline double correctability_bound(int N, double J_a, double q_0, double J_N) {
  const double numerator =
      std::min(std::abs(J_a - q_0) - std::abs(J_N), q_0 - std::abs(J_N));
  const double denominator =
      std::abs(J_a) * (2.0 * N * (N - 1) + 2.0 * N * (2 * N - 1));
  return numerator / denominator;
}

}  // namespace mbc
