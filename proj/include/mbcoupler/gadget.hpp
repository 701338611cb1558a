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

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbcoupler/spin.hpp"

namespace mbc {

// Ancilla-based couplers reproducing the low-energy spectrum of a target
// multi-body interaction with two-body terms only.
//
// Layout convention: logical spins occupy indices 0..N-1 and ancilla i
// (i = 1..N, or the single ancilla of the 3-local design) occupies index
// N + i - 1.

enum class GadgetKind { n_local, three_local_single_ancilla, symmetric };

struct GadgetSpec {
  GadgetKind kind = GadgetKind::n_local;
  int N = 4;          // logical spin count
  double J_N = 0.0;   // target multi-body coupling, in units of J_a
  double J_a = 1.0;   // logical-ancilla coupling strength
  double q_0 = 0.5;   // bias offset
  std::vector<double> f;  // symmetric kind: target energy per N_up, size N+1
};

inline GadgetSpec three_local_spec(double J, double J_N) {
  return GadgetSpec{GadgetKind::three_local_single_ancilla, 3, J_N, 2.0 * J,
                    0.0, {}};
}

inline int ancilla_count(const GadgetSpec& spec) {
  return spec.kind == GadgetKind::three_local_single_ancilla ? 1 : spec.N;
}

inline int total_spins(const GadgetSpec& spec) {
  return spec.N + ancilla_count(spec);
}

namespace detail {

// Strict inequality with a relative guard of 1e-12; boundary cases are
// degenerate and rejected.
inline bool strictly_less(double a, double b) {
  return a < b - 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline void require(bool ok, const std::string& inequality,
                    const std::string& values) {
  if (!ok)
    throw std::invalid_argument("gadget validity violated: " + inequality +
                                " fails (" + values + ")");
}

}  // namespace detail

// Ground-state validity margin min(q_0, J_a - q_0) - |J_N|; positive iff the
// alternating bias cannot reorder the ancilla flips.
inline double validity_margin(const GadgetSpec& spec) {
  return std::min(spec.q_0, spec.J_a - spec.q_0) - std::abs(spec.J_N);
}

// Estimate of the probability that a coupler has its ancillae thermally
// excited at temperature T (in units of J_a). An estimate, not an exact
// occupation probability.
inline double thermal_reliability(const GadgetSpec& spec, double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("thermal_reliability: temperature must be > 0");
  return std::exp(-validity_margin(spec) / temperature);
}

// Alternating ancilla bias implementing the N-body target J_N * prod sigma.
// q_i = q_0 + J_N when N - i is odd, q_0 - J_N when even.
inline double alternating_bias(int N, int i, double q_0, double J_N) {
  return ((N - i) % 2 != 0) ? q_0 + J_N : q_0 - J_N;
}

namespace detail {

// Shared two-body frame: fully connected logical spins at J_a, each ancilla
// coupled to every logical spin at J_a, logical fields -J_a + q_0, ancilla
// fields -J_a (2i - N) + q_i.
inline IsingHamiltonian assemble_counting_gadget(int N, double J_a, double q_0,
                                                 std::span<const double> q) {
  IsingHamiltonian h(2 * N);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) h.add_pair(i, j, J_a);
  for (int i = 0; i < N; ++i) h.add_field(i, -J_a + q_0);
  for (int i = 0; i < N; ++i)
    for (int a = 0; a < N; ++a) h.add_pair(i, N + a, J_a);
  for (int i = 1; i <= N; ++i)
    h.add_field(N + i - 1, -J_a * (2 * i - N) + q[static_cast<std::size_t>(i - 1)]);
  return h;
}

}  // namespace detail

inline IsingHamiltonian build_n_local(const GadgetSpec& spec) {
  if (spec.kind != GadgetKind::n_local)
    throw std::invalid_argument("build_n_local: spec kind is not n-local");
  if (spec.N < 2)
    throw std::invalid_argument("build_n_local: N must be >= 2");
  const double aJN = std::abs(spec.J_N);
  detail::require(detail::strictly_less(0.0, spec.J_a), "0 < J_a",
                  "J_a = " + std::to_string(spec.J_a));
  detail::require(detail::strictly_less(aJN, spec.q_0), "|J_N| < q_0",
                  "|J_N| = " + std::to_string(aJN) +
                      ", q_0 = " + std::to_string(spec.q_0));
  detail::require(detail::strictly_less(spec.q_0, spec.J_a), "q_0 < J_a",
                  "q_0 = " + std::to_string(spec.q_0) +
                      ", J_a = " + std::to_string(spec.J_a));
  detail::require(detail::strictly_less(aJN, spec.J_a - spec.q_0),
                  "|J_N| < J_a - q_0",
                  "|J_N| = " + std::to_string(aJN) +
                      ", J_a - q_0 = " + std::to_string(spec.J_a - spec.q_0));
  std::vector<double> q(static_cast<std::size_t>(spec.N));
  for (int i = 1; i <= spec.N; ++i)
    q[static_cast<std::size_t>(i - 1)] =
        alternating_bias(spec.N, i, spec.q_0, spec.J_N);
  return detail::assemble_counting_gadget(spec.N, spec.J_a, spec.q_0, q);
}

// Single-ancilla 3-local design: three logical pairs at J, logical fields
// J_N, ancilla coupled at 2J with field 2 J_N. Reproduces
// -3J + J_N sigma1 sigma2 sigma3 on the logical sectors, constant included.
inline IsingHamiltonian build_three_local(double J, double J_N) {
  if (!detail::strictly_less(std::abs(J_N), 2.0 * J))
    throw std::invalid_argument(
        "build_three_local: requires 2J > |J_N| (2J = " + std::to_string(2 * J) +
        ", |J_N| = " + std::to_string(std::abs(J_N)) + ")");
  IsingHamiltonian h(4);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) h.add_pair(i, j, J);
  for (int i = 0; i < 3; ++i) h.add_field(i, J_N);
  for (int i = 0; i < 3; ++i) h.add_pair(i, 3, 2.0 * J);
  h.add_field(3, 2.0 * J_N);
  return h;
}

// Generalization to an arbitrary permutation-symmetric target f(N_up):
// the k-th ancilla flip realizes the increment f(k) - f(k-1), so
// q_k = q_0 - (f(k) - f(k-1)) / 2.
inline IsingHamiltonian build_symmetric(int N, std::span<const double> f,
                                        double J_a, double q_0) {
  if (N < 2) throw std::invalid_argument("build_symmetric: N must be >= 2");
  if (f.size() != static_cast<std::size_t>(N) + 1)
    throw std::invalid_argument("build_symmetric: f must have N + 1 entries");
  detail::require(detail::strictly_less(0.0, q_0), "0 < q_0",
                  "q_0 = " + std::to_string(q_0));
  detail::require(detail::strictly_less(q_0, J_a), "q_0 < J_a",
                  "q_0 = " + std::to_string(q_0) +
                      ", J_a = " + std::to_string(J_a));
  double max_step = 0.0;
  for (int k = 1; k <= N; ++k)
    max_step = std::max(max_step, std::abs(f[static_cast<std::size_t>(k)] -
                                           f[static_cast<std::size_t>(k - 1)]));
  detail::require(
      detail::strictly_less(max_step, std::min(q_0, J_a - q_0)),
      "max_k |f(k+1) - f(k)| < min(q_0, J_a - q_0)",
      "max step = " + std::to_string(max_step) + ", min(q_0, J_a - q_0) = " +
          std::to_string(std::min(q_0, J_a - q_0)));
  std::vector<double> q(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k)
    q[static_cast<std::size_t>(k - 1)] =
        q_0 - 0.5 * (f[static_cast<std::size_t>(k)] -
                     f[static_cast<std::size_t>(k - 1)]);
  return detail::assemble_counting_gadget(N, J_a, q_0, q);
}

inline IsingHamiltonian build_gadget(const GadgetSpec& spec) {
  switch (spec.kind) {
    case GadgetKind::n_local:
      return build_n_local(spec);
    case GadgetKind::three_local_single_ancilla:
      return build_three_local(0.5 * spec.J_a, spec.J_N);
    case GadgetKind::symmetric:
      return build_symmetric(spec.N, spec.f, spec.J_a, spec.q_0);
  }
  throw std::logic_error("build_gadget: unknown kind");
}

// Target effective energy for the sector with n_up logical spins up, modulo
// one global constant.
inline double gadget_target(const GadgetSpec& spec, int n_up) {
  switch (spec.kind) {
    case GadgetKind::n_local:
    case GadgetKind::three_local_single_ancilla:
      // J_N times the product of the logical spins.
      return ((spec.N - n_up) % 2 != 0) ? -spec.J_N : spec.J_N;
    case GadgetKind::symmetric:
      return spec.f.at(static_cast<std::size_t>(n_up));
  }
  throw std::logic_error("gadget_target: unknown kind");
}

// Canonical ground ancilla pattern for a sector: ancillae 1..n_up down, the
// rest up (bit = 1 means up). The single 3-local ancilla is down whenever its
// effective field J_a (2 n_up - 3) + 2 J_N is positive.
inline std::uint64_t counting_ancilla_bits(const GadgetSpec& spec, int n_up) {
  if (spec.kind == GadgetKind::three_local_single_ancilla)
    return spec.J_a * (2 * n_up - 3) + 2.0 * spec.J_N > 0.0 ? 0 : 1;
  const std::uint64_t full = (std::uint64_t{1} << spec.N) - 1;
  return full & ~((std::uint64_t{1} << n_up) - 1);
}

struct SectorRow {
  int n_up = 0;
  double target = 0.0;       // gadget_target for this sector
  double effective_min = 0.0, effective_max = 0.0;  // offset not removed
  bool counting_ok = true;
};

struct GadgetReport {
  double max_deviation = 0.0;  // after removing the fitted offset
  bool counting_correct = true;
  double offset = 0.0;  // mean(effective) - mean(target)
  std::vector<SectorRow> sectors;
};

// Compares the effective logical spectrum of h against the spec's target,
// after removing a single constant offset fitted as the difference of means
// over all 2^N logical configurations. Also checks that every sector's
// minimizing ancilla configuration is the canonical counting pattern.
inline GadgetReport verify_gadget(const IsingHamiltonian& h,
                                  const GadgetSpec& spec) {
  const int N = spec.N;
  const int A = ancilla_count(spec);
  if (h.n() != N + A)
    throw std::invalid_argument("verify_gadget: Hamiltonian has " +
                                std::to_string(h.n()) + " spins, expected " +
                                std::to_string(N + A));
  check_enumerable(h.n());
  std::vector<int> logical(static_cast<std::size_t>(N));
  std::iota(logical.begin(), logical.end(), 0);
  std::vector<int> ancilla(static_cast<std::size_t>(A));
  std::iota(ancilla.begin(), ancilla.end(), N);
  const EffectiveSpectrum eff = effective_logical_spectrum(h, logical, ancilla);

  double mean_eff = 0.0, mean_target = 0.0;
  for (const EffectiveEntry& e : eff.entries) {
    mean_eff += e.energy;
    mean_target += gadget_target(spec, std::popcount(e.logical.bits()));
  }
  mean_eff /= static_cast<double>(eff.entries.size());
  mean_target /= static_cast<double>(eff.entries.size());
  const double offset = mean_eff - mean_target;

  GadgetReport report;
  report.offset = offset;
  report.sectors.resize(static_cast<std::size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) {
    auto& row = report.sectors[static_cast<std::size_t>(k)];
    row.n_up = k;
    row.target = gadget_target(spec, k);
  }
  std::vector<bool> seen(static_cast<std::size_t>(N) + 1, false);
  for (const EffectiveEntry& e : eff.entries) {
    const int k = std::popcount(e.logical.bits());
    auto& row = report.sectors[static_cast<std::size_t>(k)];
    if (!seen[static_cast<std::size_t>(k)]) {
      row.effective_min = row.effective_max = e.energy;
      seen[static_cast<std::size_t>(k)] = true;
    } else {
      row.effective_min = std::min(row.effective_min, e.energy);
      row.effective_max = std::max(row.effective_max, e.energy);
    }
    report.max_deviation = std::max(report.max_deviation,
                                    std::abs(e.energy - row.target - offset));
    if (e.ancilla.bits() != counting_ancilla_bits(spec, k)) {
      row.counting_ok = false;
      report.counting_correct = false;
    }
  }
  return report;
}

}  // namespace mbc
