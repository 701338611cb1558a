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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mbcoupler/rng.hpp"
#include "mbcoupler/spin.hpp"

namespace mbc {

struct AnnealSchedule {
  int sweeps = 1;                   // full sweeps per ladder rung
  std::vector<double> temperatures; // strictly descending, all positive
  std::uint64_t seed = 0;
};

inline void validate(const AnnealSchedule& s) {
  if (s.sweeps < 1)
    throw std::invalid_argument("AnnealSchedule: sweeps must be >= 1");
  if (s.temperatures.empty())
    throw std::invalid_argument("AnnealSchedule: empty temperature ladder");
  for (std::size_t i = 0; i < s.temperatures.size(); ++i) {
    if (!(s.temperatures[i] > 0.0))
      throw std::invalid_argument("AnnealSchedule: temperatures must be > 0");
    if (i > 0 && !(s.temperatures[i] < s.temperatures[i - 1]))
      throw std::invalid_argument(
          "AnnealSchedule: ladder must be strictly descending");
  }
}

struct AnnealResult {
  SpinConfig config;
  double energy;
};

// Single-spin-flip Metropolis over the temperature ladder. Fully determined
// by the schedule seed; returns the best configuration seen, with its energy
// re-evaluated exactly from the Hamiltonian.
inline AnnealResult simulated_anneal(const IsingHamiltonian& h,
                                     const AnnealSchedule& schedule) {
  validate(schedule);
  const int n = h.n();
  Xoshiro256ss rng(schedule.seed);

  std::uint64_t bits = 0;
  for (int i = 0; i < n; ++i)
    if (rng.next() >> 63) bits |= std::uint64_t{1} << i;

  // Per-term sign of the spin product, kept incrementally.
  const auto& terms = h.terms();
  std::vector<double> signed_weight(terms.size());
  std::vector<std::vector<int>> incident(static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const int downs = std::popcount(terms[t].support & ~bits);
    signed_weight[t] = (downs & 1) ? -terms[t].weight : terms[t].weight;
    for (int i = 0; i < n; ++i)
      if ((terms[t].support >> i) & 1) incident[i].push_back(static_cast<int>(t));
  }

  double energy = h.energy_bits(bits);
  std::uint64_t best_bits = bits;
  double best_energy = energy;

  for (double temperature : schedule.temperatures) {
    for (int sweep = 0; sweep < schedule.sweeps; ++sweep) {
      for (int i = 0; i < n; ++i) {
        double delta = 0.0;
        for (int t : incident[i]) delta -= 2.0 * signed_weight[t];
        const bool accept =
            delta <= 0.0 || rng.uniform01() < std::exp(-delta / temperature);
        if (!accept) continue;
        bits ^= std::uint64_t{1} << i;
        energy += delta;
        for (int t : incident[i]) signed_weight[t] = -signed_weight[t];
        if (energy < best_energy) {
          best_energy = energy;
          best_bits = bits;
        }
      }
    }
  }

  const SpinConfig best(best_bits, n);
  return {best, h.energy(best)};
}

}  // namespace mbc
