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
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbc {

// Spins take values in {-1, +1}; bit = 1 means +1. At most 64 spins are
// representable; exhaustive operations additionally require n <= 28.
inline constexpr int kMaxSpins = 64;
inline constexpr int kMaxEnumerationSpins = 28;

class SpinConfig {
 public:
  SpinConfig(std::uint64_t bits, int n) : bits_(bits), n_(n) {
    if (n < 1 || n > kMaxSpins)
      throw std::invalid_argument("SpinConfig: spin count " +
                                  std::to_string(n) + " outside [1, 64]");
    if (n < kMaxSpins && (bits >> n) != 0)
      throw std::invalid_argument("SpinConfig: bits set beyond spin count");
  }

  std::uint64_t bits() const { return bits_; }
  int n() const { return n_; }

  // +1 or -1.
  int spin(int i) const {
    check_index(i);
    return (bits_ >> i) & 1 ? +1 : -1;
  }

  SpinConfig flipped(int i) const {
    check_index(i);
    return SpinConfig(bits_ ^ (std::uint64_t{1} << i), n_);
  }

  SpinConfig global_flip() const {
    const std::uint64_t mask =
        n_ == kMaxSpins ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1;
    return SpinConfig(bits_ ^ mask, n_);
  }

  // Rendered little-endian (spin 0 first), '+' for up and '-' for down.
  std::string to_string() const {
    std::string s(static_cast<std::size_t>(n_), '-');
    for (int i = 0; i < n_; ++i)
      if ((bits_ >> i) & 1) s[static_cast<std::size_t>(i)] = '+';
    return s;
  }

  friend bool operator==(const SpinConfig& a, const SpinConfig& b) {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }
  friend bool operator<(const SpinConfig& a, const SpinConfig& b) {
    return a.bits_ < b.bits_;
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= n_)
      throw std::out_of_range("SpinConfig: spin index " + std::to_string(i) +
                              " outside [0, " + std::to_string(n_) + ")");
  }

  std::uint64_t bits_;
  int n_;
};

// One product term: weight times the product of the spins in the support.
struct Term {
  std::uint64_t support = 0;  // bitmask over spin indices, never empty
  double weight = 0.0;

  int order() const { return std::popcount(support); }
};

// Sparse sum of weighted products of distinct spin variables of any order,
// plus a constant offset. Terms are kept canonical: sorted by (order,
// support mask), one entry per support, no exactly-zero weights.
class IsingHamiltonian {
 public:
  explicit IsingHamiltonian(int n, double constant = 0.0)
      : n_(n), constant_(constant) {
    if (n < 1 || n > kMaxSpins)
      throw std::invalid_argument("IsingHamiltonian: spin count " +
                                  std::to_string(n) + " outside [1, 64]");
  }

  int n() const { return n_; }
  double constant() const { return constant_; }
  void set_constant(double c) { constant_ = c; }
  const std::vector<Term>& terms() const { return terms_; }

  void add_term(std::span<const int> support, double weight) {
    std::uint64_t mask = 0;
    for (int i : support) {
      if (i < 0 || i >= n_)
        throw std::invalid_argument("IsingHamiltonian: spin index " +
                                    std::to_string(i) + " outside [0, " +
                                    std::to_string(n_) + ")");
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (mask & bit)
        throw std::invalid_argument("IsingHamiltonian: duplicate spin index " +
                                    std::to_string(i) + " in term support");
      mask |= bit;
    }
    add_term_mask(mask, weight);
  }

  void add_term(std::initializer_list<int> support, double weight) {
    add_term(std::span<const int>(support.begin(), support.size()), weight);
  }

  void add_term_mask(std::uint64_t mask, double weight) {
    if (mask == 0) {
      constant_ += weight;
      return;
    }
    if (n_ < kMaxSpins && (mask >> n_) != 0)
      throw std::invalid_argument(
          "IsingHamiltonian: term support exceeds spin count");
    if (weight == 0.0) return;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), mask,
                               [](const Term& t, std::uint64_t m) {
                                 return canonical_less(t.support, m);
                               });
    if (it != terms_.end() && it->support == mask) {
      it->weight += weight;
      if (it->weight == 0.0) terms_.erase(it);
    } else {
      terms_.insert(it, Term{mask, weight});
    }
  }

  void add_field(int i, double h) { add_term({i}, h); }
  void add_pair(int i, int j, double coupling) { add_term({i, j}, coupling); }

  // Scaled accumulation of another Hamiltonian over the same spins.
  void add_scaled(const IsingHamiltonian& other, double factor) {
    if (other.n_ != n_)
      throw std::invalid_argument("IsingHamiltonian: spin count mismatch");
    constant_ += factor * other.constant_;
    for (const Term& t : other.terms_) add_term_mask(t.support, factor * t.weight);
  }

  double energy(const SpinConfig& c) const {
    if (c.n() != n_)
      throw std::invalid_argument(
          "energy: config has " + std::to_string(c.n()) + " spins, expected " +
          std::to_string(n_));
    return energy_bits(c.bits());
  }

  // Hot path used by enumeration; skips the dimension check.
  double energy_bits(std::uint64_t bits) const {
    double e = constant_;
    for (const Term& t : terms_) {
      // Product over the support is -1 iff an odd number of spins are down.
      const int downs = std::popcount(t.support & ~bits);
      e += (downs & 1) ? -t.weight : t.weight;
    }
    return e;
  }

  // Largest absolute term weight; used to scale equality tolerances.
  double max_abs_weight() const {
    double m = 0.0;
    for (const Term& t : terms_) m = std::max(m, std::abs(t.weight));
    return m;
  }

  static bool canonical_less(std::uint64_t a, std::uint64_t b) {
    const int oa = std::popcount(a), ob = std::popcount(b);
    return oa != ob ? oa < ob : a < b;
  }

 private:
  int n_;
  double constant_;
  std::vector<Term> terms_;
};

// Absolute tolerance for energy equality: 1e-9 in units of the largest
// absolute weight (1e-9 itself for a termless Hamiltonian).
inline double energy_tolerance(const IsingHamiltonian& h) {
  return 1e-9 * std::max(1.0, h.max_abs_weight());
}

struct SpectrumEntry {
  SpinConfig config;
  double energy;
};

// All 2^n configurations sorted ascending by energy, ties by bit pattern.
struct Spectrum {
  std::vector<SpectrumEntry> entries;
};

inline void check_enumerable(int n) {
  if (n > kMaxEnumerationSpins)
    throw std::invalid_argument(
        "enumeration refused: n = " + std::to_string(n) +
        " exceeds the exhaustive bound of " +
        std::to_string(kMaxEnumerationSpins) + " spins");
}

inline Spectrum enumerate_spectrum(const IsingHamiltonian& h) {
  check_enumerable(h.n());
  const std::uint64_t count = std::uint64_t{1} << h.n();
  Spectrum s;
  s.entries.reserve(count);
  for (std::uint64_t bits = 0; bits < count; ++bits)
    s.entries.push_back({SpinConfig(bits, h.n()), h.energy_bits(bits)});
  std::sort(s.entries.begin(), s.entries.end(),
            [](const SpectrumEntry& a, const SpectrumEntry& b) {
              if (a.energy != b.energy) return a.energy < b.energy;
              return a.config.bits() < b.config.bits();
            });
  return s;
}

// All configurations within tol of the minimum energy, ascending bit pattern.
inline std::vector<SpinConfig> ground_states(const IsingHamiltonian& h,
                                             double tol) {
  if (tol < 0.0) throw std::invalid_argument("ground_states: tol must be >= 0");
  check_enumerable(h.n());
  const std::uint64_t count = std::uint64_t{1} << h.n();
  double best = h.energy_bits(0);
  for (std::uint64_t bits = 1; bits < count; ++bits)
    best = std::min(best, h.energy_bits(bits));
  std::vector<SpinConfig> out;
  for (std::uint64_t bits = 0; bits < count; ++bits)
    if (h.energy_bits(bits) <= best + tol) out.push_back(SpinConfig(bits, h.n()));
  return out;
}

// Sum of spin values over the subset.
inline int magnetization(const SpinConfig& c, std::span<const int> subset) {
  int m = 0;
  for (int i : subset) m += c.spin(i);
  return m;
}

inline int magnetization(const SpinConfig& c, std::initializer_list<int> subset) {
  return magnetization(c, std::span<const int>(subset.begin(), subset.size()));
}

inline int total_magnetization(const SpinConfig& c) {
  return 2 * std::popcount(c.bits()) - c.n();
}

struct EffectiveEntry {
  SpinConfig logical;  // over the logical index list order
  double energy;       // minimum over all ancilla configurations
  SpinConfig ancilla;  // a minimizing ancilla config, lowest bit pattern
};

// Per-logical-configuration minimum of the joint energy over all ancilla
// configurations. Entry index equals the packed logical bit pattern, where
// bit j of the pattern is the spin at logical[j].
struct EffectiveSpectrum {
  std::vector<int> logical;
  std::vector<int> ancilla;
  std::vector<EffectiveEntry> entries;
};

inline EffectiveSpectrum effective_logical_spectrum(
    const IsingHamiltonian& h, std::span<const int> logical,
    std::span<const int> ancilla) {
  const int n = h.n();
  check_enumerable(n);
  if (ancilla.size() > 24)
    throw std::invalid_argument(
        "effective_logical_spectrum: more than 24 ancilla spins");
  std::uint64_t lmask = 0, amask = 0;
  for (int i : logical) {
    if (i < 0 || i >= n)
      throw std::invalid_argument("effective_logical_spectrum: index " +
                                  std::to_string(i) + " out of range");
    lmask |= std::uint64_t{1} << i;
  }
  for (int i : ancilla) {
    if (i < 0 || i >= n)
      throw std::invalid_argument("effective_logical_spectrum: index " +
                                  std::to_string(i) + " out of range");
    amask |= std::uint64_t{1} << i;
  }
  if (std::popcount(lmask) != static_cast<int>(logical.size()) ||
      std::popcount(amask) != static_cast<int>(ancilla.size()) ||
      (lmask & amask) != 0)
    throw std::invalid_argument(
        "effective_logical_spectrum: logical and ancilla sets overlap");
  if ((lmask | amask) != (n == kMaxSpins ? ~std::uint64_t{0}
                                         : (std::uint64_t{1} << n) - 1))
    throw std::invalid_argument(
        "effective_logical_spectrum: index sets must cover all spins");

  const int nl = static_cast<int>(logical.size());
  const int na = static_cast<int>(ancilla.size());
  EffectiveSpectrum out;
  out.logical.assign(logical.begin(), logical.end());
  out.ancilla.assign(ancilla.begin(), ancilla.end());
  out.entries.reserve(std::uint64_t{1} << nl);
  for (std::uint64_t lc = 0; lc < (std::uint64_t{1} << nl); ++lc) {
    std::uint64_t lbits = 0;
    for (int j = 0; j < nl; ++j)
      if ((lc >> j) & 1) lbits |= std::uint64_t{1} << logical[j];
    double best = 0.0;
    std::uint64_t best_ac = 0;
    for (std::uint64_t ac = 0; ac < (std::uint64_t{1} << na); ++ac) {
      std::uint64_t bits = lbits;
      for (int j = 0; j < na; ++j)
        if ((ac >> j) & 1) bits |= std::uint64_t{1} << ancilla[j];
      const double e = h.energy_bits(bits);
      if (ac == 0 || e < best) {
        best = e;
        best_ac = ac;
      }
    }
    out.entries.push_back({SpinConfig(lc, std::max(nl, 1)), best,
                           SpinConfig(best_ac, std::max(na, 1))});
  }
  return out;
}

}  // namespace mbc
