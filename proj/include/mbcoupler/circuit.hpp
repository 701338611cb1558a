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

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mbc {

// Multi-qubit inductive coupler: one coupler loop c and n attached circuits,
// all mutually coupled to the loop only. Normalized units with 4 e^2 = 1, so
// the magnetic term of the potential is (1/2) (phi - phi_x)^T L^-1 (phi -
// phi_x); energies are reported in units of E_c. Phases in radians. Vector
// index 0 is the coupler, 1..n are the circuits.
struct CircuitParams {
  int n = 2;
  double L_c = 1.0;
  std::vector<double> L;  // self-inductances, size n
  std::vector<double> M;  // mutual inductances to the coupler, size n
  double E_c = 1.0;
  std::vector<double> E;  // Josephson energies, size n
  double phi_c_x = 0.0;   // external coupler flux phase
};

inline CircuitParams uniform_circuit(int n, double L = 1.0, double M = 0.1,
                                     double E = 1.0, double phi_c_x = 0.0) {
  CircuitParams p;
  p.n = n;
  p.L_c = L;
  p.L.assign(static_cast<std::size_t>(n), L);
  p.M.assign(static_cast<std::size_t>(n), M);
  p.E_c = E;
  p.E.assign(static_cast<std::size_t>(n), E);
  p.phi_c_x = phi_c_x;
  return p;
}

inline void validate(const CircuitParams& p) {
  if (p.n < 2)
    throw std::invalid_argument("CircuitParams: need at least 2 circuits");
  if (p.L.size() != static_cast<std::size_t>(p.n) ||
      p.M.size() != static_cast<std::size_t>(p.n) ||
      p.E.size() != static_cast<std::size_t>(p.n))
    throw std::invalid_argument("CircuitParams: L, M, E must have n entries");
  if (!(p.L_c > 0.0))
    throw std::invalid_argument("CircuitParams: L_c must be > 0");
  for (int i = 0; i < p.n; ++i) {
    if (!(p.L[static_cast<std::size_t>(i)] > 0.0))
      throw std::invalid_argument("CircuitParams: L[" + std::to_string(i) +
                                  "] must be > 0");
    if (!(std::abs(p.M[static_cast<std::size_t>(i)]) <
          std::sqrt(p.L_c * p.L[static_cast<std::size_t>(i)])))
      throw std::invalid_argument(
          "CircuitParams: passivity violated, |M[" + std::to_string(i) +
          "]| >= sqrt(L_c L[" + std::to_string(i) + "])");
  }
}

// (n+1) x (n+1) arrowhead inductance matrix: L_c in the corner, -M_ic on the
// first row and column, L_i on the diagonal.
inline Eigen::MatrixXd build_inductance_matrix(const CircuitParams& p) {
  validate(p);
  Eigen::MatrixXd Lmat = Eigen::MatrixXd::Zero(p.n + 1, p.n + 1);
  Lmat(0, 0) = p.L_c;
  for (int i = 0; i < p.n; ++i) {
    Lmat(0, i + 1) = Lmat(i + 1, 0) = -p.M[static_cast<std::size_t>(i)];
    Lmat(i + 1, i + 1) = p.L[static_cast<std::size_t>(i)];
  }
  return Lmat;
}

enum class InverseOrder { exact, M2 };

// Exact mode inverts numerically (residual checked to 1e-12). M2 mode is the
// closed-form expansion of the arrowhead inverse keeping terms through second
// order in the mutual inductances:
//   (0,0): 1/L_c + sum_k M_k^2 / (L_k L_c^2)
//   (0,i): M_i / (L_c L_i)
//   (i,j): delta_ij / L_i + M_i M_j / (L_i L_j L_c)
// which matches the exact inverse to O(M^3).
inline Eigen::MatrixXd truncated_inverse(const Eigen::MatrixXd& Lmat,
                                         InverseOrder order) {
  const Eigen::Index m = Lmat.rows();
  if (Lmat.cols() != m || m < 2)
    throw std::invalid_argument("truncated_inverse: need a square matrix");
  if (order == InverseOrder::exact) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Lmat);
    if (!lu.isInvertible())
      throw std::invalid_argument("truncated_inverse: singular matrix");
    Eigen::MatrixXd inv = lu.inverse();
    const double residual =
        (Lmat * inv - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (residual > 1e-12 * std::max(1.0, Lmat.cwiseAbs().maxCoeff()))
      throw std::runtime_error(
          "truncated_inverse: inversion residual " + std::to_string(residual) +
          " exceeds tolerance (ill-conditioned matrix)");
    // Keep symmetric inputs exactly symmetric.
    if (Lmat.isApprox(Lmat.transpose(), 0.0))
      inv = ((inv + inv.transpose()) / 2.0).eval();
    return inv;
  }

  for (Eigen::Index i = 1; i < m; ++i)
    for (Eigen::Index j = 1; j < m; ++j)
      if (i != j && Lmat(i, j) != 0.0)
        throw std::invalid_argument(
            "truncated_inverse: M2 mode requires the arrowhead form produced "
            "by build_inductance_matrix");
  const double L_c = Lmat(0, 0);
  if (!(L_c > 0.0))
    throw std::invalid_argument("truncated_inverse: L_c must be > 0");
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(m, m);
  double corner = 1.0 / L_c;
  for (Eigen::Index i = 1; i < m; ++i) {
    const double Li = Lmat(i, i);
    if (!(Li > 0.0))
      throw std::invalid_argument("truncated_inverse: diagonal must be > 0");
    const double Mi = -Lmat(0, i);
    corner += Mi * Mi / (Li * L_c * L_c);
    inv(0, i) = inv(i, 0) = Mi / (L_c * Li);
    for (Eigen::Index j = 1; j < m; ++j) {
      const double Mj = -Lmat(0, j);
      inv(i, j) = (i == j ? 1.0 / Li : 0.0) +
                  Mi * Mj / (Li * Lmat(j, j) * L_c);
    }
  }
  inv(0, 0) = corner;
  return inv;
}

// Junction plus magnetic energy of the circuit,
//   U = -E_c cos phi_c - sum_i E_i cos phi_i
//       + (1/2) (phi - phi_x)^T L^-1 (phi - phi_x),
// evaluated with the exact inverse inductance matrix.
inline double circuit_potential(const CircuitParams& p,
                                const Eigen::VectorXd& phi,
                                const Eigen::VectorXd& phi_x) {
  validate(p);
  if (phi.size() != p.n + 1 || phi_x.size() != p.n + 1)
    throw std::invalid_argument("circuit_potential: phase vectors must have n + 1 entries");
  const Eigen::MatrixXd inv =
      truncated_inverse(build_inductance_matrix(p), InverseOrder::exact);
  const Eigen::VectorXd r = phi - phi_x;
  double u = -p.E_c * std::cos(phi(0));
  for (int i = 0; i < p.n; ++i)
    u -= p.E[static_cast<std::size_t>(i)] * std::cos(phi(i + 1));
  u += 0.5 * r.dot(inv * r);
  return u;
}

inline Eigen::VectorXd circuit_gradient(const CircuitParams& p,
                                        const Eigen::VectorXd& phi,
                                        const Eigen::VectorXd& phi_x) {
  validate(p);
  if (phi.size() != p.n + 1 || phi_x.size() != p.n + 1)
    throw std::invalid_argument("circuit_gradient: phase vectors must have n + 1 entries");
  const Eigen::MatrixXd inv =
      truncated_inverse(build_inductance_matrix(p), InverseOrder::exact);
  Eigen::VectorXd g = inv * (phi - phi_x);
  g(0) += p.E_c * std::sin(phi(0));
  for (int i = 0; i < p.n; ++i)
    g(i + 1) += p.E[static_cast<std::size_t>(i)] * std::sin(phi(i + 1));
  return g;
}

// Bias prescription: coupler at phi_c_x, circuit i at
// pi + (M_i / L_i)(phi_c0 - phi_c_x).
inline Eigen::VectorXd bias_fluxes(const CircuitParams& p, double phi_c0) {
  validate(p);
  Eigen::VectorXd phix(p.n + 1);
  phix(0) = p.phi_c_x;
  for (int i = 0; i < p.n; ++i)
    phix(i + 1) = std::numbers::pi +
                  (p.M[static_cast<std::size_t>(i)] /
                   p.L[static_cast<std::size_t>(i)]) *
                      (phi_c0 - p.phi_c_x);
  return phix;
}

namespace detail {

// Restriction of U to the coupler phase x with the circuit phases fixed:
//   u(x) = -E_c cos x + (1/2) a (x - phi_cx)^2 + c1 (x - phi_cx) + c0.
struct CouplerSection {
  double E_c = 0.0, a = 1.0, phi_cx = 0.0, c1 = 0.0, c0 = 0.0;

  double value(double x) const {
    const double d = x - phi_cx;
    return -E_c * std::cos(x) + 0.5 * a * d * d + c1 * d + c0;
  }
  double deriv(double x) const {
    return E_c * std::sin(x) + a * (x - phi_cx) + c1;
  }
  double second(double x) const { return E_c * std::cos(x) + a; }
};

struct CouplerMinimum {
  double phi = 0.0;
  double value = 0.0;
};

// Deterministic multi-start 1-D minimization. Every stationary point lies
// within |x - center| <= E_c / a of the quadratic minimum, so a fixed grid
// over that window followed by ternary refinement and a Newton polish finds
// all local minima. More than one distinct minimum means the coupler is
// bistable and outside the model's validity.
inline CouplerMinimum minimize_coupler_section(const CouplerSection& s) {
  if (!(s.a > 0.0))
    throw std::invalid_argument("coupler section: quadratic term must be > 0");
  const double center = s.phi_cx - s.c1 / s.a;
  if (s.E_c == 0.0) return {center, s.value(center)};

  const double half_width = std::abs(s.E_c) / s.a + 1.0;
  const int grid = 4096;
  const double lo = center - half_width, hi = center + half_width;
  const double step = (hi - lo) / grid;

  std::vector<double> found;
  double prev = s.value(lo), curr = s.value(lo + step);
  for (int i = 1; i < grid; ++i) {
    const double next = s.value(lo + step * (i + 1));
    if (curr <= prev && curr <= next) {
      double a = lo + step * (i - 1), b = lo + step * (i + 1);
      for (int it = 0; it < 120; ++it) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (s.value(m1) < s.value(m2))
          b = m2;
        else
          a = m1;
      }
      double x = 0.5 * (a + b);
      for (int it = 0; it < 8; ++it) {
        const double d2 = s.second(x);
        if (!(d2 > 0.0)) break;
        const double dx = s.deriv(x) / d2;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      if (std::abs(s.deriv(x)) > 1e-10)
        throw std::runtime_error(
            "coupler minimization did not converge to |dU/dphi_c| < 1e-10");
      bool duplicate = false;
      for (double y : found)
        if (std::abs(y - x) < 1e-7) duplicate = true;
      if (!duplicate) found.push_back(x);
    }
    prev = curr;
    curr = next;
  }
  if (found.empty())
    throw std::runtime_error("coupler minimization found no interior minimum");
  if (found.size() > 1)
    throw std::runtime_error(
        "bistable coupler: " + std::to_string(found.size()) +
        " distinct potential minima, outside the model's validity");
  return {found[0], s.value(found[0])};
}

// Fixed-bias evaluator with the coupler phase minimized out.
class BornOppenheimerModel {
 public:
  BornOppenheimerModel(const CircuitParams& p, InverseOrder order)
      : p_(p), inv_(truncated_inverse(build_inductance_matrix(p), order)) {}

  // Sets the operating point: external fluxes from the self-consistent
  // coupler phase. With every circuit parked at its bias point the magnetic
  // residuals of the circuits vanish, so the coupler phase decouples.
  double solve_operating_point() {
    CouplerSection s;
    s.E_c = p_.E_c;
    s.a = inv_(0, 0);
    s.phi_cx = p_.phi_c_x;
    s.c1 = 0.0;
    s.c0 = 0.0;
    const double phi_c0 = minimize_coupler_section(s).phi;
    phix_ = bias_fluxes(p_, phi_c0);
    return phi_c0;
  }

  const Eigen::VectorXd& phix() const { return phix_; }

  // U minimized over the coupler phase, circuits held at the given phases.
  double energy(const Eigen::VectorXd& circuit_phases) const {
    CouplerSection s;
    s.E_c = p_.E_c;
    s.a = inv_(0, 0);
    s.phi_cx = phix_(0);
    double constant = 0.0;
    for (int i = 0; i < p_.n; ++i) {
      const double r = circuit_phases(i) - phix_(i + 1);
      s.c1 += inv_(0, i + 1) * r;
      constant -= p_.E[static_cast<std::size_t>(i)] * std::cos(circuit_phases(i));
      for (int j = 0; j < p_.n; ++j)
        constant += 0.5 * inv_(i + 1, j + 1) * r * (circuit_phases(j) - phix_(j + 1));
    }
    s.c0 = constant;
    return minimize_coupler_section(s).value;
  }

 private:
  CircuitParams p_;
  Eigen::MatrixXd inv_;
  Eigen::VectorXd phix_;
};

}  // namespace detail

// Coupler phase due to its self-induced flux: minimizes U over the coupler
// phase with the circuits held at their bias points.
inline double solve_coupler_phase(const CircuitParams& p) {
  validate(p);
  detail::BornOppenheimerModel model(p, InverseOrder::exact);
  return model.solve_operating_point();
}

namespace detail {

inline Eigen::MatrixXd extract_couplings_impl(const CircuitParams& p,
                                              double delta,
                                              InverseOrder order) {
  validate(p);
  if (!(delta > 0.0))
    throw std::invalid_argument("extract_effective_couplings: delta must be > 0");
  BornOppenheimerModel model(p, order);
  model.solve_operating_point();
  const double pi = std::numbers::pi;
  Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(p.n, p.n);
  Eigen::VectorXd phases = Eigen::VectorXd::Constant(p.n, pi);
  for (int i = 0; i < p.n; ++i) {
    for (int j = i + 1; j < p.n; ++j) {
      double quad = 0.0;
      for (int si : {+1, -1}) {
        for (int sj : {+1, -1}) {
          phases(i) = pi + si * delta;
          phases(j) = pi + sj * delta;
          quad += si * sj * model.energy(phases);
        }
      }
      phases(i) = pi;
      phases(j) = pi;
      couplings(i, j) = couplings(j, i) = quad / (4.0 * delta * delta);
    }
  }
  return couplings;
}

}  // namespace detail

// Effective pairwise coupling energies between the attached circuits on the
// Born-Oppenheimer surface. Circuits i and j are displaced to pi +/- delta
// with all others at pi; the four-point difference quotient divided by
// delta^2 gives the coefficient of the spin-spin interaction.
inline Eigen::MatrixXd extract_effective_couplings(const CircuitParams& p,
                                                   double delta = 0.1) {
  return detail::extract_couplings_impl(p, delta, InverseOrder::exact);
}

// Scales of the residual interactions beyond the pairwise model. E2 is the
// mean pairwise coupling of the O(M^2) theory; E3 is the mean three-point
// connected correlation of the full potential over +/- displacements of
// circuit triples, i.e. the three-body coefficient.
inline std::pair<double, double> truncation_spurious_scale(
    const CircuitParams& p, double delta = 0.1) {
  validate(p);
  if (!(delta > 0.0))
    throw std::invalid_argument("truncation_spurious_scale: delta must be > 0");

  const Eigen::MatrixXd k2 =
      detail::extract_couplings_impl(p, delta, InverseOrder::M2);
  double e2 = 0.0;
  int pairs = 0;
  for (int i = 0; i < p.n; ++i)
    for (int j = i + 1; j < p.n; ++j, ++pairs) e2 += k2(i, j);
  e2 /= std::max(pairs, 1);

  detail::BornOppenheimerModel model(p, InverseOrder::exact);
  model.solve_operating_point();
  const double pi = std::numbers::pi;
  Eigen::VectorXd phases = Eigen::VectorXd::Constant(p.n, pi);
  double e3 = 0.0;
  int triples = 0;
  for (int i = 0; i < p.n; ++i) {
    for (int j = i + 1; j < p.n; ++j) {
      for (int k = j + 1; k < p.n; ++k, ++triples) {
        double corr = 0.0;
        for (int si : {+1, -1})
          for (int sj : {+1, -1})
            for (int sk : {+1, -1}) {
              phases(i) = pi + si * delta;
              phases(j) = pi + sj * delta;
              phases(k) = pi + sk * delta;
              corr += si * sj * sk * model.energy(phases);
            }
        phases(i) = phases(j) = phases(k) = pi;
        e3 += corr / (8.0 * delta * delta * delta);
      }
    }
  }
  e3 /= std::max(triples, 1);
  return {e2, e3};
}

}  // namespace mbc
