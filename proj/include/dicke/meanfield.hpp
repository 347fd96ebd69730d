#pragma once

/*
 * Thermodynamic-limit description of the squeezed Dicke model: classical
 * minimum, Bogoliubov polariton branches, and closed-form per-molecule QFI
 * for the collective spin directions.
 *
 * Everything here is per molecule and lives in the N -> infinity limit, so
 * the coupling argument is the collective G (the Hamiltonian's G, not the
 * per-molecule g = G/sqrt(N)). The finite-size ED side of the library bends
 * toward these numbers as N grows; tests pin that convergence.
 *
 * Two routes to the lower branch energy coexist on purpose. The naive
 * sqrt-of-difference form loses all precision where the two terms cancel at
 * the critical point, so inside a relative window of 1e-8 around G_c the
 * product form Omega+^2 Omega-^2 (which factorizes (G - G_c) analytically)
 * takes over. Outside the window the naive form is used and the tests check
 * the two agree.
 */

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "dicke/constants.hpp"
#include "dicke/hilbert.hpp"

namespace dicke {

// kappa at which the strong-coupling QFI floor reaches the separable bound:
// solves k^2 / sqrt(1 - k^2) = 1, i.e. k^2 equals the golden ratio minus one.
template <class Real = double>
Real kappa_ew() {
  return std::sqrt((std::sqrt(Real(5)) - Real(1)) / Real(2));
}

enum class Direction { x, y, z };

enum class Side { below, above };

template <class Real = double>
struct PolaritonSolution {
  Real theta;              // classical spin tilt, 0 in the normal phase
  Real alpha_per_sqrt_n;   // photon displacement / sqrt(N)
  Real omega_plus;         // upper branch (eV)
  Real omega_minus;        // lower branch (eV), 0 exactly at G_c
  Real zeta;               // Bogoliubov mixing angle
  Real zero_point;         // (Omega+ + Omega- - omega_c - omega_m_tilde)/2
  Real extensive_coeff;    // coefficient of the O(N) condensate shift per molecule
  Real omega_c_tilde;      // photon frequency dressed by the kappa*(a+a^dag)^2 term
  Real omega_m_tilde;      // omega_m / cos(theta)
  Eigen::Matrix2<Real> u;  // Bogoliubov (u, v): normal modes in terms of
  Eigen::Matrix2<Real> v;  // the displaced photon / rotated-spin bosons
};

// Which Gaussian state of the two polariton modes the QFI is evaluated on.
template <class Real = double>
struct StateSpec {
  enum class Kind { thermal, fock };
  Kind kind;
  Real temperature_k = 0;       // thermal only; 0 means ground state
  long n_plus = 0, n_minus = 0; // fock only

  static StateSpec thermal(Real temp_k) {
    if (temp_k < Real(0)) throw std::invalid_argument("StateSpec: negative temperature");
    StateSpec s;
    s.kind = Kind::thermal;
    s.temperature_k = temp_k;
    return s;
  }
  static StateSpec fock(long np, long nm) {
    if (np < 0 || nm < 0) throw std::invalid_argument("StateSpec: negative occupation");
    StateSpec s;
    s.kind = Kind::fock;
    s.n_plus = np;
    s.n_minus = nm;
    return s;
  }
};

template <class Real = double>
struct AnalyticQfi {
  Real value;
  bool divergent = false;  // true only exactly at the T = 0 critical point
};

template <class Real = double>
struct AnalyticQfiMax {
  Real value;
  Direction direction;
  std::array<Real, 3> by_direction;  // indexed x, y, z
  bool divergent = false;
};

// G_c = sqrt(omega_c omega_m / (4 (1 - kappa))); the transition is gone for
// kappa >= 1, where the squeezing term stiffens the photon faster than the
// coupling can soften it.
template <class Real>
std::optional<Real> critical_coupling(const ModelParams<Real>& p) {
  p.validate();
  if (p.kappa >= Real(1)) return std::nullopt;
  return std::sqrt(p.omega_c * p.omega_m / (Real(4) * (Real(1) - p.kappa)));
}

// Classical minimum of the energy per molecule. Returns {theta, alpha/sqrt(N)}.
template <class Real>
std::pair<Real, Real> classical_minimum(const ModelParams<Real>& p) {
  const auto gc = critical_coupling(p);
  Real costh = Real(1);
  if (gc && p.G > *gc) costh = p.kappa + p.omega_c * p.omega_m / (Real(4) * p.G * p.G);
  const Real theta = std::acos(std::min(costh, Real(1)));
  const Real alpha =
      p.G > Real(0) ? (p.omega_m / (Real(4) * p.G)) * std::tan(theta) : Real(0);
  return {theta, alpha};
}

template <class Real>
PolaritonSolution<Real> polariton_solution(const ModelParams<Real>& p) {
  PolaritonSolution<Real> s;
  const auto [theta, alpha] = classical_minimum(p);
  s.theta = theta;
  s.alpha_per_sqrt_n = alpha;
  const Real costh = std::cos(theta);

  s.omega_c_tilde = p.omega_c + Real(4) * p.kappa * p.G * p.G / p.omega_m;
  s.omega_m_tilde = p.omega_m / costh;
  const Real wct = s.omega_c_tilde, wmt = s.omega_m_tilde;

  const Real num = wct * p.omega_c - wmt * wmt;
  const Real cross = Real(16) * p.G * p.G * p.omega_c * p.omega_m * costh;
  const Real disc = std::sqrt(num * num + cross);

  s.omega_plus = std::sqrt(Real(0.5) * (wct * p.omega_c + wmt * wmt) + Real(0.5) * disc);

  const auto gc = critical_coupling(p);
  const bool near_critical =
      gc && std::abs(p.G - *gc) / *gc < Real(1e-8);
  const Real inner =
      Real(0.5) * (wct * p.omega_c + wmt * wmt) - Real(0.5) * disc;
  // the naive difference also dies of cancellation deep in the strong-coupling
  // regime, where disc carries the cross term below double resolution; detect
  // by how much of the half-sum survived the subtraction
  const bool ill = inner < Real(1e-8) * Real(0.5) * (wct * p.omega_c + wmt * wmt);
  if (near_critical || ill) {
    // product route: Omega+^2 Omega-^2 = ab - cross/4 in factored form, with
    // the (G - G_c) zero pulled out analytically instead of left to sqrt noise
    Real prod;
    if (costh == Real(1)) {
      prod = p.omega_c * p.omega_m *
             (p.omega_c * p.omega_m - Real(4) * (Real(1) - p.kappa) * p.G * p.G);
    } else {
      const Real one_m_c =
          (Real(1) - p.kappa) * (p.G - *gc) * (p.G + *gc) / (p.G * p.G);
      const Real sin2 = one_m_c * (Real(1) + costh);
      prod = Real(4) * p.G * p.G * p.omega_c * p.omega_m * sin2 / costh;
    }
    s.omega_minus = std::sqrt(std::max(prod, Real(0))) / s.omega_plus;
  } else {
    s.omega_minus = std::sqrt(std::max(inner, Real(0)));
  }

  s.zeta = disc > Real(0) ? std::acos(num / disc) : Real(M_PI) / Real(2);

  s.zero_point = Real(0.5) * (s.omega_plus + s.omega_minus - p.omega_c - wmt);
  const Real sh = std::sin(theta / Real(2));
  s.extensive_coeff = -wmt * sh * sh * sh * sh;

  const Real c2 = std::cos(s.zeta / Real(2)), s2 = std::sin(s.zeta / Real(2));
  const Real wc = p.omega_c, Wp = s.omega_plus, Wm = s.omega_minus;
  // entries blow up like 1/sqrt(Omega-) at the critical point; that is the
  // physical mode-softening divergence, not a numerical defect
  s.u << Real(0.5) * c2 * (wc + Wp) / std::sqrt(wc * Wp),
      -Real(0.5) * s2 * (wc + Wm) / std::sqrt(wc * Wm),
      Real(0.5) * s2 * (wmt + Wp) / std::sqrt(wmt * Wp),
      Real(0.5) * c2 * (wmt + Wm) / std::sqrt(wmt * Wm);
  s.v << Real(0.5) * c2 * (wc - Wp) / std::sqrt(wc * Wp),
      -Real(0.5) * s2 * (wc - Wm) / std::sqrt(wc * Wm),
      Real(0.5) * s2 * (wmt - Wp) / std::sqrt(wmt * Wp),
      Real(0.5) * c2 * (wmt - Wm) / std::sqrt(wmt * Wm);
  return s;
}

namespace detail {

// W factor of one polariton mode: tanh(Omega / 2 k_B T) for a thermal state
// (1 at T = 0), 2n + 1 for a Fock state.
template <class Real>
Real mode_weight(Real omega, const StateSpec<Real>& st, long n) {
  if (st.kind == StateSpec<Real>::Kind::fock) return Real(2 * n + 1);
  if (st.temperature_k == Real(0)) return Real(1);
  return std::tanh(omega / (Real(2) * Real(kB_ev) * st.temperature_k));
}

// W / Omega with the soft-mode limit handled: for a thermal state at T > 0,
// tanh(O/2kT)/O -> 1/(2kT) as O -> 0, so the QFI stays finite at the
// transition; at T = 0 (or any Fock state) the same ratio genuinely diverges.
template <class Real>
Real weight_over_omega(Real omega, const StateSpec<Real>& st, long n) {
  if (omega <= Real(0)) {
    if (st.kind == StateSpec<Real>::Kind::thermal && st.temperature_k > Real(0))
      return Real(1) / (Real(2) * Real(kB_ev) * st.temperature_k);
    return std::numeric_limits<Real>::infinity();
  }
  return mode_weight(omega, st, n) / omega;
}

} // namespace detail

/*
 * Per-molecule QFI f_Q = F_Q / N along a lab direction. The x and z rows are
 * the rotated-frame transverse result scaled by cos^2(theta) and sin^2(theta)
 * respectively; y is untouched by the rotation.
 */
template <class Real>
AnalyticQfi<Real> f_q_analytic(const ModelParams<Real>& p, const StateSpec<Real>& st,
                               Direction dir) {
  const auto s = polariton_solution(p);
  const Real c2 = std::cos(s.zeta / Real(2)), s2 = std::sin(s.zeta / Real(2));
  const Real sin2h = s2 * s2, cos2h = c2 * c2;

  AnalyticQfi<Real> out;
  if (dir == Direction::y) {
    const Real wp = detail::mode_weight(s.omega_plus, st, st.n_plus);
    const Real wm = detail::mode_weight(s.omega_minus, st, st.n_minus);
    out.value = (wp * sin2h * s.omega_plus + wm * cos2h * s.omega_minus) /
                s.omega_m_tilde;
    return out;
  }

  const Real rp = detail::weight_over_omega(s.omega_plus, st, st.n_plus);
  const Real rm = detail::weight_over_omega(s.omega_minus, st, st.n_minus);
  const Real f_transverse = s.omega_m_tilde * (rp * sin2h + rm * cos2h);

  const Real costh = std::cos(s.theta), sinth = std::sin(s.theta);
  if (dir == Direction::x) {
    out.value = costh * costh * f_transverse;
  } else {
    // at theta = 0 the z spectral weight vanishes identically, even where
    // f_transverse is infinite
    out.value = sinth == Real(0) ? Real(0) : sinth * sinth * f_transverse;
  }
  out.divergent = std::isinf(out.value);
  return out;
}

template <class Real>
AnalyticQfiMax<Real> f_q_max_analytic(const ModelParams<Real>& p,
                                      const StateSpec<Real>& st) {
  AnalyticQfiMax<Real> out;
  const std::array<Direction, 3> dirs = {Direction::x, Direction::y, Direction::z};
  out.value = -std::numeric_limits<Real>::infinity();
  for (int i = 0; i < 3; ++i) {
    const auto f = f_q_analytic(p, st, dirs[std::size_t(i)]);
    out.by_direction[std::size_t(i)] = f.value;
    if (f.value > out.value) {
      out.value = f.value;
      out.direction = dirs[std::size_t(i)];
    }
    out.divergent = out.divergent || f.divergent;
  }
  return out;
}

template <class Real = double>
struct StrongCouplingLimit {
  Real value;             // G -> infinity floor of f_Q along x at T = 0
  bool unbounded;         // kappa = 1: f keeps growing, no floor exists
};

// kappa < 1: kappa^2 / sqrt(1 - kappa^2); kappa > 1: 1 / sqrt(1 - 1/kappa);
// exactly at kappa = 1 the large-G QFI grows without bound.
template <class Real>
StrongCouplingLimit<Real> strong_coupling_limit(const ModelParams<Real>& p) {
  p.validate();
  if (p.kappa == Real(1))
    return {std::numeric_limits<Real>::infinity(), true};
  if (p.kappa < Real(1))
    return {p.kappa * p.kappa / std::sqrt(Real(1) - p.kappa * p.kappa), false};
  return {Real(1) / std::sqrt(Real(1) - Real(1) / p.kappa), false};
}

/*
 * Largest coupling at which the ground state still certifies entanglement,
 * i.e. the root of f_Q^max(T = 0) = 1 above G_c. Undefined once the
 * strong-coupling floor itself exceeds 1 (kappa >= kappa_ew), because then
 * the witness never de-certifies: nullopt.
 */
template <class Real>
std::optional<Real> entanglement_witness_edge(const ModelParams<Real>& p) {
  const auto gc = critical_coupling(p);
  if (!gc) return std::nullopt;
  const auto limit = strong_coupling_limit(p);
  if (limit.unbounded || limit.value >= Real(1)) return std::nullopt;

  const auto st = StateSpec<Real>::thermal(Real(0));
  const auto excess = [&](Real G) {
    ModelParams<Real> q = p;
    q.G = G;
    return f_q_max_analytic(q, st).value - Real(1);
  };

  Real lo = *gc * (Real(1) + Real(1e-9));  // soft mode side, f huge
  Real hi = std::max(Real(2) * *gc, lo);
  int guard = 0;
  while (excess(hi) >= Real(0)) {
    hi *= Real(2);
    if (++guard > 200)
      throw std::runtime_error("entanglement_witness_edge: no sign change found");
  }
  while (hi - lo > Real(1e-6)) {
    const Real mid = Real(0.5) * (lo + hi);
    (excess(mid) > Real(0) ? lo : hi) = mid;
  }
  return Real(0.5) * (lo + hi);
}

/*
 * Behaviour of the x-direction QFI at the transition. At T = 0 the function
 * fits the log-log slope of f against |G - G_c| on the requested side over
 * relative offsets 1e-6 .. 1e-3 (the soft mode gives -1/2 on both sides). At
 * T > 0 the divergence is cut off and the function instead returns the
 * thermal ceiling r^2/(r^2+1) * omega_m / (2 k_B T) with
 * r = (omega_c/omega_m)/sqrt(1-kappa); the side argument is ignored there.
 */
template <class Real>
Real critical_scaling(const ModelParams<Real>& p, Side side, Real temp_k) {
  const auto gc = critical_coupling(p);
  if (!gc)
    throw std::invalid_argument("critical_scaling: no transition for kappa >= 1");
  if (temp_k < Real(0)) throw std::invalid_argument("critical_scaling: negative T");

  if (temp_k > Real(0)) {
    const Real r = (p.omega_c / p.omega_m) / std::sqrt(Real(1) - p.kappa);
    return r * r / (r * r + Real(1)) * p.omega_m /
           (Real(2) * Real(kB_ev) * temp_k);
  }

  const auto st = StateSpec<Real>::thermal(Real(0));
  const int npts = 25;
  const Real lo = Real(1e-6), hi = Real(1e-3);
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < npts; ++i) {
    const Real rel =
        lo * std::pow(hi / lo, Real(i) / Real(npts - 1));
    ModelParams<Real> q = p;
    q.G = side == Side::below ? *gc * (Real(1) - rel) : *gc * (Real(1) + rel);
    const Real f = f_q_max_analytic(q, st).value;
    const Real x = std::log(rel * *gc), y = std::log(f);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (Real(npts) * sxy - sx * sy) / (Real(npts) * sxx - sx * sx);
}

} // namespace dicke
