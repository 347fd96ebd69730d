#pragma once

/*
 * Truncated product Hilbert space for N two-level molecules uniformly coupled
 * to one cavity mode: photon Fock space (cutoff n_max) tensor the symmetric
 * Dicke ladder s = N/2. The uniform coupling never leaves the ladder and the
 * dark states carry no dipole weight, so the (n_max+1)(N+1)-dim space is the
 * whole story at linear cost instead of 2^N.
 *
 * Basis ordering is photon-major: index = n*(N+1) + k with |n> the Fock state
 * and k = 0..N the ladder rung (S^z eigenvalue m = k - N/2).
 */

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace dicke {

template <class Real = double>
struct ModelParams {
  Real omega_c = Real(1);   // cavity photon energy (eV)
  Real omega_m = Real(1);   // molecular excitation energy (eV)
  Real G = Real(0);         // collective coupling (eV); single-molecule g = G/sqrt(N)
  Real kappa = Real(0);     // diamagnetic (a+a^dag)^2 scaling, dimensionless
  int n_molecules = 1;
  int photon_cutoff = 70;   // matches the converged finite-size runs at eV couplings

  Eigen::Index dim() const {
    return Eigen::Index(photon_cutoff + 1) * Eigen::Index(n_molecules + 1);
  }

  void validate() const {
    if (!(omega_c > Real(0)) || !(omega_m > Real(0)))
      throw std::invalid_argument("ModelParams: omega_c and omega_m must be > 0");
    if (G < Real(0) || kappa < Real(0))
      throw std::invalid_argument("ModelParams: G and kappa must be >= 0");
    if (n_molecules < 1) throw std::invalid_argument("ModelParams: need n_molecules >= 1");
    if (photon_cutoff < 0) throw std::invalid_argument("ModelParams: photon_cutoff must be >= 0");
  }
};

template <class Real = double>
struct CollectiveSpins {
  // S^y is genuinely complex, so all three are stored complex for uniform use
  // in the direction-resolved QFI matrix. S^x and S^z have zero imaginary part.
  Eigen::MatrixX<std::complex<Real>> x, y, z;
};

namespace detail {

// Ladder raising amplitudes <s,m+1|S^+|s,m> = sqrt(s(s+1) - m(m+1)) on the
// rung index k = m + s. Real by convention (Condon-Shortley).
template <class Real>
Eigen::MatrixX<Real> spin_plus_ladder(int n_molecules) {
  const int d = n_molecules + 1;
  const Real s = Real(n_molecules) / Real(2);
  Eigen::MatrixX<Real> sp = Eigen::MatrixX<Real>::Zero(d, d);
  for (int k = 0; k + 1 < d; ++k) {
    const Real m = Real(k) - s;
    sp(k + 1, k) = std::sqrt(s * (s + Real(1)) - m * (m + Real(1)));
  }
  return sp;
}

template <class Real>
Eigen::MatrixX<Real> spin_z_ladder(int n_molecules) {
  const int d = n_molecules + 1;
  const Real s = Real(n_molecules) / Real(2);
  Eigen::VectorX<Real> mz(d);
  for (int k = 0; k < d; ++k) mz(k) = Real(k) - s;
  return mz.asDiagonal();
}

// (a + a^dag) on the truncated Fock space.
template <class Real>
Eigen::MatrixX<Real> photon_x(int cutoff) {
  const int d = cutoff + 1;
  Eigen::MatrixX<Real> x = Eigen::MatrixX<Real>::Zero(d, d);
  for (int n = 0; n + 1 < d; ++n) {
    x(n + 1, n) = std::sqrt(Real(n + 1));
    x(n, n + 1) = x(n + 1, n);
  }
  return x;
}

template <class Real>
Eigen::MatrixX<Real> photon_number(int cutoff) {
  const int d = cutoff + 1;
  Eigen::VectorX<Real> n(d);
  for (int i = 0; i < d; ++i) n(i) = Real(i);
  return n.asDiagonal();
}

} // namespace detail

// Collective spin matrices on the s = N/2 ladder alone ((N+1)-dim).
template <class Real = double>
CollectiveSpins<Real> build_collective_spins(int n_molecules) {
  if (n_molecules < 1) throw std::invalid_argument("build_collective_spins: n_molecules >= 1");
  using C = std::complex<Real>;
  const Eigen::MatrixX<Real> sp = detail::spin_plus_ladder<Real>(n_molecules);
  const Eigen::MatrixX<Real> sm = sp.transpose();
  CollectiveSpins<Real> S;
  S.x = ((sp + sm) / Real(2)).template cast<C>();
  S.y = C(0, -0.5) * (sp - sm).template cast<C>();  // (S+ - S-)/(2i)
  S.z = detail::spin_z_ladder<Real>(n_molecules).template cast<C>();
  return S;
}

// Same spins embedded in the full photon x ladder space (identity on the photon).
template <class Real = double>
CollectiveSpins<Real> build_collective_spins_full(const ModelParams<Real>& p) {
  p.validate();
  using C = std::complex<Real>;
  const CollectiveSpins<Real> S = build_collective_spins<Real>(p.n_molecules);
  const Eigen::MatrixX<C> id =
      Eigen::MatrixX<C>::Identity(p.photon_cutoff + 1, p.photon_cutoff + 1);
  CollectiveSpins<Real> F;
  F.x = Eigen::kroneckerProduct(id, S.x);
  F.y = Eigen::kroneckerProduct(id, S.y);
  F.z = Eigen::kroneckerProduct(id, S.z);
  return F;
}

/*
 * H = w_c a^dag a + w_m (S^z + N/2) + (2G/sqrt(N)) (a^dag + a) S^x
 *       + kappa (G^2/w_m) (a^dag + a)^2
 *
 * Every term is real in this basis, so the Hamiltonian is real symmetric and
 * the eigenproblem stays in double instead of complex<double>. Energy zero is
 * the bare vacuum (the +N/2 shift is included).
 */
template <class Real = double>
Eigen::MatrixX<Real> build_hamiltonian(const ModelParams<Real>& p) {
  p.validate();
  if (p.photon_cutoff == 0 && p.G > Real(0))
    throw std::runtime_error(
        "build_hamiltonian: photon_cutoff = 0 with G > 0 leaves the coupling no "
        "Fock space to act on (truncation would be total)");

  const int dl = p.n_molecules + 1;
  const Eigen::MatrixX<Real> sp = detail::spin_plus_ladder<Real>(p.n_molecules);
  const Eigen::MatrixX<Real> sx = (sp + sp.transpose()) / Real(2);
  const Eigen::MatrixX<Real> sz = detail::spin_z_ladder<Real>(p.n_molecules);
  const Eigen::MatrixX<Real> xph = detail::photon_x<Real>(p.photon_cutoff);
  const Eigen::MatrixX<Real> nph = detail::photon_number<Real>(p.photon_cutoff);
  const Eigen::MatrixX<Real> id_ph =
      Eigen::MatrixX<Real>::Identity(p.photon_cutoff + 1, p.photon_cutoff + 1);
  const Eigen::MatrixX<Real> id_l = Eigen::MatrixX<Real>::Identity(dl, dl);
  const Eigen::MatrixX<Real> shifted_sz =
      sz + Real(p.n_molecules) / Real(2) * id_l;

  const Real lam = Real(2) * p.G / std::sqrt(Real(p.n_molecules));
  Eigen::MatrixX<Real> H = p.omega_c * Eigen::kroneckerProduct(nph, id_l);
  H += p.omega_m * Eigen::kroneckerProduct(id_ph, shifted_sz);
  H += lam * Eigen::kroneckerProduct(xph, sx);
  if (p.kappa > Real(0)) {
    const Eigen::MatrixX<Real> x2 = xph * xph;
    H += p.kappa * p.G * p.G / p.omega_m * Eigen::kroneckerProduct(x2, id_l);
  }
  return H;
}

// Z2 parity P = exp(i pi (a^dag a + S^z + N/2)): diagonal +-1, vacuum at +1.
template <class Real = double>
Eigen::MatrixX<Real> build_parity_operator(const ModelParams<Real>& p) {
  p.validate();
  const Eigen::Index d = p.dim();
  const int dl = p.n_molecules + 1;
  Eigen::VectorX<Real> diag(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Eigen::Index n = i / dl;      // photon quanta
    const Eigen::Index k = i % dl;      // ladder rung, k = m + N/2
    diag(i) = ((n + k) % 2 == 0) ? Real(1) : Real(-1);
  }
  return diag.asDiagonal();
}

// Transition dipole 2 mu S^x in the full space. mu is a single unknown scale
// that cancels in every spectral ratio, so it defaults to 1 and is never
// physically meaningful on its own.
template <class Real = double>
Eigen::MatrixX<std::complex<Real>> build_transition_dipole(const ModelParams<Real>& p,
                                                           Real mu = Real(1)) {
  return Real(2) * mu * build_collective_spins_full<Real>(p).x;
}

} // namespace dicke
