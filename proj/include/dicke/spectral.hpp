#pragma once

/*
 * State preparation layer: dense Hermitian eigendecomposition, Boltzmann
 * thermal states on the exact finite-size spectrum, purity, and the photon
 * partial trace. Everything downstream (QFI, spectra) consumes the
 * eigen-weighted form {p_l, |l>} produced here.
 */

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dicke/constants.hpp"
#include "dicke/hilbert.hpp"

namespace dicke {

template <class Scalar = double>
struct EigenSystem {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  Eigen::VectorX<Real> energies;     // ascending (eV)
  Eigen::MatrixX<Scalar> vectors;    // column j pairs with energies[j]
};

template <class Scalar = double>
struct MixedState {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  Eigen::VectorX<Real> weights;      // p_l >= 0, sum 1; zero-weight columns are kept
  Eigen::MatrixX<Scalar> basis;      // orthonormal |l>, same indexing as weights
  std::optional<Real> temperature;   // kelvin metadata when thermally prepared
};

namespace detail {

template <class Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real
hermiticity_defect(const Eigen::MatrixBase<Derived>& M) {
  return (M.derived() - M.derived().adjoint()).cwiseAbs().maxCoeff();
}

} // namespace detail

// Dense full-spectrum solve. The QFI double sum needs every eigenpair anyway,
// so there is nothing to gain from iterative low-end solvers here.
template <class Derived>
EigenSystem<typename Derived::Scalar>
eigendecompose(const Eigen::MatrixBase<Derived>& H) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  if (H.rows() != H.cols())
    throw std::invalid_argument("eigendecompose: matrix must be square");
  const Real scale = std::max(Real(1), H.cwiseAbs().maxCoeff());
  if (detail::hermiticity_defect(H) > Real(1e-12) * scale)
    throw std::invalid_argument("eigendecompose: input is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixX<Scalar>> solver(H.derived());
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: solver failed to converge");
  EigenSystem<Scalar> out;
  out.energies = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

/*
 * p_l proportional to exp(-(E_l - E_0)/kB T). Subtracting E_0 first keeps the
 * exponentials sane against eV-scale energies at kB T ~ 0.026 eV; anything
 * below 1e-300 is clamped to exactly zero so no denormals leak into the QFI
 * denominators. T = 0 takes a separate path: the superradiant doublet is only
 * near-degenerate at finite size, and the physical zero-temperature limit is
 * the equally weighted mixture of the ground set, so states within 1e-9 eV of
 * E_0 share the weight equally.
 */
template <class Scalar>
MixedState<Scalar> thermal_state(const EigenSystem<Scalar>& eig,
                                 typename EigenSystem<Scalar>::Real temperature_k) {
  using Real = typename EigenSystem<Scalar>::Real;
  if (temperature_k < Real(0))
    throw std::invalid_argument("thermal_state: negative temperature");
  if (eig.energies.size() == 0)
    throw std::invalid_argument("thermal_state: empty eigensystem");

  const Eigen::Index n = eig.energies.size();
  Eigen::VectorX<Real> p = Eigen::VectorX<Real>::Zero(n);
  const Real e0 = eig.energies(0);

  if (temperature_k == Real(0)) {
    constexpr Real ground_window = Real(1e-9);  // eV
    Eigen::Index nground = 0;
    while (nground < n && eig.energies(nground) - e0 < ground_window) ++nground;
    p.head(nground).setConstant(Real(1) / Real(nground));
  } else {
    const Real kt = Real(kB_ev) * temperature_k;
    for (Eigen::Index l = 0; l < n; ++l) {
      const Real w = std::exp(-(eig.energies(l) - e0) / kt);
      p(l) = (w < Real(1e-300)) ? Real(0) : w;
    }
    p /= p.sum();
  }

  MixedState<Scalar> st;
  st.weights = std::move(p);
  st.basis = eig.vectors;
  st.temperature = temperature_k;
  return st;
}

// Weight 1 on a single eigenstate; the zero-weight partners stay in the basis
// because the QFI sum runs over all |l'>.
template <class Scalar>
MixedState<Scalar> pure_eigenstate(const EigenSystem<Scalar>& eig, Eigen::Index l) {
  using Real = typename EigenSystem<Scalar>::Real;
  if (l < 0 || l >= eig.energies.size())
    throw std::out_of_range("pure_eigenstate: index out of range");
  MixedState<Scalar> st;
  st.weights = Eigen::VectorX<Real>::Zero(eig.energies.size());
  st.weights(l) = Real(1);
  st.basis = eig.vectors;
  return st;
}

// Eigendecompose a density matrix into MixedState form. Tiny negative
// eigenvalues from roundoff are clamped to zero and the weights renormalized.
template <class Derived>
MixedState<typename Derived::Scalar>
state_from_density(const Eigen::MatrixBase<Derived>& rho) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  EigenSystem<Scalar> es = eigendecompose(rho);
  Eigen::VectorX<Real> p = es.energies.cwiseMax(Real(0));
  const Real tr = p.sum();
  if (!(tr > Real(0)))
    throw std::invalid_argument("state_from_density: trace must be positive");
  MixedState<Scalar> st;
  st.weights = p / tr;
  st.basis = std::move(es.vectors);
  return st;
}

template <class Scalar>
typename MixedState<Scalar>::Real purity(const MixedState<Scalar>& state) {
  return state.weights.squaredNorm();
}

/*
 * Trace out the photon: rho_B[k,k'] = sum_l p_l sum_n psi_l[n,k] psi_l[n,k']^*.
 * Returns the (N+1)x(N+1) reduced density matrix on the Dicke ladder. Mixing
 * over the photon register degrades the eigenstructure, which is exactly why
 * the reduced-state QFI falls short of the total-state one.
 */
template <class Scalar, class Real>
Eigen::MatrixX<Scalar> partial_trace_photon(const MixedState<Scalar>& state,
                                            const ModelParams<Real>& params) {
  const int dl = params.n_molecules + 1;
  const int dp = params.photon_cutoff + 1;
  if (state.basis.rows() != Eigen::Index(dl) * dp)
    throw std::invalid_argument("partial_trace_photon: state does not live on params' basis");

  Eigen::MatrixX<Scalar> rho = Eigen::MatrixX<Scalar>::Zero(dl, dl);
  for (Eigen::Index l = 0; l < state.weights.size(); ++l) {
    const auto p = state.weights(l);
    if (p == 0) continue;
    // photon-major layout: reshape |l> into (ladder x photon) columns
    const auto psi = state.basis.col(l).reshaped(dl, dp);
    rho.noalias() += p * (psi * psi.adjoint());
  }
  return rho;
}

} // namespace dicke
