#pragma once

/*
 * Quantum Fisher information of an eigen-weighted mixed state,
 *
 *   F_Q[rho, O] = 2 sum_{l != l'} (p_l - p_l')^2 / (p_l + p_l') |<l|O|l'>|^2,
 *
 * its maximization over collective spin directions (exact via the 3x3
 * direction matrix), and the k-producibility witness thresholds with their
 * brute-force block-GHZ oracle.
 *
 * Pairs with p_l + p_l' < 1e-14 are skipped: the denominator is singular for
 * two unpopulated states and such pairs carry no physical weight. Any pair
 * that survives that gate has at least one member above 5e-15, so the matrix
 * elements <l|O|l'> are only ever needed on the populated rows. That turns
 * the V^dag O V contraction into (n_pop x n), which is what keeps thermal
 * sweeps cheap at eV gaps where only a handful of states are occupied.
 */

#include <algorithm>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dicke/hilbert.hpp"
#include "dicke/spectral.hpp"

namespace dicke {

inline constexpr double qfi_pair_weight_floor = 1e-14;   // skip gate on p_l + p_l'
inline constexpr double qfi_populated_floor = 5e-15;     // row restriction, = gate/2

template <class Real = double>
struct QfiResult {
  Real value;                          // max eigenvalue of per_direction
  Eigen::Vector3<Real> direction;      // maximizing unit vector (x,y,z components)
  Eigen::Matrix3<Real> per_direction;  // F^{g1 g2}, symmetric PSD
};

namespace detail {

template <class Real>
std::vector<Eigen::Index> populated_rows(const Eigen::VectorX<Real>& w) {
  std::vector<Eigen::Index> pop;
  for (Eigen::Index l = 0; l < w.size(); ++l)
    if (w(l) > Real(qfi_populated_floor)) pop.push_back(l);
  return pop;
}

// M rows <l|O|l'> for populated l only, grouped left-to-right so the cost is
// n_pop * n^2 instead of n^3.
template <class Scalar, class DerivedO>
Eigen::MatrixX<std::complex<typename Eigen::NumTraits<Scalar>::Real>>
populated_matrix_elements(const MixedState<Scalar>& state,
                          const std::vector<Eigen::Index>& pop,
                          const Eigen::MatrixBase<DerivedO>& O) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using C = std::complex<Real>;
  const Eigen::Index n = state.basis.rows();
  if (O.rows() != n || O.cols() != n)
    throw std::invalid_argument("qfi: operator and state dimensions differ");
  Eigen::MatrixX<C> vp(n, Eigen::Index(pop.size()));
  for (std::size_t a = 0; a < pop.size(); ++a)
    vp.col(Eigen::Index(a)) = state.basis.col(pop[a]).template cast<C>();
  return (vp.adjoint() * O.derived().template cast<C>()) *
         state.basis.template cast<C>();
}

} // namespace detail

template <class Scalar, class DerivedO>
typename Eigen::NumTraits<Scalar>::Real
qfi(const MixedState<Scalar>& state, const Eigen::MatrixBase<DerivedO>& O) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  const auto pop = detail::populated_rows(state.weights);
  const auto M = detail::populated_matrix_elements(state, pop, O);
  const auto& p = state.weights;

  Real acc = 0;
  for (std::size_t a = 0; a < pop.size(); ++a) {
    const Eigen::Index l = pop[a];
    for (Eigen::Index lp = 0; lp < p.size(); ++lp) {
      if (lp == l) continue;
      const Real psum = p(l) + p(lp);
      if (psum < Real(qfi_pair_weight_floor)) continue;
      // the mirrored ordered pair is visited iff l' is populated too
      const Real both = p(lp) > Real(qfi_populated_floor) ? Real(1) : Real(2);
      const Real dp = p(l) - p(lp);
      acc += both * (dp * dp / psum) * std::norm(M(Eigen::Index(a), lp));
    }
  }
  return Real(2) * acc;
}

// Direction-resolved matrix F^{g1 g2} = sum 2 (dp)^2/(p+p') Re(<l|S^g1|l'><l'|S^g2|l>)
// over the three collective spin components embedded in the full space.
template <class Scalar, class Real>
Eigen::Matrix3<Real> qfi_matrix(const MixedState<Scalar>& state,
                                const CollectiveSpins<Real>& spins_full) {
  const auto pop = detail::populated_rows(state.weights);
  const std::array<Eigen::MatrixX<std::complex<Real>>, 3> M = {
      detail::populated_matrix_elements(state, pop, spins_full.x),
      detail::populated_matrix_elements(state, pop, spins_full.y),
      detail::populated_matrix_elements(state, pop, spins_full.z)};
  const auto& p = state.weights;

  Eigen::Matrix3<Real> F = Eigen::Matrix3<Real>::Zero();
  for (std::size_t a = 0; a < pop.size(); ++a) {
    const Eigen::Index l = pop[a];
    for (Eigen::Index lp = 0; lp < p.size(); ++lp) {
      if (lp == l) continue;
      const Real psum = p(l) + p(lp);
      if (psum < Real(qfi_pair_weight_floor)) continue;
      const Real both = p(lp) > Real(qfi_populated_floor) ? Real(1) : Real(2);
      const Real dp = p(l) - p(lp);
      const Real w = both * dp * dp / psum;
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
          F(i, j) += w * std::real(M[i](Eigen::Index(a), lp) *
                                   std::conj(M[j](Eigen::Index(a), lp)));
    }
  }
  F *= Real(2);
  F(1, 0) = F(0, 1);
  F(2, 0) = F(0, 2);
  F(2, 1) = F(1, 2);
  return F;
}

// Exact maximization over spin directions: the optimum of n . F . n over unit
// n is the top eigenpair of F, no sphere sampling involved.
template <class Scalar, class Real>
QfiResult<Real> qfi_max(const MixedState<Scalar>& state,
                        const CollectiveSpins<Real>& spins_full) {
  QfiResult<Real> r;
  r.per_direction = qfi_matrix(state, spins_full);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3<Real>> es(r.per_direction);
  r.value = es.eigenvalues()(2);
  r.direction = es.eigenvectors().col(2);
  return r;
}

// ---------------------------------------------------------------------------
// k-producibility witness thresholds
// ---------------------------------------------------------------------------

template <class Real = double>
struct WitnessSpec {
  std::vector<Real> widths;  // local spectral widths Delta_i, kept descending
  int n_total;               // N, total particle count (>= n_perturbed)

  WitnessSpec(std::vector<Real> deltas, int total = -1)
      : widths(std::move(deltas)), n_total(total) {
    for (Real d : widths)
      if (d < Real(0)) throw std::invalid_argument("WitnessSpec: widths must be >= 0");
    std::sort(widths.begin(), widths.end(), std::greater<Real>());
    if (n_total < 0) n_total = int(widths.size());
    if (n_total < int(widths.size()))
      throw std::invalid_argument("WitnessSpec: n_total smaller than perturbed count");
  }

  // the usual two-level-molecule case: every width 1
  static WitnessSpec uniform(int n_perturbed, int total = -1) {
    return WitnessSpec(std::vector<Real>(std::size_t(n_perturbed), Real(1)), total);
  }

  int n_perturbed() const { return int(widths.size()); }
};

/*
 * F(K; {Delta_i}): descending widths grouped into floor(N_B/K) blocks of K
 * plus the remainder block; the bound is the sum of squared block width-sums.
 * Any K-producible state obeys F_Q <= F(K), so exceeding it certifies
 * entanglement depth at least K+1.
 */
template <class Real>
Real witness_threshold(const WitnessSpec<Real>& spec, int K) {
  const int nb = spec.n_perturbed();
  if (K < 1 || K > nb)
    throw std::out_of_range("witness_threshold: K must be in [1, n_perturbed]");
  Real F = 0;
  for (int start = 0; start < nb; start += K) {
    const int stop = std::min(start + K, nb);
    Real block = 0;
    for (int i = start; i < stop; ++i) block += spec.widths[std::size_t(i)];
    F += block * block;
  }
  return F;
}

// 1 + largest k whose threshold is exceeded; 1 when nothing is witnessed
// (below F(1) is consistent with a fully separable state).
template <class Real>
int entanglement_depth_bound(Real f_measured, const WitnessSpec<Real>& spec) {
  if (f_measured < Real(0))
    throw std::invalid_argument("entanglement_depth_bound: negative QFI");
  int depth = 1;
  for (int k = 1; k <= spec.n_perturbed(); ++k)
    if (f_measured > witness_threshold(spec, k)) depth = k + 1;
  return depth;
}

namespace detail {

// enumerate all set partitions of {0..n-1} with every block size <= K
template <class Fn>
void for_each_bounded_partition(int n, int K, std::vector<int>& block_of,
                                std::vector<int>& block_size, int item, Fn&& fn) {
  if (item == n) {
    fn(block_of, int(block_size.size()));
    return;
  }
  for (std::size_t b = 0; b < block_size.size(); ++b) {
    if (block_size[b] == K) continue;
    block_of[std::size_t(item)] = int(b);
    ++block_size[b];
    for_each_bounded_partition(n, K, block_of, block_size, item + 1, fn);
    --block_size[b];
  }
  block_of[std::size_t(item)] = int(block_size.size());
  block_size.push_back(1);
  for_each_bounded_partition(n, K, block_of, block_size, item + 1, fn);
  block_size.pop_back();
}

} // namespace detail

/*
 * Brute-force oracle for the threshold: over every partition of the particles
 * into blocks of size <= K, build the explicit product of block-GHZ states
 * (|0...0> + |1...1>)/sqrt(2) in the full 2^N space and evaluate
 * 4 Var(sum_i Delta_i sigma_i^z / 2) on it. The best partition attains
 * F(K; {Delta_i}), which is what the closed form above is tested against.
 */
template <class Real>
Real producibility_oracle(const WitnessSpec<Real>& spec, int K) {
  const int n = spec.n_perturbed();
  if (n > 8)
    throw std::invalid_argument(
        "producibility_oracle: brute force over 2^N states, refuse N > 8");
  if (K < 1 || K > n)
    throw std::out_of_range("producibility_oracle: K must be in [1, n_perturbed]");

  const std::size_t dim = std::size_t(1) << n;
  // local sigma^z eigenvalue of particle i in computational basis state b
  const auto half_width = [&](int i) { return spec.widths[std::size_t(i)] / Real(2); };

  Real best = 0;
  std::vector<int> block_of(static_cast<std::size_t>(n));
  std::vector<int> block_size;
  Eigen::VectorX<Real> amp = Eigen::VectorX<Real>::Zero(Eigen::Index(dim));
  detail::for_each_bounded_partition(n, K, block_of, block_size, 0,
                                     [&](const std::vector<int>& blk, int nblocks) {
    // amplitudes: each block all-0 or all-1, everything else vanishes
    amp.setZero();
    const Real a0 = std::pow(Real(2), -Real(nblocks) / Real(2));
    for (std::uint32_t pattern = 0; pattern < (std::uint32_t(1) << nblocks); ++pattern) {
      std::size_t b = 0;
      for (int i = 0; i < n; ++i)
        if (pattern >> blk[std::size_t(i)] & 1u) b |= std::size_t(1) << i;
      amp(Eigen::Index(b)) = a0;
    }
    // O is diagonal here, so moments come straight off the bitstrings
    Real m1 = 0, m2 = 0;
    for (std::size_t b = 0; b < dim; ++b) {
      const Real a2 = amp(Eigen::Index(b)) * amp(Eigen::Index(b));
      if (a2 == Real(0)) continue;
      Real lam = 0;
      for (int i = 0; i < n; ++i) lam += (b >> i & 1u) ? -half_width(i) : half_width(i);
      m1 += a2 * lam;
      m2 += a2 * lam * lam;
    }
    best = std::max(best, Real(4) * (m2 - m1 * m1));
  });
  return best;
}

} // namespace dicke
