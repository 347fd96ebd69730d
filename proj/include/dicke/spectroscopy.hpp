#pragma once

/*
 * Absorption spectra from exact-diagonalization output and their inversion
 * back to QFI per molecule.
 *
 * Synthesis: every upward transition l -> l' with populated initial state
 * contributes a stick p_l |<l|D|l'>|^2 at its gap, broadened to a normalized
 * Lorentzian of FWHM Gamma. Spectra are in arbitrary units; the dipole scale
 * cancels in both inversion routes, which is the whole point (the ratio form
 * is what makes the witness usable without knowing mu).
 *
 * Inversion (thermal): f_Q = int w A / int w A_bare with the detailed-balance
 * kernel w = (1 - e^{-w/kT})^2 / (1 + e^{-w/kT}); the bare reference is the
 * decoupled-molecule spectrum at the same temperature. Pump-probe: plain
 * integral ratio times (n+ + n- + 1) for a polariton Fock state.
 *
 * The default grid stretches 20 * Gamma past the extreme sticks and is
 * refined to at least 4 points per half width. Both tails of a Lorentzian
 * past 20 Gamma hold about 1.6% of its weight, clipped symmetrically on the
 * reference and (mostly) on the signal, so ratios on default grids carry a
 * percent-level floor; pass an explicit wide grid when that matters.
 */

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicke/constants.hpp"
#include "dicke/qfi.hpp"
#include "dicke/spectral.hpp"

namespace dicke {

template <class Real = double>
struct Spectrum {
  Eigen::VectorX<Real> omega_grid;        // strictly ascending, uniform (eV)
  Eigen::VectorX<Real> values;            // A(omega) >= 0, arbitrary units
  std::optional<Real> temperature_k;      // metadata, checked on inversion
  std::optional<Real> linewidth_ev;       // synthesis Gamma; absent for ingested data

  void validate() const {
    const Eigen::Index n = omega_grid.size();
    if (n < 2 || values.size() != n)
      throw std::invalid_argument("Spectrum: need matching grid/value arrays, >= 2 points");
    const Real h = (omega_grid(n - 1) - omega_grid(0)) / Real(n - 1);
    if (!(h > Real(0)))
      throw std::invalid_argument("Spectrum: grid must be strictly ascending");
    // the ulp term keeps long machine-generated grids legal: adjacent
    // differences of values near |omega| wobble by rounding alone
    const Real tol = Real(1e-12) * h +
                     Real(4) * std::numeric_limits<Real>::epsilon() *
                         std::max(std::abs(omega_grid(0)), std::abs(omega_grid(n - 1)));
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const Real d = omega_grid(i + 1) - omega_grid(i);
      if (!(d > Real(0)))
        throw std::invalid_argument("Spectrum: grid must be strictly ascending");
      if (std::abs(d - h) > tol)
        throw std::invalid_argument("Spectrum: grid must be uniform to 1e-12 relative");
    }
    for (Eigen::Index i = 0; i < n; ++i)
      if (!std::isfinite(values(i)) || values(i) < Real(0))
        throw std::invalid_argument("Spectrum: values must be finite and >= 0");
    if (temperature_k && *temperature_k < Real(0))
      throw std::invalid_argument("Spectrum: negative temperature metadata");
    if (linewidth_ev && !(*linewidth_ev > Real(0)))
      throw std::invalid_argument("Spectrum: non-positive linewidth metadata");
  }
};

template <class Real = double>
struct SpectrumGrid {
  Real lo, hi;
  Eigen::Index npts;
};

// Raised when an explicit grid fails to cover retained sticks; carries the
// clipped fraction of the total stick weight so the caller can judge.
class truncation_error : public std::runtime_error {
 public:
  truncation_error(const std::string& msg, double lost)
      : std::runtime_error(msg), lost_fraction_(lost) {}
  double lost_fraction() const { return lost_fraction_; }

 private:
  double lost_fraction_;
};

namespace detail {

template <class Real>
struct Stick {
  Real freq;                 // transition energy (eV), > 0
  Real weight;               // p_l |<l|D|l'>|^2
  Eigen::Index final_state;  // l', keys the per-state linewidth override
};

// upward sticks from populated initial states, pruned at 1e-12 of the max
template <class Scalar, class Real>
std::vector<Stick<Real>> bright_sticks(const EigenSystem<Scalar>& eig,
                                       const MixedState<Scalar>& state,
                                       const Eigen::MatrixX<std::complex<Real>>& dipole) {
  if (eig.energies.size() != state.basis.cols())
    throw std::invalid_argument("bright_sticks: eigensystem/state size mismatch");
  const auto pop = populated_rows(state.weights);
  const auto M = populated_matrix_elements(state, pop, dipole);

  std::vector<Stick<Real>> sticks;
  Real wmax = 0;
  for (std::size_t a = 0; a < pop.size(); ++a) {
    const Eigen::Index l = pop[a];
    for (Eigen::Index lp = 0; lp < eig.energies.size(); ++lp) {
      const Real gap = eig.energies(lp) - eig.energies(l);
      if (!(gap > Real(0))) continue;  // absorption only, emission lines dropped
      const Real w = state.weights(l) * std::norm(M(Eigen::Index(a), lp));
      if (w <= Real(0)) continue;
      sticks.push_back({gap, w, lp});
      wmax = std::max(wmax, w);
    }
  }
  std::vector<Stick<Real>> kept;
  for (const auto& s : sticks)
    if (s.weight > Real(1e-12) * wmax) kept.push_back(s);
  return kept;
}

template <class Real>
Real trapezoid(const Eigen::VectorX<Real>& x, const Eigen::VectorX<Real>& y) {
  const Eigen::Index n = x.size();
  const Real h = (x(n - 1) - x(0)) / Real(n - 1);
  return h * (y.sum() - Real(0.5) * (y(0) + y(n - 1)));
}

} // namespace detail

// Detailed-balance kernel on a frequency grid; zero at and below omega = 0
// (the inversion integral starts there), saturating to 1 for omega >> k_B T.
// T = 0 is the sharp limit: 1 for any positive frequency.
template <class Real>
Eigen::VectorX<Real> kernel_weights(const Eigen::VectorX<Real>& omega_grid, Real temp_k) {
  if (temp_k < Real(0)) throw std::invalid_argument("kernel_weights: negative temperature");
  Eigen::VectorX<Real> w(omega_grid.size());
  for (Eigen::Index i = 0; i < omega_grid.size(); ++i) {
    const Real om = omega_grid(i);
    if (!(om > Real(0))) {
      w(i) = Real(0);
    } else if (temp_k == Real(0)) {
      w(i) = Real(1);
    } else {
      const Real e = std::exp(-om / (Real(kB_ev) * temp_k));
      w(i) = (Real(1) - e) * (Real(1) - e) / (Real(1) + e);
    }
  }
  return w;
}

/*
 * Lorentzian synthesis on an explicit grid. Retained sticks falling outside
 * the grid raise truncation_error with the lost weight fraction. The
 * gamma_override map is keyed by final eigenstate index for the occasional
 * state-resolved linewidth; everything else uses the uniform gamma.
 */
template <class Scalar, class Real = typename Eigen::NumTraits<Scalar>::Real>
Spectrum<Real> synthesize_spectrum(const EigenSystem<Scalar>& eig,
                                   const MixedState<Scalar>& state,
                                   const Eigen::MatrixX<std::complex<Real>>& dipole,
                                   Real gamma, const SpectrumGrid<Real>& grid,
                                   const std::map<Eigen::Index, Real>& gamma_override = {}) {
  if (!(gamma > Real(0))) throw std::invalid_argument("synthesize_spectrum: gamma must be > 0");
  if (grid.npts < 2) throw std::invalid_argument("synthesize_spectrum: need >= 2 grid points");
  if (!(grid.hi > grid.lo)) throw std::invalid_argument("synthesize_spectrum: empty grid span");
  for (const auto& [lp, g] : gamma_override)
    if (!(g > Real(0)))
      throw std::invalid_argument("synthesize_spectrum: override linewidths must be > 0");

  const auto sticks = detail::bright_sticks(eig, state, dipole);

  Real total = 0, lost = 0;
  for (const auto& s : sticks) {
    total += s.weight;
    if (s.freq < grid.lo || s.freq > grid.hi) lost += s.weight;
  }
  if (lost > Real(0)) {
    std::ostringstream msg;
    msg << "synthesize_spectrum: grid [" << grid.lo << ", " << grid.hi
        << "] clips " << lost / total << " of the stick weight";
    throw truncation_error(msg.str(), double(lost / total));
  }

  Spectrum<Real> out;
  out.omega_grid = Eigen::VectorX<Real>::LinSpaced(grid.npts, grid.lo, grid.hi);
  out.values = Eigen::VectorX<Real>::Zero(grid.npts);
  out.linewidth_ev = gamma;
  if (state.temperature) out.temperature_k = *state.temperature;

  for (const auto& s : sticks) {
    const auto it = gamma_override.find(s.final_state);
    const Real hw = (it == gamma_override.end() ? gamma : it->second) / Real(2);
    const Real amp = s.weight * hw / Real(M_PI);
    for (Eigen::Index i = 0; i < grid.npts; ++i) {
      const Real d = out.omega_grid(i) - s.freq;
      out.values(i) += amp / (d * d + hw * hw);
    }
  }
  return out;
}

// Default-grid overload: 20 Gamma of margin past the extreme sticks (clamped
// at zero on the left) and at least 4 points per half width so narrow lines
// do not fall through the mesh.
template <class Scalar, class Real = typename Eigen::NumTraits<Scalar>::Real>
Spectrum<Real> synthesize_spectrum(const EigenSystem<Scalar>& eig,
                                   const MixedState<Scalar>& state,
                                   const Eigen::MatrixX<std::complex<Real>>& dipole,
                                   Real gamma,
                                   const std::map<Eigen::Index, Real>& gamma_override = {}) {
  if (!(gamma > Real(0))) throw std::invalid_argument("synthesize_spectrum: gamma must be > 0");
  const auto sticks = detail::bright_sticks(eig, state, dipole);
  if (sticks.empty())
    throw std::runtime_error("synthesize_spectrum: no bright transitions, cannot pick a grid");
  Real fmin = sticks.front().freq, fmax = sticks.front().freq;
  for (const auto& s : sticks) {
    fmin = std::min(fmin, s.freq);
    fmax = std::max(fmax, s.freq);
  }
  SpectrumGrid<Real> grid;
  grid.lo = std::max(Real(0), fmin - Real(20) * gamma);
  grid.hi = fmax + Real(20) * gamma;
  grid.npts = std::max<Eigen::Index>(
      4000, Eigen::Index(std::ceil((grid.hi - grid.lo) / (gamma / Real(4)))) + 1);
  return synthesize_spectrum(eig, state, dipole, gamma, grid, gamma_override);
}

// Thermal inversion: kernel-weighted integral over the signal divided by the
// same integral over the decoupled-molecule reference at the same T. Scale
// factors (dipole, proportionality constants) cancel in the ratio.
template <class Real>
Real qfi_from_spectrum(const Spectrum<Real>& spec, const Spectrum<Real>& spec_bare,
                       Real temp_k) {
  spec.validate();
  spec_bare.validate();
  if (temp_k < Real(0)) throw std::invalid_argument("qfi_from_spectrum: negative temperature");
  for (const auto* s : {&spec, &spec_bare})
    if (s->temperature_k &&
        std::abs(*s->temperature_k - temp_k) > Real(1e-9) * std::max(temp_k, Real(1)))
      throw std::invalid_argument(
          "qfi_from_spectrum: spectrum temperature metadata disagrees with T");

  const Real num = detail::trapezoid<Real>(
      spec.omega_grid, (kernel_weights(spec.omega_grid, temp_k).array() *
                        spec.values.array()).matrix());
  const Real den = detail::trapezoid<Real>(
      spec_bare.omega_grid, (kernel_weights(spec_bare.omega_grid, temp_k).array() *
                             spec_bare.values.array()).matrix());
  if (!(den > Real(0)))
    throw std::invalid_argument("qfi_from_spectrum: bare reference integrates to zero");
  return num / den;
}

// Pump-probe inversion for a polariton Fock state |n+, n->: unweighted
// integral ratio times (n+ + n- + 1).
template <class Real>
Real pump_probe_ratio(const Spectrum<Real>& spec_excited,
                      const Spectrum<Real>& spec_bare_excited, long n_plus, long n_minus) {
  if (n_plus < 0 || n_minus < 0)
    throw std::invalid_argument("pump_probe_ratio: negative occupation");
  spec_excited.validate();
  spec_bare_excited.validate();
  const Real num = detail::trapezoid(spec_excited.omega_grid, spec_excited.values);
  const Real den = detail::trapezoid(spec_bare_excited.omega_grid, spec_bare_excited.values);
  if (!(den > Real(0)))
    throw std::invalid_argument("pump_probe_ratio: bare reference integrates to zero");
  return Real(n_plus + n_minus + 1) * num / den;
}

// ---------------------------------------------------------------------------
// CSV plumbing: header `omega_ev,absorption`, optional `# key=value` metadata
// lines, %.17g fields so the round-trip is bit-faithful, LF endings.
// ---------------------------------------------------------------------------

template <class Real>
void write_spectrum_csv(const Spectrum<Real>& spec, const std::string& path) {
  spec.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_spectrum_csv: cannot open " + path);
  char buf[64];
  if (spec.temperature_k) {
    std::snprintf(buf, sizeof buf, "%.17g", double(*spec.temperature_k));
    f << "# temperature_k=" << buf << "\n";
  }
  if (spec.linewidth_ev) {
    std::snprintf(buf, sizeof buf, "%.17g", double(*spec.linewidth_ev));
    f << "# linewidth_ev=" << buf << "\n";
  }
  f << "omega_ev,absorption\n";
  for (Eigen::Index i = 0; i < spec.omega_grid.size(); ++i) {
    char row[160];
    std::snprintf(row, sizeof row, "%.17g,%.17g\n", double(spec.omega_grid(i)),
                  double(spec.values(i)));
    f << row;
  }
  if (!f) throw std::runtime_error("write_spectrum_csv: write failed for " + path);
}

namespace detail {

inline double parse_field(const std::string& s, int line_no, const char* what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  // reject trailing junk, but allow the \r of CRLF files
  while (used < s.size() && (s[used] == '\r' || s[used] == ' ')) ++used;
  if (used != s.size()) {
    std::ostringstream msg;
    msg << "read_spectrum_csv: malformed " << what << " on line " << line_no;
    throw std::runtime_error(msg.str());
  }
  return v;
}

} // namespace detail

template <class Real = double>
Spectrum<Real> read_spectrum_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_spectrum_csv: cannot open " + path);

  Spectrum<Real> spec;
  std::vector<Real> om, val;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;  // free-form comment
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      const std::string value = line.substr(eq + 1);
      if (key == "temperature_k")
        spec.temperature_k = Real(detail::parse_field(value, line_no, "metadata value"));
      else if (key == "linewidth_ev")
        spec.linewidth_ev = Real(detail::parse_field(value, line_no, "metadata value"));
      continue;
    }
    if (!header_seen) {
      if (line != "omega_ev,absorption") {
        std::ostringstream msg;
        msg << "read_spectrum_csv: expected header 'omega_ev,absorption' on line "
            << line_no;
        throw std::runtime_error(msg.str());
      }
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      std::ostringstream msg;
      msg << "read_spectrum_csv: expected two comma-separated fields on line " << line_no;
      throw std::runtime_error(msg.str());
    }
    om.push_back(Real(detail::parse_field(line.substr(0, comma), line_no, "frequency")));
    val.push_back(Real(detail::parse_field(line.substr(comma + 1), line_no, "absorption")));
  }
  if (!header_seen)
    throw std::runtime_error("read_spectrum_csv: expected header 'omega_ev,absorption' on line 1");

  spec.omega_grid = Eigen::Map<const Eigen::VectorX<Real>>(om.data(), Eigen::Index(om.size()));
  spec.values = Eigen::Map<const Eigen::VectorX<Real>>(val.data(), Eigen::Index(val.size()));
  for (Eigen::Index i = 0; i + 1 < spec.omega_grid.size(); ++i)
    if (!(spec.omega_grid(i + 1) > spec.omega_grid(i)))
      throw std::runtime_error("read_spectrum_csv: frequency grid is not ascending");
  spec.validate();
  return spec;
}

} // namespace dicke
