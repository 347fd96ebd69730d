/*
 * dicke-qfi: command-line front end for the QFI / entanglement-witness
 * library. Five subcommands: qfi-scan (maximized QFI along a coupling grid,
 * exact diagonalization or the thermodynamic-limit closed form),
 * phase-diagram (analytic QFI on a 2d grid plus boundary curves), spectrum
 * (synthesized absorption CSV with the inversion echoed), witness (threshold
 * table for inhomogeneous widths), compare (finite-size ED against the
 * closed form).
 *
 * Conventions: energies in eV throughout. Coupling axes follow the two
 * bookkeeping conventions in the field: ED subcommands take the per-molecule
 * g and report both g and G = g sqrt(N_B); analytic subcommands take the
 * collective G directly (the closed form lives at N_B = infinity). compare
 * takes G since it pins one collective coupling across sizes.
 *
 * Output is deterministic: %.12g floats, rows ordered by grid index no
 * matter how many workers computed them.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "dicke/hilbert.hpp"
#include "dicke/meanfield.hpp"
#include "dicke/qfi.hpp"
#include "dicke/spectral.hpp"
#include "dicke/spectroscopy.hpp"

namespace {

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// JSON has no inf/nan tokens; those cells become null
std::string fmt_json(double v) { return std::isfinite(v) ? fmt_num(v) : "null"; }

struct Param {
  std::string key, csv, json;
};

struct Table {
  std::vector<Param> params;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_num(const std::string& k, double v) { params.push_back({k, fmt_num(v), fmt_json(v)}); }
  void add_int(const std::string& k, long v) {
    params.push_back({k, std::to_string(v), std::to_string(v)});
  }
  void add_str(const std::string& k, const std::string& s) {
    params.push_back({k, s, "\"" + s + "\""});
  }
};

void write_csv_table(std::ostream& os, const Table& t, bool label, const std::string& name) {
  if (label) os << "# table=" << name << "\n";
  for (const auto& p : t.params) os << "# " << p.key << "=" << p.csv << "\n";
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    os << t.columns[j] << (j + 1 < t.columns.size() ? "," : "\n");
  for (const auto& row : t.rows)
    for (std::size_t j = 0; j < row.size(); ++j)
      os << fmt_num(row[j]) << (j + 1 < row.size() ? "," : "\n");
}

void write_json_table(std::ostream& os, const Table& t) {
  os << "{\"params\":{";
  for (std::size_t i = 0; i < t.params.size(); ++i)
    os << "\"" << t.params[i].key << "\":" << t.params[i].json
       << (i + 1 < t.params.size() ? "," : "");
  os << "},\"columns\":[";
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    os << "\"" << t.columns[j] << "\"" << (j + 1 < t.columns.size() ? "," : "");
  os << "],\"rows\":[";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    os << "\n[";
    for (std::size_t j = 0; j < t.rows[i].size(); ++j)
      os << fmt_json(t.rows[i][j]) << (j + 1 < t.rows[i].size() ? "," : "");
    os << "]" << (i + 1 < t.rows.size() ? "," : "\n");
  }
  os << "]";
}

// main table plus optional named side tables (phase-diagram boundaries)
void write_output(std::ostream& os, const std::string& format, const Table& main,
                  const std::vector<std::pair<std::string, Table>>& extras = {}) {
  if (format == "json") {
    write_json_table(os, main);
    if (!extras.empty()) {
      os << ",\"boundaries\":{";
      for (std::size_t i = 0; i < extras.size(); ++i) {
        os << "\"" << extras[i].first << "\":";
        write_json_table(os, extras[i].second);
        os << "}" << (i + 1 < extras.size() ? "," : "");
      }
      os << "}";
    }
    os << "}\n";
  } else {
    write_csv_table(os, main, !extras.empty(), "grid");
    for (const auto& [name, tbl] : extras) write_csv_table(os, tbl, true, name);
  }
}

template <class Fn>
int with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot open output path " << path << "\n";
    return 2;
  }
  fn(f);
  if (!f) {
    std::cerr << "error: write failed for " << path << "\n";
    return 2;
  }
  return 0;
}

int default_workers() {
  if (const char* e = std::getenv("DICKE_QFI_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(e, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 256) return int(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(std::min(hc, 16u)) : 1;
}

// dispatch grid points to a pool; any worker exception is rethrown after join
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mx;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<std::size_t>(std::size_t(workers), n); ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mx);
          if (!err) err = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("grid needs at least one point");
  if (n > 1 && !(hi > lo)) throw std::invalid_argument("grid upper bound must exceed lower");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[std::size_t(i)] = n == 1 ? lo : lo + (hi - lo) * double(i) / double(n - 1);
  return out;
}

const char* axis_name(dicke::Direction d) {
  switch (d) {
    case dicke::Direction::x: return "x";
    case dicke::Direction::y: return "y";
    default: return "z";
  }
}

void axis_components(dicke::Direction d, double& nx, double& ny, double& nz) {
  nx = d == dicke::Direction::x ? 1.0 : 0.0;
  ny = d == dicke::Direction::y ? 1.0 : 0.0;
  nz = d == dicke::Direction::z ? 1.0 : 0.0;
}

// ----------------------------------------------------------------------------
// shared flag bundle; each subcommand registers the subset it understands
// ----------------------------------------------------------------------------

struct Opts {
  double omega_c = 1.0, omega_m = 1.0, kappa = 0.0;
  int nb = 3, cutoff = 70;
  double temp_k = 0.0, gamma_mev = 1.0;
  std::string mode = "ed", format = "csv", out;
  int workers = default_workers();

  double g = 0.0;
  double g_min = 0.0, g_max = 0.0;
  int g_steps = 0;
  bool auto_cutoff = false;

  double kappa_min = 0.0, kappa_max = 1.2;
  int kappa_steps = 25;
  double temp_min = 0.0, temp_max = 0.0;
  int temp_steps = 0;

  double omega_lo = 0.0, omega_hi = 0.0;
  int points = 0;
  std::string bare_out;

  std::vector<double> widths;
  int n_total = -1;
  double fq = -1.0;
  bool fq_given = false;

  std::vector<int> nb_list{8, 16, 32};
  double tol = 0.05;
};

dicke::ModelParams<double> ed_params(const Opts& o, double big_g, int cutoff) {
  dicke::ModelParams<double> p;
  p.omega_c = o.omega_c;
  p.omega_m = o.omega_m;
  p.kappa = o.kappa;
  p.G = big_g;
  p.n_molecules = o.nb;
  p.photon_cutoff = cutoff;
  p.validate();
  return p;
}

dicke::ModelParams<double> analytic_params(const Opts& o, double big_g, double kappa) {
  dicke::ModelParams<double> p;
  p.omega_c = o.omega_c;
  p.omega_m = o.omega_m;
  p.kappa = kappa;
  p.G = big_g;
  return p;
}

// weight the selected state puts on the top retained photon level; a heavy
// tail means the cutoff is biting
double photon_tail_weight(const dicke::MixedState<double>& st, int nb, int cutoff) {
  const int nk = nb + 1;
  double tail = 0.0;
  for (Eigen::Index l = 0; l < st.weights.size(); ++l) {
    const double w = st.weights(l);
    if (w <= 0.0) continue;
    for (int k = 0; k < nk; ++k) {
      const double c = st.basis(Eigen::Index(cutoff * nk + k), l);
      tail += w * c * c;
    }
  }
  return tail;
}

// per-molecule producibility bound in the thermodynamic limit, where the
// uniform-width thresholds tend to F(k)/N -> k
double analytic_depth_bound(double f_per_molecule) {
  if (!std::isfinite(f_per_molecule)) return f_per_molecule;
  return std::max(1.0, std::ceil(f_per_molecule));
}

// ----------------------------------------------------------------------------
// qfi-scan
// ----------------------------------------------------------------------------

struct EdPoint {
  double f, nx, ny, nz, tail;
  int depth, cutoff_used;
  bool converged;
};

EdPoint ed_point(const Opts& o, double big_g) {
  const auto eval = [&](int cut) {
    const auto p = ed_params(o, big_g, cut);
    const auto eig = dicke::eigendecompose(dicke::build_hamiltonian(p));
    const auto st = dicke::thermal_state(eig, o.temp_k);
    const auto spins = dicke::build_collective_spins_full(p);
    const auto r = dicke::qfi_max(st, spins);
    return std::pair<dicke::QfiResult<double>, double>(r, photon_tail_weight(st, o.nb, cut));
  };

  int cut = o.cutoff;
  auto [res, tail] = eval(cut);
  bool converged = true;
  if (o.auto_cutoff) {
    converged = false;
    for (int round = 0; round < 8; ++round) {
      const int cut2 = 2 * cut;
      if (double(cut2 + 1) * double(o.nb + 1) > 2e4) break;  // eigensolve would blow up
      auto [res2, tail2] = eval(cut2);
      const bool close =
          std::abs(res2.value - res.value) < 1e-6 * std::max(std::abs(res2.value), 1e-300);
      cut = cut2;
      res = res2;
      tail = tail2;
      if (close) {
        converged = true;
        break;
      }
    }
  }
  EdPoint out;
  out.f = res.value;
  out.nx = res.direction(0);
  out.ny = res.direction(1);
  out.nz = res.direction(2);
  out.tail = tail;
  out.depth = dicke::entanglement_depth_bound(res.value, dicke::WitnessSpec<double>::uniform(o.nb));
  out.cutoff_used = cut;
  out.converged = converged;
  return out;
}

int run_qfi_scan(const Opts& o, const std::vector<double>& grid) {
  Table t;
  t.add_str("subcommand", "qfi-scan");
  t.add_str("mode", o.mode);
  t.add_num("omega_c", o.omega_c);
  t.add_num("omega_m", o.omega_m);
  t.add_num("kappa", o.kappa);
  t.add_num("temp_k", o.temp_k);

  std::vector<std::string> warnings(grid.size());
  bool all_converged = true;

  if (o.mode == "ed") {
    t.add_int("nb", o.nb);
    t.add_int("cutoff", o.cutoff);
    t.columns = {"g", "G", "f_q_max", "n_x", "n_y", "n_z", "depth_bound", "tail_weight",
                 "cutoff_used"};
    t.rows.resize(grid.size());
    std::vector<char> conv(grid.size(), 1);
    parallel_for(grid.size(), o.workers, [&](std::size_t i) {
      const double g = grid[i];
      const double big_g = g * std::sqrt(double(o.nb));
      const auto pt = ed_point(o, big_g);
      t.rows[i] = {g,      big_g,          pt.f,
                   pt.nx,  pt.ny,          pt.nz,
                   double(pt.depth), pt.tail, double(pt.cutoff_used)};
      conv[i] = pt.converged ? 1 : 0;
      if (pt.tail > 1e-6) {
        warnings[i] = "warning: g=" + fmt_num(g) + ": top photon level holds " +
                      fmt_num(pt.tail) + " of the state; raise --cutoff";
      } else if (!pt.converged) {
        warnings[i] = "warning: g=" + fmt_num(g) + ": QFI not converged in cutoff at " +
                      std::to_string(pt.cutoff_used);
      }
    });
    for (char c : conv) all_converged = all_converged && c;
  } else {
    t.columns = {"G", "f_q_max", "n_x", "n_y", "n_z", "depth_bound", "divergent"};
    t.rows.resize(grid.size());
    const auto spec = dicke::StateSpec<double>::thermal(o.temp_k);
    parallel_for(grid.size(), o.workers, [&](std::size_t i) {
      const auto r = dicke::f_q_max_analytic(analytic_params(o, grid[i], o.kappa), spec);
      double nx, ny, nz;
      axis_components(r.direction, nx, ny, nz);
      t.rows[i] = {grid[i], r.value, nx, ny, nz, analytic_depth_bound(r.value),
                   r.divergent ? 1.0 : 0.0};
    });
  }

  const int rc = with_output(o.out, [&](std::ostream& os) { write_output(os, o.format, t); });
  for (const auto& w : warnings)
    if (!w.empty()) std::cerr << w << "\n";
  if (rc != 0) return rc;
  return all_converged ? 0 : 3;
}

// ----------------------------------------------------------------------------
// phase-diagram (analytic only)
// ----------------------------------------------------------------------------

int run_phase_diagram(const Opts& o, const std::vector<double>& g_grid) {
  Table t;
  t.add_str("subcommand", "phase-diagram");
  t.add_num("omega_c", o.omega_c);
  t.add_num("omega_m", o.omega_m);
  t.add_num("kappa_c", 1.0);
  t.add_num("kappa_ew", dicke::kappa_ew<double>());

  std::vector<std::pair<std::string, Table>> extras;

  if (o.temp_steps > 0) {
    // coupling-temperature slice at fixed kappa
    const auto temps = linspace(o.temp_min, o.temp_max, o.temp_steps);
    t.add_num("kappa", o.kappa);
    const auto p0 = analytic_params(o, 0.0, o.kappa);
    if (const auto gc = dicke::critical_coupling(p0)) t.add_num("g_c", *gc);
    if (const auto gew = dicke::entanglement_witness_edge(p0)) t.add_num("g_ew", *gew);
    t.columns = {"G", "temp_k", "f_q_max", "divergent"};
    t.rows.resize(g_grid.size() * temps.size());
    parallel_for(t.rows.size(), o.workers, [&](std::size_t i) {
      const double G = g_grid[i / temps.size()];
      const double temp = temps[i % temps.size()];
      const auto r = dicke::f_q_max_analytic(analytic_params(o, G, o.kappa),
                                             dicke::StateSpec<double>::thermal(temp));
      t.rows[i] = {G, temp, r.value, r.divergent ? 1.0 : 0.0};
    });
  } else {
    const auto kappas = linspace(o.kappa_min, o.kappa_max, o.kappa_steps);
    t.add_num("temp_k", o.temp_k);
    t.columns = {"kappa", "G", "f_q_max", "divergent"};
    t.rows.resize(kappas.size() * g_grid.size());
    parallel_for(t.rows.size(), o.workers, [&](std::size_t i) {
      const double kap = kappas[i / g_grid.size()];
      const double G = g_grid[i % g_grid.size()];
      const auto r = dicke::f_q_max_analytic(analytic_params(o, G, kap),
                                             dicke::StateSpec<double>::thermal(o.temp_k));
      t.rows[i] = {kap, G, r.value, r.divergent ? 1.0 : 0.0};
    });

    Table bc, bew;
    bc.columns = {"kappa", "G_c"};
    bew.columns = {"kappa", "G_ew"};
    for (const double kap : kappas) {
      const auto p = analytic_params(o, 0.0, kap);
      if (const auto gc = dicke::critical_coupling(p)) bc.rows.push_back({kap, *gc});
      if (const auto gew = dicke::entanglement_witness_edge(p)) bew.rows.push_back({kap, *gew});
    }
    extras.emplace_back("g_c", std::move(bc));
    extras.emplace_back("g_ew", std::move(bew));
  }

  return with_output(o.out, [&](std::ostream& os) { write_output(os, o.format, t, extras); });
}

// ----------------------------------------------------------------------------
// spectrum
// ----------------------------------------------------------------------------

int run_spectrum(const Opts& o) {
  const double big_g = o.g * std::sqrt(double(o.nb));
  const double gamma = o.gamma_mev * 1e-3;

  const auto p = ed_params(o, big_g, o.cutoff);
  const auto eig = dicke::eigendecompose(dicke::build_hamiltonian(p));
  const auto st = dicke::thermal_state(eig, o.temp_k);
  const auto dipole = dicke::build_transition_dipole(p);

  dicke::Spectrum<double> sig;
  if (o.points > 0) {
    sig = dicke::synthesize_spectrum(eig, st, dipole, gamma,
                                     dicke::SpectrumGrid<double>{o.omega_lo, o.omega_hi,
                                                                 Eigen::Index(o.points)});
  } else {
    sig = dicke::synthesize_spectrum(eig, st, dipole, gamma);
  }

  // bare reference: same molecules, same thermal state, coupling off; synthesized
  // on the signal grid so both integrals live on identical meshes
  auto p0 = p;
  p0.G = 0.0;
  const auto eig0 = dicke::eigendecompose(dicke::build_hamiltonian(p0));
  const auto st0 = dicke::thermal_state(eig0, o.temp_k);
  const auto dipole0 = dicke::build_transition_dipole(p0);
  const Eigen::Index n = sig.omega_grid.size();
  const auto bare = dicke::synthesize_spectrum(
      eig0, st0, dipole0, gamma,
      dicke::SpectrumGrid<double>{sig.omega_grid(0), sig.omega_grid(n - 1), n});

  dicke::write_spectrum_csv(sig, o.out);
  if (!o.bare_out.empty()) dicke::write_spectrum_csv(bare, o.bare_out);

  const double est = dicke::qfi_from_spectrum(sig, bare, o.temp_k);
  const double direct = dicke::qfi(st, dipole) / dicke::qfi(st0, dipole0);
  std::cout << "f_q_spectrum=" << fmt_num(est) << "\n";
  std::cout << "f_q_direct=" << fmt_num(direct) << "\n";
  std::cout << "rel_dev=" << fmt_num((est - direct) / direct) << "\n";
  return 0;
}

// ----------------------------------------------------------------------------
// witness
// ----------------------------------------------------------------------------

int run_witness(const Opts& o, bool have_widths, bool have_nb) {
  if (have_widths == have_nb) {
    std::cerr << "error: witness needs exactly one of --widths or --nb\n";
    return 2;
  }
  const auto spec = have_widths
                        ? dicke::WitnessSpec<double>(o.widths, o.n_total)
                        : dicke::WitnessSpec<double>::uniform(o.nb, o.n_total);

  Table t;
  t.add_str("subcommand", "witness");
  std::string ws;
  for (std::size_t i = 0; i < spec.widths.size(); ++i)
    ws += (i ? "," : "") + fmt_num(spec.widths[i]);
  t.add_str("widths", ws);
  t.add_int("n_total", spec.n_total);
  t.add_int("n_perturbed", spec.n_perturbed());
  if (o.fq_given) {
    t.add_num("f_q", o.fq);
    t.add_int("depth_bound", dicke::entanglement_depth_bound(o.fq, spec));
  }
  t.columns = {"k", "f_threshold"};
  for (int k = 1; k <= spec.n_perturbed(); ++k)
    t.rows.push_back({double(k), dicke::witness_threshold(spec, k)});

  return with_output(o.out, [&](std::ostream& os) { write_output(os, o.format, t); });
}

// ----------------------------------------------------------------------------
// compare
// ----------------------------------------------------------------------------

int run_compare(const Opts& o) {
  if (o.nb_list.empty()) {
    std::cerr << "error: --nb-list must be non-empty\n";
    return 2;
  }
  const auto an = dicke::f_q_max_analytic(analytic_params(o, o.g, o.kappa),
                                          dicke::StateSpec<double>::thermal(o.temp_k));
  if (an.divergent || !std::isfinite(an.value)) {
    std::cerr << "error: analytic reference diverges at this coupling; move off G_c\n";
    return 2;
  }

  Table t;
  t.add_str("subcommand", "compare");
  t.add_num("omega_c", o.omega_c);
  t.add_num("omega_m", o.omega_m);
  t.add_num("kappa", o.kappa);
  t.add_num("G", o.g);
  t.add_num("temp_k", o.temp_k);
  t.add_int("cutoff", o.cutoff);
  t.add_num("tol", o.tol);
  t.columns = {"n_b", "f_q_ed", "f_q_analytic", "rel_dev"};
  t.rows.resize(o.nb_list.size());

  parallel_for(o.nb_list.size(), o.workers, [&](std::size_t i) {
    Opts oi = o;
    oi.nb = o.nb_list[i];
    const auto p = ed_params(oi, o.g, o.cutoff);
    const auto eig = dicke::eigendecompose(dicke::build_hamiltonian(p));
    const auto st = dicke::thermal_state(eig, o.temp_k);
    const auto r = dicke::qfi_max(st, dicke::build_collective_spins_full(p));
    const double f_ed = r.value / double(oi.nb);
    t.rows[i] = {double(oi.nb), f_ed, an.value, (f_ed - an.value) / an.value};
  });

  const int rc = with_output(o.out, [&](std::ostream& os) { write_output(os, o.format, t); });
  if (rc != 0) return rc;
  const double final_dev = std::abs(t.rows.back()[3]);
  if (final_dev > o.tol) {
    std::cerr << "tolerance failure: |rel_dev|=" << fmt_num(final_dev) << " at N_B="
              << o.nb_list.back() << " exceeds " << fmt_num(o.tol) << "\n";
    return 3;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum Fisher information tools for the squeezed Dicke model (energies in eV)"};
  app.require_subcommand(1);
  Opts o;

  const auto add_model = [&](CLI::App* c, bool with_nb) {
    c->add_option("--omega-c", o.omega_c, "cavity frequency (eV)")->capture_default_str();
    c->add_option("--omega-m", o.omega_m, "molecular transition (eV)")->capture_default_str();
    c->add_option("--kappa", o.kappa, "diamagnetic strength")->capture_default_str();
    if (with_nb) {
      c->add_option("--nb", o.nb, "molecule count (ED)")->check(CLI::PositiveNumber)
          ->capture_default_str();
      c->add_option("--cutoff", o.cutoff, "photon Fock cutoff (ED)")
          ->check(CLI::NonNegativeNumber)->capture_default_str();
    }
  };
  const auto add_io = [&](CLI::App* c) {
    c->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    c->add_option("--out", o.out, "output path (default: stdout)");
  };
  const auto add_workers = [&](CLI::App* c) {
    c->add_option("--workers", o.workers, "worker threads (env DICKE_QFI_WORKERS)")
        ->check(CLI::PositiveNumber)->capture_default_str();
  };

  auto* scan = app.add_subcommand(
      "qfi-scan", "maximized QFI along a coupling grid (--g is g=G/sqrt(N_B) in ED mode, G in "
                  "analytic mode)");
  add_model(scan, true);
  scan->add_option("--g", o.g, "single coupling point");
  scan->add_option("--g-min", o.g_min, "coupling grid start");
  scan->add_option("--g-max", o.g_max, "coupling grid end");
  scan->add_option("--g-steps", o.g_steps, "coupling grid size")->check(CLI::PositiveNumber);
  scan->add_option("--temp-k", o.temp_k, "temperature (K)")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  scan->add_option("--mode", o.mode, "ed or analytic")
      ->check(CLI::IsMember({"ed", "analytic"}))->capture_default_str();
  scan->add_flag("--auto-cutoff", o.auto_cutoff,
                 "double the cutoff until max-QFI changes < 1e-6 relative");
  add_io(scan);
  add_workers(scan);

  auto* phase = app.add_subcommand(
      "phase-diagram", "analytic QFI on a (kappa, G) grid with G_c/G_ew boundary curves, or a "
                       "(G, T) grid at fixed kappa when --temp-steps is set");
  add_model(phase, false);
  phase->add_option("--g-min", o.g_min, "G grid start")->required();
  phase->add_option("--g-max", o.g_max, "G grid end")->required();
  phase->add_option("--g-steps", o.g_steps, "G grid size")->required()
      ->check(CLI::PositiveNumber);
  phase->add_option("--kappa-min", o.kappa_min, "kappa grid start")->capture_default_str();
  phase->add_option("--kappa-max", o.kappa_max, "kappa grid end")->capture_default_str();
  phase->add_option("--kappa-steps", o.kappa_steps, "kappa grid size")
      ->check(CLI::PositiveNumber)->capture_default_str();
  phase->add_option("--temp-k", o.temp_k, "temperature (K) for the kappa-G grid")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  phase->add_option("--temp-min", o.temp_min, "T grid start (K)");
  phase->add_option("--temp-max", o.temp_max, "T grid end (K)");
  phase->add_option("--temp-steps", o.temp_steps, "T grid size; selects the (G, T) slice");
  phase->add_option("--mode", o.mode, "analytic only")
      ->check(CLI::IsMember({"ed", "analytic"}));
  add_io(phase);
  add_workers(phase);

  auto* spect = app.add_subcommand(
      "spectrum", "synthesize a thermal absorption spectrum CSV and echo the QFI inversion");
  add_model(spect, true);
  spect->add_option("--g", o.g, "coupling g = G/sqrt(N_B)")->required();
  spect->add_option("--temp-k", o.temp_k, "temperature (K)")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  spect->add_option("--gamma-mev", o.gamma_mev, "Lorentzian FWHM (meV)")
      ->check(CLI::PositiveNumber)->capture_default_str();
  spect->add_option("--omega-min", o.omega_lo, "explicit grid start (eV)");
  spect->add_option("--omega-max", o.omega_hi, "explicit grid end (eV)");
  spect->add_option("--points", o.points, "explicit grid size");
  spect->add_option("--out", o.out, "signal spectrum CSV path")->required();
  spect->add_option("--bare-out", o.bare_out, "also write the bare reference CSV here");

  auto* wit = app.add_subcommand(
      "witness", "producibility thresholds F(K) for a set of perturbation widths");
  wit->add_option("--nb", o.nb, "number of unit-width molecules")->check(CLI::PositiveNumber);
  wit->add_option("--widths", o.widths, "comma-separated perturbation widths")
      ->delimiter(',');
  wit->add_option("--n-total", o.n_total, "total particle count (default: perturbed count)");
  wit->add_option("--fq", o.fq, "observed QFI; prints the implied depth bound");
  add_io(wit);

  auto* cmp = app.add_subcommand(
      "compare", "finite-size ED per-molecule max QFI against the thermodynamic-limit value "
                 "(--g is the collective G)");
  add_model(cmp, false);
  cmp->add_option("--g", o.g, "collective coupling G (eV)")->required();
  cmp->add_option("--cutoff", o.cutoff, "photon Fock cutoff")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmp->add_option("--temp-k", o.temp_k, "temperature (K)")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmp->add_option("--nb-list", o.nb_list, "molecule counts, comma separated")
      ->delimiter(',')->capture_default_str();
  cmp->add_option("--tol", o.tol, "final-size relative deviation tolerance")
      ->check(CLI::PositiveNumber)->capture_default_str();
  add_io(cmp);
  add_workers(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // config errors are exit 2; --help is success
  }

  try {
    if (*scan) {
      const bool single = scan->count("--g") > 0;
      const bool ranged = scan->count("--g-min") && scan->count("--g-max") &&
                          scan->count("--g-steps");
      if (single == ranged) {
        std::cerr << "error: qfi-scan needs --g or all of --g-min/--g-max/--g-steps\n";
        return 2;
      }
      const auto grid = single ? std::vector<double>{o.g}
                               : linspace(o.g_min, o.g_max, o.g_steps);
      return run_qfi_scan(o, grid);
    }
    if (*phase) {
      if (phase->count("--mode") == 0) o.mode = "analytic";
      if (o.mode == "ed") {
        std::cerr << "error: phase-diagram is analytic only\n";
        return 2;
      }
      if (phase->count("--temp-steps") &&
          !(phase->count("--temp-min") && phase->count("--temp-max"))) {
        std::cerr << "error: the (G, T) slice needs --temp-min/--temp-max/--temp-steps\n";
        return 2;
      }
      return run_phase_diagram(o, linspace(o.g_min, o.g_max, o.g_steps));
    }
    if (*spect) {
      const int ngrid = int(spect->count("--omega-min")) + int(spect->count("--omega-max")) +
                        int(spect->count("--points"));
      if (ngrid != 0 && ngrid != 3) {
        std::cerr << "error: give all of --omega-min/--omega-max/--points or none\n";
        return 2;
      }
      if (ngrid == 0) o.points = 0;
      return run_spectrum(o);
    }
    if (*wit) {
      o.fq_given = wit->count("--fq") > 0;
      return run_witness(o, wit->count("--widths") > 0, wit->count("--nb") > 0);
    }
    if (*cmp) return run_compare(o);
  } catch (const dicke::truncation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;  // unreachable with require_subcommand(1)
}
