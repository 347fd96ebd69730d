// Thermodynamic-limit solution: classical minimum, polariton branches (both
// algebraic forms), Bogoliubov symplectic identity, analytic QFI, witness
// boundary, and critical scaling.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dicke/constants.hpp"
#include "dicke/meanfield.hpp"

using namespace dicke;

namespace {

ModelParams<> at(double G, double kappa, double wc = 1.0, double wm = 1.0) {
  ModelParams<> p;
  p.omega_c = wc;
  p.omega_m = wm;
  p.G = G;
  p.kappa = kappa;
  return p;
}

} // namespace

TEST_CASE("critical coupling closed form and the kappa >= 1 no-go") {
  CHECK(*critical_coupling(at(0.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(*critical_coupling(at(0.0, 0.84)) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(*critical_coupling(at(0.0, 0.0, 2.0, 0.5)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(!critical_coupling(at(0.0, 1.0)).has_value());
  CHECK(!critical_coupling(at(0.0, 1.7)).has_value());
}

TEST_CASE("classical minimum: normal phase, hand point, no-go branch") {
  auto [th0, al0] = classical_minimum(at(0.4, 0.0));
  CHECK(th0 == 0.0);
  CHECK(al0 == 0.0);

  auto [th, al] = classical_minimum(at(1.0, 0.0));
  CHECK(std::cos(th) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(al == doctest::Approx(0.9682458365518543).epsilon(1e-13));

  auto [thk, alk] = classical_minimum(at(5.0, 1.0));
  CHECK(thk == 0.0);
  CHECK(alk == 0.0);
  auto [thk2, alk2] = classical_minimum(at(5.0, 2.5));
  CHECK(thk2 == 0.0);
  CHECK(alk2 == 0.0);
}

TEST_CASE("polariton branches at hand-checked points") {
  // decoupled limit: both branches at the bare frequencies
  auto s0 = polariton_solution(at(1e-9, 0.0));
  CHECK(s0.omega_plus == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s0.omega_minus == doctest::Approx(1.0).epsilon(1e-8));

  // kappa=0 resonance, G=0.05: Omega+ = sqrt(1.1), Omega- = sqrt(0.9), and the
  // mixing angle sits at pi/2 because the diagonal terms tie exactly
  auto s = polariton_solution(at(0.05, 0.0));
  CHECK(s.omega_plus == doctest::Approx(1.0488088481701516).epsilon(1e-14));
  CHECK(s.omega_minus == doctest::Approx(std::sqrt(0.9)).epsilon(1e-14));
  CHECK(s.zeta == doctest::Approx(M_PI / 2).epsilon(1e-14));
  // RWA comparison: Omega+ ~= omega_m + G at weak coupling
  CHECK(std::abs(s.omega_plus - 1.05) < 2e-3);
  CHECK(s.theta == 0.0);
  CHECK(s.omega_m_tilde == 1.0);
  CHECK(s.omega_c_tilde == 1.0);
  CHECK(s.zero_point ==
        doctest::Approx(0.5 * (std::sqrt(1.1) + std::sqrt(0.9) - 2.0)).epsilon(1e-13));
  CHECK(s.extensive_coeff == 0.0);

  // superradiant hand point kappa=0, G=1: cos(theta)=1/4
  auto sr = polariton_solution(at(1.0, 0.0));
  CHECK(sr.omega_m_tilde == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(sr.extensive_coeff == doctest::Approx(-0.5625).epsilon(1e-13));  // -wmt sin^4(th/2)
  CHECK(sr.omega_plus > sr.omega_minus);
  CHECK(sr.omega_minus > 0.0);

  // soft mode: just below the critical point the lower branch collapses
  auto sc = polariton_solution(at(0.5 * (1.0 - 1e-10), 0.0));
  CHECK(sc.omega_minus >= 0.0);
  CHECK(sc.omega_minus < 1e-4);
}

TEST_CASE("main-text and SM branch expressions agree numerically") {
  // the published closed form carries 4 G^2 wc wm^2 / wm_tilde inside the
  // inner root; the implementation uses the 16 G^2 wc wm cos(theta) variant.
  // They are the same number; assert that instead of trusting the algebra.
  for (double kappa : {0.0, 0.3, 0.84, 1.0, 2.0}) {
    for (double G : {0.05, 0.3, 0.45, 0.7, 1.3}) {
      for (auto [wc, wm] : {std::pair{1.0, 1.0}, std::pair{1.7, 0.8}}) {
        auto p = at(G, kappa, wc, wm);
        auto s = polariton_solution(p);
        const double a = s.omega_c_tilde * wc, b = s.omega_m_tilde * s.omega_m_tilde;
        const double inner = std::sqrt(std::pow((a - b) / 2.0, 2) +
                                       4.0 * G * G * wc * wm * wm / s.omega_m_tilde);
        const double plus_main = std::sqrt((a + b) / 2.0 + inner);
        CAPTURE(kappa);
        CAPTURE(G);
        CHECK(s.omega_plus == doctest::Approx(plus_main).epsilon(1e-12));
        const double minus_sq = (a + b) / 2.0 - inner;
        if (minus_sq > 1e-12)
          CHECK(s.omega_minus == doctest::Approx(std::sqrt(minus_sq)).epsilon(1e-10));
        CHECK(s.omega_plus >= s.omega_minus);
        CHECK(s.omega_minus >= 0.0);
      }
    }
  }
}

TEST_CASE("naive and product routes to the lower branch agree off-criticality") {
  for (double rel : {1e-6, 1e-4, 1e-2}) {
    for (int side : {-1, +1}) {
      auto p = at(0.0, 0.3);
      const double gc = *critical_coupling(p);
      p.G = gc * (1.0 + side * rel);
      auto s = polariton_solution(p);  // naive route (outside the 1e-8 window)
      // independent product-form evaluation
      const double costh = std::cos(s.theta);
      double prod;
      if (costh == 1.0) {
        prod = p.omega_c * p.omega_m *
               (p.omega_c * p.omega_m - 4.0 * (1.0 - p.kappa) * p.G * p.G);
      } else {
        const double one_m_c = (1.0 - p.kappa) * (p.G - gc) * (p.G + gc) / (p.G * p.G);
        prod = 4.0 * p.G * p.G * p.omega_c * p.omega_m * one_m_c * (1.0 + costh) / costh;
      }
      const double stable = std::sqrt(std::max(prod, 0.0)) / s.omega_plus;
      CAPTURE(rel);
      CAPTURE(side);
      CHECK(s.omega_minus == doctest::Approx(stable).epsilon(1e-6));
    }
  }
}

TEST_CASE("continuity through the transition") {
  auto p = at(0.0, 0.3);
  const double gc = *critical_coupling(p);
  auto below = polariton_solution(at(gc * (1 - 1e-9), 0.3));
  auto above = polariton_solution(at(gc * (1 + 1e-9), 0.3));
  CHECK(std::abs(below.theta - above.theta) < 1e-3);
  CHECK(std::abs(below.alpha_per_sqrt_n - above.alpha_per_sqrt_n) < 1e-3);
  CHECK(std::abs(below.omega_plus - above.omega_plus) < 1e-6);
  CHECK(below.omega_minus < 1e-3);
  CHECK(above.omega_minus < 1e-3);
}

TEST_CASE("Bogoliubov matrices are symplectic across the parameter grid") {
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  for (double kappa : {0.0, 0.3, 0.84, 1.0, 2.0}) {
    for (double G : {0.05, 0.3, 0.49, 0.52, 0.8, 1.5}) {
      for (auto [wc, wm] : {std::pair{1.0, 1.0}, std::pair{0.6, 1.4}}) {
        auto s = polariton_solution(at(G, kappa, wc, wm));
        const Eigen::Matrix2d sym =
            s.u * s.u.transpose() - s.v * s.v.transpose() - id;
        CAPTURE(kappa);
        CAPTURE(G);
        CAPTURE(wc);
        CHECK(sym.cwiseAbs().maxCoeff() < 1e-10);
        // quadrature row sums collapse to single-mode weights; these are what
        // the analytic QFI is built from, so pin them to the closed form
        const double s2 = std::sin(s.zeta / 2), c2 = std::cos(s.zeta / 2);
        const double rp = s.u(1, 0) + s.v(1, 0), rm = s.u(1, 1) + s.v(1, 1);
        CHECK(rp * rp == doctest::Approx(s2 * s2 * s.omega_m_tilde / s.omega_plus).epsilon(1e-10));
        CHECK(rm * rm == doctest::Approx(c2 * c2 * s.omega_m_tilde / s.omega_minus).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("analytic QFI limits and symmetries") {
  const auto ground = StateSpec<>::thermal(0.0);

  SUBCASE("decoupled limit is the inert witness value 1 along x") {
    CHECK(f_q_analytic(at(1e-8, 0.0), ground, Direction::x).value ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f_q_analytic(at(1e-8, 0.0, 2.0, 1.0), ground, Direction::x).value ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f_q_analytic(at(1e-8, 0.5, 0.7, 1.3), ground, Direction::x).value ==
          doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("thermal T=0 equals the polariton vacuum") {
    for (auto dir : {Direction::x, Direction::y, Direction::z}) {
      const auto a = f_q_analytic(at(0.35, 0.2), ground, dir);
      const auto b = f_q_analytic(at(0.35, 0.2), StateSpec<>::fock(0, 0), dir);
      CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
    }
  }

  SUBCASE("Fock occupation enters affinely") {
    auto p = at(0.62, 0.1);
    for (auto dir : {Direction::x, Direction::y, Direction::z}) {
      const double f00 = f_q_analytic(p, StateSpec<>::fock(0, 0), dir).value;
      const double f10 = f_q_analytic(p, StateSpec<>::fock(1, 0), dir).value;
      const double f01 = f_q_analytic(p, StateSpec<>::fock(0, 1), dir).value;
      const double f23 = f_q_analytic(p, StateSpec<>::fock(2, 3), dir).value;
      CHECK(f23 == doctest::Approx(f00 + 2 * (f10 - f00) + 3 * (f01 - f00)).epsilon(1e-12));
    }
  }

  SUBCASE("z is tan^2(theta) times x in the superradiant phase") {
    for (double G : {0.6, 0.8, 1.2}) {
      auto p = at(G, 0.0);
      const auto sol = polariton_solution(p);
      const double t = std::tan(sol.theta);
      const double fx = f_q_analytic(p, ground, Direction::x).value;
      const double fz = f_q_analytic(p, ground, Direction::z).value;
      CHECK(fz == doctest::Approx(t * t * fx).epsilon(1e-12));
    }
  }

  SUBCASE("T=0 divergence at the critical point is flagged") {
    auto f = f_q_analytic(at(0.5, 0.0), ground, Direction::x);
    CHECK(std::isinf(f.value));
    CHECK(f.divergent);
    // z carries no spectral weight at theta = 0, even at the critical point
    CHECK(f_q_analytic(at(0.5, 0.0), ground, Direction::z).value == 0.0);
    CHECK(std::isfinite(f_q_analytic(at(0.5, 0.0), ground, Direction::y).value));
    // thermal fluctuations cut the divergence off
    auto ft = f_q_analytic(at(0.5, 0.0), StateSpec<>::thermal(300.0), Direction::x);
    CHECK(std::isfinite(ft.value));
    CHECK(!ft.divergent);
    CHECK(ft.value == doctest::Approx(10.023985158714595).epsilon(1e-12));
  }

  SUBCASE("strong-coupling floors") {
    const auto lim03 = strong_coupling_limit(at(0.0, 0.3));
    CHECK(!lim03.unbounded);
    CHECK(lim03.value == doctest::Approx(0.09 / std::sqrt(0.91)).epsilon(1e-14));
    CHECK(f_q_analytic(at(1e4, 0.3), ground, Direction::x).value ==
          doctest::Approx(lim03.value).epsilon(1e-3));

    const auto lim15 = strong_coupling_limit(at(0.0, 1.5));
    CHECK(lim15.value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    CHECK(f_q_analytic(at(1e4, 1.5), ground, Direction::x).value ==
          doctest::Approx(lim15.value).epsilon(1e-3));

    CHECK(f_q_analytic(at(1e4, 0.0), ground, Direction::x).value < 1e-6);
    CHECK(strong_coupling_limit(at(0.0, 1.0)).unbounded);
  }
}

TEST_CASE("maximizer bookkeeping") {
  const auto ground = StateSpec<>::thermal(0.0);
  auto r = f_q_max_analytic(at(0.3, 0.0), ground);
  CHECK(r.direction == Direction::x);
  CHECK(r.value == doctest::Approx(1.1858541225631423).epsilon(1e-12));
  CHECK(r.by_direction[0] == r.value);
  CHECK(r.by_direction[1] <= r.value);
  CHECK(r.by_direction[2] == 0.0);
  CHECK(!r.divergent);

  auto rk1 = f_q_max_analytic(at(0.8, 1.0), ground);
  CHECK(rk1.value == doctest::Approx(1.7803808855301098).epsilon(1e-12));
  CHECK(rk1.direction == Direction::x);

  auto rdiv = f_q_max_analytic(at(0.5, 0.0), ground);
  CHECK(rdiv.divergent);
  CHECK(std::isinf(rdiv.value));
}

TEST_CASE("witness boundary g_ew") {
  auto g = entanglement_witness_edge(at(0.0, 0.0));
  REQUIRE(g.has_value());
  CHECK(*g == doctest::Approx(0.5530659845952954).epsilon(1e-5));
  CHECK(*g > 0.5);
  // it is a genuine root: the max QFI crosses 1 there
  const auto ground = StateSpec<>::thermal(0.0);
  CHECK(f_q_max_analytic(at(*g - 0.01, 0.0), ground).value > 1.0);
  CHECK(f_q_max_analytic(at(*g + 0.01, 0.0), ground).value < 1.0);

  // definedness boundary: the strong-coupling floor reaches 1 at kappa_ew
  const double ke = kappa_ew<double>();
  CHECK(std::abs(std::pow(ke, 4) + ke * ke - 1.0) < 1e-14);
  CHECK(ke == doctest::Approx(0.7861513777574233).epsilon(1e-12));
  CHECK(entanglement_witness_edge(at(0.0, ke - 1e-3)).has_value());
  CHECK(!entanglement_witness_edge(at(0.0, ke + 1e-3)).has_value());
  CHECK(!entanglement_witness_edge(at(0.0, 0.9)).has_value());
  CHECK(!entanglement_witness_edge(at(0.0, 1.0)).has_value());
  CHECK(!entanglement_witness_edge(at(0.0, 1.5)).has_value());
}

TEST_CASE("critical scaling: inverse square root at T=0, thermal cap at T>0") {
  for (double kappa : {0.0, 0.5}) {
    for (auto side : {Side::below, Side::above}) {
      const double slope = critical_scaling(at(0.0, kappa), side, 0.0);
      CAPTURE(kappa);
      CHECK(slope == doctest::Approx(-0.5).epsilon(0.04));  // +-0.02 absolute
    }
  }
  // thermal cap, independent arithmetic: omega_m / (4 kB T) at r=1
  const double cap = critical_scaling(at(0.0, 0.0), Side::above, 300.0);
  CHECK(cap == doctest::Approx(1.0 / (4 * kB_ev * 300.0)).epsilon(1e-14));
  CHECK(cap == doctest::Approx(9.670431768121).epsilon(1e-10));

  CHECK_THROWS_AS(critical_scaling(at(0.0, 1.0), Side::above, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(critical_scaling(at(0.0, 0.0), Side::above, -5.0), std::invalid_argument);
}

TEST_CASE("state spec validation") {
  CHECK_THROWS_AS(StateSpec<>::thermal(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(StateSpec<>::fock(-1, 0), std::invalid_argument);
  CHECK_THROWS_AS(StateSpec<>::fock(0, -2), std::invalid_argument);
}
