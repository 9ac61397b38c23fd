#include "doctest.h"
#include "hhlab/nonexistence.hpp"
#include "hhlab/rational.hpp"

#include <cmath>

using namespace hhlab;

namespace {
std::shared_ptr<const RadialGeometry> geo() { return RadialGeometry::make(3, 2048, 2.0, 160); }
}  // namespace

TEST_CASE("cutoff plateau, support, and scale-free derivative bounds") {
  CutoffSpec spec;
  spec.l = 7;
  const int d = 3;
  SUBCASE("plateau") {
    for (Real T : {1e-3, 1e-1}) {
      auto v = cutoff_value(spec, d, T, 0.3 * T, 0.3 * std::sqrt(T));
      CHECK(v.psi_l == doctest::Approx(1.0));
      CHECK(v.dt_psi_l == doctest::Approx(0.0));
      CHECK(v.lap_psi_l == doctest::Approx(0.0));
    }
  }
  SUBCASE("support") {
    auto v1 = cutoff_value(spec, d, 0.01, 0.0101, 0.0);
    CHECK(v1.psi_l == 0.0);
    auto v2 = cutoff_value(spec, d, 0.01, 0.005, 1.1 * std::sqrt(0.01));
    CHECK(v2.psi_l == 0.0);
  }
  SUBCASE("derivative ratios are T-independent and bounded") {
    Real global_max_dt = 0, global_max_lap = 0;
    for (Real T : {1e-4, 1e-3, 1e-2, 1e-1}) {
      Real max_dt = 0, max_lap = 0;
      for (int it = 1; it < 40; ++it) {
        for (int ir = 1; ir < 40; ++ir) {
          const Real t = T * it / 40.0;
          const Real r = std::sqrt(T) * ir / 40.0;
          auto v = cutoff_value(spec, d, T, t, r);
          max_dt = std::max(max_dt, v.dt_ratio);
          max_lap = std::max(max_lap, v.lap_ratio);
        }
      }
      if (global_max_dt > 0) {
        CHECK(max_dt == doctest::Approx(global_max_dt).epsilon(1e-9));
        CHECK(max_lap == doctest::Approx(global_max_lap).epsilon(1e-9));
      }
      global_max_dt = std::max(global_max_dt, max_dt);
      global_max_lap = std::max(global_max_lap, max_lap);
    }
    CHECK(global_max_dt <= 4.0 * spec.l);
    CHECK(global_max_lap < 100.0 * spec.l * spec.l);
    CHECK(global_max_dt > 0.0);
  }
  CHECK_THROWS_AS(cutoff_value(CutoffSpec{2}, d, 0.1, 0.0, 0.0), config_error);
}

TEST_CASE("supercritical data membership") {
  auto g = geo();
  auto f = supercritical_data(1.3, g);
  // beta strictly below s + d/q = 3/2: finite norm
  CHECK(std::isfinite(weighted_norm(f, {2.0, 0.0})));
  CHECK(std::isfinite(weighted_norm_detailed(f, {2.0, 0.0}).tail_error));
  // membership boundary: beta < s + d/q
  auto close = supercritical_data(1.7, g);   // s + d/q = 1.75
  CHECK(std::isfinite(weighted_norm_detailed(close, {2.0, 0.25}).tail_error));
  auto out = supercritical_data(1.8, g);
  CHECK(weighted_norm_detailed(out, {2.0, 0.25}).tail_error == inf);
  CHECK_THROWS_AS(supercritical_data(3.0, g), config_error);
  CHECK_THROWS_AS(supercritical_data(-0.5, g), config_error);
}

TEST_CASE("weak functionals: scaling exponents") {
  Params p{3, 0.0, 3.0};
  auto g = geo();
  auto u0 = supercritical_data(1.5, g);
  CutoffSpec spec;
  spec.l = 7;

  Array Ts(9), Ks(9), lhs(9);
  for (int k = 0; k < 9; ++k) {
    Ts[k] = 1e-4 * std::pow(2.3714, k);  // spans [1e-4, 1e-1]
    auto wf = weak_functionals(u0, Ts[k], spec, p);
    CHECK(wf.gamma_window_ok);
    Ks[k] = wf.K_T;
    lhs[k] = wf.lhs_pairing;
    CHECK(wf.K_T == doctest::Approx(wf.K_T_closed_form).epsilon(0.02));
    CHECK(wf.rhs_bound_exponent == doctest::Approx(-0.5 + 1.5));
  }
  // K_T slope: 1 - gamma/(2(alpha-1)) + d/2 = 5/2 for gamma = 0, d = 3
  CHECK(fit_slope(Ts.log(), Ks.log()) == doctest::Approx(2.5).epsilon(0.01));
  // data pairing slope: (d - beta)/2 = 0.75
  CHECK(fit_slope(Ts.log(), lhs.log()) == doctest::Approx(0.75).epsilon(0.02));

  // continuity toward T = 1
  auto wf1 = weak_functionals(u0, 0.97, spec, p);
  CHECK(std::isfinite(wf1.lhs_pairing));
  CHECK(std::isfinite(wf1.K_T));

  Params narrow{3, 2.0, 1.5};  // alpha < 1 + gamma/d
  auto wf2 = weak_functionals(u0, 0.01, spec, narrow);
  CHECK_FALSE(wf2.gamma_window_ok);
}

TEST_CASE("contradiction scan: slope, borderline, refusal") {
  Params p{3, 0.0, 3.0};
  Array Ts(9);
  for (int k = 0; k < 9; ++k) Ts[k] = 1e-4 * std::pow(2.3714, k);
  CutoffSpec spec;
  spec.l = 7;

  SUBCASE("supercritical beta gives the predicted positive slope") {
    auto scan = contradiction_scan(p, 1.5, 6.0, 1.2, Ts, spec, geo());
    REQUIRE(scan.feasible);
    CHECK(scan.expected_slope == doctest::Approx(0.25));
    CHECK(scan.fitted_slope == doctest::Approx(0.25).epsilon(0.02));
    CHECK(scan.verdict == "nonexistence-mechanism confirmed");
  }
  SUBCASE("borderline beta cancels the exponent") {
    auto scan = contradiction_scan(p, 1.0, 6.0, 1.2, Ts, spec, geo());
    REQUIRE(scan.feasible);
    CHECK(scan.expected_slope == doctest::Approx(0.0));
    CHECK(std::abs(scan.fitted_slope) < 0.02);
    CHECK(scan.verdict == "no contradiction");
  }
  SUBCASE("subcritical weight refuses with an explanation") {
    auto scan = contradiction_scan(p, 1.5, 6.0, 0.2, Ts, spec, geo());  // s < sc = 0.5
    CHECK_FALSE(scan.feasible);
    CHECK(scan.verdict.find("consistent-with-well-posedness") != std::string::npos);
  }
  SUBCASE("beta outside the membership window is rejected") {
    CHECK_THROWS_AS(contradiction_scan(p, 2.9, 6.0, 1.2, Ts, spec, geo()), config_error);
  }
  SUBCASE("cutoff power below the window is rejected") {
    CHECK_THROWS_AS(contradiction_scan(p, 1.5, 6.0, 1.2, Ts, CutoffSpec{3}, geo()),
                    config_error);
  }
}

TEST_CASE("beta-window feasibility matches the supercritical characterization exactly") {
  // (beta window nonempty) <=> (s > sc and alpha > fujita), checked in exact
  // rational arithmetic over a parameter lattice
  for (int d : {1, 2, 3}) {
    for (const Rational& gamma : {Rational(-1), Rational(-1, 2), Rational(0), Rational(1)}) {
      if (Rational(-std::min(2, d)) >= gamma) continue;
      for (const Rational& alpha : {Rational(2), Rational(3), Rational(7, 2)}) {
        for (const Rational& invq : {Rational(0), Rational(1, 4), Rational(1, 2)}) {
          for (const Rational& s :
               {Rational(-1), Rational(0), Rational(1, 2), Rational(1), Rational(2)}) {
            const Rational beta_low = (Rational(2) + gamma) / (alpha - Rational(1));
            const Rational sdq = s + Rational(d) * invq;
            const Rational dd(d);
            const Rational beta_high = sdq < dd ? sdq : dd;
            const bool window_nonempty = beta_low < beta_high;
            const Rational sc = beta_low - Rational(d) * invq;
            const Rational fujita = Rational(1) + (Rational(2) + gamma) / Rational(d);
            const bool expect = (sc < s) && (fujita < alpha);
            CHECK(window_nonempty == expect);
          }
        }
      }
    }
  }
}

TEST_CASE("cutoff pairing of the zero trajectory vanishes") {
  auto g = RadialGeometry::make(3, 512, 2.0, 60);
  auto zero = Field::radial(g, Array::Zero(g->n));
  Array times(5);
  times << 0.0, 1e-3, 4e-3, 1e-2, 5e-2;
  std::vector<Field> slices(5, zero);
  Trajectory u(times, slices);
  CHECK(cutoff_pairing(u, CutoffSpec{7}, Params{3, 0.0, 3.0}, 0.04) == 0.0);
}
