#include "doctest.h"
#include "hhlab/exponents.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace hhlab;

namespace {
Params make(int d, Real gamma, Real alpha) {
  Params p;
  p.d = d;
  p.gamma = gamma;
  p.alpha = alpha;
  return p;
}
}  // namespace

TEST_CASE("fujita exponent") {
  CHECK(fujita_exponent(make(3, 0, 3)) == doctest::Approx(5.0 / 3.0));
  CHECK(fujita_exponent(make(1, -1, 2)) == doctest::Approx(2.0));
  CHECK(fujita_exponent(make(4, 2, 2)) == doctest::Approx(2.0));
}

TEST_CASE("critical weight") {
  CHECK(critical_weight(make(3, 0, 3), 3.0) == doctest::Approx(0.0));
  CHECK(critical_weight(make(3, 0, 3), inf) == doctest::Approx(1.0));
  // q = d(alpha-1)/(2+gamma) makes the space the plain Lebesgue one
  for (auto [d, g, a] : {std::tuple<int, Real, Real>{3, 0.0, 3.0},
                         {2, -0.5, 4.0},
                         {5, 1.0, 2.0}}) {
    const Params p = make(d, g, a);
    const Real q = d * (a - 1.0) / (2.0 + g);
    CHECK(critical_weight(p, q) == doctest::Approx(0.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(critical_weight(make(3, 0, 1.0), 2.0), config_error);
}

TEST_CASE("scaling classification") {
  const Params p = make(3, 0, 3);
  CHECK(classify_scaling(p, 3.0, 0.0) == Scaling::critical);
  CHECK(classify_scaling(p, 3.0, -0.5) == Scaling::subcritical);
  CHECK(classify_scaling(p, 3.0, 0.5) == Scaling::supercritical);
  // exact path: s_c(q=6) = 1/2 recognized exactly
  CHECK(classify_scaling(p, 6.0, 0.5) == Scaling::critical);
}

TEST_CASE("critical window checked against independent inequality evaluation") {
  const Params p = make(3, 0, 3);
  // by hand: fujita = 5/3 < 3, gamma = 0 > -2; with q = 6:
  //   invq = 1/6 < 2/(d(alpha-1)) = 1/3, gap term (d-2)alpha-d-gamma = 0;
  //   s window: (sc+gamma)/alpha = 1/6 <= s < sc = 1/2
  const Real invq = 1.0 / 6.0;
  const Real sc = 2.0 / 2.0 - 3.0 * invq;
  CHECK(sc == doctest::Approx(0.5));
  const Real lower = (sc + 0.0) / 3.0;
  CHECK(lower == doctest::Approx(1.0 / 6.0));
  const Real s = 0.25;
  const bool by_hand = (0.0 > -2.0) && (5.0 / 3.0 < 3.0) && (invq <= 1.0 / 3.0) &&
                       (invq < 1.0 / 3.0) && (lower <= s) && (s < sc);
  CHECK(by_hand);

  auto rep = check_conditions("critical_wellposed", p, {{"q", 6.0}, {"s", s}});
  CHECK(rep.overall == by_hand);
  CHECK(rep.items.size() >= 7);
  for (const auto& item : rep.items) CHECK(item.exact);

  // q = alpha sits on the strict boundary invq < 2/(d(alpha-1)) and must fail
  auto boundary = check_conditions("critical_wellposed", p, {{"q", 3.0}, {"s", -0.2}});
  CHECK_FALSE(boundary.overall);

  // margins: satisfied strict atoms have positive margin, violated ones negative
  for (const auto& item : rep.items) {
    if (item.relation == Relation::less && item.satisfied) CHECK(item.margin > 0.0);
    if (!item.satisfied) CHECK(item.margin <= 0.0);
  }
}

TEST_CASE("smoothing window endpoint bookkeeping") {
  const Params p = make(3, 0, 3);  // d matters, alpha/gamma do not
  auto rep = check_conditions(
      "heat_smoothing", p, {{"p", 1.0}, {"q", inf}, {"s", 0.1}, {"sprime", 0.1}});
  CHECK_FALSE(rep.overall);
  auto ok = check_conditions("heat_smoothing", p,
                             {{"p", 1.0}, {"q", inf}, {"s", 0.0}, {"sprime", 0.0}});
  CHECK(ok.overall);
  // p = 1 admits s = 0 (non-strict endpoint bound)
  auto p1 = check_conditions("heat_smoothing", p,
                             {{"p", 1.0}, {"q", 2.0}, {"s", 0.0}, {"sprime", -0.5}});
  CHECK(p1.overall);
  // p = 2: s < d(1 - 1/p) = 3/2 strictly
  auto p2 = check_conditions("heat_smoothing", p,
                             {{"p", 2.0}, {"q", 2.0}, {"s", 1.4}, {"sprime", -0.5}});
  CHECK(p2.overall);
  CHECK_FALSE(check_conditions("heat_smoothing", p,
                               {{"p", 2.0}, {"q", 2.0}, {"s", 1.5}, {"sprime", -0.5}})
                  .overall);
}

TEST_CASE("contraction window at theta = 1 reproduces the stability window") {
  for (auto [d, g, a] : {std::tuple<int, Real, Real>{3, 0.0, 3.0},
                         {3, -1.0, 3.0},
                         {2, 0.5, 4.0},
                         {1, -0.5, 4.0},
                         {4, 1.0, 2.0}}) {
    const Params p = make(d, g, a);
    auto invq_axis = rational_axis(Rational(0), Rational(1), 41);
    auto s_axis = rational_axis(Rational(-3), Rational(3), 41);
    auto contraction = admissible_region_exact("kato_contraction", p, invq_axis, s_axis,
                                               {{"theta", Rational(1)}});
    auto stability = admissible_region_exact("kato_stability", p, invq_axis, s_axis);
    for (size_t i = 0; i < invq_axis.size(); ++i)
      for (size_t j = 0; j < s_axis.size(); ++j)
        CHECK(contraction.mask[i][j] == stability.mask[i][j]);
  }
}

TEST_CASE("critical window equals stability-and-norm conjunction; region inclusion") {
  for (auto [d, g, a] : {std::tuple<int, Real, Real>{3, 0.0, 3.0},
                         {2, -0.5, 4.0},
                         {5, 2.0, 2.0}}) {
    const Params p = make(d, g, a);
    auto invq_axis = rational_axis(Rational(0), Rational(1), 31);
    auto s_axis = rational_axis(Rational(-2), Rational(2), 31);
    for (const auto& invq : invq_axis) {
      for (const auto& s : s_axis) {
        std::map<std::string, Real> args{{"invq", invq.to_double()}, {"s", s.to_double()}};
        auto wp = check_conditions("critical_wellposed", p, args);
        auto st = check_conditions("kato_stability", p, args);
        auto nm = check_conditions("critical_norm_stability", p, args);
        // q-condition equivalence
        CHECK(wp.group_satisfied("q") == (st.group_satisfied("q") && nm.group_satisfied("q")));
        // full-region inclusion
        if (wp.overall) {
          CHECK(st.overall);
          CHECK(nm.overall);
        }
      }
    }
  }
}

TEST_CASE("empty region below the fujita exponent") {
  const Params p = make(3, 0, 1.5);  // fujita(3,0) = 5/3 > 1.5
  auto m = admissible_region("critical_wellposed", p, {0.0, 0.1, 0.2, 0.3}, {-1.0, 0.0, 1.0});
  for (const auto& rowmask : m.mask)
    for (bool cell : rowmask) CHECK_FALSE(cell);
}

TEST_CASE("strictness: boundary cells are excluded exactly") {
  const Params p = make(3, 0, 3);
  // s exactly at sc is supercritical boundary: strict upper bound fails
  auto rep = check_conditions("kato_stability", p, {{"q", 6.0}, {"s", 0.5}});
  CHECK_FALSE(rep.overall);
  for (const auto& item : rep.items)
    if (item.label == "s: s < sc") {
      CHECK_FALSE(item.satisfied);
      CHECK(item.margin == doctest::Approx(0.0));
    }
  // non-strict lower bound admits equality: s = gamma/(alpha-1) = 0 with margin 0
  auto rep2 = check_conditions("kato_stability", p, {{"q", 6.0}, {"s", 0.0}});
  for (const auto& item : rep2.items)
    if (item.label == "s: gamma/(alpha-1) <= s") CHECK(item.satisfied);
}

TEST_CASE("missing and unknown arguments") {
  const Params p = make(3, 0, 3);
  CHECK_THROWS_AS(check_conditions("critical_wellposed", p, {{"q", 6.0}}), config_error);
  CHECK_THROWS_AS(check_conditions("no_such_set", p, {{"q", 6.0}, {"s", 0.0}}), config_error);
  CHECK_THROWS_AS(
      check_conditions("kato_contraction", p, {{"q", 6.0}, {"s", 0.25}}), config_error);
}

TEST_CASE("non-dyadic parameters fall back to tolerance evaluation") {
  const Params p = make(3, 0.1, 3.0);  // 0.1 is not a small dyadic
  auto rep = check_conditions("critical_wellposed", p, {{"q", 6.0}, {"s", 0.25}});
  bool any_inexact = false;
  for (const auto& item : rep.items) any_inexact = any_inexact || !item.exact;
  CHECK(any_inexact);
}

TEST_CASE("beta function identities and quadrature cross-check") {
  CHECK(beta_function(1.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(beta_function(0.5, 0.5).value == doctest::Approx(pi).epsilon(1e-12));
  CHECK(beta_function(0.3, -0.1).divergent);
  CHECK(beta_function(0.0, 1.0).divergent);
  for (auto [x, y] : {std::pair<Real, Real>{0.25, 0.625}, {1.7, 2.3}, {0.9, 3.1}, {0.4, 0.7}}) {
    const Real lib = beta_function(x, y).value;
    CHECK(lib == doctest::Approx(beta_function(y, x).value).epsilon(1e-13));
    CHECK(lib == doctest::Approx(oracles::beta_quadrature(x, y)).epsilon(1e-9));
  }
  for (Real x : {0.3, 1.0, 2.5}) CHECK(beta_function(x, 1.0).value == doctest::Approx(1.0 / x));
}

TEST_CASE("duhamel constants: windows and the beta value") {
  const Params p = make(3, 0, 3);
  // critical variant: window is sc - 2/alpha < s < sc
  const Real q = 6.0;
  const Real sc = critical_weight(p, q);
  for (Real s : {sc - 0.9, sc - 0.5, sc - 0.1, sc + 0.1}) {
    auto c = duhamel_constants(p, q, s, DuhamelVariant::critical);
    const bool expect = (sc - 2.0 / 3.0 < s) && (s < sc);
    CHECK(c.window_ok == expect);
    // first beta argument is (alpha-1)(sc-s)/2
    CHECK(c.beta_x == doctest::Approx((p.alpha - 1.0) * (sc - s) / 2.0).epsilon(1e-12));
  }
  // difference variant window: sc - 2/(1+theta(alpha-1)) < s < sc
  const Real theta = 0.5;
  for (Real s : {sc - 1.2, sc - 0.8, sc - 0.3}) {
    auto c = duhamel_constants(p, q, s, DuhamelVariant::difference, theta);
    const bool expect = (sc - 2.0 / (1.0 + theta * 2.0) < s) && (s < sc);
    CHECK(c.window_ok == expect);
    CHECK(c.beta_x == doctest::Approx(theta * 2.0 * (sc - s) / 2.0).epsilon(1e-12));
  }
  // q = 3 gives sc = 0; at s = -1/4 the beta value is B(1/4, 5/8)
  auto c = duhamel_constants(p, 3.0, -0.25, DuhamelVariant::critical);
  CHECK(c.window_ok);
  CHECK(c.beta_x == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(c.beta_y == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(c.beta.value == doctest::Approx(oracles::beta_quadrature(0.25, 0.625)).epsilon(1e-9));
  CHECK_THROWS_AS(duhamel_constants(make(3, 0, 1.0), 3.0, 0.0, DuhamelVariant::critical),
                  config_error);
}

TEST_CASE("duhamel constants: subcritical and norm variants") {
  const Params p = make(3, -1, 3);
  const Real q = 4.0;
  const Real sc = critical_weight(p, q);
  const Real stilde = sc - 0.2;
  auto c = duhamel_constants(p, q, stilde - 0.3, DuhamelVariant::subcritical, 1.0, stilde);
  // y argument: 1 - alpha(stilde - s)/2
  CHECK(c.beta_y == doctest::Approx(1.0 - 1.5 * 0.3).epsilon(1e-12));
  CHECK(c.beta_x == doctest::Approx((sc - (stilde - 0.3))).epsilon(1e-12));
  auto cn = duhamel_constants(p, q, stilde - 0.3, DuhamelVariant::subcritical_norm, 1.0, stilde);
  CHECK(cn.beta_x ==
        doctest::Approx(0.5 * (2.0 * (sc - (stilde - 0.3)) + 0.3)).epsilon(1e-12));
  auto cm = duhamel_constants(p, q, sc - 0.3, DuhamelVariant::critical_norm);
  CHECK(cm.beta_x == doctest::Approx(0.5 * 3.0 * 0.3).epsilon(1e-12));
}

TEST_CASE("region masks serialize sane axes and respect mask shape") {
  const Params p = make(3, 0, 3);
  auto m = admissible_region("critical_wellposed", p, {0.0, 0.125, 0.25}, {0.0, 0.25, 0.375, 0.4375});
  REQUIRE(m.mask.size() == 3);
  REQUIRE(m.mask[0].size() == 4);
  // a known admissible cell: invq = 1/8, s = 1/4 (window [1/8+..., sc=5/8))
  auto rep = check_conditions("critical_wellposed", p, {{"invq", 0.125}, {"s", 0.25}});
  CHECK(m.mask[1][1] == rep.overall);
  CHECK_THROWS_AS(admissible_region("critical_wellposed", p, {}, {0.0}), config_error);
  CHECK_THROWS_AS(admissible_region("critical_wellposed", p, {1.5}, {0.0}), config_error);
}

TEST_CASE("bootstrap window variants") {
  const Params p = make(3, 0, 3);
  // finite target p
  auto fin = check_conditions(
      "norm_bootstrap", p, {{"q", 6.0}, {"s", 0.4}, {"p", 12.0}, {"sprime", 0.3}});
  CHECK(fin.overall);
  // p = inf target needs 0 <= sprime <= min(s, alpha s - gamma)
  auto infny = check_conditions(
      "norm_bootstrap", p, {{"q", 6.0}, {"s", 0.4}, {"p", inf}, {"sprime", 0.2}});
  CHECK(infny.overall);
  auto bad = check_conditions(
      "norm_bootstrap", p, {{"q", 6.0}, {"s", 0.4}, {"p", inf}, {"sprime", -0.1}});
  CHECK_FALSE(bad.overall);
}

TEST_CASE("describe lists every set") {
  for (const auto& name : condition_set_names()) {
    const std::string text = describe_condition_set(name);
    CHECK(text.find(name) != std::string::npos);
    CHECK(text.size() > 40);
  }
  CHECK_THROWS_AS(describe_condition_set("bogus"), config_error);
}
