#include "hhlab/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace hhlab {

void Params::require_solver_valid() const {
  if (d < 1) throw config_error("space dimension d must be >= 1");
  if (!(alpha > 1.0)) throw config_error("solver paths require alpha > 1");
}

Real fujita_exponent(const Params& p) {
  if (p.d < 1) throw config_error("fujita_exponent: d must be >= 1");
  return 1.0 + (2.0 + p.gamma) / p.d;
}

Real critical_weight(const Params& p, Real q) {
  if (p.alpha == 1.0) throw config_error("critical_weight: degenerate alpha = 1");
  if (!(q >= 1.0)) throw config_error("critical_weight: q must lie in [1, inf]");
  const Real invq = std::isinf(q) ? 0.0 : 1.0 / q;
  return (2.0 + p.gamma) / (p.alpha - 1.0) - p.d * invq;
}

namespace {

bool almost_equal(Real a, Real b) {
  const Real scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-12 * scale;
}

}  // namespace

Scaling classify_scaling(const Params& p, Real q, Real s) {
  // exact path whenever the inputs round-trip through small rationals
  const Real invq = std::isinf(q) ? 0.0 : 1.0 / q;
  auto rg = Rational::from_double(p.gamma);
  auto ra = Rational::from_double(p.alpha);
  auto rq = std::isinf(q) ? std::optional<Rational>(Rational(0)) : Rational::from_double(q);
  auto rs = Rational::from_double(s);
  if (rg && ra && rq && rs && !(*ra == Rational(1))) {
    try {
      Rational riq = std::isinf(q) ? Rational(0) : Rational(1) / *rq;
      Rational sc = (Rational(2) + *rg) / (*ra - Rational(1)) - Rational(p.d) * riq;
      if (*rs == sc) return Scaling::critical;
      return (*rs < sc) ? Scaling::subcritical : Scaling::supercritical;
    } catch (const rational_overflow&) {
      // fall through to floating point
    }
  }
  const Real sc = critical_weight(p, std::isinf(q) ? inf : 1.0 / invq);
  if (almost_equal(s, sc)) return Scaling::critical;
  return s < sc ? Scaling::subcritical : Scaling::supercritical;
}

namespace {

enum class SetId {
  critical_wellposed,
  kato_stability,
  kato_contraction,
  critical_norm_stability,
  subcritical_kato,
  subcritical_norm_stability,
  subcritical_wellposed,
  norm_bootstrap,
  heat_smoothing,
};

const std::vector<std::pair<std::string, SetId>>& set_table() {
  static const std::vector<std::pair<std::string, SetId>> table = {
      {"critical_wellposed", SetId::critical_wellposed},
      {"kato_stability", SetId::kato_stability},
      {"kato_contraction", SetId::kato_contraction},
      {"critical_norm_stability", SetId::critical_norm_stability},
      {"subcritical_kato", SetId::subcritical_kato},
      {"subcritical_norm_stability", SetId::subcritical_norm_stability},
      {"subcritical_wellposed", SetId::subcritical_wellposed},
      {"norm_bootstrap", SetId::norm_bootstrap},
      {"heat_smoothing", SetId::heat_smoothing},
  };
  return table;
}

SetId set_from_name(const std::string& name) {
  for (const auto& [n, id] : set_table())
    if (n == name) return id;
  throw config_error("unknown condition set: " + name);
}

template <class N>
struct Atom {
  std::string label;
  N lhs;
  Relation rel;
  N rhs;
};

template <class N>
struct SetArgs {
  std::optional<N> invq, s, theta, stilde, invp, sprime;
};

// Shared sub-expressions of the admissibility windows, in invq = 1/q.
template <class N>
struct Ctx {
  N d, gamma, alpha;
  N one{1}, two{2};

  N sc(const N& invq) const { return (two + gamma) / (alpha - one) - d * invq; }
  N kato_cap() const { return two / (d * (alpha - one)); }        // 2/(d(alpha-1))
  N gap() const { return (d - two) * alpha - d - gamma; }         // (d-2)alpha - d - gamma
  N fujita() const { return one + (two + gamma) / d; }
};

template <class N>
class AtomList {
public:
  void push(std::string label, N lhs, Relation rel, N rhs) {
    atoms_.push_back({std::move(label), std::move(lhs), rel, std::move(rhs)});
  }
  std::vector<Atom<N>> take() { return std::move(atoms_); }

private:
  std::vector<Atom<N>> atoms_;
};

template <class N>
void push_base(AtomList<N>& out, const Ctx<N>& c) {
  N mind = c.d < c.two ? c.d : c.two;
  out.push("base: -min(2,d) < gamma", -mind, Relation::less, c.gamma);
  out.push("base: fujita(d,gamma) < alpha", c.fujita(), Relation::less, c.alpha);
}

template <class N>
void push_q_range(AtomList<N>& out, const N& invq, const Ctx<N>& c) {
  out.push("q: 0 <= invq", N(0), Relation::less_equal, invq);
  out.push("q: invq <= 1/alpha", invq, Relation::less_equal, c.one / c.alpha);
}

template <class N>
void push_stilde_window(AtomList<N>& out, const Ctx<N>& c, const N& st, bool strict_lower) {
  if (strict_lower) {
    out.push("stilde: -d/alpha < stilde", -c.d / c.alpha, Relation::less, st);
    out.push("stilde: gamma/(alpha-1) < stilde", c.gamma / (c.alpha - c.one), Relation::less, st);
  }
  out.push("stilde: stilde < (2+gamma)/(alpha-1)", st, Relation::less,
           (c.two + c.gamma) / (c.alpha - c.one));
}

template <class N>
std::vector<Atom<N>> build_atoms(SetId id, const Ctx<N>& c, const SetArgs<N>& a) {
  AtomList<N> out;
  const N A = c.kato_cap();
  const N Y = c.gap();
  const N am1 = c.alpha - c.one;

  switch (id) {
    case SetId::critical_wellposed: {
      const N invq = *a.invq, s = *a.s;
      const N sc = c.sc(invq);
      push_base(out, c);
      push_q_range(out, invq, c);
      out.push("q: invq < 2/(d(alpha-1))", invq, Relation::less, A);
      out.push("q: invq < 2/(d(alpha-1)) + ((d-2)alpha-d-gamma)/(d(alpha-1)^2)", invq,
               Relation::less, A + Y / (c.d * am1 * am1));
      out.push("s: sc - (d(alpha-1)/alpha)(2/(d(alpha-1)) - invq) <= s",
               sc - (c.d * am1 / c.alpha) * (A - invq), Relation::less_equal, s);
      // strict windows inherited from the underlying estimates; they only bind
      // on the q = inf boundary where the combined lower bound ties with them
      out.push("s: sc - 2/alpha < s", sc - c.two / c.alpha, Relation::less, s);
      out.push("s: -d invq < s", -c.d * invq, Relation::less, s);
      out.push("s: s < sc", s, Relation::less, sc);
      out.push("s: s < sc + ((d-2)alpha-d-gamma)/(alpha(alpha-1))", s, Relation::less,
               sc + Y / (c.alpha * am1));
      break;
    }
    case SetId::kato_stability: {
      const N invq = *a.invq, s = *a.s;
      const N sc = c.sc(invq);
      push_base(out, c);
      push_q_range(out, invq, c);
      out.push("q: invq < 2/(d(alpha-1))", invq, Relation::less, A);
      out.push("q: invq < 2/(d(alpha-1)) + ((d-2)alpha-d-gamma)/(d alpha (alpha-1))", invq,
               Relation::less, A + Y / (c.d * c.alpha * am1));
      out.push("s: gamma/(alpha-1) <= s", c.gamma / am1, Relation::less_equal, s);
      out.push("s: -d invq < s", -c.d * invq, Relation::less, s);
      out.push("s: sc - 2/alpha < s", sc - c.two / c.alpha, Relation::less, s);
      out.push("s: s < sc", s, Relation::less, sc);
      out.push("s: s < sc + ((d-2)alpha-d-gamma)/(alpha(alpha-1))", s, Relation::less,
               sc + Y / (c.alpha * am1));
      break;
    }
    case SetId::kato_contraction: {
      const N invq = *a.invq, s = *a.s, th = *a.theta;
      const N sc = c.sc(invq);
      const N denom = c.one + th * am1;  // 1 + theta(alpha-1)
      push_base(out, c);
      out.push("theta: 0 < theta", N(0), Relation::less, th);
      out.push("theta: theta <= 1", th, Relation::less_equal, c.one);
      if (c.d == c.one)
        out.push("theta: 1/(2+gamma) < theta (d=1)", c.one / (c.two + c.gamma), Relation::less, th);
      push_q_range(out, invq, c);
      out.push("q: invq < 2/(d(alpha-1))", invq, Relation::less, A);
      out.push("q: invq < 2/(d(alpha-1)) + theta((d-2)alpha-d-gamma)/(d(alpha-1)(1+theta(alpha-1)))",
               invq, Relation::less, A + th * Y / (c.d * am1 * denom));
      out.push("s: sc - (d/theta)(2/(d(alpha-1)) - invq) <= s", sc - (c.d / th) * (A - invq),
               Relation::less_equal, s);
      out.push("s: -d invq < s", -c.d * invq, Relation::less, s);
      out.push("s: sc - 2/(1+theta(alpha-1)) < s", sc - c.two / denom, Relation::less, s);
      out.push("s: s < sc", s, Relation::less, sc);
      out.push("s: s < sc + ((d-2)alpha-d-gamma)/((alpha-1)(1+theta(alpha-1)))", s, Relation::less,
               sc + Y / (am1 * denom));
      break;
    }
    case SetId::critical_norm_stability: {
      const N invq = *a.invq, s = *a.s;
      const N sc = c.sc(invq);
      push_base(out, c);
      push_q_range(out, invq, c);
      out.push("q: invq < 2/(d(alpha-1))", invq, Relation::less, A);
      out.push("q: invq < 2/(d(alpha-1)) + ((d-2)alpha-d-gamma)/(d(alpha-1)^2)", invq,
               Relation::less, A + Y / (c.d * am1 * am1));
      out.push("s: sc - (d(alpha-1)/alpha)(2/(d(alpha-1)) - invq) <= s",
               sc - (c.d * am1 / c.alpha) * (A - invq), Relation::less_equal, s);
      // Beta-convergence window, binding only when q = inf ties the bounds
      out.push("s: sc - 2/alpha < s", sc - c.two / c.alpha, Relation::less, s);
      out.push("s: s < sc", s, Relation::less, sc);
      out.push("s: s < sc + ((d-2)alpha-d-gamma)/(alpha(alpha-1))", s, Relation::less,
               sc + Y / (c.alpha * am1));
      break;
    }
    case SetId::subcritical_kato: {
      const N invq = *a.invq, s = *a.s, st = *a.stilde;
      const N sc = c.sc(invq);
      push_base(out, c);
      push_stilde_window(out, c, st, /*strict_lower=*/false);
      push_q_range(out, invq, c);
      out.push("q: invq < 2/(d(alpha-1))", invq, Relation::less, A);
      out.push("q: invq < (1/alpha)(1 - gamma/(d(alpha-1)))", invq, Relation::less,
               (c.one / c.alpha) * (c.one - c.gamma / (c.d * am1)));
      out.push("q: invq < (1/d)((2+gamma)/(alpha-1) - stilde)", invq, Relation::less,
               (c.one / c.d) * ((c.two + c.gamma) / am1 - st));
      out.push("s: gamma/(alpha-1) <= s", c.gamma / am1, Relation::less_equal, s);
      out.push("s: stilde - 2/alpha < s", st - c.two / c.alpha, Relation::less, s);
      out.push("s: -d invq < s", -c.d * invq, Relation::less, s);
      out.push("s: s < (d+gamma)/alpha - d invq", s, Relation::less,
               (c.d + c.gamma) / c.alpha - c.d * invq);
      out.push("s: s < sc", s, Relation::less, sc);
      break;
    }
    case SetId::subcritical_norm_stability: {
      const N invq = *a.invq, s = *a.s, st = *a.stilde;
      push_base(out, c);
      push_stilde_window(out, c, st, /*strict_lower=*/true);
      push_q_range(out, invq, c);
      out.push("q: -stilde/d < invq", -st / c.d, Relation::less, invq);
      out.push("q: invq < (1/alpha)(1 - stilde/d)", invq, Relation::less,
               (c.one / c.alpha) * (c.one - st / c.d));
      out.push("q: invq < (1/d)((2+gamma)/(alpha-1) - stilde)", invq, Relation::less,
               (c.one / c.d) * ((c.two + c.gamma) / am1 - st));
      out.push("s: (stilde+gamma)/alpha <= s", (st + c.gamma) / c.alpha, Relation::less_equal, s);
      out.push("s: s < (d+gamma)/alpha - d invq", s, Relation::less,
               (c.d + c.gamma) / c.alpha - c.d * invq);
      out.push("s: s < stilde", s, Relation::less, st);
      break;
    }
    case SetId::subcritical_wellposed: {
      const N invq = *a.invq, s = *a.s, st = *a.stilde;
      push_base(out, c);
      push_stilde_window(out, c, st, /*strict_lower=*/true);
      push_q_range(out, invq, c);
      out.push("q: -stilde/d < invq", -st / c.d, Relation::less, invq);
      out.push("q: invq < 2/(d(alpha-1))", invq, Relation::less, A);
      out.push("q: invq < (1/alpha)(1 - stilde/d)", invq, Relation::less,
               (c.one / c.alpha) * (c.one - st / c.d));
      out.push("q: invq < (1/d)((2+gamma)/(alpha-1) - stilde)", invq, Relation::less,
               (c.one / c.d) * ((c.two + c.gamma) / am1 - st));
      out.push("s: (stilde+gamma)/alpha <= s", (st + c.gamma) / c.alpha, Relation::less_equal, s);
      out.push("s: -d invq < s", -c.d * invq, Relation::less, s);
      out.push("s: s < (d+gamma)/alpha - d invq", s, Relation::less,
               (c.d + c.gamma) / c.alpha - c.d * invq);
      out.push("s: s < stilde", s, Relation::less, st);
      break;
    }
    case SetId::norm_bootstrap: {
      const N invq = *a.invq, s = *a.s, invp = *a.invp, sp = *a.sprime;
      push_base(out, c);
      const N asmg = c.alpha * s - c.gamma;
      if (invp == N(0)) {
        // target p = inf
        out.push("q: invq < 1/alpha", invq, Relation::less, c.one / c.alpha);
        out.push("q: 0 <= invq", N(0), Relation::less_equal, invq);
        out.push("s: 0 <= s", N(0), Relation::less_equal, s);
        out.push("s: gamma/alpha <= s", c.gamma / c.alpha, Relation::less_equal, s);
        out.push("s: s < (d+gamma)/alpha - d invq", s, Relation::less,
                 (c.d + c.gamma) / c.alpha - c.d * invq);
        out.push("sprime: 0 <= sprime", N(0), Relation::less_equal, sp);
        out.push("sprime: sprime <= s", sp, Relation::less_equal, s);
        out.push("sprime: sprime <= alpha s - gamma", sp, Relation::less_equal, asmg);
      } else {
        out.push("q: invq <= 1/alpha", invq, Relation::less_equal, c.one / c.alpha);
        out.push("q: 0 < invq", N(0), Relation::less, invq);
        out.push("s: -d invq < s", -c.d * invq, Relation::less, s);
        out.push("s: (gamma - d invq)/alpha < s", (c.gamma - c.d * invq) / c.alpha, Relation::less, s);
        out.push("s: s < (d+gamma)/alpha - d invq", s, Relation::less,
                 (c.d + c.gamma) / c.alpha - c.d * invq);
        out.push("p: 0 < invp", N(0), Relation::less, invp);
        out.push("p: -s/d < invp", -s / c.d, Relation::less, invp);
        out.push("p: (gamma - alpha s)/d < invp", (c.gamma - c.alpha * s) / c.d, Relation::less, invp);
        out.push("p: invp <= invq", invp, Relation::less_equal, invq);
        out.push("sprime: -d invp < sprime", -c.d * invp, Relation::less, sp);
        out.push("sprime: sprime <= s", sp, Relation::less_equal, s);
        out.push("sprime: sprime <= alpha s - gamma", sp, Relation::less_equal, asmg);
      }
      break;
    }
    case SetId::heat_smoothing: {
      const N invp = *a.invp, invq = *a.invq, s = *a.s, sp = *a.sprime;
      out.push("base: 0 <= invq", N(0), Relation::less_equal, invq);
      out.push("base: invq <= invp", invq, Relation::less_equal, invp);
      out.push("base: invp <= 1", invp, Relation::less_equal, c.one);
      out.push("s: sprime <= s", sp, Relation::less_equal, s);
      if (invq == N(0))
        out.push("s: 0 <= sprime (q=inf)", N(0), Relation::less_equal, sp);
      else
        out.push("s: -d invq < sprime", -c.d * invq, Relation::less, sp);
      if (invp == c.one)
        out.push("s: s <= 0 (p=1)", s, Relation::less_equal, N(0));
      else
        out.push("s: s < d(1 - invp)", s, Relation::less, c.d * (c.one - invp));
      break;
    }
  }
  return out.take();
}

ConditionItem eval_atom(const Atom<Real>& a) {
  ConditionItem it;
  it.label = a.label;
  it.lhs = a.lhs;
  it.relation = a.rel;
  it.rhs = a.rhs;
  it.margin = a.rhs - a.lhs;
  const bool eq = almost_equal(a.lhs, a.rhs);
  it.satisfied = (a.rel == Relation::less) ? (a.lhs < a.rhs && !eq) : (a.lhs < a.rhs || eq);
  it.exact = false;
  return it;
}

ConditionItem eval_atom(const Atom<Rational>& a) {
  ConditionItem it;
  it.label = a.label;
  it.lhs = a.lhs.to_double();
  it.relation = a.rel;
  it.rhs = a.rhs.to_double();
  it.margin = it.rhs - it.lhs;
  it.satisfied = (a.rel == Relation::less) ? (a.lhs < a.rhs) : (a.lhs <= a.rhs);
  it.exact = true;
  return it;
}

template <class N>
ConditionReport eval_report(const std::string& name, SetId id, const Ctx<N>& c,
                            const SetArgs<N>& args) {
  ConditionReport rep;
  rep.condition_set = name;
  rep.overall = true;
  for (const auto& atom : build_atoms(id, c, args)) {
    rep.items.push_back(eval_atom(atom));
    rep.overall = rep.overall && rep.items.back().satisfied;
  }
  return rep;
}

struct RequiredArgs {
  bool s = false, theta = false, stilde = false, p_pair = false;
};

RequiredArgs required_args(SetId id) {
  RequiredArgs r;
  switch (id) {
    case SetId::critical_wellposed:
    case SetId::kato_stability:
    case SetId::critical_norm_stability:
      r.s = true;
      break;
    case SetId::kato_contraction:
      r.s = r.theta = true;
      break;
    case SetId::subcritical_kato:
    case SetId::subcritical_norm_stability:
    case SetId::subcritical_wellposed:
      r.s = r.stilde = true;
      break;
    case SetId::norm_bootstrap:
      r.s = r.p_pair = true;
      break;
    case SetId::heat_smoothing:
      r.s = r.p_pair = true;
      break;
  }
  return r;
}

Real fetch(const std::map<std::string, Real>& args, const std::string& key,
           const std::string& set_name) {
  auto it = args.find(key);
  if (it == args.end())
    throw config_error("condition set '" + set_name + "' needs argument '" + key + "'");
  return it->second;
}

// invq from either "invq" directly or "q" (inf allowed); same for p.
Real fetch_inverse(const std::map<std::string, Real>& args, const std::string& direct,
                   const std::string& reciprocal, const std::string& set_name) {
  if (auto it = args.find(direct); it != args.end()) return it->second;
  auto it = args.find(reciprocal);
  if (it == args.end())
    throw config_error("condition set '" + set_name + "' needs argument '" + reciprocal + "' or '" +
                       direct + "'");
  const Real v = it->second;
  if (std::isinf(v)) return 0.0;
  if (!(v >= 1.0)) throw config_error(reciprocal + " must lie in [1, inf]");
  return 1.0 / v;
}

struct RawArgs {
  Real invq = 0, s = 0, theta = 1, stilde = 0, invp = 0, sprime = 0;
  RequiredArgs req;
  bool has_q_exact_reciprocal = false;
  Real q_raw = 0, p_raw = 0;  // finite originals when supplied as q/p
  bool q_was_reciprocal = false, p_was_reciprocal = false;
};

RawArgs gather_args(SetId id, const std::string& name, const std::map<std::string, Real>& args) {
  RawArgs r;
  r.req = required_args(id);
  r.q_was_reciprocal = !args.count("invq") && args.count("q");
  if (r.q_was_reciprocal) r.q_raw = args.at("q");
  r.invq = fetch_inverse(args, "invq", "q", name);
  if (r.req.s) r.s = fetch(args, "s", name);
  if (r.req.theta) r.theta = fetch(args, "theta", name);
  if (r.req.stilde) r.stilde = fetch(args, "stilde", name);
  if (r.req.p_pair) {
    r.p_was_reciprocal = !args.count("invp") && args.count("p");
    if (r.p_was_reciprocal) r.p_raw = args.at("p");
    r.invp = fetch_inverse(args, "invp", "p", name);
    r.sprime = fetch(args, "sprime", name);
  }
  return r;
}

std::optional<Rational> rational_inverse(bool was_reciprocal, Real raw, Real inv_value) {
  if (!was_reciprocal) return Rational::from_double(inv_value);
  if (std::isinf(raw)) return Rational(0);
  auto r = Rational::from_double(raw);
  if (!r) return std::nullopt;
  try {
    return Rational(1) / *r;
  } catch (const rational_overflow&) {
    return std::nullopt;
  }
}

std::optional<ConditionReport> try_exact(const std::string& name, SetId id, const Params& p,
                                         const RawArgs& raw) {
  auto rg = Rational::from_double(p.gamma);
  auto ra = Rational::from_double(p.alpha);
  if (!rg || !ra) return std::nullopt;
  Ctx<Rational> c{Rational(p.d), *rg, *ra};
  SetArgs<Rational> a;
  auto invq = rational_inverse(raw.q_was_reciprocal, raw.q_raw, raw.invq);
  if (!invq) return std::nullopt;
  a.invq = *invq;
  if (raw.req.s) {
    auto v = Rational::from_double(raw.s);
    if (!v) return std::nullopt;
    a.s = *v;
  }
  if (raw.req.theta) {
    auto v = Rational::from_double(raw.theta);
    if (!v) return std::nullopt;
    a.theta = *v;
  }
  if (raw.req.stilde) {
    auto v = Rational::from_double(raw.stilde);
    if (!v) return std::nullopt;
    a.stilde = *v;
  }
  if (raw.req.p_pair) {
    auto invp = rational_inverse(raw.p_was_reciprocal, raw.p_raw, raw.invp);
    auto sp = Rational::from_double(raw.sprime);
    if (!invp || !sp) return std::nullopt;
    a.invp = *invp;
    a.sprime = *sp;
  }
  try {
    return eval_report(name, id, c, a);
  } catch (const rational_overflow&) {
    return std::nullopt;
  }
}

ConditionReport eval_double(const std::string& name, SetId id, const Params& p,
                            const RawArgs& raw) {
  Ctx<Real> c{static_cast<Real>(p.d), p.gamma, p.alpha};
  SetArgs<Real> a;
  a.invq = raw.invq;
  if (raw.req.s) a.s = raw.s;
  if (raw.req.theta) a.theta = raw.theta;
  if (raw.req.stilde) a.stilde = raw.stilde;
  if (raw.req.p_pair) {
    a.invp = raw.invp;
    a.sprime = raw.sprime;
  }
  return eval_report(name, id, c, a);
}

}  // namespace

bool ConditionReport::group_satisfied(const std::string& group) const {
  const std::string prefix = group + ":";
  bool ok = true;
  for (const auto& it : items)
    if (it.label.rfind(prefix, 0) == 0) ok = ok && it.satisfied;
  return ok;
}

std::vector<std::string> condition_set_names() {
  std::vector<std::string> names;
  for (const auto& [n, id] : set_table()) names.push_back(n);
  return names;
}

ConditionReport check_conditions(const std::string& set_name, const Params& p,
                                 const std::map<std::string, Real>& args) {
  const SetId id = set_from_name(set_name);
  const RawArgs raw = gather_args(id, set_name, args);
  if (auto exact = try_exact(set_name, id, p, raw)) return *exact;
  return eval_double(set_name, id, p, raw);
}

RegionMask admissible_region(const std::string& set_name, const Params& p,
                             const std::vector<Real>& invq_samples,
                             const std::vector<Real>& s_samples,
                             const std::map<std::string, Real>& extra_args, int threads) {
  if (invq_samples.empty() || s_samples.empty())
    throw config_error("admissible_region: sample axes must be nonempty");
  for (Real u : invq_samples)
    if (!(u >= 0.0 && u <= 1.0)) throw config_error("admissible_region: invq samples must lie in [0,1]");
  RegionMask m;
  m.condition_set = set_name;
  m.invq_axis = invq_samples;
  m.s_axis = s_samples;
  m.mask.assign(invq_samples.size(), std::vector<bool>(s_samples.size(), false));
  set_from_name(set_name);  // validate before spawning work
  parallel_for(static_cast<Index>(invq_samples.size()), threads, [&](Index i) {
    std::map<std::string, Real> args = extra_args;
    args["invq"] = invq_samples[static_cast<size_t>(i)];
    for (size_t j = 0; j < s_samples.size(); ++j) {
      args["s"] = s_samples[j];
      m.mask[static_cast<size_t>(i)][j] = check_conditions(set_name, p, args).overall;
    }
  });
  return m;
}

RegionMask admissible_region_exact(const std::string& set_name, const Params& p,
                                   const std::vector<Rational>& invq_samples,
                                   const std::vector<Rational>& s_samples,
                                   const std::map<std::string, Rational>& extra_args, int threads) {
  if (invq_samples.empty() || s_samples.empty())
    throw config_error("admissible_region: sample axes must be nonempty");
  const SetId id = set_from_name(set_name);
  auto rg = Rational::from_double(p.gamma);
  auto ra = Rational::from_double(p.alpha);
  if (!rg || !ra)
    throw config_error("admissible_region_exact: gamma/alpha are not small rationals");
  Ctx<Rational> c{Rational(p.d), *rg, *ra};
  const RequiredArgs req = required_args(id);

  RegionMask m;
  m.condition_set = set_name;
  m.invq_axis.reserve(invq_samples.size());
  for (const auto& r : invq_samples) m.invq_axis.push_back(r.to_double());
  m.s_axis.reserve(s_samples.size());
  for (const auto& r : s_samples) m.s_axis.push_back(r.to_double());
  m.mask.assign(invq_samples.size(), std::vector<bool>(s_samples.size(), false));

  parallel_for(static_cast<Index>(invq_samples.size()), threads, [&](Index i) {
    SetArgs<Rational> a;
    a.invq = invq_samples[static_cast<size_t>(i)];
    if (req.theta) a.theta = extra_args.at("theta");
    if (req.stilde) a.stilde = extra_args.at("stilde");
    if (req.p_pair) {
      a.invp = extra_args.at("invp");
      a.sprime = extra_args.at("sprime");
    }
    for (size_t j = 0; j < s_samples.size(); ++j) {
      a.s = s_samples[j];
      bool ok;
      try {
        ok = eval_report(set_name, id, c, a).overall;
      } catch (const rational_overflow&) {
        // isolated fallback, tolerance-based
        std::map<std::string, Real> args;
        args["invq"] = m.invq_axis[static_cast<size_t>(i)];
        args["s"] = m.s_axis[j];
        if (req.theta) args["theta"] = extra_args.at("theta").to_double();
        if (req.stilde) args["stilde"] = extra_args.at("stilde").to_double();
        if (req.p_pair) {
          args["invp"] = extra_args.at("invp").to_double();
          args["sprime"] = extra_args.at("sprime").to_double();
        }
        ok = check_conditions(set_name, p, args).overall;
      }
      m.mask[static_cast<size_t>(i)][j] = ok;
    }
  });
  return m;
}

std::vector<Rational> rational_axis(const Rational& lo, const Rational& hi, int count) {
  if (count < 1) throw config_error("rational_axis: count must be >= 1");
  std::vector<Rational> axis;
  axis.reserve(static_cast<size_t>(count));
  if (count == 1) {
    axis.push_back(lo);
    return axis;
  }
  const Rational step = (hi - lo) / Rational(count - 1);
  for (int i = 0; i < count; ++i) axis.push_back(lo + Rational(i) * step);
  return axis;
}

BetaResult beta_function(Real x, Real y) {
  BetaResult r;
  if (!(x > 0.0) || !(y > 0.0)) {
    r.divergent = true;
    return r;
  }
  r.value = std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
  return r;
}

DuhamelVariant duhamel_variant_from_string(const std::string& name) {
  if (name == "critical") return DuhamelVariant::critical;
  if (name == "subcritical") return DuhamelVariant::subcritical;
  if (name == "difference") return DuhamelVariant::difference;
  if (name == "critical-norm") return DuhamelVariant::critical_norm;
  if (name == "subcritical-norm") return DuhamelVariant::subcritical_norm;
  throw config_error("unknown duhamel variant: " + name);
}

std::string to_string(DuhamelVariant v) {
  switch (v) {
    case DuhamelVariant::critical: return "critical";
    case DuhamelVariant::subcritical: return "subcritical";
    case DuhamelVariant::difference: return "difference";
    case DuhamelVariant::critical_norm: return "critical-norm";
    case DuhamelVariant::subcritical_norm: return "subcritical-norm";
  }
  return "?";
}

DuhamelConstants duhamel_constants(const Params& p, Real q, Real s, DuhamelVariant v, Real theta,
                                   Real stilde) {
  if (p.alpha == 1.0) throw config_error("duhamel_constants: degenerate alpha = 1");
  if (!(q >= 1.0)) throw config_error("duhamel_constants: q must lie in [1, inf]");
  const Real invq = std::isinf(q) ? 0.0 : 1.0 / q;
  const Real a1 = p.alpha - 1.0;
  const Real sc = (2.0 + p.gamma) / a1 - p.d * invq;
  const Real smoothing_base = 0.5 * p.d * a1 * invq;  // (d/2)(alpha/q - 1/q)

  DuhamelConstants out;
  switch (v) {
    case DuhamelVariant::critical:
      out.t_minus_tau_exponent = smoothing_base + 0.5 * (a1 * s - p.gamma);
      out.tau_exponent = 0.5 * p.alpha * (sc - s);
      break;
    case DuhamelVariant::subcritical:
      out.t_minus_tau_exponent = smoothing_base + 0.5 * (a1 * s - p.gamma);
      out.tau_exponent = 0.5 * p.alpha * (stilde - s);
      break;
    case DuhamelVariant::difference: {
      if (!(theta > 0.0 && theta <= 1.0))
        throw config_error("duhamel_constants: theta must lie in (0,1]");
      const Real s_mix = theta * s + (1.0 - theta) * sc;
      out.t_minus_tau_exponent = smoothing_base + 0.5 * (a1 * s_mix - p.gamma);
      out.tau_exponent = 0.5 * (1.0 + theta * a1) * (sc - s);
      break;
    }
    case DuhamelVariant::critical_norm:
      out.t_minus_tau_exponent = smoothing_base + 0.5 * (p.alpha * s - p.gamma - sc);
      out.tau_exponent = 0.5 * p.alpha * (sc - s);
      break;
    case DuhamelVariant::subcritical_norm:
      out.t_minus_tau_exponent = smoothing_base + 0.5 * (p.alpha * s - p.gamma - stilde);
      out.tau_exponent = 0.5 * p.alpha * (stilde - s);
      break;
  }
  out.beta_x = 1.0 - out.t_minus_tau_exponent;
  out.beta_y = 1.0 - out.tau_exponent;
  out.beta = beta_function(out.beta_x, out.beta_y);
  out.window_ok = out.beta_x > 0.0 && out.beta_y > 0.0;
  return out;
}

std::string describe_condition_set(const std::string& set_name) {
  const SetId id = set_from_name(set_name);
  std::string text = set_name + "\n";
  auto add = [&text](const std::string& line) { text += "  " + line + "\n"; };
  switch (id) {
    case SetId::critical_wellposed:
      add("args: q (or invq), s");
      add("base: -min(2,d) < gamma;  fujita(d,gamma) < alpha");
      add("q:    alpha <= q <= inf;  invq < 2/(d(alpha-1));");
      add("      invq < 2/(d(alpha-1)) + ((d-2)alpha-d-gamma)/(d(alpha-1)^2)");
      add("s:    sc - (d(alpha-1)/alpha)(2/(d(alpha-1)) - invq) <= s");
      add("      s < sc;  s < sc + ((d-2)alpha-d-gamma)/(alpha(alpha-1))");
      break;
    case SetId::kato_stability:
      add("args: q (or invq), s");
      add("base: -min(2,d) < gamma;  fujita(d,gamma) < alpha");
      add("q:    alpha <= q <= inf;  invq < 2/(d(alpha-1));");
      add("      invq < 2/(d(alpha-1)) + ((d-2)alpha-d-gamma)/(d alpha (alpha-1))");
      add("s:    gamma/(alpha-1) <= s;  max(-d invq, sc - 2/alpha) < s;");
      add("      s < sc;  s < sc + ((d-2)alpha-d-gamma)/(alpha(alpha-1))");
      break;
    case SetId::kato_contraction:
      add("args: q (or invq), s, theta in (0,1]  (1/(2+gamma) < theta when d=1)");
      add("base: -min(2,d) < gamma;  fujita(d,gamma) < alpha");
      add("q:    alpha <= q <= inf;  invq < 2/(d(alpha-1));");
      add("      invq < 2/(d(alpha-1)) + theta((d-2)alpha-d-gamma)/(d(alpha-1)(1+theta(alpha-1)))");
      add("s:    sc - (d/theta)(2/(d(alpha-1)) - invq) <= s;  -d invq < s;");
      add("      sc - 2/(1+theta(alpha-1)) < s;  s < sc;");
      add("      s < sc + ((d-2)alpha-d-gamma)/((alpha-1)(1+theta(alpha-1)))");
      add("note: theta = 1 reproduces kato_stability atom by atom");
      break;
    case SetId::critical_norm_stability:
      add("args: q (or invq), s");
      add("same q window as critical_wellposed;");
      add("s:    sc - (d(alpha-1)/alpha)(2/(d(alpha-1)) - invq) <= s < min(sc, sc + gap/(alpha(alpha-1)))");
      break;
    case SetId::subcritical_kato:
      add("args: q (or invq), s, stilde");
      add("base: -min(2,d) < gamma;  fujita < alpha;  stilde < (2+gamma)/(alpha-1)");
      add("q:    alpha <= q <= inf;  invq < 2/(d(alpha-1));");
      add("      invq < (1/alpha)(1 - gamma/(d(alpha-1)));  invq < (1/d)((2+gamma)/(alpha-1) - stilde)");
      add("s:    gamma/(alpha-1) <= s;  max(stilde - 2/alpha, -d invq) < s;");
      add("      s < (d+gamma)/alpha - d invq;  s < sc");
      break;
    case SetId::subcritical_norm_stability:
      add("args: q (or invq), s, stilde");
      add("base: max(-d/alpha, gamma/(alpha-1)) < stilde < (2+gamma)/(alpha-1)");
      add("q:    alpha <= q <= inf;  -stilde/d < invq;");
      add("      invq < (1/alpha)(1 - stilde/d);  invq < (1/d)((2+gamma)/(alpha-1) - stilde)");
      add("s:    (stilde+gamma)/alpha <= s;  s < (d+gamma)/alpha - d invq;  s < stilde");
      break;
    case SetId::subcritical_wellposed:
      add("args: q (or invq), s, stilde");
      add("base: -min(2,d) < gamma;  fujita < alpha;");
      add("      max(-d/alpha, gamma/(alpha-1)) < stilde < (2+gamma)/(alpha-1)");
      add("q:    alpha <= q <= inf;  -stilde/d < invq;  invq < 2/(d(alpha-1));");
      add("      invq < (1/alpha)(1 - stilde/d);  invq < (1/d)((2+gamma)/(alpha-1) - stilde)");
      add("s:    (stilde+gamma)/alpha <= s;  -d invq < s;");
      add("      s < (d+gamma)/alpha - d invq;  s < stilde");
      break;
    case SetId::norm_bootstrap:
      add("args: q (or invq), s, p (or invp), sprime");
      add("finite p:  alpha <= q < inf;  max(-d invq, (gamma - d invq)/alpha) < s < (d+gamma)/alpha - d invq;");
      add("           max(0, -s/d, (gamma - alpha s)/d) < invp... (as 1/p; invp <= invq);");
      add("           -d invp < sprime <= min(s, alpha s - gamma)");
      add("p = inf:   alpha < q <= inf;  max(0, gamma/alpha) <= s < (d+gamma)/alpha - d invq;");
      add("           0 <= sprime <= min(s, alpha s - gamma)");
      break;
    case SetId::heat_smoothing:
      add("args: p (or invp), q (or invq), s, sprime");
      add("1 <= p <= q <= inf;  -d/q < sprime <= s < d(1 - 1/p)");
      add("endpoints: p=1 relaxes the upper bound to s <= 0;");
      add("           q=inf tightens the lower bound to 0 <= sprime;");
      add("           (p,q)=(1,inf) therefore forces s = sprime = 0");
      break;
  }
  return text;
}

}  // namespace hhlab
