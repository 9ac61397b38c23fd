#pragma once

#include "hhlab/common.hpp"
#include "hhlab/rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace hhlab {

// The problem triple of the weighted heat equation
//   du/dt - Laplace(u) = |x|^gamma |u|^(alpha-1) u.
struct Params {
  int d = 3;
  Real gamma = 0.0;
  Real alpha = 3.0;

  // Solver-facing paths need d >= 1 and alpha > 1; raw construction stays
  // permissive so that region exploration can sweep arbitrary alpha.
  void require_solver_valid() const;
};

// alpha_F = 1 + (2+gamma)/d, the global-existence threshold power.
Real fujita_exponent(const Params& p);

// s_c(q) = (2+gamma)/(alpha-1) - d/q, with d/inf = 0.  q in [1, inf].
Real critical_weight(const Params& p, Real q);

enum class Scaling { subcritical, critical, supercritical };
Scaling classify_scaling(const Params& p, Real q, Real s);

enum class Relation { less, less_equal };

struct ConditionItem {
  std::string label;
  Real lhs = 0;
  Relation relation = Relation::less;
  Real rhs = 0;
  bool satisfied = false;
  Real margin = 0;  // rhs - lhs; > 0 means strictly inside
  bool exact = false;
};

struct ConditionReport {
  std::string condition_set;
  std::vector<ConditionItem> items;
  bool overall = false;

  // Conjunction of the items whose label starts with `group:` ("q", "s", ...).
  bool group_satisfied(const std::string& group) const;
};

// Named inequality sets controlling well-posedness and the nonlinear
// estimates.  All are formulated in invq = 1/q so q = inf is the value 0.
//
//   critical_wellposed          main critical-space well-posedness window
//   kato_stability              stability of the Duhamel map in the Kato norm
//   kato_contraction            difference estimate (takes theta in (0,1])
//   critical_norm_stability     Duhamel stability in the critical norm
//   subcritical_kato            Kato-norm estimates, subcritical (takes stilde)
//   subcritical_norm_stability  subcritical-norm stability (takes stilde)
//   subcritical_wellposed       subcritical well-posedness window
//   norm_bootstrap              regularity upgrade between (q,s) and (p,s')
//   heat_smoothing              weighted smoothing estimate window (p,q,s,s')
std::vector<std::string> condition_set_names();
std::string describe_condition_set(const std::string& set_name);

// args keys: "q" (may be inf) or "invq"; "s"; per set also "theta", "stilde",
// "p"/"invp", "sprime".  Missing keys raise config_error.
ConditionReport check_conditions(const std::string& set_name, const Params& p,
                                 const std::map<std::string, Real>& args);

struct RegionMask {
  std::string condition_set;
  std::vector<Real> invq_axis;
  std::vector<Real> s_axis;
  // mask[i][j] = overall at (invq_axis[i], s_axis[j])
  std::vector<std::vector<bool>> mask;
};

RegionMask admissible_region(const std::string& set_name, const Params& p,
                             const std::vector<Real>& invq_samples,
                             const std::vector<Real>& s_samples,
                             const std::map<std::string, Real>& extra_args = {},
                             int threads = 1);

// Exact-rational region fill; zero false boundary cells for rational inputs.
RegionMask admissible_region_exact(const std::string& set_name, const Params& p,
                                   const std::vector<Rational>& invq_samples,
                                   const std::vector<Rational>& s_samples,
                                   const std::map<std::string, Rational>& extra_args = {},
                                   int threads = 1);

// Uniformly spaced rational axis lo + i*(hi-lo)/(count-1).
std::vector<Rational> rational_axis(const Rational& lo, const Rational& hi, int count);

struct BetaResult {
  bool divergent = false;
  Real value = 0;
};

// Euler Beta function; divergent flag outside x > 0, y > 0.
BetaResult beta_function(Real x, Real y);

// Which time-singularity bookkeeping a Duhamel estimate uses.
enum class DuhamelVariant {
  critical,          // Kato-norm stability, critical regime
  subcritical,       // Kato-norm stability, subcritical regime (needs stilde)
  difference,        // contraction/difference estimate (needs theta)
  critical_norm,     // critical-norm stability
  subcritical_norm,  // subcritical-norm stability (needs stilde)
};

DuhamelVariant duhamel_variant_from_string(const std::string& name);
std::string to_string(DuhamelVariant v);

// The integrand of the Duhamel bound carries (t-tau)^{-a} tau^{-b}; its time
// integral is t^{1-a-b} B(1-a, 1-b).  window_ok records convergence.
struct DuhamelConstants {
  Real t_minus_tau_exponent = 0;  // a
  Real tau_exponent = 0;          // b
  Real beta_x = 0;                // 1 - a
  Real beta_y = 0;                // 1 - b
  BetaResult beta;
  bool window_ok = false;
};

DuhamelConstants duhamel_constants(const Params& p, Real q, Real s, DuhamelVariant v,
                                   Real theta = 1.0, Real stilde = 0.0);

}  // namespace hhlab
