#pragma once

#include "hhlab/solver.hpp"

namespace hhlab {

// Rescaled space-time cutoff psi_T(t,x)^l = eta(t/T)^l phi(|x|/sqrt(T))^l with
// quintic-smoothstep transitions (plateau on [0,1/2], zero beyond 1), so all
// derivatives are closed form.
struct CutoffSpec {
  int l = 7;  // power; scans require l > 2 alpha / (alpha - 1)
};

struct CutoffValue {
  Real psi_l = 0;
  Real dt_psi_l = 0;
  Real lap_psi_l = 0;
  // |d_t psi^l| T / psi^{l-1} and |Lap psi^l| T / psi^{l-1}; T-independent
  Real dt_ratio = 0;
  Real lap_ratio = 0;
};

CutoffValue cutoff_value(const CutoffSpec& spec, int d, Real T, Real t, Real r);

// u0 = |x|^{-beta} on |x| <= 1; rejected unless 0 < beta < d
Field supercritical_data(Real beta, std::shared_ptr<const RadialGeometry> geom);

struct WeakFunctionals {
  Real lhs_pairing = 0;          // integral of u0 phi^l(x / sqrt T)
  Real K_T = 0;                  // quadrature value
  Real K_T_closed_form = 0;      // C T^{1 - gamma/(2(alpha-1)) + d/2}
  Real K_T_exponent = 0;         // 1 - gamma/(2(alpha-1)) + d/2
  Real rhs_bound_exponent = 0;   // -(2+gamma)/(2(alpha-1)) + d/2
  bool gamma_window_ok = true;   // alpha > 1 + gamma/d
};

WeakFunctionals weak_functionals(const Field& u0, Real T, const CutoffSpec& spec,
                                 const Params& p);

struct ContradictionScan {
  bool feasible = false;
  std::string verdict;
  Real beta = 0;
  Array T_values;
  Array lhs_values;
  Array bound_values;  // T^{rhs_bound_exponent}
  Array ratio_values;  // bound / lhs, the quantity pinned between 0 < C and -> 0
  Real fitted_slope = 0;
  Real expected_slope = 0;  // beta/2 - (2+gamma)/(2(alpha-1))
};

// Scans the scaling mechanism of the supercritical nonexistence argument on
// the initial-data pairing alone; it does not simulate a hypothetical
// positive solution.
ContradictionScan contradiction_scan(const Params& p, Real beta, Real q, Real s,
                                     const Array& T_list, const CutoffSpec& spec,
                                     std::shared_ptr<const RadialGeometry> geom);

// the space-time pairing of a supplied trajectory with |x|^gamma |u|^{alpha-1} u
// against psi_T^l (shared plumbing with the weak-form checks; diagnostic only)
Real cutoff_pairing(const Trajectory& u, const CutoffSpec& spec, const Params& p, Real T);

}  // namespace hhlab
