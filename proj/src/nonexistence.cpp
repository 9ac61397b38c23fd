#include "hhlab/nonexistence.hpp"

#include <cmath>

namespace hhlab {

namespace {

struct Smoothstep {
  Real v = 0, d1 = 0, d2 = 0;
};

// quintic smoothstep on [0,1] with vanishing first/second derivatives at both ends
Smoothstep smoothstep(Real y) {
  Smoothstep s;
  if (y <= 0) return s;
  if (y >= 1) {
    s.v = 1;
    return s;
  }
  s.v = y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
  s.d1 = y * y * (30.0 + y * (-60.0 + 30.0 * y));
  s.d2 = y * (60.0 + y * (-180.0 + 120.0 * y));
  return s;
}

// plateau profile: 1 on [0, 1/2], quintic transition to 0 at 1
Smoothstep plateau(Real x) {
  // value as a function of x; chain rule through y = 2(1-x)
  Smoothstep inner = smoothstep(2.0 * (1.0 - x));
  Smoothstep s;
  s.v = inner.v;
  s.d1 = -2.0 * inner.d1;
  s.d2 = 4.0 * inner.d2;
  return s;
}

}  // namespace

CutoffValue cutoff_value(const CutoffSpec& spec, int d, Real T, Real t, Real r) {
  if (!(T > 0)) throw config_error("cutoff_value: T must be positive");
  if (spec.l < 3) throw config_error("cutoff_value: l must be >= 3");
  const int l = spec.l;
  const Real tau = t / T;
  const Real rho = r / std::sqrt(T);
  const Smoothstep eta = plateau(tau);
  const Smoothstep phi = plateau(rho);

  CutoffValue out;
  if (eta.v <= 0 || phi.v <= 0) return out;
  const Real eta_l = std::pow(eta.v, l);
  const Real phi_l = std::pow(phi.v, l);
  out.psi_l = eta_l * phi_l;
  // d/dt (eta(t/T)^l) = (l/T) eta^{l-1} eta'
  out.dt_psi_l = (l / T) * std::pow(eta.v, l - 1) * eta.d1 * phi_l;
  // Lap_x (phi(|x|/sqrt T)^l) = (1/T)[ (phi^l)'' + (d-1)/rho (phi^l)' ]
  const Real dphi_l = l * std::pow(phi.v, l - 1) * phi.d1;
  const Real ddphi_l =
      l * (l - 1) * std::pow(phi.v, l - 2) * phi.d1 * phi.d1 + l * std::pow(phi.v, l - 1) * phi.d2;
  out.lap_psi_l = eta_l * (ddphi_l + (d - 1) * dphi_l / rho) / T;
  // ratios against psi^{l-1} / T; closed form, T-independent
  const Real psi_lm1 = std::pow(eta.v, l - 1) * std::pow(phi.v, l - 1);
  out.dt_ratio = std::abs(out.dt_psi_l) * T / psi_lm1;
  out.lap_ratio = std::abs(out.lap_psi_l) * T / psi_lm1;
  return out;
}

Field supercritical_data(Real beta, std::shared_ptr<const RadialGeometry> geom) {
  if (!geom) throw config_error("supercritical_data: null geometry");
  if (!(beta > 0.0 && beta < geom->d))
    throw config_error("supercritical_data: beta must lie in (0, d) for local integrability");
  SampleSpec spec;
  spec.family = "homogeneous_inner";
  spec.exponent = beta;
  spec.radius = 1.0;
  return sample_field(spec, std::move(geom));
}

WeakFunctionals weak_functionals(const Field& u0, Real T, const CutoffSpec& spec,
                                 const Params& p) {
  if (!(T > 0 && T < 1)) throw config_error("weak_functionals: T must lie in (0, 1)");
  p.require_solver_valid();
  const auto& g = u0.radial_geometry();
  WeakFunctionals out;
  out.gamma_window_ok = p.alpha > 1.0 + p.gamma / p.d;
  out.K_T_exponent = 1.0 - p.gamma / (2.0 * (p.alpha - 1.0)) + 0.5 * p.d;
  out.rhs_bound_exponent = -(2.0 + p.gamma) / (2.0 * (p.alpha - 1.0)) + 0.5 * p.d;

  // pairing of the data against phi^l(x / sqrt T)
  Array phivals(g.n);
  for (Index i = 0; i < g.n; ++i)
    phivals[i] = std::pow(plateau(g.radii[i] / std::sqrt(T)).v, spec.l);
  out.lhs_pairing = integrate_product(u0, phivals);

  // K(T) = T int_{|x| < sqrt T} |x|^{-gamma/(alpha-1)} dx, quadrature and closed form
  const Real w = -p.gamma / (p.alpha - 1.0);
  const Real sqT = std::sqrt(T);
  Array kern = Array::Zero(g.n);
  for (Index i = 0; i < g.n; ++i)
    if (g.radii[i] < sqT) kern[i] = std::pow(g.radii[i], w);
  out.K_T = T * integrate(u0.with_values(std::move(kern)));
  const Real expo = p.d + w;
  if (out.gamma_window_ok) {
    const Real c = sphere_surface(p.d) / expo;
    out.K_T_closed_form = c * std::pow(T, out.K_T_exponent);
  }
  return out;
}

ContradictionScan contradiction_scan(const Params& p, Real beta, Real q, Real s,
                                     const Array& T_list, const CutoffSpec& spec,
                                     std::shared_ptr<const RadialGeometry> geom) {
  p.require_solver_valid();
  if (T_list.size() < 3) throw config_error("contradiction_scan: need >= 3 window values");
  for (Index k = 0; k < T_list.size(); ++k)
    if (!(T_list[k] > 0 && T_list[k] < 1))
      throw config_error("contradiction_scan: T values must lie in (0, 1)");
  if (spec.l <= 2.0 * p.alpha / (p.alpha - 1.0))
    throw config_error("contradiction_scan: cutoff power l must exceed 2 alpha/(alpha-1)");

  ContradictionScan out;
  out.beta = beta;
  const Real invq = std::isinf(q) ? 0.0 : 1.0 / q;
  const Real sc = critical_weight(p, q);
  const Real beta_low = (2.0 + p.gamma) / (p.alpha - 1.0);
  const Real beta_high = std::min(s + p.d * invq, static_cast<Real>(p.d));

  // the admissible beta window is nonempty exactly when s > sc and alpha > fujita
  if (!(s > sc) || !(p.alpha > fujita_exponent(p))) {
    out.feasible = false;
    out.verdict = "consistent-with-well-posedness (no supercritical beta window)";
    return out;
  }
  if (!(beta < beta_high))
    throw config_error("contradiction_scan: beta outside the data-membership window");
  out.feasible = true;
  out.expected_slope = 0.5 * beta - 0.5 * (2.0 + p.gamma) / (p.alpha - 1.0);

  Field u0 = supercritical_data(beta, std::move(geom));
  out.T_values = T_list;
  out.lhs_values.resize(T_list.size());
  out.bound_values.resize(T_list.size());
  out.ratio_values.resize(T_list.size());
  for (Index k = 0; k < T_list.size(); ++k) {
    const auto wf = weak_functionals(u0, T_list[k], spec, p);
    out.lhs_values[k] = wf.lhs_pairing;
    out.bound_values[k] = std::pow(T_list[k], wf.rhs_bound_exponent);
    out.ratio_values[k] = out.bound_values[k] / out.lhs_values[k];
  }
  out.fitted_slope = fit_slope(out.T_values.log(), out.ratio_values.log());
  out.verdict = out.fitted_slope > 1e-9 && beta > beta_low
                    ? "nonexistence-mechanism confirmed"
                    : "no contradiction";
  return out;
}

Real cutoff_pairing(const Trajectory& u, const CutoffSpec& spec, const Params& p, Real T) {
  const Field& proto = u.slice(0);
  const Index n = proto.size();
  auto radius_of = [&](Index i) {
    return proto.kind() == FieldKind::radial ? proto.radial_geometry().radii[i]
                                             : proto.grid_geometry().radius_at(i);
  };
  Real acc = 0, prev = 0;
  bool first = true;
  Real prev_t = 0;
  for (Index k = 0; k < u.size(); ++k) {
    const Real t = u.times()[k];
    if (t > T) break;
    Array w(n);
    for (Index i = 0; i < n; ++i)
      w[i] = cutoff_value(spec, proto.dim(), T, t, radius_of(i)).psi_l;
    const Real val = integrate_product(nonlinear_term(u.slice(k), p), w);
    if (!first) acc += 0.5 * (t - prev_t) * (val + prev);
    prev = val;
    prev_t = t;
    first = false;
  }
  return acc;
}

}  // namespace hhlab
