#pragma once

#include "hhlab/solver.hpp"

namespace hhlab {

// Degree-0 angular profile with a closed-form sup bound.
//   constant        omega = c everywhere
//   fourier_mode    omega = c (1 + eps cos(k theta))     (d = 2 grids)
//   axis_modulated  omega = c (1 + eps sign(x_1))        (grid surrogate)
struct AngularProfile {
  enum class Kind { constant, fourier_mode, axis_modulated };
  Kind kind = Kind::constant;
  Real c = 1.0;
  Real eps = 0.0;
  int mode = 1;

  Real bound() const;  // sup |omega|
  Real value(Real x, Real y) const;
};

// phi(x) = omega(x) |x|^{-(2+gamma)/(alpha-1)}; requires alpha above the
// fujita exponent so phi is locally integrable
Field profile_data(const AngularProfile& omega, const Params& p,
                   std::shared_ptr<const RadialGeometry> geom);
Field profile_data(const AngularProfile& omega, const Params& p,
                   std::shared_ptr<const GridGeometry> geom);

// u_lambda(t, x) = lambda^{(2+gamma)/(alpha-1)} u(lambda^2 t, lambda x),
// restricted to mesh times t with lambda^2 t also on the mesh.  Radial fields
// require grid-compatible lambda (exact index shift, edges dropped); grid
// fields are dilated through their trigonometric interpolant.
Trajectory rescale_solution(const Trajectory& u, Real lambda, const Params& p);

struct DeviationReport {
  std::vector<Real> lambdas;
  std::vector<Real> deviations;  // relative, in the Kato norm on common times
};

DeviationReport self_similarity_deviation(const Trajectory& u, const std::vector<Real>& lambdas,
                                          const Params& p, const NormSpec& kspec, Real ref_s);

// Psi(y) = t^{(2+gamma)/(2(alpha-1))} u(t, y sqrt(t)); t-independent exactly
// when u is self-similar
Field extract_profile(const Trajectory& u, Real t, const Params& p);

// relative distance between the similarity profiles at two mesh times
Real profile_deviation(const Trajectory& u, Real t1, Real t2, const Params& p,
                       const NormSpec& spec);

struct TraceResiduals {
  Array times;                      // earliest resolved times used
  std::vector<Array> residuals;     // residuals[j][k] = |<u(t_k) - phi, chi_j>|
};

// distributional initial-trace check against compactly supported test
// functions whose support avoids the origin singularity
TraceResiduals initial_trace_check(const Trajectory& u, const Field& phi,
                                   const std::vector<TestFunctionSpec>& tests,
                                   Index n_times = 12);

}  // namespace hhlab
