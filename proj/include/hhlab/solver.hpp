#pragma once

#include "hhlab/exponents.hpp"
#include "hhlab/semigroup.hpp"
#include "hhlab/trajectory.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace hhlab {

// Geometric time mesh toward 0: nodes T * ratio^{-(m-1)}, ..., T plus the
// t = 0 node.  Consecutive-node ratios are dyadic powers so that parabolic
// rescaling by grid-compatible lambda is an exact node shift.
struct TimeMeshSpec {
  Index nodes = 256;
  Real ratio = 1.0905077326652577;  // 2^(1/8)
};

Array geometric_mesh(Real T, const TimeMeshSpec& spec);

struct SolveSpec {
  Params params;
  Real q = 6.0;
  Real s = 0.25;
  Regime regime = Regime::critical;
  Real stilde = 0.0;  // reference weight order in the subcritical regime
  Real theta = 1.0;   // difference-estimate exponent (diagnostics only)

  TimeMeshSpec tmesh;
  Real picard_tol = 1e-8;
  int max_iterations = 40;

  enum class RhoPolicy { measured, prescribed };
  RhoPolicy rho_policy = RhoPolicy::measured;
  Real rho_prescribed = 0.0;

  // Subcritical window choice: `formula` starts from the data-norm bound
  // T ~ rho^{-2/(sc - stilde)}; `measured` halves down from the horizon until
  // the measured contraction gate holds (used by the continuation loop, where
  // the formula's conservative constants would collapse the steps).
  enum class WindowPolicy { formula, measured };
  WindowPolicy window_policy = WindowPolicy::formula;

  Real horizon = 1.0;         // requested window / continuation target
  bool fixed_window = false;  // take the window = horizon without shrinking
  Real constant_safety = 2.0; // multiplier on the measured smoothing constant

  Real reference_order() const;  // s_c(q) or stilde
  NormSpec kato_spec() const { return {q, s}; }
  NormSpec data_spec() const { return {q, reference_order()}; }
};

struct SolveConstants {
  Real smoothing_const = 0;  // measured constant of the Duhamel smoothing pair
  Real beta_stability = 0;
  Real beta_difference = 0;
  Real C0 = 0;
  Real C1 = 0;
  Real rho = 0;
  Real M = 0;
  Real gate = 0;  // smallness threshold on M (critical) or on T (subcritical)
  bool gate_ok = false;
};

enum class SolveVerdict { converged, extended, blowup, diverged };
std::string to_string(SolveVerdict v);

struct SolveOutcome {
  Trajectory trajectory;
  SolveVerdict verdict = SolveVerdict::diverged;
  Real window = 0;     // admitted window of the (last) local solve
  Real free_kato = 0;  // ||e^{t Lap} u0|| in the regime norm on the window
  Real residual = 0;   // final successive-iterate distance (bounds the fixed-point residual)
  std::vector<Real> kato_history;
  std::vector<Real> distances;
  std::vector<Real> contraction_ratios;
  SolveConstants constants;

  // continuation diagnostics (extend_maximal)
  Array sample_times;
  Array sample_norms;  // ||u(t)||_{q, reference order}
  std::vector<Real> restart_times;
  Real maximal_time = 0;          // T_m estimate on blow-up, else horizon reached
  Real blowup_rate_exponent = 0;  // fitted p in ||u(t)|| ~ (Tm - t)^{-p}
};

// |x|^gamma |f|^{alpha-1} f at the field's samples
Field nonlinear_term(const Field& f, const Params& p);

// integral over [0, t] of e^{(t-tau) Lap} forcing(tau) d tau on the forcing's
// mesh.  Per-panel product rule: the envelope (t-tau)^{-a} tau^{-b} is
// integrated exactly against a linear interpolant of the remaining factor.
Field duhamel_integral(const Trajectory& forcing, Real t, Real a = 0.0, Real b = 0.0);

// one Picard update  u -> e^{t Lap} u0 + N(u)  on u's mesh
Trajectory picard_step(const Trajectory& u, const Field& u0, const SolveSpec& spec);

SolveOutcome solve_local(const Field& u0, const SolveSpec& spec);

// repeated local solves restarting from the window end until the horizon is
// reached or the admitted windows collapse (blow-up)
SolveOutcome extend_maximal(const Field& u0, const SolveSpec& spec, Real horizon);

struct LipschitzResult {
  Real ratio = 0;  // ||u - v||_{combined} / ||u0 - v0||_{q, ref}
  bool zero_denominator = false;
  Real window = 0;
};

LipschitzResult flow_lipschitz(const Field& u0, const Field& v0, const SolveSpec& spec);

// Space-time test function a(t) chi(|x|) with closed-form derivatives;
// chi is a C^2 ball bump or an annular plateau avoiding the origin.
struct TestFunctionSpec {
  enum class Kind { ball, annulus };
  Kind kind = Kind::ball;
  Real radius = 4.0;        // outer support radius
  Real inner_radius = 1.0;  // annulus only
  Real time_rate = 0.5;     // a(t) = exp(-time_rate t)
};

struct TestFunction {
  explicit TestFunction(const TestFunctionSpec& spec) : spec_(spec) {}
  Real value(Real t, Real r) const;
  Real dt(Real t, Real r) const;
  Real laplacian(int d, Real t, Real r) const;  // spatial Laplacian
  const TestFunctionSpec& spec() const { return spec_; }

private:
  TestFunctionSpec spec_;
};

// |LHS - RHS| of the distributional identity on [0, T'], normalized by the
// largest participating term.  include_nonlinearity = false checks a linear
// (heat) trajectory, e.g. a manufactured solution.
Real weak_residual(const Trajectory& u, const Field& u0, const Params& p,
                   const TestFunctionSpec& test, Real t_end, bool include_nonlinearity = true);

// measured constant of || e^{t Lap} f ||_{q, s_tgt} <= C t^-theta || f ||_{p, s_src},
// taken as a max over a canonical probe family; cached per exponent tuple
Real measured_smoothing_constant(int d, Real p, Real s_src, Real q, Real s_tgt);

}  // namespace hhlab
