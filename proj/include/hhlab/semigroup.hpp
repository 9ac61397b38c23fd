#pragma once

#include "hhlab/field.hpp"
#include "hhlab/trajectory.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace hhlab {

enum class KernelMethod { closed_form_radial, bessel_radial, spectral_grid };

struct KernelPlan {
  KernelMethod method = KernelMethod::closed_form_radial;
  // kernel row treated as resolved when sqrt(4t) >= resolve_factor * local spacing
  Real resolve_factor = 1.5;
  // row band truncated at |r - rho| <= band_sigmas * sqrt(t)
  Real band_sigmas = 13.0;
};

KernelPlan default_plan(const Field& f);

// g_t at |x| = r
Real heat_kernel_value(int d, Real t, Real r);

// e^{t Laplace} f.  Radial fields use the reduced kernel (closed form for
// d in {1,3}, Bessel reduction otherwise); grid fields use spectral
// multiplication by exp(-t |xi|^2).  Throws for t <= 0 and on non-finite
// output (non-integrable input).
Field apply_heat(const Field& f, Real t, const KernelPlan& plan);
Field apply_heat(const Field& f, Real t);

// Reusable radial propagator.  Kernel rows are cached by their scale
// signature: on the dyadic log grid the row for (r_i, t) equals the row for
// (lambda r_i, lambda^2 t) shifted, so repeated geometric time steps hit the
// cache.  Unresolved rows (kernel narrower than the local spacing) fall back
// to sub-stepped explicit finite differences of the radial Laplacian.
class RadialPropagator {
public:
  RadialPropagator(std::shared_ptr<const RadialGeometry> geom, KernelPlan plan);

  void apply(Real t, const Array& in, Array& out) const;
  Array apply(Real t, const Array& in) const;

  const RadialGeometry& geometry() const { return *geom_; }
  const KernelPlan& plan() const { return plan_; }

private:
  struct Row {
    Index rel0 = 0;  // first column relative to the row index
    Array w;
  };
  std::shared_ptr<const Row> row_for(Index i, Real t) const;
  Row build_row(Index i, Real t) const;
  void euler_block(Real t, Index first, Array& values) const;

  std::shared_ptr<const RadialGeometry> geom_;
  KernelPlan plan_;
  // key: (quantized 2i - ppo log2 t, -1) for interior rows (shift-reusable),
  // (same, i) for rows clipped by a domain boundary (exact reuse only)
  mutable std::map<std::pair<long long, Index>, std::shared_ptr<const Row>> cache_;
  mutable std::mutex mutex_;
};

// spectral propagator for uniform grids (d in {1,2})
Array propagate_grid_values(const GridGeometry& g, Real t, const Array& in);

struct SmoothingRate {
  Real fitted_slope = 0;
  Real theory_slope = 0;
  Real constant_estimate = 0;
  Array times;
  Array norms;
};

// Fits the decay of ||e^{t Laplace} f||_{q, s'} against the smoothing-rate
// prediction t^{-(d/2)(1/p - 1/q) - (s - s')/2} ||f||_{p, s}.
SmoothingRate smoothing_rate(const Field& f, Real p, Real s, Real q, Real sprime,
                             const Array& times);

struct MomentProbe {
  bool divergent = false;
  Real value = 0;            // sup over the probe set when finite
  Array probe_radii;         // |x| values probed
  Array probe_values;
  Array divergence_trend;    // inner-cutoff sequence when divergent
};

// sup_x of the integral of (|y|^{-a} |x-y|^b g(x-y))^q over a probe set of x;
// outside the window 0 <= a < d/q, b >= 0 a divergence diagnostic is returned.
MomentProbe kernel_moment(int d, Real a, Real b, Real q);

struct DivergenceReport {
  std::string case_name;
  Array resolutions;  // inner cutoff per refinement level
  Array values;
  bool monotone_growth = false;
  bool bounded_below = false;
};

struct OptimalityProbeSpec {
  int d = 3;
  Real p = 2.0;        // source integrability (borderline cases)
  Real q = 4.0;        // target integrability (liminf case)
  Real sprime = -1.0;  // target weight (liminf case), sprime <= -d/q
  Real log_power = 0.0;  // a/p for the log-corrected borderline datum (0 = a=p... supplied)
  Real t = 0.2;
  Real x0 = 0.5;
};

// case_name in {beyond_upper, upper_borderline, lower_liminf}
DivergenceReport optimality_probe(const std::string& case_name, int levels,
                                  const OptimalityProbeSpec& spec);

}  // namespace hhlab
