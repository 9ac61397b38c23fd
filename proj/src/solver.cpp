#include "hhlab/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace hhlab {

Array geometric_mesh(Real T, const TimeMeshSpec& spec) {
  if (!(T > 0)) throw config_error("geometric_mesh: window must be positive");
  if (spec.nodes < 8) throw config_error("geometric_mesh: need >= 8 nodes");
  if (!(spec.ratio > 1.0)) throw config_error("geometric_mesh: ratio must exceed 1");
  Array t(spec.nodes + 1);
  t[0] = 0.0;
  for (Index k = 0; k < spec.nodes; ++k)
    t[k + 1] = T * std::pow(spec.ratio, -static_cast<Real>(spec.nodes - 1 - k));
  return t;
}

Real SolveSpec::reference_order() const {
  return regime == Regime::critical ? critical_weight(params, q) : stilde;
}

std::string to_string(SolveVerdict v) {
  switch (v) {
    case SolveVerdict::converged: return "converged";
    case SolveVerdict::extended: return "extended";
    case SolveVerdict::blowup: return "blowup";
    case SolveVerdict::diverged: return "diverged";
  }
  return "?";
}

Field nonlinear_term(const Field& f, const Params& p) {
  Array out(f.size());
  const Array& v = f.values();
  if (f.kind() == FieldKind::radial) {
    const auto& g = f.radial_geometry();
    out = g.radii.pow(p.gamma) * v.abs().pow(p.alpha - 1.0) * v;
  } else {
    const auto& g = f.grid_geometry();
    for (Index i = 0; i < f.size(); ++i)
      out[i] = std::pow(g.radius_at(i), p.gamma) * std::pow(std::abs(v[i]), p.alpha - 1.0) * v[i];
  }
  return f.with_values(std::move(out));
}

namespace {

// Kind-agnostic heat propagation.  Radial propagators are shared through a
// registry keyed by the geometry instance so that every solve on the same
// grid reuses one kernel-row cache.
class Propagation {
public:
  explicit Propagation(const Field& proto) {
    if (proto.kind() == FieldKind::radial) {
      static std::map<const RadialGeometry*, std::weak_ptr<RadialPropagator>> registry;
      static std::mutex mutex;
      std::lock_guard<std::mutex> lock(mutex);
      const RadialGeometry* key = proto.radial_geometry_ptr().get();
      radial_ = registry[key].lock();
      if (!radial_) {
        radial_ = std::make_shared<RadialPropagator>(proto.radial_geometry_ptr(),
                                                     default_plan(proto));
        registry[key] = radial_;
      }
    } else {
      grid_ = proto.grid_geometry_ptr();
    }
  }
  Array apply(Real t, const Array& v) const {
    if (radial_) return radial_->apply(t, v);
    return propagate_grid_values(*grid_, t, v);
  }

private:
  std::shared_ptr<RadialPropagator> radial_;
  std::shared_ptr<const GridGeometry> grid_;
};

Real envelope(Real t_final, Real tau, Real a, Real b) {
  Real phi = 1.0;
  if (a != 0.0) {
    const Real gap = t_final - tau;
    if (gap <= 0.0 && a > 0.0) return inf;
    phi *= std::pow(gap, -a);
  }
  if (b != 0.0) {
    if (tau <= 0.0 && b > 0.0) return inf;
    phi *= std::pow(tau, -b);
  }
  return phi;
}

// integral over [x0, x1] of (t-tau)^{-a} tau^{-b} * psi(tau) with psi smooth;
// endpoint power singularities removed by substitution
Real envelope_moment(Real t_final, Real x0, Real x1, Real a, Real b,
                     const std::function<Real(Real)>& psi) {
  Array nodes, weights;
  const bool left_singular = (b > 0.0) && (x0 <= 0.0);
  const bool right_singular = (a > 0.0) && (x1 >= t_final * (1.0 - 1e-14));
  if (left_singular && right_singular) {
    const Real mid = 0.5 * (x0 + x1);
    return envelope_moment(t_final, x0, mid, a, b, psi) +
           envelope_moment(t_final, mid, x1, a, b, psi);
  }
  if (left_singular) {
    if (b >= 1.0) throw quadrature_overflow("duhamel: tau singularity not integrable");
    gauss_legendre(16, 0.0, 1.0, nodes, weights);
    const Real c = std::pow(x1, 1.0 - b) / (1.0 - b);
    Real sum = 0;
    for (Index k = 0; k < nodes.size(); ++k) {
      const Real tau = x1 * std::pow(nodes[k], 1.0 / (1.0 - b));
      sum += weights[k] * c * std::pow(t_final - tau, -a) * psi(tau);
    }
    return sum;
  }
  if (right_singular) {
    if (a >= 1.0) throw quadrature_overflow("duhamel: (t-tau) singularity not integrable");
    gauss_legendre(16, 0.0, 1.0, nodes, weights);
    const Real width = x1 - x0;
    const Real c = std::pow(width, 1.0 - a) / (1.0 - a);
    Real sum = 0;
    for (Index k = 0; k < nodes.size(); ++k) {
      const Real tau = x1 - width * std::pow(nodes[k], 1.0 / (1.0 - a));
      sum += weights[k] * c * std::pow(tau, -b) * psi(tau);
    }
    return sum;
  }
  gauss_legendre(16, x0, x1, nodes, weights);
  Real sum = 0;
  for (Index k = 0; k < nodes.size(); ++k)
    sum += weights[k] * envelope(t_final, nodes[k], a, b) * psi(nodes[k]);
  return sum;
}

}  // namespace

Field duhamel_integral(const Trajectory& forcing, Real t, Real a, Real b) {
  if (t < 0) throw config_error("duhamel_integral: negative time");
  const Array& times = forcing.times();
  if (times[0] != 0.0) throw config_error("duhamel_integral: forcing must start at t = 0");
  const Field& proto = forcing.slice(0);
  if (t == 0.0) return proto.with_values(Array::Zero(proto.size()));
  Index K = -1;
  for (Index k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - t) <= 1e-9 * std::max(1.0, t)) K = k;
  if (K < 0) throw config_error("duhamel_integral: t must be a node of the forcing mesh");

  Propagation prop(proto);
  Array acc = Array::Zero(proto.size());
  for (Index j = 0; j + 1 <= K; ++j) {
    const Real x0 = times[j];
    const Real x1 = times[j + 1];
    const Real dx = x1 - x0;
    const Real m1 =
        envelope_moment(t, x0, x1, a, b, [&](Real tau) { return (x1 - tau) / dx; });
    const Real m2 =
        envelope_moment(t, x0, x1, a, b, [&](Real tau) { return (tau - x0) / dx; });
    const Real phi0 = envelope(t, x0, a, b);
    const Real phi1 = envelope(t, x1, a, b);
    const Real A = std::isinf(phi0) ? 0.0 : m1 / phi0;
    const Real B = std::isinf(phi1) ? 0.0 : m2 / phi1;
    if (A != 0.0) acc += A * prop.apply(t - x0, forcing.slice(j).values());
    if (B != 0.0) acc += B * prop.apply(t - x1, forcing.slice(j + 1).values());
  }
  if (!acc.isFinite().all()) throw quadrature_overflow("duhamel_integral: non-finite result");
  return proto.with_values(std::move(acc));
}

namespace {

// One local mild solve: free evolution plus the Duhamel recursion on a
// geometric mesh (one propagator application per step).
class Engine {
public:
  Engine(const Field& u0, const SolveSpec& spec, Array times)
      : u0_(u0), spec_(spec), times_(std::move(times)), prop_(u0) {
    free_.reserve(static_cast<size_t>(times_.size()));
    free_.push_back(u0.values());
    for (Index k = 1; k < times_.size(); ++k)
      free_.push_back(prop_.apply(times_[k] - times_[k - 1], free_.back()));
  }

  const Array& times() const { return times_; }

  Trajectory free_trajectory() const {
    std::vector<Field> slices;
    slices.reserve(free_.size());
    for (const auto& v : free_) slices.push_back(u0_.with_values(v));
    return Trajectory(times_, std::move(slices));
  }

  Trajectory apply_map(const Trajectory& u) const {
    std::vector<Array> G;
    G.reserve(static_cast<size_t>(u.size()));
    for (Index k = 0; k < u.size(); ++k)
      G.push_back(nonlinear_term(u.slice(k), spec_.params).values());
    std::vector<Field> out;
    out.reserve(G.size());
    out.push_back(u0_.with_values(free_[0]));
    Array I = Array::Zero(u0_.size());
    for (Index k = 1; k < times_.size(); ++k) {
      const Real dt = times_[k] - times_[k - 1];
      I = prop_.apply(dt, I + (0.5 * dt) * G[static_cast<size_t>(k - 1)]) +
          (0.5 * dt) * G[static_cast<size_t>(k)];
      out.push_back(u0_.with_values(free_[static_cast<size_t>(k)] + I));
    }
    return Trajectory(times_, std::move(out));
  }

private:
  Field u0_;
  const SolveSpec& spec_;
  Array times_;
  Propagation prop_;
  std::vector<Array> free_;
};

void validate_admissibility(const SolveSpec& spec) {
  spec.params.require_solver_valid();
  std::map<std::string, Real> args{{"q", spec.q}, {"s", spec.s}};
  const char* set = "critical_wellposed";
  if (spec.regime == Regime::subcritical) {
    set = "subcritical_wellposed";
    args["stilde"] = spec.stilde;
  }
  auto rep = check_conditions(set, spec.params, args);
  if (!rep.overall) {
    std::ostringstream msg;
    msg << "solve: admissibility fails for " << set << ":";
    for (const auto& item : rep.items)
      if (!item.satisfied) msg << "  [" << item.label << "]";
    throw config_error(msg.str());
  }
}

SolveConstants derive_constants(const SolveSpec& spec) {
  const Params& p = spec.params;
  const Real alpha = p.alpha;
  auto B0 = duhamel_constants(p, spec.q, spec.s,
                              spec.regime == Regime::critical ? DuhamelVariant::critical
                                                              : DuhamelVariant::subcritical,
                              1.0, spec.stilde);
  auto B1 = spec.regime == Regime::critical
                ? duhamel_constants(p, spec.q, spec.s, DuhamelVariant::difference, 1.0)
                : B0;  // the subcritical difference estimate carries the same Beta
  if (!B0.window_ok || !B1.window_ok)
    throw config_error("solve: Duhamel Beta window violated for the chosen (q, s)");

  const Real p_src = std::isinf(spec.q) ? inf : spec.q / alpha;
  const Real s_src = alpha * spec.s - p.gamma;
  const Real csm = measured_smoothing_constant(p.d, p_src, s_src, spec.q, spec.s);

  SolveConstants c;
  c.smoothing_const = csm;
  c.beta_stability = B0.beta.value;
  c.beta_difference = B1.beta.value;
  c.C0 = spec.constant_safety * csm * B0.beta.value;
  c.C1 = spec.constant_safety * std::max(1.0, std::pow(2.0, alpha - 2.0)) * alpha * csm *
         B1.beta.value;
  return c;
}

}  // namespace

Trajectory picard_step(const Trajectory& u, const Field& u0, const SolveSpec& spec) {
  Engine engine(u0, spec, u.times());
  return engine.apply_map(u);
}

SolveOutcome solve_local(const Field& u0, const SolveSpec& spec) {
  validate_admissibility(spec);
  const Real alpha = spec.params.alpha;
  const Real ref = spec.reference_order();
  const NormSpec kspec = spec.kato_spec();
  if (!(spec.s < ref))
    throw config_error("solve: the Kato weight s must lie below the reference order");

  SolveOutcome out;
  out.constants = derive_constants(spec);
  SolveConstants& C = out.constants;

  const Real sc = critical_weight(spec.params, spec.q);
  const Real t_power = spec.regime == Regime::subcritical
                           ? 0.5 * (alpha - 1.0) * (sc - spec.stilde)
                           : 0.0;

  Real T = spec.horizon;
  if (spec.regime == Regime::subcritical && !spec.fixed_window) {
    // window from the existence bookkeeping: T^{power} M^{alpha-1} smallness
    // with M = 2 rho and rho bounded through the data norm
    const Real csm_data =
        measured_smoothing_constant(spec.params.d, spec.q, spec.stilde, spec.q, spec.s);
    const Real rho_bound = spec.rho_policy == SolveSpec::RhoPolicy::prescribed
                               ? spec.rho_prescribed
                               : csm_data * weighted_norm(u0, spec.data_spec());
    if (rho_bound > 0.0) {
      const Real e = -2.0 / ((alpha - 1.0) * (sc - spec.stilde));
      const Real t_gate = std::min(std::pow(std::pow(2.0, alpha) * C.C0, e),
                                   std::pow(std::pow(2.0, alpha) * C.C1, e)) *
                          std::pow(rho_bound, -2.0 / (sc - spec.stilde));
      C.gate = t_gate;
      if (spec.window_policy == SolveSpec::WindowPolicy::formula)
        T = std::min(spec.horizon, 0.9 * t_gate);
    }
  }

  std::unique_ptr<Engine> engine;
  Trajectory free;
  Real rho = 0;
  bool gate_ok = false;
  for (int attempt = 0; attempt < 120; ++attempt) {
    engine = std::make_unique<Engine>(u0, spec, geometric_mesh(T, spec.tmesh));
    free = engine->free_trajectory();
    rho = spec.rho_policy == SolveSpec::RhoPolicy::prescribed
              ? spec.rho_prescribed
              : kato_norm(free, kspec, ref, spec.regime);
    const Real M = 2.0 * rho;
    if (spec.regime == Regime::critical) {
      C.gate = std::min(std::pow(2.0 * C.C0, -1.0 / (alpha - 1.0)),
                        std::pow(2.0 * C.C1, -1.0 / (alpha - 1.0)));
      gate_ok = M < C.gate;
    } else {
      gate_ok = 2.0 * C.C1 * std::pow(T, t_power) * std::pow(M, alpha - 1.0) < 1.0 &&
                C.C0 * std::pow(T, t_power) * std::pow(M, alpha - 1.0) <= 0.5;
    }
    if (gate_ok || spec.fixed_window) break;
    if (rho == 0.0) {  // zero data: any window works
      gate_ok = true;
      break;
    }
    T *= spec.regime == Regime::critical ? 0.25 : 0.5;
    if (T < 1e-8 * spec.horizon) break;
  }
  C.rho = rho;
  C.M = 2.0 * rho;
  C.gate_ok = gate_ok;
  out.window = T;
  out.free_kato = kato_norm(free, kspec, ref, spec.regime);

  if (!gate_ok && !spec.fixed_window) {
    // smallness cannot be certified on any window (scale-invariant large data)
    out.trajectory = free;
    out.verdict = SolveVerdict::diverged;
    out.maximal_time = 0;
    return out;
  }

  // Picard iteration from the free evolution
  Trajectory u = free;
  out.kato_history.push_back(kato_norm(u, kspec, ref, spec.regime));
  const Real guard = 1e6 * std::max(1.0, out.kato_history.front());
  int growth_streak = 0;
  for (int n = 0; n < spec.max_iterations; ++n) {
    Trajectory next;
    Real dist = 0, knorm = 0;
    try {
      next = engine->apply_map(u);
      dist = kato_distance(next, u, kspec, ref);
      knorm = kato_norm(next, kspec, ref, spec.regime);
    } catch (const quadrature_overflow&) {
      out.trajectory = std::move(u);
      out.verdict = SolveVerdict::diverged;
      return out;
    } catch (const std::invalid_argument&) {
      out.trajectory = std::move(u);
      out.verdict = SolveVerdict::diverged;
      return out;
    }
    out.distances.push_back(dist);
    out.kato_history.push_back(knorm);
    if (out.distances.size() >= 2) {
      const Real prev = out.distances[out.distances.size() - 2];
      if (prev > 0.0) out.contraction_ratios.push_back(dist / prev);
      growth_streak = dist > prev ? growth_streak + 1 : 0;
    }
    u = std::move(next);
    const bool exploding = !std::isfinite(knorm) || knorm > guard ||
                           (growth_streak >= 3 && dist > 8.0 * out.distances.front());
    if (exploding) {
      out.trajectory = std::move(u);
      out.verdict = SolveVerdict::diverged;
      out.residual = dist;
      return out;
    }
    if (dist <= spec.picard_tol) {
      out.trajectory = std::move(u);
      out.verdict = SolveVerdict::converged;
      out.residual = dist;
      out.maximal_time = T;
      return out;
    }
  }
  out.trajectory = std::move(u);
  out.verdict = SolveVerdict::diverged;
  out.residual = out.distances.empty() ? inf : out.distances.back();
  return out;
}

SolveOutcome extend_maximal(const Field& u0, const SolveSpec& spec, Real horizon) {
  if (!(horizon > 0)) throw config_error("extend_maximal: horizon must be positive");
  const NormSpec data_spec = spec.data_spec();
  SolveOutcome run;
  std::vector<Real> ts, ns;
  Field current = u0;
  Real t_cur = 0.0;
  const Real initial_norm = weighted_norm(u0, data_spec);
  bool blew_up = false;

  Real window_hint = horizon;
  for (int window_count = 0; window_count < 400; ++window_count) {
    // adaptive window: halve until the local Picard iteration converges;
    // acceptance is the observed contraction, not the a-priori gate
    Real t_try = std::min(horizon - t_cur, 4.0 * window_hint);
    SolveOutcome piece;
    bool collapsed = false;
    for (;;) {
      SolveSpec local = spec;
      local.horizon = t_try;
      local.fixed_window = true;
      piece = solve_local(current, local);
      if (piece.verdict == SolveVerdict::converged) break;
      t_try *= 0.5;
      if (t_try < 1e-8 * horizon) {
        collapsed = true;
        break;
      }
    }
    run.constants = piece.constants;
    run.kato_history = piece.kato_history;
    run.distances = piece.distances;
    run.contraction_ratios = piece.contraction_ratios;
    run.residual = piece.residual;
    run.free_kato = piece.free_kato;
    run.window = piece.window;
    if (collapsed) {
      blew_up = true;
      run.trajectory = std::move(piece.trajectory);
      break;
    }
    window_hint = piece.window;
    // thinned norm samples along this window
    const Trajectory& traj = piece.trajectory;
    const Array& norms = traj.norms(data_spec);
    const Index stride = std::max<Index>(1, traj.size() / 24);
    for (Index k = 1; k < traj.size(); k += stride) {
      ts.push_back(t_cur + traj.times()[k]);
      ns.push_back(norms[k]);
    }
    if (ts.empty() || ts.back() != t_cur + traj.times()[traj.size() - 1]) {
      ts.push_back(t_cur + traj.times()[traj.size() - 1]);
      ns.push_back(norms[traj.size() - 1]);
    }
    t_cur += piece.window;
    run.restart_times.push_back(t_cur);
    current = traj.slice(traj.size() - 1);
    run.trajectory = std::move(piece.trajectory);

    if (t_cur >= horizon * (1.0 - 1e-9)) {
      run.verdict = SolveVerdict::extended;
      run.maximal_time = horizon;
      break;
    }
    const Real cur_norm = weighted_norm(current, data_spec);
    if (piece.window < 1e-8 * horizon || cur_norm > 1e12 * std::max(initial_norm, 1e-12)) {
      blew_up = true;
      break;
    }
  }

  run.sample_times = Eigen::Map<Array>(ts.data(), static_cast<Index>(ts.size()));
  run.sample_norms = Eigen::Map<Array>(ns.data(), static_cast<Index>(ns.size()));

  if (blew_up) {
    run.verdict = SolveVerdict::blowup;
    // geometric extrapolation of the restart sequence
    const auto& rt = run.restart_times;
    Real tm = rt.back();
    if (rt.size() >= 3) {
      const Real d1 = rt[rt.size() - 2] - rt[rt.size() - 3];
      const Real d2 = rt[rt.size() - 1] - rt[rt.size() - 2];
      if (d1 > d2 && d2 > 0) tm = rt.back() + d2 * d2 / (d1 - d2);
    }
    run.maximal_time = std::max(tm, rt.back() * (1.0 + 1e-12));
    // fit || u(t) || ~ (Tm - t)^{-p} over the last resolved decades
    std::vector<Real> lx, ly;
    for (size_t k = 0; k < ts.size(); ++k) {
      const Real gap = run.maximal_time - ts[k];
      if (gap <= 0) continue;
      if (gap > 0.5 * run.maximal_time) continue;  // keep the approach region
      lx.push_back(std::log(gap));
      ly.push_back(std::log(std::max(ns[k], 1e-300)));
    }
    if (lx.size() >= 4) {
      Array ax = Eigen::Map<Array>(lx.data(), static_cast<Index>(lx.size()));
      Array ay = Eigen::Map<Array>(ly.data(), static_cast<Index>(ly.size()));
      run.blowup_rate_exponent = -fit_slope(ax, ay);
    }
  }
  return run;
}

LipschitzResult flow_lipschitz(const Field& u0, const Field& v0, const SolveSpec& spec) {
  LipschitzResult res;
  const NormSpec dspec = spec.data_spec();
  const Real denom = weighted_norm(u0.with_values(u0.values() - v0.values()), dspec);
  if (denom <= 1e-14 * std::max(weighted_norm(u0, dspec), 1e-300)) {
    res.zero_denominator = true;
    return res;
  }
  SolveOutcome a = solve_local(u0, spec);
  SolveOutcome b = solve_local(v0, spec);
  if (a.verdict != SolveVerdict::converged || b.verdict != SolveVerdict::converged)
    throw config_error("flow_lipschitz: both data must admit a converged local solve");
  const Real T = std::min(a.window, b.window);
  SolveSpec common = spec;
  common.horizon = T;
  common.fixed_window = true;
  if (a.window != T) a = solve_local(u0, common);
  if (b.window != T) b = solve_local(v0, common);
  res.window = T;
  const Real ref = spec.reference_order();
  const Real kd = kato_distance(a.trajectory, b.trajectory, spec.kato_spec(), ref);
  const Real sup = sup_norm_distance(a.trajectory, b.trajectory, dspec);
  res.ratio = std::max(kd, sup) / denom;
  return res;
}

namespace {

Real quintic_step(Real y) {
  if (y <= 0) return 0;
  if (y >= 1) return 1;
  return y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
}
Real quintic_step_d1(Real y) {
  if (y <= 0 || y >= 1) return 0;
  return y * y * (30.0 + y * (-60.0 + 30.0 * y));
}
Real quintic_step_d2(Real y) {
  if (y <= 0 || y >= 1) return 0;
  return y * (60.0 + y * (-180.0 + 120.0 * y));
}

struct SpaceProfile {
  Real value = 0, d1 = 0, d2 = 0;
};

SpaceProfile space_profile(const TestFunctionSpec& spec, Real r) {
  SpaceProfile out;
  if (spec.kind == TestFunctionSpec::Kind::ball) {
    const Real u = r / spec.radius;
    if (u >= 1.0) return out;
    const Real w = 1.0 - u * u;
    out.value = w * w * w;
    out.d1 = -6.0 * u * w * w / spec.radius;
    out.d2 = (w * (30.0 * u * u - 6.0)) / (spec.radius * spec.radius);
    return out;
  }
  // annular plateau: rise on [r0, r0+w], fall on [r1-w, r1]
  const Real width = 0.25 * (spec.radius - spec.inner_radius);
  const Real yu = (r - spec.inner_radius) / width;
  const Real yd = (spec.radius - r) / width;
  const Real up = quintic_step(yu), up1 = quintic_step_d1(yu) / width,
             up2 = quintic_step_d2(yu) / (width * width);
  const Real dn = quintic_step(yd), dn1 = -quintic_step_d1(yd) / width,
             dn2 = quintic_step_d2(yd) / (width * width);
  out.value = up * dn;
  out.d1 = up1 * dn + up * dn1;
  out.d2 = up2 * dn + 2.0 * up1 * dn1 + up * dn2;
  return out;
}

}  // namespace

Real TestFunction::value(Real t, Real r) const {
  return std::exp(-spec_.time_rate * t) * space_profile(spec_, r).value;
}

Real TestFunction::dt(Real t, Real r) const {
  return -spec_.time_rate * value(t, r);
}

Real TestFunction::laplacian(int d, Real t, Real r) const {
  const auto p = space_profile(spec_, r);
  return std::exp(-spec_.time_rate * t) * (p.d2 + (d - 1) * p.d1 / r);
}

Real weak_residual(const Trajectory& u, const Field& u0, const Params& params,
                   const TestFunctionSpec& test, Real t_end, bool include_nonlinearity) {
  if (!(t_end > 0)) throw config_error("weak_residual: t_end must be positive");
  const Index K = u.index_of_time(t_end);
  if (K < 1) throw config_error("weak_residual: t_end below the first mesh node");
  const Real T1 = u.times()[K];
  TestFunction eta(test);
  const int d = u0.dim();

  auto radius_of = [&](Index i) {
    return u0.kind() == FieldKind::radial ? u0.radial_geometry().radii[i]
                                          : u0.grid_geometry().radius_at(i);
  };
  const Index n = u0.size();
  Array eta_vals(n), op_vals(n);

  auto pair_with = [&](const Field& f, Real t, bool operator_form) {
    for (Index i = 0; i < n; ++i) {
      const Real r = radius_of(i);
      op_vals[i] = operator_form ? eta.laplacian(d, t, r) + eta.dt(t, r) : eta.value(t, r);
    }
    return integrate_product(f, op_vals);
  };

  const Real term_final = pair_with(u.slice(K), T1, false);
  const Real term_init = pair_with(u0, 0.0, false);

  // trapezoid in time over the graded mesh
  Real term_heat = 0, term_nl = 0;
  Real prev_h = 0, prev_g = 0;
  for (Index k = 0; k <= K; ++k) {
    const Real t = u.times()[k];
    const Real h = pair_with(u.slice(k), t, true);
    Real g = 0;
    if (include_nonlinearity) {
      Field nl = nonlinear_term(u.slice(k), params);
      for (Index i = 0; i < n; ++i) eta_vals[i] = eta.value(t, radius_of(i));
      g = integrate_product(nl, eta_vals);
    }
    if (k > 0) {
      const Real dt = t - u.times()[k - 1];
      term_heat += 0.5 * dt * (h + prev_h);
      term_nl += 0.5 * dt * (g + prev_g);
    }
    prev_h = h;
    prev_g = g;
  }

  const Real lhs = term_final - term_init;
  const Real rhs = term_heat + term_nl;
  const Real scale = std::max({std::abs(term_final), std::abs(term_init),
                               std::abs(term_heat), std::abs(term_nl), 1e-300});
  return std::abs(lhs - rhs) / scale;
}

Real measured_smoothing_constant(int d, Real p, Real s_src, Real q, Real s_tgt) {
  static std::map<std::array<long long, 5>, Real> cache;
  static std::mutex mutex;
  auto quant = [](Real x) { return llround((std::isinf(x) ? 1e12 : x) * 1e9); };
  const std::array<long long, 5> key{d, quant(p), quant(s_src), quant(q), quant(s_tgt)};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  auto geom = RadialGeometry::make(d, 1024, 32.0, 80);
  const Real invp = std::isinf(p) ? 0.0 : 1.0 / p;
  std::vector<SampleSpec> specs;
  {
    SampleSpec bump;
    bump.family = "bump";
    bump.radius = 1.0;
    specs.push_back(bump);
    SampleSpec gauss;
    gauss.family = "gaussian";
    gauss.sigma = 0.5;
    specs.push_back(gauss);
    SampleSpec inner;
    inner.family = "homogeneous_inner";
    inner.exponent = invp == 0.0 ? s_src : s_src + d * invp - 0.25;
    inner.radius = 1.0;
    specs.push_back(inner);
    SampleSpec outer;
    outer.family = "homogeneous_outer";
    outer.exponent = s_src + d * invp + 0.25;
    outer.radius = 1.0;
    specs.push_back(outer);
  }
  Array times(8);
  for (int k = 0; k < 8; ++k) times[k] = 1e-3 * std::pow(2.7, k);
  Real best = 0;
  for (const auto& sp : specs) {
    auto f = sample_field(sp, geom);
    auto rate = smoothing_rate(f, p, s_src, q, s_tgt, times);
    best = std::max(best, rate.constant_estimate);
  }
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, best);
  return best;
}

}  // namespace hhlab
