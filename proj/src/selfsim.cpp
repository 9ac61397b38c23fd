#include "hhlab/selfsim.hpp"

#include <cmath>
#include <complex>

namespace hhlab {

Real AngularProfile::bound() const {
  switch (kind) {
    case Kind::constant: return std::abs(c);
    case Kind::fourier_mode:
    case Kind::axis_modulated: return std::abs(c) * (1.0 + std::abs(eps));
  }
  return 0;
}

Real AngularProfile::value(Real x, Real y) const {
  switch (kind) {
    case Kind::constant: return c;
    case Kind::fourier_mode: {
      const Real theta = std::atan2(y, x);
      return c * (1.0 + eps * std::cos(mode * theta));
    }
    case Kind::axis_modulated: return c * (1.0 + eps * (x > 0 ? 1.0 : -1.0));
  }
  return 0;
}

namespace {

Real homogeneity_degree(const Params& p) {
  p.require_solver_valid();
  if (!(p.alpha > fujita_exponent(p)))
    throw config_error("profile_data: alpha must exceed the fujita exponent");
  return (2.0 + p.gamma) / (p.alpha - 1.0);
}

}  // namespace

Field profile_data(const AngularProfile& omega, const Params& p,
                   std::shared_ptr<const RadialGeometry> geom) {
  const Real a = homogeneity_degree(p);
  if (omega.kind != AngularProfile::Kind::constant)
    throw config_error("profile_data: radial grids carry constant profiles only");
  Array vals = omega.c * geom->radii.pow(-a);
  return Field::radial(std::move(geom), std::move(vals), -a);
}

Field profile_data(const AngularProfile& omega, const Params& p,
                   std::shared_ptr<const GridGeometry> geom) {
  const Real a = homogeneity_degree(p);
  Array vals(geom->size());
  const Index n = geom->n;
  for (Index i = 0; i < geom->size(); ++i) {
    const Real x = geom->d == 1 ? geom->axis[i] : geom->axis[i / n];
    const Real y = geom->d == 1 ? 0.0 : geom->axis[i % n];
    const Real r = geom->d == 1 ? std::abs(x) : std::hypot(x, y);
    vals[i] = omega.value(x, y) * std::pow(r, -a);
  }
  const bool radial_sym = omega.kind == AngularProfile::Kind::constant;
  return Field::grid(std::move(geom), std::move(vals),
                     radial_sym ? std::optional<Real>(-a) : std::nullopt);
}

namespace {

// evaluate the trigonometric interpolant of a grid field at dilated points
// lambda * x; points outside the physical box evaluate to zero
Array grid_dilate(const GridGeometry& g, const Array& values, Real lambda) {
  using Cplx = std::complex<Real>;
  const Index n = g.n;
  auto xi = [&](Index k) {
    const Real kk = (k <= n / 2) ? static_cast<Real>(k) : static_cast<Real>(k) - n;
    return pi * kk / g.half_extent;
  };
  // evaluation matrix along one axis: E(i, k) = exp(i xi_k lambda x_i) / n
  Eigen::MatrixXcd E(n, n);
  for (Index i = 0; i < n; ++i) {
    const Real target = lambda * g.axis[i];
    const bool inside = std::abs(target) <= g.half_extent;
    for (Index k = 0; k < n; ++k)
      E(i, k) = inside ? std::exp(Cplx(0.0, xi(k) * target)) / static_cast<Real>(n)
                       : Cplx(0.0, 0.0);
  }
  // forward DFT matrix F(k, j) = exp(-i xi_k x_j)
  Eigen::MatrixXcd F(n, n);
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j) F(k, j) = std::exp(Cplx(0.0, -xi(k) * g.axis[j]));
  Eigen::MatrixXcd A = E * F;  // samples -> dilated samples, one axis

  if (g.d == 1) {
    Eigen::VectorXcd v = values.matrix().cast<Cplx>();
    return (A * v).real().array();
  }
  Eigen::MatrixXcd M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) M(i, j) = values[i * n + j];
  Eigen::MatrixXcd out = A * M * A.transpose();
  Array res(g.size());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) res[i * n + j] = out(i, j).real();
  return res;
}

}  // namespace

Trajectory rescale_solution(const Trajectory& u, Real lambda, const Params& p) {
  if (!(lambda > 0)) throw config_error("rescale_solution: lambda must be positive");
  const Real a = (2.0 + p.gamma) / (p.alpha - 1.0);
  const Real amp = std::pow(lambda, a);
  const Array& times = u.times();
  const Real l2 = lambda * lambda;

  // common time subset: t and lambda^2 t both on the mesh
  std::vector<Index> keep, source;
  for (Index k = 0; k < times.size(); ++k) {
    const Real target = l2 * times[k];
    if (times[k] == 0.0) {
      keep.push_back(k);
      source.push_back(k);
      continue;
    }
    for (Index j = 0; j < times.size(); ++j) {
      if (std::abs(times[j] - target) <= 1e-9 * std::max(times[j], target)) {
        keep.push_back(k);
        source.push_back(j);
        break;
      }
    }
  }
  if (keep.size() < 2) throw config_error("rescale_solution: no common times for this lambda");

  const Field& proto = u.slice(0);
  std::vector<Field> slices;
  Array new_times(static_cast<Index>(keep.size()));
  for (size_t m = 0; m < keep.size(); ++m) {
    new_times[static_cast<Index>(m)] = times[keep[m]];
    const Array& src = u.slice(source[m]).values();
    if (proto.kind() == FieldKind::radial) {
      const auto& g = proto.radial_geometry();
      auto shift_opt = g.shift_of(lambda);
      if (!shift_opt)
        throw config_error("rescale_solution: lambda is not a radial grid power");
      const Index shift = *shift_opt;
      Array vals = Array::Zero(g.n);
      for (Index i = 0; i < g.n; ++i) {
        const Index j = i + shift;  // value at lambda r_i
        if (j >= 0 && j < g.n) vals[i] = amp * src[j];
      }
      slices.push_back(proto.with_values(std::move(vals)));
    } else {
      slices.push_back(proto.with_values(amp * grid_dilate(proto.grid_geometry(), src, lambda)));
    }
  }
  return Trajectory(std::move(new_times), std::move(slices));
}

DeviationReport self_similarity_deviation(const Trajectory& u, const std::vector<Real>& lambdas,
                                          const Params& p, const NormSpec& kspec, Real ref_s) {
  DeviationReport rep;
  const Real base = kato_norm(u, kspec, ref_s, Regime::critical);
  if (base == 0.0) {
    rep.lambdas = lambdas;
    rep.deviations.assign(lambdas.size(), 0.0);
    return rep;
  }
  const Field& proto = u.slice(0);
  for (Real lambda : lambdas) {
    Trajectory scaled = rescale_solution(u, lambda, p);
    // compare on the scaled trajectory's time subset, restricted to the
    // spatial overlap (rescaling by lambda shifts data off one end of the grid)
    Real worst = 0;
    const Real power = 0.5 * (ref_s - kspec.s);
    Index lo = 0, hi = proto.size();
    if (proto.kind() == FieldKind::radial) {
      auto shift_opt = proto.radial_geometry().shift_of(lambda);
      if (!shift_opt) throw config_error("self_similarity_deviation: incompatible lambda");
      lo = std::max<Index>(0, -*shift_opt);
      hi = proto.size() - std::max<Index>(0, *shift_opt);
    }
    for (Index m = 0; m < scaled.size(); ++m) {
      const Real t = scaled.times()[m];
      if (t <= 0) continue;
      const Index k = u.index_of_time(t);
      Array diff = Array::Zero(proto.size());
      if (proto.kind() == FieldKind::radial) {
        diff.segment(lo, hi - lo) = scaled.slice(m).values().segment(lo, hi - lo) -
                                    u.slice(k).values().segment(lo, hi - lo);
      } else {
        const auto& g = proto.grid_geometry();
        diff = scaled.slice(m).values() - u.slice(k).values();
        for (Index i = 0; i < g.size(); ++i) {
          const Real x = g.d == 1 ? g.axis[i] : g.axis[i / g.n];
          const Real y = g.d == 1 ? 0.0 : g.axis[i % g.n];
          if (std::abs(lambda * x) > g.half_extent || std::abs(lambda * y) > g.half_extent)
            diff[i] = 0.0;
        }
      }
      const Real nrm = weighted_norm(u.slice(k).with_values(std::move(diff)), kspec);
      worst = std::max(worst, std::pow(t, power) * nrm);
    }
    rep.lambdas.push_back(lambda);
    rep.deviations.push_back(worst / base);
  }
  return rep;
}

Field extract_profile(const Trajectory& u, Real t, const Params& p) {
  const Index k = u.index_of_time(t);
  const Real tk = u.times()[k];
  if (!(tk > 0)) throw config_error("extract_profile: need a positive time");
  const Real a = (2.0 + p.gamma) / (p.alpha - 1.0);
  const Real amp = std::pow(tk, 0.5 * a);
  const Field& slice = u.slice(k);
  if (slice.kind() == FieldKind::radial) {
    const auto& g = slice.radial_geometry();
    auto geom = RadialGeometry::make(g.d, g.n, g.r_max / std::sqrt(tk), g.points_per_octave);
    return Field::radial(std::move(geom), amp * slice.values());
  }
  const auto& g = slice.grid_geometry();
  return slice.with_values(amp * grid_dilate(g, slice.values(), std::sqrt(tk)));
}

Real profile_deviation(const Trajectory& u, Real t1, Real t2, const Params& p,
                       const NormSpec& spec) {
  Field p1 = extract_profile(u, t1, p);
  Field p2 = extract_profile(u, t2, p);
  if (p1.kind() == FieldKind::radial) {
    // profiles live on shifted copies of one log grid; align by index shift
    const auto& g1 = p1.radial_geometry();
    const auto& g2 = p2.radial_geometry();
    const Real lambda = g2.r_max / g1.r_max;
    auto shift_opt = g1.shift_of(lambda);
    if (!shift_opt) throw config_error("profile_deviation: misaligned similarity grids");
    const Index shift = *shift_opt;
    Array diff = Array::Zero(g1.n);
    for (Index i = 0; i < g1.n; ++i) {
      const Index j = i - shift;  // g2 index with the same physical y
      if (j >= 0 && j < g1.n) diff[i] = p1.values()[i] - p2.values()[j];
    }
    Field df = Field::radial(p1.radial_geometry_ptr(), std::move(diff));
    return weighted_norm(df, spec) / weighted_norm(p1, spec);
  }
  Array diff = p1.values() - p2.values();
  return weighted_norm(p1.with_values(std::move(diff)), spec) / weighted_norm(p1, spec);
}

TraceResiduals initial_trace_check(const Trajectory& u, const Field& phi,
                                   const std::vector<TestFunctionSpec>& tests, Index n_times) {
  if (!phi.same_discretization(u.slice(0)))
    throw config_error("initial_trace_check: phi must share the trajectory discretization");
  TraceResiduals out;
  const Index count = std::min<Index>(n_times, u.size() - 1);
  out.times.resize(count);
  const Index n = phi.size();
  auto radius_of = [&](Index i) {
    return phi.kind() == FieldKind::radial ? phi.radial_geometry().radii[i]
                                           : phi.grid_geometry().radius_at(i);
  };
  for (const auto& spec : tests) {
    TestFunction chi(spec);
    Array vals(n);
    for (Index i = 0; i < n; ++i) vals[i] = chi.value(0.0, radius_of(i));
    Array res(count);
    for (Index k = 1; k <= count; ++k) {
      out.times[k - 1] = u.times()[k];
      Array diff = u.slice(k).values() - phi.values();
      res[k - 1] = std::abs(integrate_product(phi.with_values(std::move(diff)), vals));
    }
    out.residuals.push_back(std::move(res));
  }
  return out;
}

}  // namespace hhlab
