#include "hhlab/field.hpp"

#include <cmath>
#include <random>

namespace hhlab {

std::shared_ptr<const RadialGeometry> RadialGeometry::make(int d, Index n, Real r_max,
                                                           int points_per_octave) {
  if (d < 1) throw config_error("RadialGeometry: d must be >= 1");
  if (n < 8) throw config_error("RadialGeometry: n must be >= 8");
  if (!(r_max > 0)) throw config_error("RadialGeometry: r_max must be positive");
  if (points_per_octave < 4) throw config_error("RadialGeometry: points_per_octave must be >= 4");
  auto g = std::make_shared<RadialGeometry>();
  g->d = d;
  g->n = n;
  g->r_max = r_max;
  g->points_per_octave = points_per_octave;
  g->log_step = std::log(2.0) / points_per_octave;
  g->radii.resize(n);
  for (Index i = 0; i < n; ++i)
    g->radii[i] = r_max * std::exp2(-static_cast<Real>(n - 1 - i) / points_per_octave);
  return g;
}

std::optional<Index> RadialGeometry::shift_of(Real lambda) const {
  if (!(lambda > 0)) return std::nullopt;
  const Real raw = std::log2(lambda) * points_per_octave;
  const Real rounded = std::round(raw);
  if (std::abs(raw - rounded) > 1e-9 * std::max(1.0, std::abs(raw))) return std::nullopt;
  return static_cast<Index>(rounded);
}

std::shared_ptr<const GridGeometry> GridGeometry::make(int d, Index n, Real half_extent) {
  if (d != 1 && d != 2) throw config_error("GridGeometry: d must be 1 or 2");
  if (n < 8) throw config_error("GridGeometry: n must be >= 8");
  if (!(half_extent > 0)) throw config_error("GridGeometry: half_extent must be positive");
  auto g = std::make_shared<GridGeometry>();
  g->d = d;
  g->n = n;
  g->half_extent = half_extent;
  g->h = 2.0 * half_extent / n;
  g->axis.resize(n);
  for (Index i = 0; i < n; ++i) g->axis[i] = (i + 0.5) * g->h - half_extent;
  return g;
}

Real GridGeometry::radius_at(Index idx) const {
  if (d == 1) return std::abs(axis[idx]);
  const Real x = axis[idx / n];
  const Real y = axis[idx % n];
  return std::hypot(x, y);
}

namespace {

void require_finite(const Array& values) {
  if (!values.isFinite().all())
    throw std::invalid_argument("Field: values must be finite (no NaN/inf)");
}

}  // namespace

Field Field::radial(std::shared_ptr<const RadialGeometry> geom, Array values,
                    std::optional<Real> homogeneity) {
  if (!geom) throw config_error("Field::radial: null geometry");
  if (values.size() != geom->n) throw config_error("Field::radial: value count mismatch");
  require_finite(values);
  Field f;
  f.kind_ = FieldKind::radial;
  f.rgeom_ = std::move(geom);
  f.values_ = std::move(values);
  f.homogeneity_ = homogeneity;
  return f;
}

Field Field::grid(std::shared_ptr<const GridGeometry> geom, Array values,
                  std::optional<Real> homogeneity) {
  if (!geom) throw config_error("Field::grid: null geometry");
  if (values.size() != geom->size()) throw config_error("Field::grid: value count mismatch");
  require_finite(values);
  Field f;
  f.kind_ = FieldKind::grid;
  f.ggeom_ = std::move(geom);
  f.values_ = std::move(values);
  f.homogeneity_ = homogeneity;
  return f;
}

int Field::dim() const { return kind_ == FieldKind::radial ? rgeom_->d : ggeom_->d; }

const RadialGeometry& Field::radial_geometry() const {
  if (kind_ != FieldKind::radial) throw config_error("Field: not a radial field");
  return *rgeom_;
}

const GridGeometry& Field::grid_geometry() const {
  if (kind_ != FieldKind::grid) throw config_error("Field: not a grid field");
  return *ggeom_;
}

Field Field::with_values(Array values) const {
  if (kind_ == FieldKind::radial) return Field::radial(rgeom_, std::move(values));
  return Field::grid(ggeom_, std::move(values));
}

bool Field::same_discretization(const Field& other) const {
  if (kind_ != other.kind_) return false;
  if (kind_ == FieldKind::radial)
    return rgeom_->d == other.rgeom_->d && rgeom_->n == other.rgeom_->n &&
           rgeom_->points_per_octave == other.rgeom_->points_per_octave &&
           rgeom_->r_max == other.rgeom_->r_max;
  return ggeom_->d == other.ggeom_->d && ggeom_->n == other.ggeom_->n &&
         ggeom_->half_extent == other.ggeom_->half_extent;
}

namespace {

void validate_spec(const NormSpec& spec) {
  if (!(spec.q >= 1.0)) throw config_error("NormSpec: q must lie in [1, inf]");
}

// trapezoid weights in log radius
Real trapezoid_weight(Index i, Index n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

// Estimate the mass of the integrand beyond an end of the truncated domain by
// fitting a log-slope over the outermost octave and extrapolating.
Real tail_estimate(const Array& g, Real log_step, int per_octave, bool outer) {
  const Index n = g.size();
  const Index k = std::min<Index>(per_octave, n / 4);
  if (k < 4) return 0.0;
  const Real g_end = outer ? g[n - 1] : g[0];
  if (g_end <= 0) return 0.0;
  const Real g_in = outer ? g[n - k] : g[k - 1];
  if (g_in <= 0) return inf;
  // decay rate per unit log-radius moving out of the domain; >= 0 means the
  // truncated mass is unbounded under extrapolation
  const Real slope = (std::log(g_end) - std::log(g_in)) / (log_step * (k - 1));
  if (slope >= -0.05) return inf;
  return g_end / (-slope);
}

struct RadialNormAccum {
  Real value = 0;
  Real tail = 0;
};

// weighted integrand scaled by its maximum so that large powers q do not
// overflow; value = scale * (sum of (g/scale)^q weights)^{1/q}
RadialNormAccum radial_norm_pow(const RadialGeometry& g, const Array& values, Real q, Real s) {
  Array base = g.radii.pow(s) * values.abs();
  const Real scale = base.maxCoeff();
  RadialNormAccum acc;
  if (scale == 0.0 || !std::isfinite(scale)) {
    acc.value = scale == 0.0 ? 0.0 : inf;
    return acc;
  }
  Array integrand = (base / scale).pow(q) * g.radii.pow(static_cast<Real>(g.d));
  Real sum = 0;
  const Index n = g.n;
  for (Index i = 0; i < n; ++i) sum += trapezoid_weight(i, n) * integrand[i];
  acc.value = scale * std::pow(sphere_surface(g.d) * sum * g.log_step, 1.0 / q);
  const Real outer = tail_estimate(integrand, g.log_step, g.points_per_octave, true);
  const Real inner = tail_estimate(integrand, g.log_step, g.points_per_octave, false);
  if (std::isfinite(outer) && std::isfinite(inner)) {
    const Real with_tail =
        scale * std::pow(sphere_surface(g.d) * (sum * g.log_step + outer + inner), 1.0 / q);
    acc.tail = with_tail - acc.value;
  } else {
    acc.tail = inf;
  }
  return acc;
}

}  // namespace

NormEstimate weighted_norm_detailed(const Field& f, const NormSpec& spec) {
  validate_spec(spec);
  NormEstimate out;
  if (std::isinf(spec.q)) {
    if (f.kind() == FieldKind::radial) {
      const auto& g = f.radial_geometry();
      out.value = (g.radii.pow(spec.s) * f.values().abs()).maxCoeff();
    } else {
      const auto& g = f.grid_geometry();
      Real best = 0;
      for (Index i = 0; i < f.size(); ++i)
        best = std::max(best, std::pow(g.radius_at(i), spec.s) * std::abs(f.values()[i]));
      out.value = best;
    }
    out.tail_error = 0;
  } else if (f.kind() == FieldKind::radial) {
    const auto acc = radial_norm_pow(f.radial_geometry(), f.values(), spec.q, spec.s);
    out.value = acc.value;
    out.tail_error = acc.tail;
  } else {
    const auto& g = f.grid_geometry();
    Real scale = 0;
    for (Index i = 0; i < f.size(); ++i)
      scale = std::max(scale, std::pow(g.radius_at(i), spec.s) * std::abs(f.values()[i]));
    if (scale == 0.0) {
      out.value = 0.0;
    } else {
      Real sum = 0;
      for (Index i = 0; i < f.size(); ++i)
        sum += std::pow(std::pow(g.radius_at(i), spec.s) * std::abs(f.values()[i]) / scale,
                        spec.q);
      out.value = scale * std::pow(sum * std::pow(g.h, g.d), 1.0 / spec.q);
    }
    out.tail_error = 0;  // grid families are compactly represented
  }
  if (!std::isfinite(out.value))
    throw quadrature_overflow("weighted_norm: non-finite result (non-integrable data?)");
  return out;
}

Real weighted_norm(const Field& f, const NormSpec& spec) {
  return weighted_norm_detailed(f, spec).value;
}

Real integrate(const Field& f) {
  if (f.kind() == FieldKind::radial) {
    const auto& g = f.radial_geometry();
    Array integrand = f.values() * g.radii.pow(static_cast<Real>(g.d));
    Real sum = 0;
    for (Index i = 0; i < g.n; ++i) sum += trapezoid_weight(i, g.n) * integrand[i];
    return sphere_surface(g.d) * sum * g.log_step;
  }
  const auto& g = f.grid_geometry();
  return f.values().sum() * std::pow(g.h, g.d);
}

Real integrate_product(const Field& f, const Array& gvals) {
  if (gvals.size() != f.size()) throw config_error("integrate_product: size mismatch");
  return integrate(f.with_values(f.values() * gvals));
}

InterpolationPair interpolation_pair(const Field& f, Real q1, Real s1, Real q2, Real s2,
                                     Real theta) {
  if (!(theta > 0 && theta < 1)) throw config_error("interpolation_pair: theta must be in (0,1)");
  const Real invq1 = std::isinf(q1) ? 0.0 : 1.0 / q1;
  const Real invq2 = std::isinf(q2) ? 0.0 : 1.0 / q2;
  const Real invq = theta * invq1 + (1.0 - theta) * invq2;
  InterpolationPair out;
  out.q = invq == 0.0 ? inf : 1.0 / invq;
  out.s = theta * s1 + (1.0 - theta) * s2;
  out.lhs = weighted_norm(f, {out.q, out.s});
  out.rhs = std::pow(weighted_norm(f, {q1, s1}), theta) *
            std::pow(weighted_norm(f, {q2, s2}), 1.0 - theta);
  return out;
}

namespace {

Real quintic_smoothstep(Real y) {
  if (y <= 0) return 0;
  if (y >= 1) return 1;
  return y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
}

// value at radius r for the named family
struct FamilyEval {
  const SampleSpec& spec;
  int d;

  Real operator()(Real r) const {
    const auto& s = spec;
    if (s.family == "homogeneous") return s.amplitude * std::pow(r, -s.exponent);
    if (s.family == "homogeneous_inner")
      return r < s.radius ? s.amplitude * std::pow(r, -s.exponent) : 0.0;
    if (s.family == "homogeneous_outer")
      return r > s.radius ? s.amplitude * std::pow(r, -s.exponent) : 0.0;
    if (s.family == "borderline") return r <= s.radius ? std::pow(r, -d) : 0.0;
    if (s.family == "log_borderline")
      return r <= s.radius
                 ? std::pow(r, -d) * std::pow(std::log(std::exp(1.0) + 1.0 / r), -s.log_power)
                 : 0.0;
    if (s.family == "bump") {
      const Real u = r / s.radius;
      return u < 1.0 ? s.amplitude * std::pow(1.0 - u * u, 3.0) : 0.0;
    }
    if (s.family == "annular_bump") {
      const Real w = 0.25 * (s.outer_radius - s.radius);
      return s.amplitude * quintic_smoothstep((r - s.radius) / w) *
             quintic_smoothstep((s.outer_radius - r) / w);
    }
    if (s.family == "gaussian") return s.amplitude * std::exp(-r * r / (4.0 * s.sigma));
    if (s.family == "heat_kernel")
      return std::pow(4.0 * pi * s.sigma, -0.5 * d) * std::exp(-r * r / (4.0 * s.sigma));
    if (s.family == "indicator") return r <= s.radius ? s.amplitude : 0.0;
    if (s.family == "constant") return s.amplitude;
    throw config_error("sample_field: unknown family '" + s.family + "'");
  }
};

std::optional<Real> family_homogeneity(const SampleSpec& s) {
  if (s.family == "homogeneous") return -s.exponent;
  if (s.family == "constant") return 0.0;
  return std::nullopt;
}

}  // namespace

Field sample_field(const SampleSpec& spec, std::shared_ptr<const RadialGeometry> geom) {
  if (!geom) throw config_error("sample_field: null geometry");
  Array values(geom->n);
  if (spec.family == "random_bumps") {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<Real> center(0.0, 0.5 * geom->r_max);
    std::uniform_real_distribution<Real> width(0.05 * geom->r_max, 0.3 * geom->r_max);
    std::uniform_real_distribution<Real> amp(-1.0, 1.0);
    values.setZero();
    for (int k = 0; k < 5; ++k) {
      const Real c = center(rng), w = width(rng), a = amp(rng);
      values += a * (-(geom->radii - c).square() / (w * w)).exp();
    }
    values *= spec.amplitude;
    return Field::radial(std::move(geom), std::move(values));
  }
  FamilyEval eval{spec, geom->d};
  for (Index i = 0; i < geom->n; ++i) values[i] = eval(geom->radii[i]);
  return Field::radial(std::move(geom), std::move(values), family_homogeneity(spec));
}

Field sample_field(const SampleSpec& spec, std::shared_ptr<const GridGeometry> geom) {
  if (!geom) throw config_error("sample_field: null geometry");
  Array values(geom->size());
  if (spec.family == "random_bumps") {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<Real> center(-0.5 * geom->half_extent, 0.5 * geom->half_extent);
    std::uniform_real_distribution<Real> width(0.05 * geom->half_extent, 0.3 * geom->half_extent);
    std::uniform_real_distribution<Real> amp(-1.0, 1.0);
    values.setZero();
    for (int k = 0; k < 5; ++k) {
      const Real cx = center(rng), cy = geom->d == 2 ? center(rng) : 0.0;
      const Real w = width(rng), a = amp(rng);
      for (Index i = 0; i < geom->size(); ++i) {
        const Real x = geom->d == 1 ? geom->axis[i] : geom->axis[i / geom->n];
        const Real y = geom->d == 1 ? 0.0 : geom->axis[i % geom->n];
        values[i] += a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (w * w));
      }
    }
    values *= spec.amplitude;
    return Field::grid(std::move(geom), std::move(values));
  }
  FamilyEval eval{spec, geom->d};
  for (Index i = 0; i < geom->size(); ++i) values[i] = eval(geom->radius_at(i));
  return Field::grid(std::move(geom), std::move(values), family_homogeneity(spec));
}

}  // namespace hhlab
