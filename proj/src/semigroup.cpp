#include "hhlab/semigroup.hpp"

#include "hhlab/exponents.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace hhlab {

KernelPlan default_plan(const Field& f) {
  KernelPlan plan;
  if (f.kind() == FieldKind::grid) {
    plan.method = KernelMethod::spectral_grid;
  } else {
    const int d = f.radial_geometry().d;
    plan.method = (d == 1 || d == 3) ? KernelMethod::closed_form_radial
                                     : KernelMethod::bessel_radial;
  }
  return plan;
}

Real heat_kernel_value(int d, Real t, Real r) {
  if (!(t > 0)) throw config_error("heat_kernel_value: t must be positive");
  return std::pow(4.0 * pi * t, -0.5 * d) * std::exp(-r * r / (4.0 * t));
}

namespace {

// integral over theta in [0, pi] of exp(-z (1 - cos theta)) sin^{d-2} theta,
// d >= 2; the angular reduction of the heat kernel between spheres
Real angular_kernel(int d, Real z) {
  if (d == 3) {
    if (z < 1e-12) return 2.0 - 2.0 * z;
    return -std::expm1(-2.0 * z) / z;
  }
  const Real nu = 0.5 * d - 1.0;
  const Real front = std::sqrt(pi) * std::tgamma(0.5 * (d - 1));
  if (z < 1e-10) return front / std::tgamma(0.5 * d);
  if (z < 500.0)
    return front * std::pow(2.0 / z, nu) * std::exp(-z) * std::cyl_bessel_i(nu, z);
  // scaled-Bessel asymptotics for large argument
  const Real mu = 4.0 * nu * nu;
  const Real series =
      1.0 - (mu - 1.0) / (8.0 * z) + (mu - 1.0) * (mu - 9.0) / (128.0 * z * z);
  return front * std::pow(2.0 / z, nu) * series / std::sqrt(2.0 * pi * z);
}

// reduced radial kernel element including the rho^{d-1} measure:
// (e^{t Lap} f)(r) = int k(r, rho; t) f(rho) d rho
Real reduced_kernel(int d, KernelMethod method, Real t, Real r, Real rho) {
  const Real gap = r - rho;
  if (method == KernelMethod::closed_form_radial && d == 1) {
    const Real c = 1.0 / std::sqrt(4.0 * pi * t);
    return c * (std::exp(-gap * gap / (4.0 * t)) + std::exp(-(r + rho) * (r + rho) / (4.0 * t)));
  }
  if (method == KernelMethod::closed_form_radial && d == 3) {
    const Real c = 1.0 / std::sqrt(4.0 * pi * t);
    return (rho / r) * c * std::exp(-gap * gap / (4.0 * t)) * (-std::expm1(-r * rho / t));
  }
  // Bessel reduction, d >= 2
  return sphere_surface(d - 1) * std::pow(rho, d - 1) * std::pow(4.0 * pi * t, -0.5 * d) *
         std::exp(-gap * gap / (4.0 * t)) * angular_kernel(d, r * rho / (2.0 * t));
}

}  // namespace

RadialPropagator::RadialPropagator(std::shared_ptr<const RadialGeometry> geom, KernelPlan plan)
    : geom_(std::move(geom)), plan_(plan) {
  if (!geom_) throw config_error("RadialPropagator: null geometry");
  if (plan_.method == KernelMethod::spectral_grid)
    throw config_error("RadialPropagator: spectral_grid plan on a radial field");
  if (plan_.method == KernelMethod::closed_form_radial && geom_->d != 1 && geom_->d != 3)
    throw config_error("RadialPropagator: closed form requires d in {1,3}");
  if (plan_.method == KernelMethod::bessel_radial && geom_->d < 2)
    throw config_error("RadialPropagator: bessel reduction requires d >= 2");
}

RadialPropagator::Row RadialPropagator::build_row(Index i, Real t) const {
  const auto& g = *geom_;
  const Real r = g.radii[i];
  const Real width = plan_.band_sigmas * std::sqrt(t);
  const Real lo = r - width;
  const Real hi = r + width;
  const Real* begin = g.radii.data();
  const Real* end = begin + g.n;
  Index j_lo = static_cast<Index>(std::lower_bound(begin, end, lo) - begin);
  Index j_hi = static_cast<Index>(std::upper_bound(begin, end, hi) - begin) - 1;
  j_lo = std::max<Index>(j_lo, 0);
  j_hi = std::min<Index>(j_hi, g.n - 1);
  Row row;
  row.rel0 = j_lo - i;
  row.w.resize(std::max<Index>(0, j_hi - j_lo + 1));
  for (Index j = j_lo; j <= j_hi; ++j) {
    const Real trap = (j == 0 || j == g.n - 1) ? 0.5 : 1.0;
    // d rho = rho * dlog
    row.w[j - j_lo] =
        trap * reduced_kernel(g.d, plan_.method, t, r, g.radii[j]) * g.radii[j] * g.log_step;
  }
  // close the kernel-mass gap below r_min (significant on shallow grids when
  // the kernel width exceeds r_min): integrate the segment [0, r_min] exactly
  // against f taken constant there, attached to the innermost column
  if (j_lo == 0) {
    Array nodes, weights;
    gauss_legendre(8, 0.0, g.radii[0], nodes, weights);
    Real segment = 0;
    for (Index k = 0; k < nodes.size(); ++k)
      segment += weights[k] * reduced_kernel(g.d, plan_.method, t, r, nodes[k]);
    row.w[0] += segment;
  }
  return row;
}

std::shared_ptr<const RadialPropagator::Row> RadialPropagator::row_for(Index i, Real t) const {
  // rows are invariant under (r, rho, t) -> (2^{k/ppo} r, 2^{k/ppo} rho, 2^{2k/ppo} t),
  // which on this grid is an index shift; key on the invariant combination.
  // Rows whose band is clipped by either domain boundary are not shift
  // invariant (the clipped mass depends on the absolute scale) and are cached
  // per index instead.
  const Real raw = 2.0 * static_cast<Real>(i) - geom_->points_per_octave * std::log2(t);
  const long long base = llround(raw * 1048576.0);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find({base, Index(-1)});
    if (it != cache_.end()) {
      const Index j0 = i + it->second->rel0;
      // an interior cached row applies only where it stays strictly interior
      if (j0 >= 1 && j0 + it->second->w.size() <= geom_->n - 1) return it->second;
    }
    it = cache_.find({base, i});
    if (it != cache_.end()) return it->second;
  }
  auto built = std::make_shared<const Row>(build_row(i, t));
  const Index j0 = i + built->rel0;
  const bool interior = (j0 >= 1) && (j0 + built->w.size() <= geom_->n - 1);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.insert_or_assign({base, interior ? Index(-1) : i}, built);
  return built;
}

void RadialPropagator::euler_block(Real t, Index first, Array& v) const {
  const auto& g = *geom_;
  const Index n = g.n;
  if (first >= n) return;
  first = std::max<Index>(first, 0);
  const Real dx = g.log_step;
  const Real h0 = g.radii[first] * dx;
  int nu = std::max(1, static_cast<int>(std::ceil(t / (0.4 * h0 * h0))));
  nu = std::min(nu, 8);
  const Real dt = t / nu;
  Array cur = v;
  Array next = v;
  for (int step = 0; step < nu; ++step) {
    for (Index i = first; i < n; ++i) {
      const Real fm = i > 0 ? cur[i - 1] : 2.0 * cur[0] - cur[1];
      const Real fp = i < n - 1 ? cur[i + 1] : 2.0 * cur[n - 1] - cur[n - 2];
      const Real sec = (fp - 2.0 * cur[i] + fm) / (dx * dx);
      const Real fst = (fp - fm) / (2.0 * dx);
      next[i] = cur[i] + dt * (sec + (g.d - 2) * fst) / (g.radii[i] * g.radii[i]);
    }
    std::swap(cur, next);
  }
  v = cur;
}

void RadialPropagator::apply(Real t, const Array& in, Array& out) const {
  const auto& g = *geom_;
  if (in.size() != g.n) throw config_error("RadialPropagator: size mismatch");
  if (t < 0) throw config_error("RadialPropagator: negative time");
  if (&in == &out) {
    Array tmp = in;
    apply(t, tmp, out);
    return;
  }
  if (t == 0) {
    out = in;
    return;
  }
  // rows with local spacing finer than the kernel width integrate the kernel;
  // the rest advance by sub-stepped finite differences
  const Real r_star = std::sqrt(4.0 * t) / (plan_.resolve_factor * g.log_step);
  const Real* begin = g.radii.data();
  Index i_split =
      static_cast<Index>(std::upper_bound(begin, begin + g.n, r_star) - begin) - 1;

  out = in;
  euler_block(t, i_split + 1, out);
  for (Index i = 0; i <= i_split; ++i) {
    const auto row = row_for(i, t);
    const Index j0 = i + row->rel0;
    out[i] = row->w.matrix().dot(in.segment(j0, row->w.size()).matrix());
  }
  if (!out.isFinite().all())
    throw quadrature_overflow("apply_heat: non-finite output (non-integrable input?)");
}

Array RadialPropagator::apply(Real t, const Array& in) const {
  Array out(in.size());
  apply(t, in, out);
  return out;
}

Array propagate_grid_values(const GridGeometry& g, Real t, const Array& in) {
  if (in.size() != g.size()) throw config_error("propagate_grid_values: size mismatch");
  if (t == 0) return in;
  if (t < 0) throw config_error("propagate_grid_values: negative time");
  using Cplx = std::complex<Real>;
  Eigen::FFT<Real> fft;
  const Index n = g.n;
  auto xi = [&](Index k) {
    const Real kk = (k <= n / 2) ? static_cast<Real>(k) : static_cast<Real>(k) - n;
    return pi * kk / g.half_extent;
  };
  if (g.d == 1) {
    std::vector<Real> data(in.data(), in.data() + n);
    std::vector<Cplx> freq(n);
    fft.fwd(freq, data);
    for (Index k = 0; k < n; ++k) freq[static_cast<size_t>(k)] *= std::exp(-t * xi(k) * xi(k));
    std::vector<Real> back(n);
    fft.inv(back, freq);
    return Eigen::Map<Array>(back.data(), n);
  }
  // d = 2: transform rows, then columns
  Eigen::MatrixXcd spec(n, n);
  for (Index i = 0; i < n; ++i) {
    std::vector<Real> rowdata(n);
    for (Index j = 0; j < n; ++j) rowdata[static_cast<size_t>(j)] = in[i * n + j];
    std::vector<Cplx> rowfreq(n);
    fft.fwd(rowfreq, rowdata);
    for (Index j = 0; j < n; ++j) spec(i, j) = rowfreq[static_cast<size_t>(j)];
  }
  for (Index j = 0; j < n; ++j) {
    std::vector<Cplx> col(n), colf(n);
    for (Index i = 0; i < n; ++i) col[static_cast<size_t>(i)] = spec(i, j);
    fft.fwd(colf, col);
    for (Index i = 0; i < n; ++i)
      spec(i, j) = colf[static_cast<size_t>(i)] * std::exp(-t * (xi(i) * xi(i) + xi(j) * xi(j)));
  }
  for (Index j = 0; j < n; ++j) {
    std::vector<Cplx> col(n), colb(n);
    for (Index i = 0; i < n; ++i) col[static_cast<size_t>(i)] = spec(i, j);
    fft.inv(colb, col);
    for (Index i = 0; i < n; ++i) spec(i, j) = colb[static_cast<size_t>(i)];
  }
  Array out(g.size());
  for (Index i = 0; i < n; ++i) {
    std::vector<Cplx> rowf(n), rowb(n);
    for (Index j = 0; j < n; ++j) rowf[static_cast<size_t>(j)] = spec(i, j);
    fft.inv(rowb, rowf);
    for (Index j = 0; j < n; ++j) out[i * n + j] = rowb[static_cast<size_t>(j)].real();
  }
  if (!out.isFinite().all()) throw quadrature_overflow("propagate_grid_values: non-finite output");
  return out;
}

Field apply_heat(const Field& f, Real t, const KernelPlan& plan) {
  if (!(t > 0)) throw config_error("apply_heat: t must be positive");
  if (f.kind() == FieldKind::grid) {
    if (plan.method != KernelMethod::spectral_grid)
      throw config_error("apply_heat: grid fields need the spectral_grid method");
    return f.with_values(propagate_grid_values(f.grid_geometry(), t, f.values()));
  }
  RadialPropagator prop(f.radial_geometry_ptr(), plan);
  return f.with_values(prop.apply(t, f.values()));
}

Field apply_heat(const Field& f, Real t) { return apply_heat(f, t, default_plan(f)); }

SmoothingRate smoothing_rate(const Field& f, Real p, Real s, Real q, Real sprime,
                             const Array& times) {
  if (times.size() < 2) throw config_error("smoothing_rate: need at least two times");
  const int d = f.dim();
  {
    Params dummy;
    dummy.d = d;
    auto rep = check_conditions("heat_smoothing", dummy,
                                {{"p", p}, {"q", q}, {"s", s}, {"sprime", sprime}});
    if (!rep.overall)
      throw config_error("smoothing_rate: (p,q,s,s') outside the smoothing window");
  }
  const Real invp = std::isinf(p) ? 0.0 : 1.0 / p;
  const Real invq = std::isinf(q) ? 0.0 : 1.0 / q;
  SmoothingRate out;
  out.theory_slope = -0.5 * d * (invp - invq) - 0.5 * (s - sprime);
  out.times = times;
  out.norms.resize(times.size());
  const Real base = weighted_norm(f, {p, s});
  const KernelPlan plan = default_plan(f);
  for (Index k = 0; k < times.size(); ++k)
    out.norms[k] = weighted_norm(apply_heat(f, times[k], plan), {q, sprime});
  out.fitted_slope = fit_slope(times.log(), out.norms.log());
  out.constant_estimate = 0;
  for (Index k = 0; k < times.size(); ++k)
    out.constant_estimate =
        std::max(out.constant_estimate,
                 out.norms[k] / (std::pow(times[k], out.theory_slope) * base));
  return out;
}

namespace {

// log-spaced trapezoid integral of fn over [lo, hi], lo > 0
Real log_integral(const std::function<Real(Real)>& fn, Real lo, Real hi, int per_octave = 96) {
  if (!(hi > lo && lo > 0)) throw config_error("log_integral: bad bounds");
  const Real octaves = std::log2(hi / lo);
  const Index n = std::max<Index>(16, static_cast<Index>(std::ceil(octaves * per_octave)) + 1);
  const Real dx = std::log(hi / lo) / (n - 1);
  Real sum = 0;
  for (Index i = 0; i < n; ++i) {
    const Real r = lo * std::exp(i * dx);
    const Real w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    sum += w * fn(r) * r;  // d rho = rho dx
  }
  return sum * dx;
}

// e^{t Lap} f at radius r for a radial datum given as a callable
Real convolve_point(int d, Real t, Real r, Real support_lo, Real support_hi,
                    const std::function<Real(Real)>& fn) {
  auto integrand = [&](Real rho) {
    if (d == 1) {
      const Real c = 1.0 / std::sqrt(4.0 * pi * t);
      return fn(rho) * c *
             (std::exp(-(r - rho) * (r - rho) / (4.0 * t)) +
              std::exp(-(r + rho) * (r + rho) / (4.0 * t)));
    }
    return fn(rho) * sphere_surface(d - 1) * std::pow(rho, d - 1) *
           std::pow(4.0 * pi * t, -0.5 * d) * std::exp(-(r - rho) * (r - rho) / (4.0 * t)) *
           angular_kernel(d, r * rho / (2.0 * t));
  };
  return log_integral(integrand, support_lo, support_hi);
}

}  // namespace

MomentProbe kernel_moment(int d, Real a, Real b, Real q) {
  if (!(q >= 1.0)) throw config_error("kernel_moment: q must be >= 1");
  MomentProbe probe;
  auto g1 = [d](Real w) { return std::pow(4.0 * pi, -0.5 * d) * std::exp(-w * w / 4.0); };

  const bool in_window = (a >= 0.0) && (a * q < d) && (b >= 0.0);
  if (!in_window) {
    probe.divergent = true;
    // exhibit the trend: inner-cutoff sequence of the x = 0 integral
    probe.divergence_trend.resize(6);
    for (int k = 0; k < 6; ++k) {
      const Real eps = std::pow(2.0, -(k + 4));
      probe.divergence_trend[k] = sphere_surface(d) * log_integral(
          [&](Real rho) {
            return std::pow(rho, d - 1) * std::pow(std::pow(rho, b - a) * g1(rho), q);
          },
          eps, 60.0);
    }
    return probe;
  }

  const Real probe_radii[] = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  probe.probe_radii.resize(7);
  probe.probe_values.resize(7);
  for (int m = 0; m < 7; ++m) {
    const Real X = probe_radii[m];
    probe.probe_radii[m] = X;
    Real val = 0;
    if (X == 0.0) {
      val = sphere_surface(d) * log_integral(
          [&](Real rho) {
            return std::pow(rho, d - 1) * std::pow(std::pow(rho, b - a) * g1(rho), q);
          },
          1e-12, 60.0);
    } else if (d >= 2) {
      Array nodes, weights;
      gauss_legendre(64, 0.0, pi, nodes, weights);
      val = sphere_surface(d - 1) * log_integral(
          [&](Real rho) {
            Real inner = 0;
            for (Index k = 0; k < nodes.size(); ++k) {
              const Real w =
                  std::sqrt(std::max(0.0, X * X + rho * rho - 2.0 * X * rho * std::cos(nodes[k])));
              inner += weights[k] * std::pow(std::pow(w, b) * g1(w), q) *
                       std::pow(std::sin(nodes[k]), d - 2);
            }
            return std::pow(rho, d - 1 - a * q) * inner;
          },
          1e-12, X + 60.0);
    } else {
      // d = 1: both rays, singular points at 0 and X
      auto h = [&](Real y) {
        return std::pow(std::abs(y), -a * q) * std::pow(std::pow(std::abs(X - y), b) * g1(X - y), q);
      };
      val = log_integral([&](Real u) { return h(-u); }, 1e-12, 60.0);
      const Real mid = X / 2.0;
      val += log_integral([&](Real u) { return h(u); }, 1e-12, mid);
      val += log_integral([&](Real u) { return h(X - u); }, 1e-12, mid);
      val += log_integral([&](Real u) { return h(X + u); }, 1e-12, 60.0);
    }
    probe.probe_values[m] = val;
  }
  probe.value = probe.probe_values.maxCoeff();
  return probe;
}

DivergenceReport optimality_probe(const std::string& case_name, int levels,
                                  const OptimalityProbeSpec& spec) {
  if (levels < 2) throw config_error("optimality_probe: need >= 2 levels");
  DivergenceReport rep;
  rep.case_name = case_name;
  rep.resolutions.resize(levels);
  rep.values.resize(levels);
  const int d = spec.d;

  if (case_name == "beyond_upper" || case_name == "upper_borderline") {
    const Real lp = case_name == "upper_borderline" ? spec.log_power : 0.0;
    auto datum = [&](Real rho) {
      Real v = std::pow(rho, -d);
      if (lp > 0.0) v *= std::pow(std::log(std::exp(1.0) + 1.0 / rho), -lp);
      return v;
    };
    for (int k = 0; k < levels; ++k) {
      const Real eps = std::pow(2.0, -(k + 3));
      rep.resolutions[k] = eps;
      rep.values[k] = convolve_point(d, spec.t, spec.x0, eps, 1.0, datum);
    }
  } else if (case_name == "lower_liminf") {
    auto bump = [](Real rho) {
      return rho < 1.0 ? std::pow(1.0 - rho * rho, 3.0) : 0.0;
    };
    const Real invq = std::isinf(spec.q) ? 0.0 : 1.0 / spec.q;
    for (int k = 0; k < levels; ++k) {
      const Real r = 0.1 * std::pow(2.0, -k);
      rep.resolutions[k] = r;
      const Real u = convolve_point(d, spec.t, r, 1e-14, 1.0, bump);
      rep.values[k] = std::pow(r, d * invq + spec.sprime) * std::abs(u);
    }
  } else {
    throw config_error("optimality_probe: unknown case '" + case_name + "'");
  }

  rep.monotone_growth = true;
  for (int k = 1; k < levels; ++k)
    rep.monotone_growth = rep.monotone_growth && rep.values[k] > rep.values[k - 1];
  rep.bounded_below = rep.values.minCoeff() >= 0.99 * rep.values[0] && rep.values[0] > 0;
  return rep;
}

}  // namespace hhlab
