#pragma once

#include "hhlab/common.hpp"

#include <memory>
#include <optional>
#include <string>

namespace hhlab {

// Geometric (log-spaced) radial grid.  The ratio between neighbours is
// 2^(1/points_per_octave), so dilation by any dyadic power 2^(k/ppo) is an
// exact index shift.
struct RadialGeometry {
  int d = 3;
  Index n = 4096;
  Real r_max = 32.0;
  int points_per_octave = 200;
  Real log_step = 0.0;  // ln 2 / points_per_octave
  Array radii;

  static std::shared_ptr<const RadialGeometry> make(int d, Index n, Real r_max,
                                                    int points_per_octave);
  Real r_min() const { return radii[0]; }
  // index displacement of the dilation r -> lambda * r; nullopt when lambda is
  // not a grid power
  std::optional<Index> shift_of(Real lambda) const;
};

// Uniform tensor grid on [-L, L]^d with half-cell offset (never samples the
// origin).  d in {1, 2}.
struct GridGeometry {
  int d = 1;
  Index n = 256;  // per axis
  Real half_extent = 16.0;
  Real h = 0.0;
  Array axis;  // axis[i] = (i + 1/2) h - L

  static std::shared_ptr<const GridGeometry> make(int d, Index n, Real half_extent);
  Index size() const { return d == 1 ? n : n * n; }
  // |x| at flattened index (row-major: idx = i * n + j for d = 2)
  Real radius_at(Index idx) const;
};

enum class FieldKind { radial, grid };

// A spatial sample of a function: radial profile or full tensor grid.
class Field {
public:
  static Field radial(std::shared_ptr<const RadialGeometry> geom, Array values,
                      std::optional<Real> homogeneity = std::nullopt);
  static Field grid(std::shared_ptr<const GridGeometry> geom, Array values,
                    std::optional<Real> homogeneity = std::nullopt);

  FieldKind kind() const { return kind_; }
  int dim() const;
  Index size() const { return values_.size(); }
  const Array& values() const { return values_; }

  const RadialGeometry& radial_geometry() const;
  const GridGeometry& grid_geometry() const;
  const std::shared_ptr<const RadialGeometry>& radial_geometry_ptr() const { return rgeom_; }
  const std::shared_ptr<const GridGeometry>& grid_geometry_ptr() const { return ggeom_; }

  // known exact homogeneity degree: f(lambda x) = lambda^degree f(x)
  std::optional<Real> homogeneity() const { return homogeneity_; }

  // new field on the same geometry (homogeneity metadata dropped)
  Field with_values(Array values) const;

  bool same_discretization(const Field& other) const;

private:
  Field() = default;
  FieldKind kind_ = FieldKind::radial;
  std::shared_ptr<const RadialGeometry> rgeom_;
  std::shared_ptr<const GridGeometry> ggeom_;
  Array values_;
  std::optional<Real> homogeneity_;
};

struct NormSpec {
  Real q = 2.0;  // in [1, inf]
  Real s = 0.0;
};

struct NormEstimate {
  Real value = 0;
  Real tail_error = 0;  // estimated mass beyond the truncated domain
};

// || |x|^s f ||_{L^q}; q = inf takes the max over samples.  Throws
// quadrature_overflow when the discretized integral is not finite.
Real weighted_norm(const Field& f, const NormSpec& spec);
NormEstimate weighted_norm_detailed(const Field& f, const NormSpec& spec);

// plain integral of f over R^d under the field's quadrature
Real integrate(const Field& f);
// integral of f * g (g given as samples on the same discretization)
Real integrate_product(const Field& f, const Array& g);

struct InterpolationPair {
  Real lhs = 0;  // ||f||_{q,s} at the interpolated pair
  Real rhs = 0;  // ||f||_{q1,s1}^theta ||f||_{q2,s2}^(1-theta)
  Real q = 0, s = 0;
};

InterpolationPair interpolation_pair(const Field& f, Real q1, Real s1, Real q2, Real s2,
                                     Real theta);

// Canonical data families.
//   homogeneous        amplitude |x|^-exponent
//   homogeneous_inner  amplitude |x|^-exponent on |x| < radius   (else 0)
//   homogeneous_outer  amplitude |x|^-exponent on |x| > radius   (else 0)
//   borderline         |x|^-d on |x| <= radius                    (not integrable)
//   log_borderline     |x|^-d (log(e + 1/|x|))^-log_power on |x| <= radius
//   bump               amplitude (1 - (|x|/radius)^2)^3 on |x| < radius
//   annular_bump       C^2 plateau between radius and outer_radius
//   gaussian           amplitude exp(-|x|^2 / (4 sigma))
//   heat_kernel        (4 pi sigma)^{-d/2} exp(-|x|^2 / (4 sigma))
//   indicator          amplitude on |x| <= radius
//   constant           amplitude
//   random_bumps       seeded superposition of off-center Gaussians
struct SampleSpec {
  std::string family = "gaussian";
  Real amplitude = 1.0;
  Real exponent = 1.0;
  Real radius = 1.0;
  Real outer_radius = 2.0;
  Real sigma = 1.0;
  Real log_power = 1.0;
  unsigned long long seed = 1;
};

Field sample_field(const SampleSpec& spec, std::shared_ptr<const RadialGeometry> geom);
Field sample_field(const SampleSpec& spec, std::shared_ptr<const GridGeometry> geom);

}  // namespace hhlab
