#pragma once

#include "hhlab/field.hpp"

#include <map>
#include <vector>

namespace hhlab {

enum class Regime { critical, subcritical };

// Time-indexed sequence of fields on one shared discretization, with cached
// per-time weighted norms.  Immutable after construction; the norm cache is
// write-once per (q, s) key under a single-writer discipline.
class Trajectory {
public:
  Trajectory() = default;
  Trajectory(Array times, std::vector<Field> slices);

  Index size() const { return times_.size(); }
  const Array& times() const { return times_; }
  const Field& slice(Index k) const { return slices_[static_cast<size_t>(k)]; }
  const std::vector<Field>& slices() const { return slices_; }

  // per-time weighted norms, cached by (q, s)
  const Array& norms(const NormSpec& spec) const;

  // nearest time index (times are strictly increasing)
  Index index_of_time(Real t) const;

private:
  Array times_;
  std::vector<Field> slices_;
  mutable std::map<std::pair<Real, Real>, Array> norm_cache_;
};

// sup over trajectory times of t^{(ref_s - s)/2} ||u(t)||_{q, s}; t = 0
// contributes 0 through the positive power.  Requires spec.s < ref_s.
Real kato_norm(const Trajectory& u, const NormSpec& spec, Real ref_s, Regime mode);

// same weighted sup applied to the slice-wise difference of two trajectories
// on a common mesh
Real kato_distance(const Trajectory& a, const Trajectory& b, const NormSpec& spec, Real ref_s);

// sup over times of ||a(t) - b(t)||_{q, s}
Real sup_norm_distance(const Trajectory& a, const Trajectory& b, const NormSpec& spec);

// sup over times of ||a(t)||_{q, s}
Real sup_norm(const Trajectory& a, const NormSpec& spec);

}  // namespace hhlab
