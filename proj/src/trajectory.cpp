#include "hhlab/trajectory.hpp"

#include <cmath>

namespace hhlab {

Trajectory::Trajectory(Array times, std::vector<Field> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
  if (times_.size() != static_cast<Index>(slices_.size()))
    throw config_error("Trajectory: times/slices size mismatch");
  if (times_.size() == 0) throw config_error("Trajectory: empty");
  for (Index k = 0; k < times_.size(); ++k) {
    if (!(times_[k] >= 0)) throw config_error("Trajectory: times must be nonnegative");
    if (k > 0 && !(times_[k] > times_[k - 1]))
      throw config_error("Trajectory: times must be strictly increasing");
  }
  for (const auto& f : slices_)
    if (!f.same_discretization(slices_.front()))
      throw config_error("Trajectory: slices must share one discretization");
}

const Array& Trajectory::norms(const NormSpec& spec) const {
  const auto key = std::make_pair(spec.q, spec.s);
  auto it = norm_cache_.find(key);
  if (it != norm_cache_.end()) return it->second;
  Array vals(times_.size());
  for (Index k = 0; k < times_.size(); ++k) vals[k] = weighted_norm(slices_[static_cast<size_t>(k)], spec);
  return norm_cache_.emplace(key, std::move(vals)).first->second;
}

Index Trajectory::index_of_time(Real t) const {
  Index best = 0;
  Real dist = std::abs(times_[0] - t);
  for (Index k = 1; k < times_.size(); ++k) {
    const Real dk = std::abs(times_[k] - t);
    if (dk < dist) {
      dist = dk;
      best = k;
    }
  }
  return best;
}

Real kato_norm(const Trajectory& u, const NormSpec& spec, Real ref_s, Regime /*mode*/) {
  if (!(spec.s < ref_s))
    throw std::domain_error("kato_norm: requires s < reference weight order");
  const Array& nrm = u.norms(spec);
  const Real power = 0.5 * (ref_s - spec.s);
  Real sup = 0;
  for (Index k = 0; k < u.size(); ++k) {
    const Real t = u.times()[k];
    if (t <= 0) continue;  // t = 0 contributes 0
    sup = std::max(sup, std::pow(t, power) * nrm[k]);
  }
  return sup;
}

namespace {

template <class SliceNorm>
Real weighted_sup(const Trajectory& a, const Trajectory& b, SliceNorm&& norm_of_diff, Real power) {
  if (a.size() != b.size()) throw config_error("trajectory distance: mesh mismatch");
  Real sup = 0;
  for (Index k = 0; k < a.size(); ++k) {
    if (std::abs(a.times()[k] - b.times()[k]) >
        1e-12 * std::max({1.0, a.times()[k], b.times()[k]}))
      throw config_error("trajectory distance: time mesh mismatch");
    const Real t = a.times()[k];
    const Real w = power == 0.0 ? 1.0 : (t <= 0 ? 0.0 : std::pow(t, power));
    if (w == 0.0) continue;
    sup = std::max(sup, w * norm_of_diff(k));
  }
  return sup;
}

}  // namespace

Real kato_distance(const Trajectory& a, const Trajectory& b, const NormSpec& spec, Real ref_s) {
  if (!(spec.s < ref_s))
    throw std::domain_error("kato_distance: requires s < reference weight order");
  return weighted_sup(
      a, b,
      [&](Index k) {
        return weighted_norm(a.slice(k).with_values(a.slice(k).values() - b.slice(k).values()),
                             spec);
      },
      0.5 * (ref_s - spec.s));
}

Real sup_norm_distance(const Trajectory& a, const Trajectory& b, const NormSpec& spec) {
  return weighted_sup(
      a, b,
      [&](Index k) {
        return weighted_norm(a.slice(k).with_values(a.slice(k).values() - b.slice(k).values()),
                             spec);
      },
      0.0);
}

Real sup_norm(const Trajectory& a, const NormSpec& spec) {
  const Array& nrm = a.norms(spec);
  return nrm.maxCoeff();
}

}  // namespace hhlab
