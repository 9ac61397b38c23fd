#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace hhlab {

using Real = double;
using Array = Eigen::ArrayXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr Real inf = std::numeric_limits<Real>::infinity();
inline constexpr Real pi = 3.14159265358979323846264338327950288;

// Raised when a discretized norm or kernel application produces a
// non-finite value (the signature of non-integrable data).
class quadrature_overflow : public std::runtime_error {
public:
  explicit quadrature_overflow(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a requested computation is inconsistent with its admissibility
// preconditions or with the supplied configuration.
class config_error : public std::invalid_argument {
public:
  explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// Surface measure of the unit sphere S^{d-1} in R^d.
Real sphere_surface(int d);

// Least-squares slope of y against x.
Real fit_slope(const Array& x, const Array& y);

// Composite Gauss-Legendre nodes/weights on [a,b] (order-point rule).
void gauss_legendre(int order, Real a, Real b, Array& nodes, Array& weights);

// Runs fn(i) for i in [0,n) on up to `threads` workers. Outputs must go to
// disjoint slots; the schedule is deterministic.
void parallel_for(Index n, int threads, const std::function<void(Index)>& fn);

}  // namespace hhlab
