#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "banach_oc/errors.hpp"

namespace banach_oc {

/// A point of the control space U = R^m (Euclidean).
using ControlVector = std::vector<double>;

inline void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("control dimension mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Radial projection onto the closed ball of radius R.
inline ControlVector project_ball(ControlVector u, double radius) {
  const double r = norm(u);
  if (r > radius) {
    const double s = radius / r;
    for (double& v : u) v *= s;
  }
  return u;
}

/// a + s * b
inline ControlVector axpy(std::span<const double> a, double s, std::span<const double> b) {
  require_same_dim(a, b);
  ControlVector out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * b[i];
  return out;
}

inline ControlVector scaled(double s, std::span<const double> a) {
  ControlVector out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

}  // namespace banach_oc
