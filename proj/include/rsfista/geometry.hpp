// Copyright 2026 The rsfista Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RSFISTA_GEOMETRY_HPP
#define RSFISTA_GEOMETRY_HPP

#include <array>
#include <cmath>

namespace rsfista {

/// Points in R^1 or R^2. For d = 1 the second coordinate is ignored.
using Point = std::array<double, 2>;

/// Axis-aligned box in R^d, d in {1, 2}.
struct Box {
  int dim = 1;
  Point lo{0.0, 0.0};
  Point hi{1.0, 0.0};

  static Box interval(double a, double b) { return Box{1, {a, 0.0}, {b, 0.0}}; }
  static Box square(double a, double b) { return Box{2, {a, a}, {b, b}}; }

  double width(int axis) const { return hi[axis] - lo[axis]; }

  double measure() const {
    double m = 1.0;
    for (int k = 0; k < dim; ++k) m *= width(k);
    return m;
  }

  Point midpoint() const {
    Point c{0.0, 0.0};
    for (int k = 0; k < dim; ++k) c[k] = 0.5 * (lo[k] + hi[k]);
    return c;
  }

  double diameter() const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += width(k) * width(k);
    return std::sqrt(s);
  }

  bool contains(const Point& x) const {
    for (int k = 0; k < dim; ++k)
      if (x[k] < lo[k] || x[k] > hi[k]) return false;
    return true;
  }

  /// True when `other` lies inside this box, up to a relative slack.
  bool encloses(const Box& other, double slack = 1e-12) const {
    if (other.dim != dim) return false;
    for (int k = 0; k < dim; ++k) {
      const double tol = slack * (std::abs(lo[k]) + std::abs(hi[k]) + 1.0);
      if (other.lo[k] < lo[k] - tol || other.hi[k] > hi[k] + tol) return false;
    }
    return true;
  }
};

inline double dot(const Point& a, const Point& b, int dim) {
  double s = a[0] * b[0];
  if (dim == 2) s += a[1] * b[1];
  return s;
}

inline double norm(const Point& a, int dim) { return std::sqrt(dot(a, a, dim)); }

}  // namespace rsfista

#endif  // RSFISTA_GEOMETRY_HPP
