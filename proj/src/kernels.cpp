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

#include "rsfista/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rsfista/errors.hpp"

namespace rsfista {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

// Six-point Gauss-Legendre rule on [-1, 1].
constexpr double kGLNode[6] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                               0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
constexpr double kGLWeight[6] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                 0.4679139345726910, 0.3607615730481386, 0.1713244923791704};

double sinc_half(double omega, double h) {
  // sin(omega h / 2) / (omega h / 2), written so that omega -> 0 is exact.
  if (std::abs(omega) < 1e-12) return 1.0;
  const double t = 0.5 * omega * h;
  if (std::abs(t) < 1e-8) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}

// Integral of cos(<w, x>) over a box.
double cosine_box_integral(const Box& box, const Point& w) {
  const Point c = box.midpoint();
  double v = box.measure() * std::cos(dot(w, c, box.dim));
  for (int k = 0; k < box.dim; ++k) v *= sinc_half(w[k], box.width(k));
  return v;
}

using Polygon = std::vector<Point>;

// Keeps the part of `poly` where <n, x> >= c.
Polygon clip_half_plane(const Polygon& poly, const Point& n, double c) {
  Polygon out;
  if (poly.empty()) return out;
  out.reserve(poly.size() + 2);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    const double fp = n[0] * p[0] + n[1] * p[1] - c;
    const double fq = n[0] * q[0] + n[1] * q[1] - c;
    if (fp >= 0.0) out.push_back(p);
    if ((fp >= 0.0) != (fq >= 0.0)) {
      const double t = fp / (fp - fq);
      out.push_back(Point{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

double shoelace(const Polygon& poly) {
  if (poly.size() < 3) return 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * std::abs(a);
}

Polygon box_polygon(const Box& b) {
  return {Point{b.lo[0], b.lo[1]}, Point{b.hi[0], b.lo[1]}, Point{b.hi[0], b.hi[1]},
          Point{b.lo[0], b.hi[1]}};
}

Polygon clip_slab(Polygon poly, const Point& dir, double lo, double hi) {
  poly = clip_half_plane(poly, dir, lo);
  return clip_half_plane(poly, Point{-dir[0], -dir[1]}, -hi);
}

// Interval {x : lo <= d x < hi} on the real line, as [a, b].
std::pair<double, double> slab_interval(double d, double lo, double hi) {
  if (d == 0.0) {
    if (lo <= 0.0 && 0.0 < hi) return {-INFINITY, INFINITY};
    return {0.0, 0.0};
  }
  return d > 0 ? std::pair{lo / d, hi / d} : std::pair{hi / d, lo / d};
}

double gaussian_peak(double sigma, int dim) {
  return std::pow(2.0 * kPi * sigma * sigma, -0.5 * dim);
}

}  // namespace

double normal_mass(double a, double b) {
  if (a > b) return -normal_mass(b, a);
  if (a == b) return 0.0;
  const double reach = std::max(std::abs(a), std::abs(b));
  if (std::isfinite(reach) && (b - a) * (1.0 + reach) <= 0.5) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double t = mid + half * kGLNode[i];
      s += kGLWeight[i] * std::exp(-0.5 * t * t);
    }
    return s * half / std::sqrt(2.0 * kPi);
  }
  if (a >= 0.0) return 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
  return 0.5 * (std::erf(b / kSqrt2) - std::erf(a / kSqrt2));
}

double slab_box_measure(const Box& box, const Point& dir, double lo, double hi) {
  if (box.dim == 1) {
    const auto [a, b] = slab_interval(dir[0], lo, hi);
    return std::max(0.0, std::min(b, box.hi[0]) - std::max(a, box.lo[0]));
  }
  return shoelace(clip_slab(box_polygon(box), dir, lo, hi));
}

double slab_pair_box_measure(const Box& box, const Strip& s, const Strip& t) {
  if (box.dim == 1) {
    const auto [a0, b0] = slab_interval(s.direction[0], s.lo, s.hi);
    const auto [a1, b1] = slab_interval(t.direction[0], t.lo, t.hi);
    const double a = std::max({a0, a1, box.lo[0]});
    const double b = std::min({b0, b1, box.hi[0]});
    return std::max(0.0, b - a);
  }
  Polygon p = clip_slab(box_polygon(box), s.direction, s.lo, s.hi);
  p = clip_slab(p, t.direction, t.lo, t.hi);
  return shoelace(p);
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Indicator: return "indicator";
    case KernelKind::Cosine: return "cosine";
    case KernelKind::Gaussian: return "gaussian";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "indicator") return KernelKind::Indicator;
  if (name == "cosine") return KernelKind::Cosine;
  if (name == "gaussian") return KernelKind::Gaussian;
  throw InvalidParameter("unknown kernel kind '" + name + "'");
}

KernelOperator KernelOperator::indicator(Box domain, std::vector<Strip> strips) {
  if (strips.empty()) throw InvalidParameter("operator needs at least one kernel");
  KernelOperator op;
  op.kind_ = KernelKind::Indicator;
  op.domain_ = domain;
  op.m_ = static_cast<int>(strips.size());
  int blocks = 0;
  for (Strip& s : strips) {
    const double len = norm(s.direction, domain.dim);
    if (!(len > 0.0)) throw InvalidParameter("strip direction must be nonzero");
    if (!(s.hi >= s.lo)) throw InvalidParameter("strip offsets must satisfy lo <= hi");
    if (s.block < 0) throw InvalidParameter("strip block ids must be nonnegative");
    if (domain.dim == 1) s.direction[1] = 0.0;
    blocks = std::max(blocks, s.block + 1);
  }
  op.strips_ = std::move(strips);
  op.blocks_ = blocks;
  return op;
}

KernelOperator KernelOperator::cosine(Box domain, std::vector<Point> frequencies) {
  if (frequencies.empty()) throw InvalidParameter("operator needs at least one kernel");
  KernelOperator op;
  op.kind_ = KernelKind::Cosine;
  op.domain_ = domain;
  op.m_ = static_cast<int>(frequencies.size());
  for (Point& w : frequencies)
    if (domain.dim == 1) w[1] = 0.0;
  op.points_ = std::move(frequencies);
  op.cache_seminorms();
  return op;
}

KernelOperator KernelOperator::gaussian(Box domain, std::vector<Point> centers, double sigma) {
  if (centers.empty()) throw InvalidParameter("operator needs at least one kernel");
  if (!(sigma > 0.0)) throw InvalidParameter("gaussian width must be positive");
  KernelOperator op;
  op.kind_ = KernelKind::Gaussian;
  op.domain_ = domain;
  op.m_ = static_cast<int>(centers.size());
  for (Point& c : centers)
    if (domain.dim == 1) c[1] = 0.0;
  op.points_ = std::move(centers);
  op.sigma_ = sigma;
  op.cache_seminorms();
  return op;
}

KernelOperator KernelOperator::gaussian_lattice(Box domain, GaussianLattice lattice, double sigma) {
  if (lattice.per_axis < 1) throw InvalidParameter("lattice needs at least one center per axis");
  if (!(lattice.spacing > 0.0)) throw InvalidParameter("lattice spacing must be positive");
  std::vector<Point> centers;
  const int n = lattice.per_axis;
  if (domain.dim == 1) {
    for (int i = 0; i < n; ++i) centers.push_back({lattice.origin[0] + i * lattice.spacing, 0.0});
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        centers.push_back(
            {lattice.origin[0] + i * lattice.spacing, lattice.origin[1] + j * lattice.spacing});
  }
  KernelOperator op = gaussian(domain, std::move(centers), sigma);
  op.lattice_ = lattice;
  op.cache_seminorms();
  return op;
}

void KernelOperator::set_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidParameter("kernel scale must be positive");
  scale_ = s;
}

double KernelOperator::normalize() {
  const double factor = 1.0 / operator_norm_bound();
  set_scale(scale_ * factor);
  return factor;
}

void KernelOperator::check_inside(const Box& box) const {
  if (!domain_.encloses(box)) throw DomainMismatch("cell lies outside the operator domain");
}

Eigen::VectorXd KernelOperator::kernel_values(const Point& x) const {
  const int d = dim();
  Eigen::VectorXd v(m_);
  switch (kind_) {
    case KernelKind::Indicator:
      for (int j = 0; j < m_; ++j) {
        const Strip& s = strips_[j];
        const double t = dot(s.direction, x, d);
        v[j] = (domain_.contains(x) && s.lo <= t && t < s.hi) ? scale_ : 0.0;
      }
      break;
    case KernelKind::Cosine:
      for (int j = 0; j < m_; ++j) v[j] = scale_ * std::cos(dot(points_[j], x, d));
      break;
    case KernelKind::Gaussian: {
      const double peak = scale_ * gaussian_peak(sigma_, d);
      const double inv = 1.0 / (2.0 * sigma_ * sigma_);
      for (int j = 0; j < m_; ++j) {
        const Point r{x[0] - points_[j][0], x[1] - points_[j][1]};
        v[j] = peak * std::exp(-dot(r, r, d) * inv);
      }
      break;
    }
  }
  return v;
}

Eigen::VectorXd KernelOperator::cell_inner_products(const Box& box) const {
  check_inside(box);
  const int d = dim();
  Eigen::VectorXd v(m_);
  switch (kind_) {
    case KernelKind::Indicator:
      for (int j = 0; j < m_; ++j)
        v[j] = scale_ * slab_box_measure(box, strips_[j].direction, strips_[j].lo, strips_[j].hi);
      break;
    case KernelKind::Cosine:
      for (int j = 0; j < m_; ++j) v[j] = scale_ * cosine_box_integral(box, points_[j]);
      break;
    case KernelKind::Gaussian:
      for (int j = 0; j < m_; ++j) {
        double p = scale_;
        for (int k = 0; k < d; ++k)
          p *= normal_mass((box.lo[k] - points_[j][k]) / sigma_, (box.hi[k] - points_[j][k]) / sigma_);
        v[j] = p;
      }
      break;
  }
  return v;
}

Eigen::VectorXd KernelOperator::cell_inner_products(const DyadicMesh& mesh, const Cell& cell) const {
  return cell_inner_products(mesh.cell_box(cell));
}

Eigen::MatrixXd KernelOperator::mesh_columns(const DyadicMesh& mesh) const {
  check_inside(mesh.domain());
  Eigen::MatrixXd cols(m_, static_cast<Eigen::Index>(mesh.leaf_count()));
  for (std::size_t i = 0; i < mesh.leaf_count(); ++i)
    cols.col(static_cast<Eigen::Index>(i)) = cell_inner_products(mesh, mesh.leaves()[i]);
  return cols;
}

Eigen::VectorXd KernelOperator::forward(const PiecewiseConstant& u) const {
  u.check_consistent();
  const DyadicMesh& mesh = u.mesh();
  if (mesh.dim() != dim()) throw DomainMismatch("mesh dimension differs from operator dimension");
  check_inside(mesh.domain());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
  for (std::size_t i = 0; i < mesh.leaf_count(); ++i) {
    const double c = u.coeffs()[static_cast<Eigen::Index>(i)];
    if (c != 0.0) out += c * cell_inner_products(mesh, mesh.leaves()[i]);
  }
  return out;
}

double KernelOperator::adjoint_value(const Eigen::VectorXd& phi, const Point& x) const {
  if (phi.size() != m_) throw DomainMismatch("dual vector length differs from m");
  return kernel_values(x).dot(phi);
}

AdjointEval KernelOperator::adjoint_value_grad(const Eigen::VectorXd& phi, const Point& x) const {
  if (phi.size() != m_) throw DomainMismatch("dual vector length differs from m");
  if (kind_ == KernelKind::Indicator)
    throw UnsupportedOperation("indicator kernels have no gradient");
  const int d = dim();
  AdjointEval out;
  if (kind_ == KernelKind::Cosine) {
    for (int j = 0; j < m_; ++j) {
      const double a = dot(points_[j], x, d);
      out.value += phi[j] * std::cos(a);
      const double s = -phi[j] * std::sin(a);
      for (int k = 0; k < d; ++k) out.grad[k] += s * points_[j][k];
    }
  } else {
    const double inv = 1.0 / (2.0 * sigma_ * sigma_);
    const double isig2 = 1.0 / (sigma_ * sigma_);
    for (int j = 0; j < m_; ++j) {
      const Point r{x[0] - points_[j][0], x[1] - points_[j][1]};
      const double e = phi[j] * std::exp(-dot(r, r, d) * inv);
      out.value += e;
      for (int k = 0; k < d; ++k) out.grad[k] -= e * r[k] * isig2;
    }
    const double peak = gaussian_peak(sigma_, d);
    out.value *= peak;
    for (int k = 0; k < d; ++k) out.grad[k] *= peak;
  }
  out.value *= scale_;
  for (int k = 0; k < d; ++k) out.grad[k] *= scale_;
  return out;
}

std::array<double, 4> KernelOperator::adjoint_hessian(const Eigen::VectorXd& phi,
                                                      const Point& x) const {
  if (phi.size() != m_) throw DomainMismatch("dual vector length differs from m");
  if (kind_ == KernelKind::Indicator)
    throw UnsupportedOperation("indicator kernels have no Hessian");
  const int d = dim();
  std::array<double, 4> h{0, 0, 0, 0};
  if (kind_ == KernelKind::Cosine) {
    for (int j = 0; j < m_; ++j) {
      const double c = -phi[j] * std::cos(dot(points_[j], x, d));
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) h[2 * a + b] += c * points_[j][a] * points_[j][b];
    }
  } else {
    const double s2 = sigma_ * sigma_;
    for (int j = 0; j < m_; ++j) {
      const Point r{x[0] - points_[j][0], x[1] - points_[j][1]};
      const double e = phi[j] * std::exp(-dot(r, r, d) / (2.0 * s2));
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          h[2 * a + b] += e * (r[a] * r[b] / (s2 * s2) - (a == b ? 1.0 / s2 : 0.0));
    }
    const double peak = gaussian_peak(sigma_, d);
    for (double& v : h) v *= peak;
  }
  for (double& v : h) v *= scale_;
  return h;
}

double KernelOperator::indicator_sup_bound(const Eigen::VectorXd& phi, const Box& box) const {
  if (kind_ != KernelKind::Indicator)
    throw UnsupportedOperation("indicator_sup_bound needs indicator kernels");
  if (phi.size() != m_) throw DomainMismatch("dual vector length differs from m");
  const int d = dim();
  std::vector<double> block_max(static_cast<std::size_t>(blocks_), 0.0);
  for (int j = 0; j < m_; ++j) {
    if (phi[j] == 0.0) continue;
    const Strip& s = strips_[j];
    // Range of <x, dir> over the box.
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < d; ++k) {
      const double a = s.direction[k] * box.lo[k];
      const double b = s.direction[k] * box.hi[k];
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    if (s.lo < hi && s.hi > lo) {
      auto& slot = block_max[static_cast<std::size_t>(s.block)];
      slot = std::max(slot, std::abs(phi[j]));
    }
  }
  double total = 0.0;
  for (double v : block_max) total += v;
  return scale_ * total;
}

Eigen::MatrixXd KernelOperator::gram_matrix() const {
  const int d = dim();
  Eigen::MatrixXd g(m_, m_);
  const double s2 = scale_ * scale_;
  for (int i = 0; i < m_; ++i) {
    for (int j = i; j < m_; ++j) {
      double v = 0.0;
      switch (kind_) {
        case KernelKind::Indicator:
          v = slab_pair_box_measure(domain_, strips_[i], strips_[j]);
          break;
        case KernelKind::Cosine: {
          const Point& a = points_[i];
          const Point& b = points_[j];
          v = 0.5 * (cosine_box_integral(domain_, {a[0] - b[0], a[1] - b[1]}) +
                     cosine_box_integral(domain_, {a[0] + b[0], a[1] + b[1]}));
          break;
        }
        case KernelKind::Gaussian: {
          const Point& a = points_[i];
          const Point& b = points_[j];
          const Point r{a[0] - b[0], a[1] - b[1]};
          v = std::exp(-dot(r, r, d) / (4.0 * sigma_ * sigma_));
          for (int k = 0; k < d; ++k) {
            const double c = 0.5 * (a[k] + b[k]);
            v *= normal_mass(kSqrt2 * (domain_.lo[k] - c) / sigma_,
                             kSqrt2 * (domain_.hi[k] - c) / sigma_) /
                 std::sqrt(4.0 * kPi * sigma_ * sigma_);
          }
          break;
        }
      }
      g(i, j) = g(j, i) = s2 * v;
    }
  }
  return g;
}

double KernelOperator::raw_operator_norm_bound() const {
  const int d = dim();
  switch (kind_) {
    case KernelKind::Indicator: {
      std::vector<double> block_max(static_cast<std::size_t>(blocks_), 0.0);
      for (const Strip& s : strips_) {
        auto& slot = block_max[static_cast<std::size_t>(s.block)];
        slot = std::max(slot, slab_box_measure(domain_, s.direction, s.lo, s.hi));
      }
      double total = 0.0;
      for (double v : block_max) total += v;
      return std::sqrt(total);
    }
    case KernelKind::Cosine:
      return std::sqrt(static_cast<double>(m_) * domain_.measure());
    case KernelKind::Gaussian: {
      const double sig2 = sigma_ * sigma_;
      if (lattice_) {
        const int mh = lattice_->per_axis;
        const double dl = lattice_->spacing;
        double row = 0.0;
        for (int j = -2 * mh; j <= 2 * mh; ++j) row += std::exp(-dl * dl * j * j / (4.0 * sig2));
        row /= std::sqrt(4.0 * kPi * sig2);
        return std::sqrt(std::pow(row, d));
      }
      // Row sums of the full-space Gram matrix dominate the boxed one.
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        double row = 0.0;
        for (int j = 0; j < m_; ++j) {
          const Point r{points_[i][0] - points_[j][0], points_[i][1] - points_[j][1]};
          row += std::exp(-dot(r, r, d) / (4.0 * sig2));
        }
        best = std::max(best, row);
      }
      return std::sqrt(best * std::pow(4.0 * kPi * sig2, -0.5 * d));
    }
  }
  return 0.0;
}

double KernelOperator::operator_norm_bound() const { return scale_ * raw_operator_norm_bound(); }

std::optional<double> KernelOperator::lattice_seminorm(int k) const {
  if (!lattice_) return std::nullopt;
  const int d = dim();
  const int mh = lattice_->per_axis;
  const double dl = lattice_->spacing;
  // The lattice sums hold for points whose nearest lattice offset lies in
  // [-mh - 1, 2 mh]; require the domain to sit well inside that window.
  for (int a = 0; a < d; ++a) {
    const double lo = lattice_->origin[a] - mh * dl;
    const double hi = lattice_->origin[a] + (2 * mh - 1) * dl;
    if (domain_.lo[a] < lo || domain_.hi[a] > hi) return std::nullopt;
  }
  const double delta = std::sqrt(static_cast<double>(d)) / 2.0;
  const double r2 = dl * dl / (sigma_ * sigma_);
  double sum = 0.0;
  const int reach = 2 * mh;
  const int jy_lo = d == 2 ? -reach : 0;
  const int jy_hi = d == 2 ? reach : 0;
  for (int jy = jy_lo; jy <= jy_hi; ++jy) {
    for (int jx = -reach; jx <= reach; ++jx) {
      const double len = std::sqrt(static_cast<double>(jx) * jx + static_cast<double>(jy) * jy);
      const double gap = std::max(0.0, len - delta);
      const double e = std::exp(-r2 * gap * gap);
      switch (k) {
        case 0: sum += e; break;
        case 1: sum += (len + delta) * (len + delta) * e; break;
        default: {
          const double p = 1.0 + r2 * (len + delta) * (len + delta);
          sum += p * p * e;
        }
      }
    }
  }
  const double peak = gaussian_peak(sigma_, d);
  switch (k) {
    case 0: return peak * std::sqrt(sum);
    case 1: return peak / sigma_ * (dl / sigma_) * std::sqrt(sum);
    default: return peak / (sigma_ * sigma_) * std::sqrt(sum);
  }
}

double KernelOperator::raw_seminorm(int k) const {
  const double root_m = std::sqrt(static_cast<double>(m_));
  if (kind_ == KernelKind::Cosine) {
    double amax = 0.0;
    for (const Point& w : points_) amax = std::max(amax, norm(w, dim()));
    return root_m * std::pow(amax, k);
  }
  if (auto v = lattice_seminorm(k)) return *v;
  // Generic bound: sqrt(m) times the sup of |grad^k psi|.
  const double peak = gaussian_peak(sigma_, dim());
  const double e = std::exp(-0.5);
  switch (k) {
    case 0: return root_m * peak;
    case 1: return root_m * peak * e / sigma_;
    default: return root_m * peak * 2.0 * e / (sigma_ * sigma_);
  }
}

void KernelOperator::cache_seminorms() {
  for (int k = 0; k < 3; ++k) raw_semi_[static_cast<std::size_t>(k)] = raw_seminorm(k);
}

double KernelOperator::smoothness_seminorm(int k) const {
  if (kind_ == KernelKind::Indicator)
    throw UnsupportedOperation("indicator kernels are not smooth");
  if (k < 0 || k > 2) throw InvalidParameter("seminorm order must be 0, 1 or 2");
  return scale_ * raw_semi_[static_cast<std::size_t>(k)];
}

SeminormReport KernelOperator::seminorms() const {
  SeminormReport r;
  r.op_norm = operator_norm_bound();
  r.smooth = smooth();
  if (r.smooth) {
    r.c0 = smoothness_seminorm(0);
    r.c1 = smoothness_seminorm(1);
    r.c2 = smoothness_seminorm(2);
  } else {
    // Sup of |A*phi| over Ω: at each point one strip per block is active.
    r.c0 = scale_ * std::sqrt(static_cast<double>(blocks_));
  }
  return r;
}

}  // namespace rsfista
