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

#ifndef RSFISTA_KERNELS_HPP
#define RSFISTA_KERNELS_HPP

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "rsfista/geometry.hpp"
#include "rsfista/mesh.hpp"

namespace rsfista {

enum class KernelKind { Indicator, Cosine, Gaussian };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Slab {x : lo <= <x, direction> < hi}. Strips sharing a block id are
/// declared pairwise disjoint.
struct Strip {
  Point direction{1.0, 0.0};
  double lo = 0.0;
  double hi = 1.0;
  int block = 0;
};

/// Regular grid of Gaussian centers origin + spacing * (i_0, ..., i_{d-1}),
/// i_k in [0, per_axis). Kernel j has i_0 varying fastest.
struct GaussianLattice {
  Point origin{0.0, 0.0};
  double spacing = 1.0;
  int per_axis = 1;
};

/// Bounds on the operator norm and on the C^k seminorms of the adjoint,
/// all for the scaled kernels with respect to the l2 norm of the dual.
struct SeminormReport {
  double op_norm = 0.0;
  double c0 = 0.0;
  std::optional<double> c1;
  std::optional<double> c2;
  bool smooth = false;
};

struct AdjointEval {
  double value = 0.0;
  Point grad{0.0, 0.0};
};

/// Forward map (Au)_j = <psi_j, u> over a box domain, with kernels
/// multiplied by a positive scale.
class KernelOperator {
 public:
  static KernelOperator indicator(Box domain, std::vector<Strip> strips);
  static KernelOperator cosine(Box domain, std::vector<Point> frequencies);
  static KernelOperator gaussian(Box domain, std::vector<Point> centers, double sigma);
  static KernelOperator gaussian_lattice(Box domain, GaussianLattice lattice, double sigma);

  KernelKind kind() const { return kind_; }
  int m() const { return m_; }
  int dim() const { return domain_.dim; }
  const Box& domain() const { return domain_; }
  double scale() const { return scale_; }
  bool smooth() const { return kind_ != KernelKind::Indicator; }

  const std::vector<Strip>& strips() const { return strips_; }
  const std::vector<Point>& frequencies() const { return points_; }
  const std::vector<Point>& centers() const { return points_; }
  double sigma() const { return sigma_; }
  const std::optional<GaussianLattice>& lattice() const { return lattice_; }

  void set_scale(double s);
  /// Rescales so that operator_norm_bound() equals 1; returns the factor
  /// by which the kernels were multiplied.
  double normalize();

  /// ψ_j(x) for all j, scaled.
  Eigen::VectorXd kernel_values(const Point& x) const;
  /// <psi_j, 1_box> for all j.
  Eigen::VectorXd cell_inner_products(const Box& box) const;
  Eigen::VectorXd cell_inner_products(const DyadicMesh& mesh, const Cell& cell) const;
  /// m x N matrix whose columns are the cell integrals of the leaves.
  Eigen::MatrixXd mesh_columns(const DyadicMesh& mesh) const;
  Eigen::VectorXd forward(const PiecewiseConstant& u) const;

  double adjoint_value(const Eigen::VectorXd& phi, const Point& x) const;
  /// Value and gradient of A*phi at x; the gradient needs smooth kernels.
  AdjointEval adjoint_value_grad(const Eigen::VectorXd& phi, const Point& x) const;
  /// Hessian of A*phi at x, row-major 2x2 (only the leading d x d block is used).
  std::array<double, 4> adjoint_hessian(const Eigen::VectorXd& phi, const Point& x) const;

  /// Sup of |A*phi| over a box for indicator kernels: strips meeting the box
  /// contribute |phi_j|, with one maximum per disjoint block.
  double indicator_sup_bound(const Eigen::VectorXd& phi, const Box& box) const;

  /// Exact AA* restricted to the domain.
  Eigen::MatrixXd gram_matrix() const;
  double operator_norm_bound() const;
  /// Bound on |A*|_{l2 -> C^k}; throws UnsupportedOperation for indicators.
  double smoothness_seminorm(int k) const;
  SeminormReport seminorms() const;

  void check_inside(const Box& box) const;

 private:
  KernelOperator() = default;
  double raw_operator_norm_bound() const;
  double raw_seminorm(int k) const;
  std::optional<double> lattice_seminorm(int k) const;
  void cache_seminorms();

  KernelKind kind_ = KernelKind::Cosine;
  Box domain_;
  int m_ = 0;
  double scale_ = 1.0;
  std::vector<Strip> strips_;
  std::vector<Point> points_;
  double sigma_ = 0.0;
  std::optional<GaussianLattice> lattice_;
  int blocks_ = 0;
  std::array<double, 3> raw_semi_{0.0, 0.0, 0.0};
};

/// Standard normal mass of [a, b], accurate in tails and for short intervals.
double normal_mass(double a, double b);

/// Area of {lo <= <x, dir> < hi} ∩ box (length in 1D), exact up to rounding.
double slab_box_measure(const Box& box, const Point& dir, double lo, double hi);
/// Area of the intersection of two slabs and a box.
double slab_pair_box_measure(const Box& box, const Strip& a, const Strip& b);

}  // namespace rsfista

#endif  // RSFISTA_KERNELS_HPP
