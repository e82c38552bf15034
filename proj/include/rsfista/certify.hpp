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

#ifndef RSFISTA_CERTIFY_HPP
#define RSFISTA_CERTIFY_HPP

#include <Eigen/Core>
#include <vector>

#include "rsfista/fista.hpp"
#include "rsfista/kernels.hpp"
#include "rsfista/mesh.hpp"

namespace rsfista {

class WaveletTree;

/// Gaps within this margin below zero are rounding noise and are clamped.
inline constexpr double kGapFloor = 1e-9;

struct CertificateReport {
  Eigen::VectorXd phi;
  double energy = 0.0;
  double sigma = 0.0;
  double sigma0 = 0.0;
  /// max |ΠA*φ| over the active coefficients.
  double disc_norm = 0.0;
  /// Certified bound on the dual norm of A*φ over the full space.
  double cont_norm = 0.0;
  double disc_gap = 0.0;
  double cont_gap = 0.0;
  double disc_grad = 0.0;
  double cont_grad = 0.0;
  /// sqrt(2 cont_gap) |A*|_{l2 -> L∞} / mu; screening is active below 1.
  double screen_ratio = 0.0;
  /// The |A*|_{l2 -> L∞} (or l∞ in coefficient space) bound used above.
  double adjoint_sup = 0.0;
  bool clamped = false;
  /// True for basis (wavelet) certificates, false for mesh densities.
  bool basis_mode = false;
  /// ΠA*φ per coefficient.
  Eigen::VectorXd projected;
  /// Per leaf: sup bound of |A*φ| (mesh mode) or tail bound (basis mode).
  Eigen::VectorXd cell_bounds;
};

/// φ = ∇f(Cx - b).
Eigen::VectorXd dual_vector(const Energy& e, const LinearModel& model, const Eigen::VectorXd& x);
/// E†(φ) = f*(φ) + <b, φ>.
double dual_energy(const Energy& e, const Eigen::VectorXd& phi);
/// Minimizer of s -> E†(sφ) over [0, min(mu / norm_bound, cap of dom f*)].
double sigma_opt(const Energy& e, const Eigen::VectorXd& phi, double norm_bound);

/// l∞ distance from -field to mu ∂|.|(x), coefficientwise.
double discrete_grad_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& field, double mu);

/// Bound on sup_T |A*φ| from a Taylor expansion at the midpoint. Order 1
/// uses the gradient there and the global C2 seminorm; order 0 uses the
/// global C1 seminorm.
double cell_sup_bound(const KernelOperator& op, const Eigen::VectorXd& phi, const Box& cell,
                      int order = 1);
double continuous_norm_bound(const KernelOperator& op, const Eigen::VectorXd& phi,
                             const DyadicMesh& mesh, int order = 1);

struct CertifyOptions {
  int taylor_order = 1;
};

/// Certificate for densities on a mesh (model columns are cell integrals).
CertificateReport gaps(const Energy& e, const KernelOperator& op, const DyadicMesh& mesh,
                       const LinearModel& model, const Eigen::VectorXd& x,
                       const CertifyOptions& opts = {});
/// Certificate for Haar coefficients (model columns are A∘W).
CertificateReport gaps(const Energy& e, const KernelOperator& op, const WaveletTree& tree,
                       const LinearModel& model, const Eigen::VectorXd& x,
                       const CertifyOptions& opts = {});

enum class ScreenVariant { Continuous, Discrete };

/// Leaves on which every minimizer vanishes. The continuous variant certifies
/// the full problem; the discrete one the problem restricted to the mesh.
std::vector<Cell> screen(const Energy& e, const CertificateReport& report, const DyadicMesh& mesh,
                         ScreenVariant variant = ScreenVariant::Continuous);

}  // namespace rsfista

#endif  // RSFISTA_CERTIFY_HPP
