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

#include "rsfista/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rsfista/errors.hpp"
#include "rsfista/wavelet.hpp"

namespace rsfista {

namespace {

// Midpoint value and a radius R with |A*φ - value| <= R on the box.
struct TaylorParts {
  double value = 0.0;
  double radius = 0.0;
};

TaylorParts taylor_parts(const KernelOperator& op, const Eigen::VectorXd& phi, const Box& box,
                         int order, double phi_norm) {
  if (!op.smooth()) throw UnsupportedOperation("Taylor bounds need smooth kernels");
  if (order != 0 && order != 1) throw InvalidParameter("Taylor order must be 0 or 1");
  TaylorParts t;
  if (phi_norm == 0.0) return t;
  const double diam = box.diameter();
  if (order == 0) {
    t.value = op.adjoint_value(phi, box.midpoint());
    t.radius = 0.5 * diam * op.smoothness_seminorm(1) * phi_norm;
  } else {
    const AdjointEval ev = op.adjoint_value_grad(phi, box.midpoint());
    t.value = ev.value;
    t.radius = 0.5 * diam * norm(ev.grad, op.dim()) +
               diam * diam / 8.0 * op.smoothness_seminorm(2) * phi_norm;
  }
  return t;
}

double clamp_gap(double gap, bool& clamped, const char* what) {
  if (!std::isfinite(gap)) {
    std::ostringstream os;
    os << what << " is not finite";
    throw SoundnessError(os.str());
  }
  if (gap < -kGapFloor) {
    std::ostringstream os;
    os.precision(17);
    os << what << " is negative (" << gap << "): a bound is unsound";
    throw SoundnessError(os.str());
  }
  if (gap < 0.0) {
    clamped = true;
    return 0.0;
  }
  return gap;
}

// Shared part of both certificate flavours.
CertificateReport start_report(const Energy& e, const LinearModel& model,
                               const Eigen::VectorXd& x) {
  e.validate();
  model.check(x);
  if (e.b.size() != model.columns.rows()) throw DomainMismatch("data length differs from m");
  CertificateReport r;
  const Eigen::VectorXd res = model.apply(x) - e.b;
  r.phi = e.fidelity.gradient(res);
  r.energy = e.fidelity.value(res) + e.mu * model.weighted_l1(x);
  r.projected = model.projected_adjoint(r.phi);
  r.disc_norm = r.projected.size() ? r.projected.lpNorm<Eigen::Infinity>() : 0.0;
  r.disc_grad = discrete_grad_norm(x, r.projected, e.mu);
  return r;
}

void finish_report(const Energy& e, CertificateReport& r) {
  r.cont_norm = std::max(r.cont_norm, r.disc_norm);
  r.sigma = sigma_opt(e, r.phi, r.disc_norm);
  r.sigma0 = sigma_opt(e, r.phi, r.cont_norm);
  r.disc_gap = clamp_gap(r.energy + dual_energy(e, r.sigma * r.phi), r.clamped, "discrete gap");
  r.cont_gap = clamp_gap(r.energy + dual_energy(e, r.sigma0 * r.phi), r.clamped, "continuous gap");
  // Both use the same primal value; the nesting holds up to rounding.
  r.disc_gap = std::min(r.disc_gap, r.cont_gap);
  r.cont_grad = std::max(r.cont_grad, r.disc_grad);
  r.screen_ratio = std::sqrt(2.0 * r.cont_gap) * r.adjoint_sup / e.mu;
}

}  // namespace

Eigen::VectorXd dual_vector(const Energy& e, const LinearModel& model, const Eigen::VectorXd& x) {
  model.check(x);
  return e.fidelity.gradient(model.apply(x) - e.b);
}

double dual_energy(const Energy& e, const Eigen::VectorXd& phi) {
  if (phi.size() != e.b.size()) throw DomainMismatch("dual vector length differs from data");
  return e.fidelity.conjugate(phi) + e.b.dot(phi);
}

double sigma_opt(const Energy& e, const Eigen::VectorXd& phi, double norm_bound) {
  const double pp = phi.squaredNorm();
  if (pp == 0.0) return 0.0;
  if (norm_bound < 0.0) throw InvalidParameter("dual norm bound must be nonnegative");
  // E†(sφ) is the quadratic s^2 |φ|^2 / 2 + s <b, φ> (plus a constant for the
  // robust fidelity) on its domain, so the constrained minimizer is a clamp.
  const double free_min = -e.b.dot(phi) / pp;
  double cap = e.fidelity.feasible_cap(phi);
  if (norm_bound > 0.0) cap = std::min(cap, e.mu / norm_bound);
  return std::max(0.0, std::min(free_min, cap));
}

double discrete_grad_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& field, double mu) {
  if (x.size() != field.size()) throw DomainMismatch("field does not match the coefficients");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double g = field[i];
    double v;
    if (x[i] > 0.0) {
      v = std::abs(g + mu);
    } else if (x[i] < 0.0) {
      v = std::abs(g - mu);
    } else {
      v = std::max(std::abs(g) - mu, 0.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double cell_sup_bound(const KernelOperator& op, const Eigen::VectorXd& phi, const Box& cell,
                      int order) {
  const TaylorParts t = taylor_parts(op, phi, cell, order, phi.norm());
  return std::abs(t.value) + t.radius;
}

double continuous_norm_bound(const KernelOperator& op, const Eigen::VectorXd& phi,
                             const DyadicMesh& mesh, int order) {
  double best = 0.0;
  const double pn = phi.norm();
  for (const Cell& c : mesh.leaves()) {
    const TaylorParts t = taylor_parts(op, phi, mesh.cell_box(c), order, pn);
    best = std::max(best, std::abs(t.value) + t.radius);
  }
  return best;
}

CertificateReport gaps(const Energy& e, const KernelOperator& op, const DyadicMesh& mesh,
                       const LinearModel& model, const Eigen::VectorXd& x,
                       const CertifyOptions& opts) {
  if (static_cast<std::size_t>(x.size()) != mesh.leaf_count())
    throw DomainMismatch("iterate does not match the mesh");
  CertificateReport r = start_report(e, model, x);
  const auto n = static_cast<Eigen::Index>(mesh.leaf_count());
  r.cell_bounds.resize(n);
  const double pn = r.phi.norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Box box = mesh.cell_box(mesh.leaves()[static_cast<std::size_t>(i)]);
    TaylorParts t;
    if (op.smooth()) {
      t = taylor_parts(op, r.phi, box, opts.taylor_order, pn);
    } else {
      t.radius = op.indicator_sup_bound(r.phi, box);
    }
    const double bound = std::abs(t.value) + t.radius;
    r.cell_bounds[i] = bound;
    r.cont_norm = std::max(r.cont_norm, bound);
    double g;
    if (x[i] > 0.0) {
      g = std::abs(t.value + e.mu) + t.radius;
    } else if (x[i] < 0.0) {
      g = std::abs(t.value - e.mu) + t.radius;
    } else {
      g = std::max(bound - e.mu, 0.0);
    }
    r.cont_grad = std::max(r.cont_grad, g);
  }
  r.adjoint_sup = op.seminorms().c0;
  finish_report(e, r);
  return r;
}

CertificateReport gaps(const Energy& e, const KernelOperator& op, const WaveletTree& tree,
                       const LinearModel& model, const Eigen::VectorXd& x,
                       const CertifyOptions& /*opts*/) {
  if (static_cast<std::size_t>(x.size()) != tree.size())
    throw DomainMismatch("coefficients do not match the tree");
  CertificateReport r = start_report(e, model, x);
  r.basis_mode = true;
  r.cell_bounds = tree.leaf_tail_bound(op, r.phi);
  const double tail = r.cell_bounds.size() ? r.cell_bounds.maxCoeff() : 0.0;
  r.cont_norm = tail;
  r.cont_grad = std::max(tail - e.mu, 0.0);
  // |<w, A*ψ>| <= ||A|| |ψ| for every unit-norm basis function w.
  r.adjoint_sup = op.operator_norm_bound();
  finish_report(e, r);
  return r;
}

std::vector<Cell> screen(const Energy& e, const CertificateReport& report, const DyadicMesh& mesh,
                         ScreenVariant variant) {
  std::vector<Cell> out;
  const auto n = static_cast<Eigen::Index>(mesh.leaf_count());
  if (variant == ScreenVariant::Continuous) {
    if (report.cell_bounds.size() != n) throw DomainMismatch("report does not match the mesh");
    if (!(report.screen_ratio < 1.0)) return out;
    const double threshold = e.mu - std::sqrt(2.0 * report.cont_gap) * report.adjoint_sup;
    for (Eigen::Index i = 0; i < n; ++i)
      if (report.sigma0 * report.cell_bounds[i] < threshold)
        out.push_back(mesh.leaves()[static_cast<std::size_t>(i)]);
    return out;
  }
  if (report.basis_mode)
    throw UnsupportedOperation("discrete screening needs a mesh certificate");
  if (report.projected.size() != n) throw DomainMismatch("report does not match the mesh");
  const double threshold = e.mu - std::sqrt(2.0 * report.disc_gap) * report.adjoint_sup;
  if (!(threshold > 0.0)) return out;
  for (Eigen::Index i = 0; i < n; ++i)
    if (report.sigma * std::abs(report.projected[i]) < threshold)
      out.push_back(mesh.leaves()[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace rsfista
