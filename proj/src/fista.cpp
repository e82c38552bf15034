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

#include "rsfista/fista.hpp"

#include <cmath>
#include <limits>

#include "rsfista/errors.hpp"

namespace rsfista {

Fidelity Fidelity::smoothed_robust(double eps) {
  if (!(eps > 0.0)) throw InvalidParameter("robust fidelity needs eps > 0");
  return Fidelity{FidelityKind::SmoothedRobust, eps};
}

double Fidelity::value(const Eigen::VectorXd& r) const {
  if (kind == FidelityKind::Quadratic) return 0.5 * r.squaredNorm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double a = std::abs(r[i]);
    s += a >= eps ? eps * a : 0.5 * (a * a + eps * eps);
  }
  return s;
}

Eigen::VectorXd Fidelity::gradient(const Eigen::VectorXd& r) const {
  if (kind == FidelityKind::Quadratic) return r;
  Eigen::VectorXd g(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i)
    g[i] = std::abs(r[i]) >= eps ? (r[i] > 0 ? eps : -eps) : r[i];
  return g;
}

double Fidelity::conjugate(const Eigen::VectorXd& p) const {
  if (kind == FidelityKind::Quadratic) return 0.5 * p.squaredNorm();
  // Relative slack absorbs rounding in sigma * phi with |phi_i| = eps.
  const double limit = eps * (1.0 + 1e-12);
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(std::abs(p[i]) <= limit))
      throw InfeasibleDual("dual entry " + std::to_string(i) + " outside [-eps, eps]");
    s += 0.5 * (p[i] * p[i] - eps * eps);
  }
  return s;
}

double Fidelity::feasible_cap(const Eigen::VectorXd& p) const {
  if (kind == FidelityKind::Quadratic) return std::numeric_limits<double>::infinity();
  const double m = p.lpNorm<Eigen::Infinity>();
  return m > 0.0 ? eps / m : std::numeric_limits<double>::infinity();
}

std::string to_string(FidelityKind kind) {
  return kind == FidelityKind::Quadratic ? "quadratic" : "smoothed_robust";
}

void Energy::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidParameter("mu must be positive");
  if (fidelity.kind == FidelityKind::SmoothedRobust && !(fidelity.eps > 0.0))
    throw InvalidParameter("robust fidelity needs eps > 0");
  if (!b.allFinite()) throw InvalidParameter("data vector has non-finite entries");
}

Eigen::VectorXd LinearModel::projected_adjoint(const Eigen::VectorXd& phi) const {
  if (phi.size() != columns.rows()) throw DomainMismatch("dual vector length differs from m");
  return (columns.transpose() * phi).cwiseQuotient(weights);
}

double LinearModel::weighted_dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return (u.cwiseProduct(v)).dot(weights);
}

double LinearModel::weighted_l1(const Eigen::VectorXd& x) const {
  return x.cwiseAbs().dot(weights);
}

void LinearModel::check(const Eigen::VectorXd& x) const {
  if (x.size() != columns.cols() || weights.size() != columns.cols())
    throw DomainMismatch("coefficient vector does not match the discretization");
}

double energy_value(const Energy& e, const LinearModel& model, const Eigen::VectorXd& x) {
  model.check(x);
  return e.fidelity.value(model.apply(x) - e.b) + e.mu * model.weighted_l1(x);
}

double shrink(double v, double mu) {
  const double a = std::abs(v) - mu;
  if (a <= 0.0) return 0.0;
  return v > 0 ? a : -a;
}

Eigen::VectorXd prox_l1(const Eigen::VectorXd& v, double mu) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = shrink(v[i], mu);
  return out;
}

StepSchedule StepSchedule::chambolle_dossal(double a) {
  if (!(a >= 2.0) || !std::isfinite(a))
    throw InvalidParameter("stepsize parameter a must be >= 2");
  StepSchedule s;
  s.kind_ = ScheduleKind::ChambolleDossal;
  s.a_ = a;
  return s;
}

StepSchedule StepSchedule::greedy() {
  StepSchedule s;
  s.kind_ = ScheduleKind::Greedy;
  s.a_ = 0.0;
  return s;
}

double StepSchedule::t(std::int64_t n) const {
  if (kind_ != ScheduleKind::ChambolleDossal)
    throw UnsupportedOperation("greedy schedule has no stepsize sequence");
  if (n <= 0) return 1.0;
  return (static_cast<double>(n) + a_ - 1.0) / a_;
}

double StepSchedule::rho(std::int64_t n) const {
  const double tn = t(n);
  const double tn1 = t(n + 1);
  return tn * tn - tn1 * tn1 + tn1;
}

double StepSchedule::rho_closed_form(std::int64_t n) const {
  if (n <= 0) return 1.0;
  return ((a_ - 2.0) * (static_cast<double>(n) + a_) + 1.0) / (a_ * a_);
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::Greedy ? "greedy" : "chambolle_dossal";
}

SolverState SolverState::start(const LinearModel& model, Eigen::VectorXd x0,
                               StepSchedule schedule) {
  model.check(x0);
  SolverState s;
  s.x = std::move(x0);
  s.z = s.x;
  s.x_prev = s.x;
  s.snapshot = s.x;
  s.schedule = schedule;
  s.refresh(model);
  return s;
}

void SolverState::carry(const Transfer& t) {
  x = t.apply(x);
  z = t.apply(z);
  x_prev = t.apply(x_prev);
  snapshot = t.apply(snapshot);
}

void SolverState::extend(Eigen::Index size) {
  auto grow = [size](Eigen::VectorXd& v) {
    const Eigen::Index old = v.size();
    if (size < old) throw DomainMismatch("cannot shrink a coefficient vector");
    v.conservativeResize(size);
    v.tail(size - old).setZero();
  };
  grow(x);
  grow(z);
  grow(x_prev);
  grow(snapshot);
}

void SolverState::refresh(const LinearModel& model) {
  model.check(x);
  model.check(z);
  Ax = model.apply(x);
  if (schedule.kind() == ScheduleKind::Greedy) {
    Az = model.apply(x_prev);
  } else {
    Az = model.apply(z);
  }
}

void fista_step(SolverState& s, const Energy& e, const LinearModel& model) {
  model.check(s.x);
  model.check(s.z);
  const double t = s.schedule.t(s.n);
  const double wx = 1.0 - 1.0 / t;
  const double wz = 1.0 / t;
  const Eigen::VectorXd ubar = wx * s.x + wz * s.z;
  const Eigen::VectorXd Aubar = wx * s.Ax + wz * s.Az;
  const Eigen::VectorXd phi = e.fidelity.gradient(Aubar - e.b);
  Eigen::VectorXd next = prox_l1(ubar - model.projected_adjoint(phi), e.mu);
  Eigen::VectorXd Anext = model.apply(next);
  s.z = (1.0 - t) * s.x + t * next;
  s.Az = (1.0 - t) * s.Ax + t * Anext;
  s.x_prev = std::move(s.x);
  s.x = std::move(next);
  s.Ax = std::move(Anext);
  ++s.n;
}

void greedy_step(SolverState& s, const Energy& e, const LinearModel& model) {
  model.check(s.x);
  model.check(s.x_prev);
  // Az holds A x_prev for this schedule.
  Eigen::VectorXd y = 2.0 * s.x - s.x_prev;
  Eigen::VectorXd Ay = 2.0 * s.Ax - s.Az;
  auto pg = [&](const Eigen::VectorXd& from, const Eigen::VectorXd& Afrom) {
    const Eigen::VectorXd phi = e.fidelity.gradient(Afrom - e.b);
    return prox_l1(from - model.projected_adjoint(phi), e.mu);
  };
  Eigen::VectorXd next = pg(y, Ay);
  if (model.weighted_dot(y - next, next - s.x) >= 0.0 && s.n > 0) {
    next = pg(s.x, s.Ax);
    ++s.restarts;
  }
  Eigen::VectorXd Anext = model.apply(next);
  s.x_prev = std::move(s.x);
  s.Az = std::move(s.Ax);
  s.x = std::move(next);
  s.Ax = std::move(Anext);
  s.z = s.x;
  ++s.n;
}

void step(SolverState& s, const Energy& e, const LinearModel& model) {
  if (s.schedule.kind() == ScheduleKind::Greedy) {
    greedy_step(s, e, model);
  } else {
    fista_step(s, e, model);
  }
}

}  // namespace rsfista
