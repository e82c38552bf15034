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

#ifndef RSFISTA_FISTA_HPP
#define RSFISTA_FISTA_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "rsfista/mesh.hpp"

namespace rsfista {

enum class FidelityKind { Quadratic, SmoothedRobust };

/// Data term f. SmoothedRobust is eps|r| for |r| >= eps and
/// r^2/2 + eps^2/2 otherwise, summed over entries.
struct Fidelity {
  FidelityKind kind = FidelityKind::Quadratic;
  double eps = 0.0;

  static Fidelity quadratic() { return {}; }
  static Fidelity smoothed_robust(double eps);

  double value(const Eigen::VectorXd& r) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& r) const;
  /// Convex conjugate f*(p); throws InfeasibleDual outside its domain.
  double conjugate(const Eigen::VectorXd& p) const;
  /// Largest s >= 0 with s * p in dom f* (infinity for Quadratic).
  double feasible_cap(const Eigen::VectorXd& p) const;
};

std::string to_string(FidelityKind kind);

/// E(x) = f(Cx - b) + mu * sum_i w_i |x_i| over the current discretization.
struct Energy {
  Fidelity fidelity;
  Eigen::VectorXd b;
  double mu = 1.0;

  void validate() const;
};

/// Columns of the discretized forward map and the L2 weights of the
/// coefficients: cell measures for densities on a mesh, ones for an
/// orthonormal basis.
struct LinearModel {
  Eigen::MatrixXd columns;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return columns.cols(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return columns * x; }
  /// Projected adjoint: (C^T phi)_i / w_i.
  Eigen::VectorXd projected_adjoint(const Eigen::VectorXd& phi) const;
  double weighted_dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double weighted_l1(const Eigen::VectorXd& x) const;
  void check(const Eigen::VectorXd& x) const;
};

/// Energy value f(Cx - b) + mu |x|.
double energy_value(const Energy& e, const LinearModel& model, const Eigen::VectorXd& x);

/// Soft-threshold by mu, entrywise.
Eigen::VectorXd prox_l1(const Eigen::VectorXd& v, double mu);
double shrink(double v, double mu);

enum class ScheduleKind { ChambolleDossal, Greedy };

/// FISTA stepsize sequence t_0 = 1, t_n = (n + a - 1)/a.
class StepSchedule {
 public:
  static StepSchedule chambolle_dossal(double a);
  static StepSchedule greedy();

  ScheduleKind kind() const { return kind_; }
  double a() const { return a_; }
  /// t_n; throws UnsupportedOperation for Greedy.
  double t(std::int64_t n) const;
  double rho(std::int64_t n) const;
  /// Closed form ((a-2)(n+a)+1)/a^2 for n >= 1; rho_0 = 1.
  double rho_closed_form(std::int64_t n) const;

 private:
  ScheduleKind kind_ = ScheduleKind::ChambolleDossal;
  double a_ = 2.0;
};

std::string to_string(ScheduleKind kind);

/// Iterates of the solver. Ax and Az are cached forward images of x and z.
struct SolverState {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
  Eigen::VectorXd x_prev;
  Eigen::VectorXd snapshot;
  Eigen::VectorXd Ax;
  Eigen::VectorXd Az;
  StepSchedule schedule = StepSchedule::chambolle_dossal(2.0);
  std::int64_t n = 0;
  int epoch = 0;
  std::int64_t restarts = 0;

  static SolverState start(const LinearModel& model, Eigen::VectorXd x0, StepSchedule schedule);
  /// Carries the coefficient vectors across a change of discretization.
  void carry(const Transfer& t);
  /// Extends every coefficient vector with zeros to `size` entries.
  void extend(Eigen::Index size);
  /// Recomputes the cached forward images.
  void refresh(const LinearModel& model);
};

/// One iteration of the refining-subset scheme on the current model.
void fista_step(SolverState& s, const Energy& e, const LinearModel& model);
/// One iteration of the greedy variant with restart.
void greedy_step(SolverState& s, const Energy& e, const LinearModel& model);
/// Dispatches on the schedule kind.
void step(SolverState& s, const Energy& e, const LinearModel& model);

}  // namespace rsfista

#endif  // RSFISTA_FISTA_HPP
