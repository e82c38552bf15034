#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rsfista/errors.hpp"
#include "rsfista/fista.hpp"

using namespace rsfista;

namespace {

// Random model with orthonormal-ish scaling so that |C W^{-1/2}| <= 1.
LinearModel random_model(int m, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  LinearModel model{Eigen::MatrixXd::Random(m, n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) model.weights[i] = u(rng);
  const Eigen::MatrixXd B = model.columns * model.weights.cwiseSqrt().cwiseInverse().asDiagonal();
  model.columns /= oracle::spectral_norm(B, 3000) * (1.0 + 1e-6);
  return model;
}

}  // namespace

TEST_CASE("fidelity values and gradients") {
  const auto q = Fidelity::quadratic();
  CHECK(q.value(Eigen::VectorXd::Zero(3)) == 0.0);
  CHECK(q.gradient(Eigen::VectorXd::Zero(3)).isZero());
  const double eps = 1e-4;
  const auto r = Fidelity::smoothed_robust(eps);
  Eigen::VectorXd two(1);
  two << 2 * eps;
  CHECK(r.value(two) == doctest::Approx(2 * eps * eps).epsilon(1e-14));
  CHECK(r.gradient(two)[0] == doctest::Approx(eps).epsilon(1e-14));
  CHECK_THROWS_AS(Fidelity::smoothed_robust(0.0), InvalidParameter);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const Fidelity& f : {q, Fidelity::smoothed_robust(0.7)}) {
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd x(4);
      for (int i = 0; i < 4; ++i) x[i] = u(rng);
      const Eigen::VectorXd g = f.gradient(x);
      for (int i = 0; i < 4; ++i) {
        auto fi = [&](double s) {
          Eigen::VectorXd y = x;
          y[i] = s;
          return f.value(y);
        };
        CHECK(std::abs(g[i] - oracle::central_difference(fi, x[i], 1e-6)) <= 1e-6);
      }
      // Gradient is 1-Lipschitz.
      Eigen::VectorXd y(4);
      for (int i = 0; i < 4; ++i) y[i] = u(rng);
      CHECK((f.gradient(x) - f.gradient(y)).norm() <= (x - y).norm() * (1 + 1e-14));
    }
  }
}

TEST_CASE("conjugates match numeric maximization") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double eps = 0.4;
  const Fidelity rob = Fidelity::smoothed_robust(eps);
  const Fidelity q = Fidelity::quadratic();
  for (int t = 0; t < 30; ++t) {
    const double p = eps * u(rng);
    Eigen::VectorXd pv(1);
    pv << p;
    for (const Fidelity& f : {q, rob}) {
      auto neg = [&](double s) {
        Eigen::VectorXd v(1);
        v << s;
        return f.value(v) - p * s;
      };
      const double s = oracle::minimize_1d(neg, -5.0, 5.0);
      CHECK(f.conjugate(pv) == doctest::Approx(-neg(s)).epsilon(1e-9));
    }
  }
  Eigen::VectorXd out(2);
  out << 0.1, 2 * eps;
  CHECK_THROWS_AS(rob.conjugate(out), InfeasibleDual);
  CHECK(rob.feasible_cap(out) == doctest::Approx(0.5));
  CHECK(std::isinf(q.feasible_cap(out)));
}

TEST_CASE("soft threshold") {
  CHECK(shrink(0.5, 0.2) == doctest::Approx(0.3));
  CHECK(shrink(-0.1, 0.2) == 0.0);
  CHECK(shrink(-0.7, 0.2) == doctest::Approx(-0.5));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0), w(0.01, 3.0);
  for (int t = 0; t < 200; ++t) {
    const double v = u(rng), mu = std::abs(u(rng)) / 2, area = w(rng);
    auto obj = [&](double c) { return 0.5 * (c - v) * (c - v) * area + mu * std::abs(c) * area; };
    CHECK(std::abs(shrink(v, mu) - oracle::minimize_1d(obj, -3.0, 3.0)) <= 1e-6);
  }
}

TEST_CASE("stepsize schedule") {
  const auto s20 = StepSchedule::chambolle_dossal(20);
  CHECK(s20.t(0) == 1.0);
  CHECK(s20.t(1) == 1.0);
  CHECK(StepSchedule::chambolle_dossal(2).t(5) == 3.0);
  CHECK_THROWS_AS(StepSchedule::chambolle_dossal(1.9), InvalidParameter);
  CHECK_THROWS_AS(StepSchedule::greedy().t(3), UnsupportedOperation);
  for (double a : {2.0, 3.0, 20.0}) {
    const auto s = StepSchedule::chambolle_dossal(a);
    for (std::int64_t n : {1, 2, 7, 100, 12345}) {
      CHECK(s.rho(n) == doctest::Approx(s.rho_closed_form(n)).epsilon(1e-9));
    }
  }
}

TEST_CASE("steps") {
  std::mt19937_64 rng(4);
  const LinearModel model = random_model(6, 9, rng);
  SUBCASE("zero data keeps the zero start fixed") {
    const Energy e{Fidelity::quadratic(), Eigen::VectorXd::Zero(6), 0.1};
    for (StepSchedule s : {StepSchedule::chambolle_dossal(20), StepSchedule::greedy()}) {
      SolverState st = SolverState::start(model, Eigen::VectorXd::Zero(9), s);
      for (int i = 0; i < 10; ++i) step(st, e, model);
      CHECK(st.x.isZero());
      CHECK(st.n == 10);
    }
  }
  SUBCASE("first step is a proximal gradient step") {
    const Energy e{Fidelity::quadratic(), Eigen::VectorXd::Random(6), 0.05};
    const Eigen::VectorXd x0 = Eigen::VectorXd::Random(9);
    for (StepSchedule s : {StepSchedule::chambolle_dossal(3), StepSchedule::greedy()}) {
      SolverState st = SolverState::start(model, x0, s);
      step(st, e, model);
      const Eigen::VectorXd g = (model.columns.transpose() * (model.columns * x0 - e.b)).cwiseQuotient(model.weights);
      Eigen::VectorXd ref = x0 - g;
      for (Eigen::Index i = 0; i < ref.size(); ++i)
        ref[i] = std::copysign(std::max(std::abs(ref[i]) - 0.05, 0.0), ref[i]);
      CHECK((st.x - ref).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
  SUBCASE("mismatched discretization") {
    const Energy e{Fidelity::quadratic(), Eigen::VectorXd::Zero(6), 0.1};
    SolverState st = SolverState::start(model, Eigen::VectorXd::Zero(9), StepSchedule::chambolle_dossal(2));
    st.x.resize(4);
    CHECK_THROWS_AS(step(st, e, model), DomainMismatch);
    CHECK_THROWS_AS(SolverState::start(model, Eigen::VectorXd::Zero(3), StepSchedule::greedy()), DomainMismatch);
  }
}

TEST_CASE("single cell matches a scalar implementation") {
  const double c = 0.8, w = 0.5, b = 1.3, mu = 0.2;
  const LinearModel model{Eigen::MatrixXd::Constant(1, 1, c), Eigen::VectorXd::Constant(1, w)};
  const Energy e{Fidelity::quadratic(), Eigen::VectorXd::Constant(1, b), mu};
  for (double a : {2.0, 20.0}) {
    SolverState st = SolverState::start(model, Eigen::VectorXd::Zero(1), StepSchedule::chambolle_dossal(a));
    double x = 0.0, z = 0.0;
    for (int n = 0; n < 100; ++n) {
      const double t = n == 0 ? 1.0 : (n + a - 1.0) / a;
      const double ub = (1 - 1 / t) * x + z / t;
      const double v = ub - c * (c * ub - b) / w;
      const double xn = v > mu ? v - mu : (v < -mu ? v + mu : 0.0);
      z = (1 - t) * x + t * xn;
      x = xn;
      step(st, e, model);
      CHECK(std::abs(st.x[0] - x) <= 1e-12);
    }
  }
}

TEST_CASE("greedy variant") {
  const double c = 0.9, b = 2.0, mu = 0.3;
  const LinearModel model{Eigen::MatrixXd::Constant(1, 1, c), Eigen::VectorXd::Ones(1)};
  const Energy e{Fidelity::quadratic(), Eigen::VectorXd::Constant(1, b), mu};
  SolverState st = SolverState::start(model, Eigen::VectorXd::Zero(1), StepSchedule::greedy());
  const double xstar = (c * b - mu) / (c * c);
  double prev = energy_value(e, model, st.x);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t r = st.restarts;
    step(st, e, model);
    const double en = energy_value(e, model, st.x);
    // A restart step is a plain proximal step, which cannot increase the energy.
    if (st.restarts > r) CHECK(en <= prev + 1e-15);
    prev = en;
  }
  CHECK(st.restarts > 0);
  CHECK(st.x[0] == doctest::Approx(xstar).epsilon(1e-10));
}

TEST_CASE("carrying across a change of discretization keeps forward images") {
  std::mt19937_64 rng(5);
  const LinearModel model = random_model(4, 3, rng);
  SolverState st = SolverState::start(model, Eigen::Vector3d(1.0, -2.0, 0.5), StepSchedule::chambolle_dossal(4));
  const Energy e{Fidelity::quadratic(), Eigen::VectorXd::Random(4), 0.01};
  for (int i = 0; i < 5; ++i) step(st, e, model);
  // Split the middle coefficient in two: columns halve, weights halve.
  LinearModel fine{Eigen::MatrixXd(4, 4), Eigen::VectorXd(4)};
  fine.columns << model.columns.col(0), model.columns.col(1) / 2, model.columns.col(1) / 2, model.columns.col(2);
  fine.weights << model.weights[0], model.weights[1] / 2, model.weights[1] / 2, model.weights[2];
  const Eigen::VectorXd Ax = st.Ax, Az = st.Az;
  const double en = energy_value(e, model, st.x);
  st.carry(Transfer{{0, 1, 1, 2}});
  st.refresh(fine);
  CHECK((st.Ax - Ax).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((st.Az - Az).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(energy_value(e, fine, st.x) == doctest::Approx(en).epsilon(1e-14));
  st.extend(6);
  CHECK(st.z.size() == 6);
  CHECK(st.z.tail(2).isZero());
}

TEST_CASE("classical rate on a fixed discretization") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    const LinearModel model = random_model(8, 12, rng);
    const Energy e{Fidelity::quadratic(), Eigen::VectorXd::Random(8), 0.05};
    oracle::Lasso ref{model.columns, model.weights, e.b, e.mu};
    const auto sol = ref.solve(200000);
    CHECK(sol.energy - sol.lower <= 1e-12);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(12);
    const double dist2 = model.weighted_dot(x0 - sol.x, x0 - sol.x);
    SolverState st = SolverState::start(model, x0, StepSchedule::chambolle_dossal(2));
    for (int n = 1; n <= 1000; ++n) {
      step(st, e, model);
      CHECK(energy_value(e, model, st.x) - sol.energy <= 2 * dist2 / ((n + 1.0) * (n + 1.0)) + 1e-9);
    }
  }
}

TEST_CASE("energy validation") {
  Energy e{Fidelity::quadratic(), Eigen::VectorXd::Zero(2), 0.0};
  CHECK_THROWS_AS(e.validate(), InvalidParameter);
  e.mu = 1.0;
  CHECK_NOTHROW(e.validate());
}
