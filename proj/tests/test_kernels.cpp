#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rsfista/errors.hpp"
#include "rsfista/kernels.hpp"
#include "rsfista/mesh.hpp"

using namespace rsfista;
using std::numbers::pi;

namespace {

KernelOperator lattice_1d() {
  return KernelOperator::gaussian_lattice(Box::interval(0.0, 1.0), {{0.0, 0.0}, 1.0 / 29.0, 30}, 0.12);
}

KernelOperator random_gaussian(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box dom = d == 1 ? Box::interval(0.0, 1.0) : Box::square(0.0, 1.0);
  const int m = 3 + static_cast<int>(8 * u(rng));
  std::vector<Point> c;
  for (int j = 0; j < m; ++j) c.push_back({u(rng), d == 2 ? u(rng) : 0.0});
  return KernelOperator::gaussian(dom, c, 0.05 + 0.2 * u(rng));
}

KernelOperator random_cosine(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  const Box dom = d == 1 ? Box::interval(0.0, 1.0) : Box::square(0.0, 1.0);
  std::vector<Point> w;
  for (int j = 0; j < 6; ++j) w.push_back({u(rng), d == 2 ? u(rng) : 0.0});
  return KernelOperator::cosine(dom, w);
}

double hessian_norm(const std::array<double, 4>& h, int d) {
  if (d == 1) return std::abs(h[0]);
  Eigen::Matrix2d H;
  H << h[0], h[1], h[2], h[3];
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("forward of the constant under zero-frequency cosines is one") {
  const auto op = KernelOperator::cosine(Box::interval(0.0, 1.0), {{0.0, 0.0}, {0.0, 0.0}});
  DyadicMesh mesh = DyadicMesh::uniform(Box::interval(0.0, 1.0), 3);
  PiecewiseConstant u(mesh, 1.0);
  const Eigen::VectorXd a = op.forward(u);
  for (int j = 0; j < 2; ++j) CHECK(a[j] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("forward of a constant under an interior strip is value times area") {
  const Box sq = Box::square(0.0, 1.0);
  const auto op = KernelOperator::indicator(sq, {{{1.0, 0.0}, 0.25, 0.5, 0}});
  DyadicMesh mesh = DyadicMesh::uniform(sq, 2);
  PiecewiseConstant u(mesh, 3.0);
  CHECK(op.forward(u)[0] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("gaussian cell integrals match adaptive quadrature") {
  const auto op = lattice_1d();
  const double h = std::ldexp(1.0, -8);
  DyadicMesh mesh = DyadicMesh::uniform(Box::interval(0.0, 1.0), 8);
  PiecewiseConstant u(mesh);
  u.coeffs()[mesh.position(mesh.locate({0.5, 0.0}))] = 1.0 / h;
  const Eigen::VectorXd a = op.forward(u);
  for (int j = 0; j < op.m(); ++j) {
    auto f = [&](double x) { return op.kernel_values({x, 0.0})[j]; };
    CHECK(std::abs(a[j] - oracle::integrate(f, 0.5, 0.5 + h) / h) <= 1e-10);
  }
  // Random boxes in 2D as well.
  std::mt19937_64 rng(3);
  const auto op2 = random_gaussian(rng, 2);
  std::uniform_real_distribution<double> uu(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    const double x0 = 0.8 * uu(rng), y0 = 0.8 * uu(rng);
    const Box b{2, {x0, y0}, {x0 + 0.2 * uu(rng) + 1e-3, y0 + 0.2 * uu(rng) + 1e-3}};
    const Eigen::VectorXd ci = op2.cell_inner_products(b);
    for (int j = 0; j < op2.m(); ++j) {
      const double ref = oracle::integrate([&](const Point& p) { return op2.kernel_values(p)[j]; }, b);
      CHECK(std::abs(ci[j] - ref) <= 1e-10 * (1.0 + std::abs(ref)));
    }
  }
}

TEST_CASE("cell integral edge cases") {
  const Box sq = Box::square(0.0, 1.0);
  SUBCASE("strip covering the square") {
    const auto op = KernelOperator::indicator(sq, {{{1.0, 0.0}, -1.0, 2.0, 0}});
    CHECK(op.cell_inner_products(sq)[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("half-plane through the center along the diagonal") {
    const double r = 1.0 / std::sqrt(2.0);
    const auto op = KernelOperator::indicator(sq, {{{r, r}, -10.0, r, 0}});
    CHECK(op.cell_inner_products(sq)[0] == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("full period of a cosine") {
    const auto op = KernelOperator::cosine(Box::interval(0.0, 1.0), {{pi, 0.0}});
    CHECK(std::abs(op.cell_inner_products(Box::interval(0.0, 1.0))[0]) <= 1e-15);
  }
  SUBCASE("near-zero frequency matches the limit") {
    const auto op = KernelOperator::cosine(sq, {{1e-13, 3.0}});
    const Box b{2, {0.1, 0.2}, {0.4, 0.7}};
    const double ref = 0.3 * (std::sin(2.1) - std::sin(0.6)) / 3.0;
    CHECK(op.cell_inner_products(b)[0] == doctest::Approx(ref).epsilon(1e-12));
  }
  SUBCASE("random strip areas match quadrature of the indicator") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      const double th = pi * u(rng);
      const Point dir{std::cos(th), std::sin(th)};
      const double lo = -0.5 + 1.5 * u(rng);
      const Strip s{dir, lo, lo + 0.3 * u(rng), 0};
      const Box b{2, {0.3 * u(rng), 0.3 * u(rng)}, {0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng)}};
      // The area of a slab in a box is the integral of the chord length.
      auto chord = [&](double x) {
        double ylo = b.lo[1], yhi = b.hi[1];
        if (std::abs(dir[1]) < 1e-14) {
          const double t0 = dir[0] * x;
          return (t0 >= s.lo && t0 < s.hi) ? yhi - ylo : 0.0;
        }
        double a = (s.lo - dir[0] * x) / dir[1], c = (s.hi - dir[0] * x) / dir[1];
        if (a > c) std::swap(a, c);
        return std::max(0.0, std::min(c, yhi) - std::max(a, ylo));
      };
      double ref = 0.0;
      const int n = 20000;
      for (int i = 0; i < n; ++i) ref += chord(b.lo[0] + (i + 0.5) * b.width(0) / n);
      ref *= b.width(0) / n;
      CHECK(std::abs(slab_box_measure(b, dir, s.lo, s.hi) - ref) <= 1e-6);
    }
  }
}

TEST_CASE("adjoint value and gradient") {
  const auto op = lattice_1d();
  CHECK(op.adjoint_value_grad(Eigen::VectorXd::Zero(op.m()), {0.3, 0.0}).value == 0.0);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(op.m());
  e[7] = 1.0;
  const auto at = op.adjoint_value_grad(e, op.centers()[7]);
  CHECK(at.value == doctest::Approx(1.0 / std::sqrt(2.0 * pi * 0.12 * 0.12)).epsilon(1e-14));
  CHECK(std::abs(at.grad[0]) <= 1e-14);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int d = 1; d <= 2; ++d) {
    for (const KernelOperator& o : {random_gaussian(rng, d), random_cosine(rng, d)}) {
      for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXd phi = oracle::random_unit(o.m(), rng);
        const Point x{u(rng), d == 2 ? u(rng) : 0.0};
        const auto g = o.adjoint_value_grad(phi, x);
        CHECK(g.value == doctest::Approx(o.adjoint_value(phi, x)).epsilon(1e-12));
        const auto H = o.adjoint_hessian(phi, x);
        for (int k = 0; k < d; ++k) {
          auto f = [&](double s) {
            Point y = x;
            y[k] = s;
            return o.adjoint_value(phi, y);
          };
          const double fd = oracle::central_difference(f, x[k], 1e-6);
          CHECK(std::abs(g.grad[k] - fd) <= 1e-6 * (1.0 + std::abs(fd)));
          for (int l = 0; l < d; ++l) {
            auto gk = [&](double s) {
              Point y = x;
              y[l] = s;
              return o.adjoint_value_grad(phi, y).grad[k];
            };
            const double fd2 = oracle::central_difference(gk, x[l], 1e-6);
            CHECK(std::abs(H[2 * k + l] - fd2) <= 1e-5 * (1.0 + std::abs(fd2)));
          }
        }
      }
    }
  }
  const auto ind = KernelOperator::indicator(Box::interval(0.0, 1.0), {{{1.0, 0.0}, 0.0, 0.5, 0}});
  CHECK_THROWS_AS(ind.adjoint_value_grad(Eigen::VectorXd::Ones(1), {0.2, 0.0}), UnsupportedOperation);
}

TEST_CASE("gram matrix") {
  SUBCASE("disjoint indicators give a diagonal with the areas") {
    const Box sq = Box::square(0.0, 1.0);
    const auto op = KernelOperator::indicator(
        sq, {{{1.0, 0.0}, 0.0, 0.25, 0}, {{1.0, 0.0}, 0.25, 0.75, 0}, {{1.0, 0.0}, 0.75, 1.0, 0}});
    const Eigen::MatrixXd g = op.gram_matrix();
    Eigen::MatrixXd ref = Eigen::Vector3d(0.25, 0.5, 0.25).asDiagonal();
    CHECK((g - ref).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("zero frequencies give the all-ones matrix") {
    const auto op = KernelOperator::cosine(Box::interval(0.0, 1.0), {{0, 0}, {0, 0}, {0, 0}});
    CHECK((op.gram_matrix() - Eigen::MatrixXd::Ones(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("gaussian pair against quadrature") {
    const auto op = KernelOperator::gaussian(Box::square(0.0, 1.0), {{0.3, 0.4}, {0.55, 0.5}}, 0.15);
    const double ref = oracle::integrate(
        [&](const Point& p) {
          const Eigen::VectorXd v = op.kernel_values(p);
          return v[0] * v[1];
        },
        op.domain());
    CHECK(std::abs(op.gram_matrix()(0, 1) - ref) <= 1e-9);
  }
  SUBCASE("cosine pair against quadrature") {
    const auto op = KernelOperator::cosine(Box::interval(0.0, 1.0), {{13.0, 0}, {-7.5, 0}});
    const double ref = oracle::integrate(
        [&](double x) { return std::cos(13.0 * x) * std::cos(7.5 * x); }, 0.0, 1.0);
    CHECK(std::abs(op.gram_matrix()(0, 1) - ref) <= 1e-12);
  }
  SUBCASE("gram is symmetric, PSD, close to the fine-mesh product, and below the bound") {
    std::mt19937_64 rng(17);
    for (int d = 1; d <= 2; ++d) {
      for (const KernelOperator& o : {random_gaussian(rng, d), random_cosine(rng, d)}) {
        const Eigen::MatrixXd g = o.gram_matrix();
        CHECK((g - g.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        CHECK(es.eigenvalues().maxCoeff() <= std::pow(o.operator_norm_bound(), 2) * (1 + 1e-12));
        const int level = d == 1 ? 10 : 6;
        DyadicMesh mesh = DyadicMesh::uniform(o.domain(), level);
        const Eigen::MatrixXd cols = o.mesh_columns(mesh);
        const Eigen::MatrixXd approx = cols * leaf_measures(mesh).cwiseInverse().asDiagonal() * cols.transpose();
        const double h = mesh.min_cell_width();
        CHECK((approx - g).cwiseAbs().maxCoeff() <= 50.0 * h * g.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST_CASE("forward is linear") {
  std::mt19937_64 rng(23);
  const auto op = random_gaussian(rng, 2);
  DyadicMesh mesh = DyadicMesh::uniform(op.domain(), 3);
  std::vector<Cell> sel{mesh.leaves()[5], mesh.leaves()[20]};
  mesh.refine(sel);
  PiecewiseConstant u(mesh, Eigen::VectorXd::Random(static_cast<Eigen::Index>(mesh.leaf_count())));
  PiecewiseConstant v(mesh, Eigen::VectorXd::Random(static_cast<Eigen::Index>(mesh.leaf_count())));
  PiecewiseConstant w(mesh, 2.5 * u.coeffs() - 0.75 * v.coeffs());
  const Eigen::VectorXd lhs = op.forward(w);
  const Eigen::VectorXd rhs = 2.5 * op.forward(u) - 0.75 * op.forward(v);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("mesh outside the operator domain is rejected") {
  const auto op = lattice_1d();
  DyadicMesh mesh(Box::interval(0.0, 2.0));
  PiecewiseConstant u(mesh, 1.0);
  CHECK_THROWS_AS(op.forward(u), DomainMismatch);
}

TEST_CASE("operator norm bounds") {
  SUBCASE("disjoint indicator sets, areas 1/4 and 1/2") {
    const auto op = KernelOperator::indicator(
        Box::interval(0.0, 1.0), {{{1.0, 0.0}, 0.0, 0.25, 0}, {{1.0, 0.0}, 0.25, 0.75, 0}});
    CHECK(op.operator_norm_bound() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("block-wise sets") {
    const Box sq = Box::square(0.0, 1.0);
    const auto op = KernelOperator::indicator(
        sq, {{{1.0, 0.0}, 0.0, 0.5, 0}, {{1.0, 0.0}, 0.5, 1.0, 0}, {{0.0, 1.0}, 0.0, 0.2, 1},
             {{0.0, 1.0}, 0.2, 1.0, 1}});
    CHECK(op.operator_norm_bound() == doctest::Approx(std::sqrt(0.5 + 0.8)).epsilon(1e-14));
  }
  SUBCASE("thirty cosines") {
    std::vector<Point> w(30, {0.0, 0.0});
    for (int j = 0; j < 30; ++j) w[j][0] = -100.0 + 6.0 * j;
    const auto op = KernelOperator::cosine(Box::interval(0.0, 1.0), w);
    CHECK(op.operator_norm_bound() == doctest::Approx(std::sqrt(30.0)).epsilon(1e-14));
  }
  SUBCASE("gaussian lattice dominates power iteration on 2^12 cells") {
    const auto op = lattice_1d();
    CHECK(op.operator_norm_bound() >= oracle::spectral_norm(oracle::grid_matrix(op, 4096)));
  }
  SUBCASE("normalization puts the bound at one") {
    auto op = lattice_1d();
    const double f = op.normalize();
    CHECK(op.operator_norm_bound() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(op.scale() == doctest::Approx(f).epsilon(1e-14));
  }
}

TEST_CASE("smoothness seminorms") {
  SUBCASE("cosine closed form") {
    std::vector<Point> w;
    for (int j = 0; j < 30; ++j) w.push_back({-100.0 + 200.0 * j / 29.0, 0.0});
    const auto op = KernelOperator::cosine(Box::interval(0.0, 1.0), w);
    CHECK(op.smoothness_seminorm(1) <= std::sqrt(30.0) * 100.0 * (1 + 1e-14));
    CHECK(op.smoothness_seminorm(2) == doctest::Approx(std::sqrt(30.0) * 1e4).epsilon(1e-14));
  }
  SUBCASE("indicator kernels have none") {
    const auto op = KernelOperator::indicator(Box::interval(0.0, 1.0), {{{1.0, 0.0}, 0.0, 0.5, 0}});
    CHECK_THROWS_AS(op.smoothness_seminorm(0), UnsupportedOperation);
    const SeminormReport r = op.seminorms();
    CHECK_FALSE(r.smooth);
    CHECK_FALSE(r.c1.has_value());
    CHECK_FALSE(r.c2.has_value());
  }
  SUBCASE("zeroth order bound dominates the kernel vector norm on a grid") {
    const auto op = lattice_1d();
    double best = 0.0;
    for (int i = 0; i <= 4000; ++i) best = std::max(best, op.kernel_values({i / 4000.0, 0.0}).norm());
    CHECK(op.smoothness_seminorm(0) >= best);
  }
  SUBCASE("random unit phi and points stay under the bounds") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<KernelOperator> ops{lattice_1d(),
                                    KernelOperator::gaussian_lattice(Box::square(0.0, 6.4),
                                                                     {{0.15, 0.15}, 0.1, 64}, 0.2)};
    for (int d = 1; d <= 2; ++d) {
      ops.push_back(random_gaussian(rng, d));
      ops.push_back(random_cosine(rng, d));
    }
    int violations = 0;
    for (const KernelOperator& o : ops) {
      const double c0 = o.smoothness_seminorm(0), c1 = o.smoothness_seminorm(1),
                   c2 = o.smoothness_seminorm(2);
      for (int t = 0; t < 1000; ++t) {
        const Eigen::VectorXd phi = oracle::random_unit(o.m(), rng);
        const Box& b = o.domain();
        const Point x{b.lo[0] + b.width(0) * u(rng), o.dim() == 2 ? b.lo[1] + b.width(1) * u(rng) : 0.0};
        const auto g = o.adjoint_value_grad(phi, x);
        if (std::abs(g.value) > c0) ++violations;
        if (norm(g.grad, o.dim()) > c1) ++violations;
        if (hessian_norm(o.adjoint_hessian(phi, x), o.dim()) > c2) ++violations;
      }
    }
    CHECK(violations == 0);
  }
}
