#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "rsfista/errors.hpp"
#include "rsfista/problems.hpp"

using namespace rsfista;

TEST_CASE("generator") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a.uniform() != c.uniform());
  // mt19937_64 with seed 5489 has a fixed, standardized 10000th output.
  std::mt19937_64 ref;
  ref.discard(9999);
  CHECK(ref() == 9981545732273789042ull);

  // Moments of the derived distributions.
  Rng g(1);
  double s1 = 0, s2 = 0, l1 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = g.normal();
    s1 += z;
    s2 += z * z;
    l1 += std::abs(g.laplace(0.5));
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(l1 / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("presets") {
  SUBCASE("fourier") {
    const auto p = fourier_1d(3);
    CHECK(p.op.frequencies.size() == 30);
    for (const Point& w : p.op.frequencies) CHECK(std::abs(w[0]) <= 100.0);
    const auto q = fourier_1d(3);
    for (std::size_t j = 0; j < 30; ++j) CHECK(p.op.frequencies[j][0] == q.op.frequencies[j][0]);
    CHECK(fourier_1d(4).op.frequencies[0][0] != p.op.frequencies[0][0]);
  }
  SUBCASE("gaussian 1d") {
    const auto p = gaussian_1d();
    const auto op = build_operator(p);
    CHECK(op.m() == 30);
    CHECK(op.centers().front()[0] == doctest::Approx(0.0));
    CHECK(op.centers().back()[0] == doctest::Approx(1.0));
  }
  SUBCASE("radon") {
    const auto p = radon_2d(10, 20);
    const auto op = build_operator(p);
    CHECK(op.m() == 200);
    CHECK(p.discretization == Discretization::Wavelet);
    // Angles are spaced by pi / (n + 1).
    for (int I = 0; I < 10; ++I) {
      const Point& dir = p.op.strips[static_cast<std::size_t>(20 * I)].direction;
      CHECK(std::atan2(dir[1], dir[0]) == doctest::Approx(std::numbers::pi * (I + 1) / 11.0));
    }
    // The strips of each angle tile the domain: their areas sum to 1.
    const Eigen::VectorXd areas = op.cell_inner_products(p.domain) / op.scale();
    for (int I = 0; I < 10; ++I) CHECK(areas.segment(20 * I, 20).sum() == doctest::Approx(1.0).epsilon(1e-12));
    // Block norm bound: sqrt of the sum over blocks of the largest strip area.
    double expect = 0.0;
    for (int I = 0; I < 10; ++I) expect += areas.segment(20 * I, 20).maxCoeff();
    CHECK(op.operator_norm_bound() / op.scale() == doctest::Approx(std::sqrt(expect)).epsilon(1e-9));
  }
  SUBCASE("smlm") {
    const auto p = gaussian_2d_smlm(1);
    const auto op = build_operator(p);
    CHECK(op.m() == 4096);
    CHECK(p.domain.hi[0] == 6.4);
    CHECK(p.spikes.size() >= 4);
    CHECK(p.spikes.size() <= 8);
    CHECK(op.centers().front()[0] == doctest::Approx(0.15));
    CHECK(op.centers().back()[1] == doctest::Approx(6.45));
  }
  SUBCASE("lookup") {
    for (const char* name : {"fourier_1d", "gaussian_1d", "radon_2d", "gaussian_2d_smlm"}) {
      const auto p = preset(name, 9);
      CHECK(p.name == name);
      CHECK(p.seed == 9);
      CHECK_NOTHROW(p.validate());
    }
    CHECK_THROWS_AS(preset("nope"), InvalidParameter);
  }
}

TEST_CASE("synthetic data") {
  ProblemSpec p = fourier_1d();
  p.spikes.clear();
  const auto op = build_operator(p);
  CHECK(synthesize_data(p, op).isZero());
  p.spikes = {{{0.3, 0.0}, 2.0}};
  const Eigen::VectorXd b = synthesize_data(p, op);
  for (int j = 0; j < op.m(); ++j)
    CHECK(b[j] == doctest::Approx(2.0 * std::cos(p.op.frequencies[static_cast<std::size_t>(j)][0] * 0.3)));

  p.noise = {NoiseKind::Gaussian, 0.1};
  p.seed = 5;
  const Eigen::VectorXd n1 = synthesize_data(p, op), n2 = synthesize_data(p, op);
  CHECK(n1 == n2);
  p.seed = 6;
  CHECK(synthesize_data(p, op) != n1);
  CHECK((n1 - b).norm() > 0.0);

  // Disc data against numerical integration of strip pairings.
  const auto r = radon_2d(3, 6);
  ProblemSpec clean = r;
  clean.noise = {};
  const auto rop = build_operator(clean);
  const Eigen::VectorXd db = synthesize_data(clean, rop);
  for (int j = 0; j < rop.m(); j += 5) {
    const Strip& st = rop.strips()[static_cast<std::size_t>(j)];
    double expect = 0.0;
    for (const Disc& c : clean.discs) expect += c.value * disc_strip_area(c, st.direction, st.lo, st.hi);
    CHECK(db[j] == doctest::Approx(expect));
  }
}

TEST_CASE("disc strip areas") {
  const Disc c{{0.1, -0.05}, 0.2, 1.0};
  const Point dir{std::cos(0.7), std::sin(0.7)};
  CHECK(disc_strip_area(c, dir, -10.0, 10.0) == doctest::Approx(std::numbers::pi * 0.04));
  CHECK(disc_strip_area(c, dir, 1.0, 2.0) == 0.0);
  CHECK(disc_strip_area(c, dir, 0.3, 0.1) == 0.0);
  // Chord-length integral: area = int 2 sqrt(r^2 - u^2) du over the offset range.
  const double t = dir[0] * c.center[0] + dir[1] * c.center[1];
  for (double lo : {-0.3, -0.1, 0.0, 0.05}) {
    const double hi = lo + 0.12;
    const double a = std::max(lo - t, -0.2), b = std::min(hi - t, 0.2);
    const double expect =
        a < b ? oracle::integrate([&](double u) { return 2 * std::sqrt(std::max(0.0, 0.04 - u * u)); }, a, b)
              : 0.0;
    CHECK(disc_strip_area(c, dir, lo, hi) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("instances are normalized") {
  for (const char* name : {"fourier_1d", "gaussian_1d", "radon_2d"}) {
    const ProblemSpec p = preset(name);
    const Instance inst = instantiate(p);
    CHECK(inst.op.operator_norm_bound() == doctest::Approx(1.0));
    CHECK(inst.energy_scale == doctest::Approx(inst.operator_scale * inst.operator_scale));
    CHECK(inst.energy.mu == doctest::Approx(p.mu * inst.energy_scale));
    const Eigen::VectorXd raw = synthesize_data(p, build_operator(p));
    CHECK((inst.energy.b - inst.operator_scale * raw).norm() <= 1e-12 * (1 + raw.norm()));
  }
  // Energies scale by s^2 at the same coefficients.
  const ProblemSpec p = gaussian_1d();
  const Instance inst = instantiate(p);
  const auto raw_op = build_operator(p);
  const auto mesh = DyadicMesh::uniform(p.domain, 4);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(16, -1.0, 1.0);
  Energy raw;
  raw.b = synthesize_data(p, raw_op);
  raw.mu = p.mu;
  const LinearModel m_raw{raw_op.mesh_columns(mesh), leaf_measures(mesh)};
  const LinearModel m_norm{inst.op.mesh_columns(mesh), leaf_measures(mesh)};
  CHECK(energy_value(inst.energy, m_norm, x) ==
        doctest::Approx(inst.energy_scale * energy_value(raw, m_raw, x)).epsilon(1e-12));
}

TEST_CASE("problem validation") {
  auto bad = [](auto mutate, bool unsupported = false) {
    ProblemSpec p = gaussian_1d();
    mutate(p);
    if (unsupported)
      CHECK_THROWS_AS(p.validate(), UnsupportedOperation);
    else
      CHECK_THROWS_AS(p.validate(), InvalidParameter);
  };
  bad([](ProblemSpec& p) { p.d = 3; });
  bad([](ProblemSpec& p) { p.domain = Box::square(0.0, 1.0); });
  bad([](ProblemSpec& p) { p.mu = 0.0; });
  bad([](ProblemSpec& p) { p.fidelity = Fidelity{FidelityKind::SmoothedRobust, 0.0}; });
  bad([](ProblemSpec& p) { p.spikes = {{{1.5, 0.0}, 1.0}}; });
  bad([](ProblemSpec& p) { p.initial_level = -1; });
  bad([](ProblemSpec& p) {
    p.d = 2;
    p.domain = Box::square(0.0, 1.0);
    p.spikes.clear();
    p.discs = {{{0.5, 0.5}, 0.1, 1.0}};
  }, true);
  CHECK_THROWS_AS(radon_2d(0, 4), InvalidParameter);
  CHECK_THROWS_AS(noise_kind_from_string("pink"), InvalidParameter);
  CHECK_THROWS_AS(discretization_from_string("grid"), InvalidParameter);
}
