// Small random instances and fine-grid reference solutions shared by the
// certificate tests and the acceptance binary.
#ifndef RSFISTA_TESTS_FIXTURES_HPP
#define RSFISTA_TESTS_FIXTURES_HPP

#include <random>

#include "oracles.hpp"
#include "rsfista/mesh.hpp"
#include "rsfista/problems.hpp"

namespace fixture {

/// 1D Gaussian problem with a handful of random sensors and spikes.
inline rsfista::ProblemSpec random_gaussian_1d(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  rsfista::ProblemSpec p;
  p.name = "random_gaussian_1d";
  p.d = 1;
  p.domain = rsfista::Box::interval(0.0, 1.0);
  p.op.kind = rsfista::KernelKind::Gaussian;
  p.op.sigma = 0.1 + 0.1 * u(rng);
  const int m = 4 + static_cast<int>(5 * u(rng));
  for (int j = 0; j < m; ++j) p.op.centers.push_back({u(rng), 0.0});
  const int spikes = 1 + static_cast<int>(3 * u(rng));
  for (int s = 0; s < spikes; ++s)
    p.spikes.push_back({{0.05 + 0.9 * u(rng), 0.0}, (u(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + u(rng))});
  p.mu = 0.02 + 0.1 * u(rng);
  return p;
}

/// The instance restricted to a uniform grid, as a weighted LASSO.
inline oracle::Lasso grid_lasso(const rsfista::Instance& inst, const rsfista::DyadicMesh& mesh) {
  return oracle::Lasso{inst.op.mesh_columns(mesh), rsfista::leaf_measures(mesh), inst.energy.b,
                       inst.energy.mu};
}

struct Reference {
  rsfista::DyadicMesh mesh;
  oracle::Lasso::Solution solution;
};

inline Reference fine_reference(const rsfista::Instance& inst, int level, long iters) {
  auto mesh = rsfista::DyadicMesh::uniform(inst.spec.domain, level);
  auto sol = grid_lasso(inst, mesh).solve(iters);
  return Reference{std::move(mesh), std::move(sol)};
}

}  // namespace fixture

#endif  // RSFISTA_TESTS_FIXTURES_HPP
