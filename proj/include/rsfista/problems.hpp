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

#ifndef RSFISTA_PROBLEMS_HPP
#define RSFISTA_PROBLEMS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rsfista/fista.hpp"
#include "rsfista/kernels.hpp"

namespace rsfista {

/// Deterministic generator: std::mt19937_64 (fully specified by the C++
/// standard) with our own conversions, since the standard distributions
/// are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Standard normal by Box-Muller (no caching of the second variate).
  double normal();
  /// Laplace with the given scale by inverse CDF.
  double laplace(double scale);

 private:
  std::mt19937_64 engine_;
};

enum class NoiseKind { None, Gaussian, Laplace };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Additive noise; `level` is relative to max |b| of the clean data.
struct Noise {
  NoiseKind kind = NoiseKind::None;
  double level = 0.0;
};

struct Spike {
  Point location{0.0, 0.0};
  double mass = 1.0;
};

/// Uniform density `value` on a disc; its pairing with strips is exact.
struct Disc {
  Point center{0.0, 0.0};
  double radius = 0.1;
  double value = 1.0;
};

struct OperatorConfig {
  KernelKind kind = KernelKind::Gaussian;
  std::vector<Point> frequencies;
  std::vector<Point> centers;
  std::optional<GaussianLattice> lattice;
  double sigma = 0.0;
  std::vector<Strip> strips;
};

/// How the unknown is represented.
enum class Discretization { Mesh, Wavelet };

std::string to_string(Discretization d);
Discretization discretization_from_string(const std::string& name);

struct ProblemSpec {
  std::string name;
  int d = 1;
  Box domain;
  OperatorConfig op;
  Fidelity fidelity;
  double mu = 0.1;
  std::vector<Spike> spikes;
  std::vector<Disc> discs;
  Noise noise;
  std::uint64_t seed = 0;
  Discretization discretization = Discretization::Mesh;
  /// Starting uniform level of the mesh (or depth of the initial tree).
  int initial_level = 0;

  void validate() const;
};

ProblemSpec fourier_1d(std::uint64_t seed = 1);
ProblemSpec gaussian_1d();
ProblemSpec radon_2d(int n_angles = 10, int n_bins = 20);
ProblemSpec gaussian_2d_smlm(std::uint64_t seed = 1);
/// Looks up a preset by name ("fourier_1d", "gaussian_1d", "radon_2d",
/// "gaussian_2d_smlm").
ProblemSpec preset(const std::string& name, std::uint64_t seed = 1);

/// Operator of the problem at its raw scale.
KernelOperator build_operator(const ProblemSpec& spec);

/// Clean data sum_spikes mass psi_j(x) + sum_discs <psi_j, value 1_disc>
/// plus noise drawn from `rng`.
Eigen::VectorXd synthesize_data(const ProblemSpec& spec, const KernelOperator& op, Rng& rng);
Eigen::VectorXd synthesize_data(const ProblemSpec& spec, const KernelOperator& op);

/// Area of the part of a disc with <x, dir> in [lo, hi); dir is a unit vector.
double disc_strip_area(const Disc& disc, const Point& dir, double lo, double hi);

/// A problem ready to solve: normalized operator (|A| <= 1) and the energy
/// in normalized units. The raw energy equals energy / energy_scale.
struct Instance {
  ProblemSpec spec;
  KernelOperator op;
  Energy energy;
  double operator_scale = 1.0;
  double energy_scale = 1.0;
};

Instance instantiate(const ProblemSpec& spec);

}  // namespace rsfista

#endif  // RSFISTA_PROBLEMS_HPP
