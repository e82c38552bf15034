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

#include "rsfista/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rsfista/errors.hpp"

namespace rsfista {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::laplace(double scale) {
  const double u = uniform() - 0.5;
  if (u == -0.5) return 0.0;
  const double mag = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -mag : mag;
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Laplace: return "laplace";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "laplace") return NoiseKind::Laplace;
  throw InvalidParameter("unknown noise kind '" + name + "'");
}

std::string to_string(Discretization d) {
  return d == Discretization::Mesh ? "mesh" : "wavelet";
}

Discretization discretization_from_string(const std::string& name) {
  if (name == "mesh") return Discretization::Mesh;
  if (name == "wavelet") return Discretization::Wavelet;
  throw InvalidParameter("unknown discretization '" + name + "'");
}

void ProblemSpec::validate() const {
  if (d != 1 && d != 2) throw InvalidParameter("dimension must be 1 or 2");
  if (domain.dim != d) throw InvalidParameter("domain dimension differs from d");
  for (int k = 0; k < d; ++k)
    if (!(domain.hi[k] > domain.lo[k])) throw InvalidParameter("domain must have positive width");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidParameter("mu must be positive");
  if (fidelity.kind == FidelityKind::SmoothedRobust && !(fidelity.eps > 0.0))
    throw InvalidParameter("robust fidelity needs eps > 0");
  for (const Spike& s : spikes) {
    if (!domain.contains(s.location)) throw InvalidParameter("spike lies outside the domain");
    if (!std::isfinite(s.mass)) throw InvalidParameter("spike mass must be finite");
  }
  for (const Disc& c : discs) {
    if (!(c.radius > 0.0)) throw InvalidParameter("disc radius must be positive");
    if (d != 2) throw InvalidParameter("disc phantoms need d = 2");
    for (int k = 0; k < 2; ++k)
      if (c.center[k] - c.radius < domain.lo[k] || c.center[k] + c.radius > domain.hi[k])
        throw InvalidParameter("disc must lie inside the domain");
  }
  if (noise.kind != NoiseKind::None && !(noise.level >= 0.0))
    throw InvalidParameter("noise level must be nonnegative");
  if (initial_level < 0 || initial_level > 20)
    throw InvalidParameter("initial_level must lie in [0, 20]");
  if (!discs.empty() && op.kind != KernelKind::Indicator)
    throw UnsupportedOperation("disc phantoms are only paired with strip kernels");
}

ProblemSpec fourier_1d(std::uint64_t seed) {
  ProblemSpec p;
  p.name = "fourier_1d";
  p.d = 1;
  p.domain = Box::interval(0.0, 1.0);
  p.op.kind = KernelKind::Cosine;
  Rng rng(seed);
  for (int j = 0; j < 30; ++j) p.op.frequencies.push_back({rng.uniform(-100.0, 100.0), 0.0});
  p.mu = 0.02;
  p.spikes = {{{0.21, 0.0}, 1.0}, {{0.47, 0.0}, 0.7}, {{0.76, 0.0}, -0.5}};
  p.seed = seed;
  return p;
}

ProblemSpec gaussian_1d() {
  ProblemSpec p;
  p.name = "gaussian_1d";
  p.d = 1;
  p.domain = Box::interval(0.0, 1.0);
  p.op.kind = KernelKind::Gaussian;
  p.op.sigma = 0.12;
  p.op.lattice = GaussianLattice{{0.0, 0.0}, 1.0 / 29.0, 30};
  p.mu = 0.06;
  p.spikes = {{{0.27, 0.0}, 1.0}, {{0.52, 0.0}, 0.6}, {{0.81, 0.0}, -0.8}};
  return p;
}

ProblemSpec radon_2d(int n_angles, int n_bins) {
  if (n_angles < 1 || n_bins < 1) throw InvalidParameter("radon_2d needs angles and bins");
  ProblemSpec p;
  p.name = "radon_2d";
  p.d = 2;
  p.domain = Box::square(-0.5, 0.5);
  p.op.kind = KernelKind::Indicator;
  // Projections of the square lie within [-r, r]; the bins cover that range.
  const double r = std::sqrt(0.5);
  const double w = 2.0 * r / n_bins;
  for (int I = 1; I <= n_angles; ++I) {
    const double theta = std::numbers::pi * I / (n_angles + 1);
    const Point dir{std::cos(theta), std::sin(theta)};
    for (int i = 0; i < n_bins; ++i) {
      // The outer bins are widened by a hair so the corners stay covered.
      const double lo = i == 0 ? -r * (1.0 + 1e-12) : -r + i * w;
      const double hi = i + 1 == n_bins ? r * (1.0 + 1e-12) : -r + (i + 1) * w;
      p.op.strips.push_back({dir, lo, hi, I - 1});
    }
  }
  p.fidelity = Fidelity::smoothed_robust(1e-4);
  p.mu = 2e-5;
  p.discs = {{{-0.12, 0.08}, 0.22, 1.0}, {{0.2, -0.18}, 0.1, 2.0}};
  p.noise = {NoiseKind::Laplace, 0.02};
  p.seed = 7;
  p.discretization = Discretization::Wavelet;
  // Start from the constant function alone.
  p.initial_level = 0;
  return p;
}

ProblemSpec gaussian_2d_smlm(std::uint64_t seed) {
  ProblemSpec p;
  p.name = "gaussian_2d_smlm";
  p.d = 2;
  p.domain = Box::square(0.0, 6.4);
  p.op.kind = KernelKind::Gaussian;
  p.op.sigma = 0.2;
  // Pixel centres Δ(i + 1/2) for i = 1..64.
  p.op.lattice = GaussianLattice{{0.15, 0.15}, 0.1, 64};
  p.mu = 0.15;
  Rng rng(seed);
  const int count = 4 + static_cast<int>(rng.uniform() * 5.0);
  for (int s = 0; s < count; ++s) {
    const double x = rng.uniform(0.4, 6.0), y = rng.uniform(0.4, 6.0);
    p.spikes.push_back({{x, y}, rng.uniform(0.5, 1.0)});
  }
  p.noise = {NoiseKind::Gaussian, 0.05};
  p.seed = seed;
  p.initial_level = 2;
  return p;
}

ProblemSpec preset(const std::string& name, std::uint64_t seed) {
  if (name == "fourier_1d") return fourier_1d(seed);
  if (name == "gaussian_1d") {
    ProblemSpec p = gaussian_1d();
    p.seed = seed;
    return p;
  }
  if (name == "radon_2d") {
    ProblemSpec p = radon_2d();
    p.seed = seed;
    return p;
  }
  if (name == "gaussian_2d_smlm") return gaussian_2d_smlm(seed);
  throw InvalidParameter("unknown preset '" + name + "'");
}

KernelOperator build_operator(const ProblemSpec& spec) {
  spec.validate();
  switch (spec.op.kind) {
    case KernelKind::Indicator:
      return KernelOperator::indicator(spec.domain, spec.op.strips);
    case KernelKind::Cosine:
      return KernelOperator::cosine(spec.domain, spec.op.frequencies);
    case KernelKind::Gaussian:
      if (spec.op.lattice) return KernelOperator::gaussian_lattice(spec.domain, *spec.op.lattice,
                                                                   spec.op.sigma);
      return KernelOperator::gaussian(spec.domain, spec.op.centers, spec.op.sigma);
  }
  throw InvalidParameter("unknown operator kind");
}

double disc_strip_area(const Disc& disc, const Point& dir, double lo, double hi) {
  const double r = disc.radius;
  const double t = dir[0] * disc.center[0] + dir[1] * disc.center[1];
  // Area of the disc below signed offset u from its centre.
  auto below = [r](double u) {
    if (u <= -r) return 0.0;
    if (u >= r) return std::numbers::pi * r * r;
    const double cap = r * r * std::acos(u / r) - u * std::sqrt(r * r - u * u);
    return std::numbers::pi * r * r - cap;
  };
  if (!(hi > lo)) return 0.0;
  return std::max(0.0, below(hi - t) - below(lo - t));
}

Eigen::VectorXd synthesize_data(const ProblemSpec& spec, const KernelOperator& op, Rng& rng) {
  spec.validate();
  if (op.m() == 0) return {};
  Eigen::VectorXd b = Eigen::VectorXd::Zero(op.m());
  for (const Spike& s : spec.spikes) b += s.mass * op.kernel_values(s.location);
  for (const Disc& c : spec.discs) {
    if (op.kind() != KernelKind::Indicator)
      throw UnsupportedOperation("disc phantoms are only paired with strip kernels");
    for (int j = 0; j < op.m(); ++j) {
      const Strip& st = op.strips()[static_cast<std::size_t>(j)];
      b[j] += c.value * op.scale() * disc_strip_area(c, st.direction, st.lo, st.hi);
    }
  }
  if (spec.noise.kind == NoiseKind::None || spec.noise.level == 0.0) return b;
  const double scale = spec.noise.level * b.lpNorm<Eigen::Infinity>();
  for (Eigen::Index j = 0; j < b.size(); ++j)
    b[j] += spec.noise.kind == NoiseKind::Laplace ? rng.laplace(scale) : scale * rng.normal();
  return b;
}

Eigen::VectorXd synthesize_data(const ProblemSpec& spec, const KernelOperator& op) {
  Rng rng(spec.seed);
  return synthesize_data(spec, op, rng);
}

Instance instantiate(const ProblemSpec& spec) {
  KernelOperator op = build_operator(spec);
  const Eigen::VectorXd raw = synthesize_data(spec, op);
  const double s = op.normalize();
  // With A' = sA, b' = sb, eps' = s eps and mu' = s^2 mu every energy is
  // multiplied by s^2, so minimizers are unchanged.
  Energy e;
  e.b = s * raw;
  e.mu = s * s * spec.mu;
  e.fidelity = spec.fidelity;
  if (e.fidelity.kind == FidelityKind::SmoothedRobust) e.fidelity.eps *= s;
  e.validate();
  return Instance{spec, std::move(op), std::move(e), s, s * s};
}

}  // namespace rsfista
