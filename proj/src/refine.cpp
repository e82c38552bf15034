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

#include "rsfista/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsfista/errors.hpp"

namespace rsfista {

RateParams RateParams::lasso(int d) {
  if (d < 1) throw InvalidParameter("dimension must be positive");
  return RateParams{std::pow(2.0, 0.5 * d), 2.0, 0.5, d};
}

double kappa(double a_U, double a_E) {
  if (!(a_U >= 1.0) || !(a_E >= 1.0)) throw InvalidParameter("a_U and a_E must be >= 1");
  const double num = std::log(a_U * a_U);
  const double den = std::log(a_E) + num;
  if (den == 0.0) return 0.0;
  return num / den;
}

double RateParams::kappa() const { return rsfista::kappa(a_U, a_E); }

std::optional<std::int64_t> apriori_time(const RateParams& p, double c, int k) {
  if (!(c > 0.0)) throw InvalidParameter("schedule constant must be positive");
  const double growth = std::log(p.a_E * p.a_U * p.a_U);
  const double lg = std::log(c) + 0.5 * k * growth;
  if (lg > std::log(9.0e18)) return std::nullopt;
  // Guard against ceil(2^k) landing one above an exact power.
  const double v = std::exp(lg);
  const double r = std::round(v);
  const double n = std::abs(v - r) <= 1e-9 * r ? r : std::ceil(v);
  return static_cast<std::int64_t>(n);
}

Schedule apriori_schedule(const RateParams& params, double c, int K) {
  Schedule s;
  std::int64_t last = 0;
  for (int k = 1; k <= K; ++k) {
    auto t = apriori_time(params, c, k);
    if (!t) {
      s.truncated = true;
      break;
    }
    std::int64_t v = std::max(*t, last + 1);
    s.n.push_back(v);
    last = v;
  }
  return s;
}

std::string to_string(RefineMode mode) {
  switch (mode) {
    case RefineMode::AprioriSchedule: return "apriori";
    case RefineMode::ContGap: return "cont_gap";
    case RefineMode::DiscGap: return "disc_gap";
    case RefineMode::ContGrad: return "cont_grad";
    case RefineMode::DiscGrad: return "disc_grad";
  }
  return "unknown";
}

RefineMode refine_mode_from_string(const std::string& name) {
  if (name == "apriori") return RefineMode::AprioriSchedule;
  if (name == "cont_gap") return RefineMode::ContGap;
  if (name == "disc_gap") return RefineMode::DiscGap;
  if (name == "cont_grad") return RefineMode::ContGrad;
  if (name == "disc_grad") return RefineMode::DiscGrad;
  throw InvalidParameter("unknown refinement mode '" + name + "'");
}

void RefinePolicy::validate() const {
  if (beta && !(*beta > 0.0)) throw InvalidParameter("beta must be positive");
  if (!(gap_factor > 1.0)) throw InvalidParameter("gap_factor must exceed 1");
  if (check_every < 1) throw InvalidParameter("check_every must be at least 1");
  if (max_cells < 1) throw InvalidParameter("max_cells must be at least 1");
  if (max_depth < 0 || max_depth > 60) throw InvalidParameter("max_depth must lie in [0, 60]");
  if (!(apriori_c > 0.0)) throw InvalidParameter("apriori_c must be positive");
  if (!(rates.h > 0.0 && rates.h < 1.0)) throw InvalidParameter("mesh ratio h must lie in (0, 1)");
  if (!(wavelet_factor > 0.0)) throw InvalidParameter("wavelet_factor must be positive");
}

double monitored_value(RefineMode mode, const CertificateReport& r) {
  switch (mode) {
    case RefineMode::ContGap: return r.cont_gap;
    case RefineMode::DiscGap: return r.disc_gap;
    case RefineMode::ContGrad: return r.cont_grad;
    case RefineMode::DiscGrad: return r.disc_grad;
    case RefineMode::AprioriSchedule: return r.cont_gap;
  }
  return r.cont_gap;
}

bool should_refine(const RefinePolicy& policy, double beta, const CertificateReport& report,
                   int k, std::int64_t n) {
  const auto next = apriori_time(policy.rates, policy.apriori_c, k + 1);
  const bool due = next && n >= *next;
  if (policy.mode == RefineMode::AprioriSchedule) return due;
  if (policy.backstop && due) return true;
  // Epoch k+1 starts once the monitored value has dropped by a_E^{k+1}.
  const double target = beta * std::pow(policy.rates.a_E, -(k + 1));
  return monitored_value(policy.mode, report) <= target;
}

double predicted_gap(const Energy& e, const CertificateReport& r, double norm) {
  const double s = sigma_opt(e, r.phi, norm);
  return r.energy + dual_energy(e, s * r.phi);
}

std::vector<Cell> select_cells(const Energy& e, const CertificateReport& r, const DyadicMesh& mesh,
                               double gap_factor, std::size_t max_cells) {
  const auto n = static_cast<Eigen::Index>(mesh.leaf_count());
  if (r.cell_bounds.size() != n || r.projected.size() != n)
    throw DomainMismatch("report does not match the mesh");
  std::vector<Cell> out;
  if (n == 0) return out;
  const double target = gap_factor * r.disc_gap;
  // Largest admissible continuous norm; the predicted gap decreases as the
  // norm does, so bisect between the discrete and the current bound.
  double admissible = r.cont_norm;
  if (predicted_gap(e, r, r.cont_norm) > target) {
    double lo = r.disc_norm;
    double hi = r.cont_norm;
    for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (predicted_gap(e, r, mid) <= target ? lo : hi) = mid;
    }
    admissible = lo;
    // Cells whose bound still exceeds the admissible norm; selection stops
    // once none is left unselected.
    std::size_t open = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (r.cell_bounds[i] > admissible) ++open;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    auto ratio = [&](Eigen::Index i) {
      const double v = std::abs(r.projected[i]);
      return v > 0.0 ? r.cell_bounds[i] / v : std::numeric_limits<double>::infinity();
    };
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double ra = ratio(a), rb = ratio(b);
      if (ra != rb) return ra > rb;
      return mesh.leaves()[static_cast<std::size_t>(a)] < mesh.leaves()[static_cast<std::size_t>(b)];
    });
    // Cells already under the admissible norm cannot lower the predicted
    // bound, so only violating cells are taken, in ratio order.
    for (Eigen::Index i : order) {
      if (open == 0 || out.size() >= max_cells) break;
      if (!(r.cell_bounds[i] > admissible)) continue;
      out.push_back(mesh.leaves()[static_cast<std::size_t>(i)]);
      --open;
    }
  }
  if (out.empty()) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      const double a = r.cell_bounds[i], b = r.cell_bounds[best];
      if (a > b || (a == b && mesh.leaves()[static_cast<std::size_t>(i)] <
                                  mesh.leaves()[static_cast<std::size_t>(best)]))
        best = i;
    }
    out.push_back(mesh.leaves()[static_cast<std::size_t>(best)]);
  }
  return out;
}

}  // namespace rsfista
