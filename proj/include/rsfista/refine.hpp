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

#ifndef RSFISTA_REFINE_HPP
#define RSFISTA_REFINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsfista/certify.hpp"
#include "rsfista/mesh.hpp"

namespace rsfista {

/// Growth constants of the comparison sequence: norms grow like a_U^k,
/// energy gaps decay like a_E^-k.
struct RateParams {
  double a_U = 1.0;
  double a_E = 2.0;
  double h = 0.5;
  int d = 1;

  /// Constants of the measure-space LASSO on d-dimensional dyadic meshes.
  static RateParams lasso(int d);
  double kappa() const;
  /// Exponent of the predicted energy rate n^{-2(1 - kappa)}.
  double energy_exponent() const { return 2.0 * (1.0 - kappa()); }
  /// Exponent of the predicted resolution 2^-k ~ n^{-2/(1+d)}.
  double resolution_exponent() const { return 2.0 / (1.0 + d); }
};

double kappa(double a_U, double a_E);

struct Schedule {
  std::vector<std::int64_t> n;
  bool truncated = false;
};

/// n_k = ceil(c (a_E a_U^2)^{k/2}) for k = 1..K, bumped to be strictly increasing.
Schedule apriori_schedule(const RateParams& params, double c, int K);
/// n_k for a single k, or nullopt on overflow.
std::optional<std::int64_t> apriori_time(const RateParams& params, double c, int k);

enum class RefineMode { AprioriSchedule, ContGap, DiscGap, ContGrad, DiscGrad };

std::string to_string(RefineMode mode);
RefineMode refine_mode_from_string(const std::string& name);

struct RefinePolicy {
  RefineMode mode = RefineMode::DiscGap;
  /// Criterion constant; calibrated to the first monitored value if unset.
  std::optional<double> beta;
  double gap_factor = 2.0;
  int check_every = 10;
  std::size_t max_cells = 64;
  int max_depth = DyadicMesh::kDefaultMaxDepth;
  std::size_t max_leaves = 1u << 20;
  /// Also refine once n passes the a-priori time n_{k+1}.
  bool backstop = true;
  double apriori_c = 10.0;
  RateParams rates = RateParams::lasso(1);
  /// Factor of the wavelet growth rule (tail - mu <= factor * disc_grad).
  double wavelet_factor = 10.0;
  /// Merge screened zero cells after each check.
  bool coarsen = false;

  void validate() const;
};

/// Value monitored by the temporal criterion of `mode`.
double monitored_value(RefineMode mode, const CertificateReport& report);

/// Temporal decision at iteration n with k refinements done. `beta` must
/// already be resolved.
bool should_refine(const RefinePolicy& policy, double beta, const CertificateReport& report,
                   int k, std::int64_t n);

/// Continuous gap predicted when the continuous norm bound is `norm`.
double predicted_gap(const Energy& e, const CertificateReport& report, double norm);

/// Leaves to split so that the continuous gap is at most gap_factor times
/// the discrete gap, largest bound-to-value ratio first, capped at
/// max_cells. Never empty for a nonempty mesh.
std::vector<Cell> select_cells(const Energy& e, const CertificateReport& report,
                               const DyadicMesh& mesh, double gap_factor,
                               std::size_t max_cells = static_cast<std::size_t>(-1));

}  // namespace rsfista

#endif  // RSFISTA_REFINE_HPP
