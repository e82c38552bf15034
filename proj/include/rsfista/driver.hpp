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

#ifndef RSFISTA_DRIVER_HPP
#define RSFISTA_DRIVER_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsfista/config.hpp"
#include "rsfista/mesh.hpp"
#include "rsfista/wavelet.hpp"

namespace rsfista {

/// One certified iteration. Energies, gaps and gradient norms are in the
/// units of the problem as stated (before operator normalization).
struct TraceRow {
  std::int64_t n = 0;
  double wall_time_s = 0.0;
  double energy = 0.0;
  double disc_gap = 0.0;
  double cont_gap = 0.0;
  double min_so_far_cont_gap = 0.0;
  double disc_grad = 0.0;
  double cont_grad = 0.0;
  std::size_t leaf_count = 0;
  double min_cell_width = 0.0;
  int epoch = 0;
  std::size_t screened_cells = 0;
};

struct RunResult {
  std::vector<TraceRow> trace;
  /// Final discretization: a mesh of densities or a Haar tree.
  std::optional<DyadicMesh> mesh;
  std::optional<WaveletTree> tree;
  Eigen::VectorXd x;
  double operator_scale = 1.0;
  double energy_scale = 1.0;
  double beta = 0.0;
  /// Iterations at which the temporal criterion started a new epoch.
  std::vector<std::int64_t> epoch_starts;
  std::int64_t restarts = 0;
  bool depth_capped = false;
  bool leaf_capped = false;
};

/// Runs the configured solver. Throws InfeasibleDual or SoundnessError if a
/// certificate cannot be formed.
RunResult run(const RunConfig& config);

/// RFC 4180 trace with a header row.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(std::istream& in);

Json recon_json(const RunConfig& config, const RunResult& result);
Json meta_json(const RunConfig& config, const RunResult& result);

/// Runs and writes trace.csv, recon.json and meta.json into `dir`.
RunResult run_to_dir(const RunConfig& config, const std::string& dir);

/// Least-squares slope of log(value) against log(n) over rows with n in
/// [lo, hi] and a positive value; nullopt with fewer than two points.
std::optional<double> loglog_slope(const std::vector<double>& n, const std::vector<double>& value,
                                   double lo, double hi);

struct CompareArm {
  std::string name;
  RunConfig config;
  RunResult result;
  std::optional<double> slope;
};

/// Adaptive arm plus one fixed uniform arm per entry of compare.fixed_cells.
std::vector<CompareArm> compare(const RunConfig& config);
/// As compare(), writing one subdirectory per arm and slopes.json.
std::vector<CompareArm> compare_to_dir(const RunConfig& config, const std::string& dir);

/// Certificate of a serialized reconstruction (recon.json), as JSON.
Json certify_recon(const Json& recon);

}  // namespace rsfista

#endif  // RSFISTA_DRIVER_HPP
