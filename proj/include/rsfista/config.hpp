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

#ifndef RSFISTA_CONFIG_HPP
#define RSFISTA_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsfista/certify.hpp"
#include "rsfista/fista.hpp"
#include "rsfista/problems.hpp"
#include "rsfista/refine.hpp"

namespace rsfista {

using Json = nlohmann::json;

struct SolverConfig {
  StepSchedule schedule = StepSchedule::chambolle_dossal(20.0);
  std::int64_t iters = 10000;
  /// Constant initial density (0 for the zero start).
  double x0 = 0.0;
};

struct OutputConfig {
  int check_every = 10;
  std::string dir = "out";
};

struct CompareConfig {
  /// Leaf counts of the fixed uniform arms.
  std::vector<std::int64_t> fixed_cells{512};
  /// Range of n used for the slope fits.
  double window_lo = 1e2;
  double window_hi = 1e4;
};

struct RunConfig {
  ProblemSpec problem = gaussian_1d();
  SolverConfig solver;
  RefinePolicy policy;
  /// False for a fixed discretization that never refines.
  bool adaptive = true;
  ScreenVariant screen = ScreenVariant::Continuous;
  CertifyOptions certify;
  OutputConfig output;
  CompareConfig compare;
};

/// Parses a config document. Unknown keys and ill-typed values raise
/// SchemaError naming the key path (e.g. "solver.schedule.a").
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);
/// Fully resolved document; parse_config(to_json(c)) reproduces c.
Json to_json(const RunConfig& config);

ProblemSpec parse_problem(const Json& doc, const std::string& path = "problem");
Json to_json(const ProblemSpec& spec);

}  // namespace rsfista

#endif  // RSFISTA_CONFIG_HPP
