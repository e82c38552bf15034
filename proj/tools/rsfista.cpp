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

// Batch front-end: rsfista {run, compare, rates, certify}.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rsfista/driver.hpp"
#include "rsfista/errors.hpp"

namespace {

using namespace rsfista;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::int64_t> iters;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? parse_config(Json::object()) : load_config(o.config);
  if (o.iters) {
    if (*o.iters < 0) throw SchemaError("--iters", "must be nonnegative");
    c.solver.iters = *o.iters;
  }
  if (o.seed) {
    // Regenerate seeded presets so random pieces follow the new seed.
    if (c.problem.name == "fourier_1d") c.problem.op.frequencies = fourier_1d(*o.seed).op.frequencies;
    if (c.problem.name == "gaussian_2d_smlm") c.problem.spikes = gaussian_2d_smlm(*o.seed).spikes;
    c.problem.seed = *o.seed;
  }
  if (!o.out.empty()) c.output.dir = o.out;
  return c;
}

void print_row(const char* name, double v) { std::printf("%-34s %.6g\n", name, v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refining-subset FISTA with a-posteriori certificates"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--out", o.out, "output directory (overrides output.dir)");
    sub->add_option("--iters", o.iters, "iteration count override");
    sub->add_option("--seed", o.seed, "problem seed override");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "run the solver and write traces");
  add_common(run_cmd);
  CLI::App* cmp_cmd = app.add_subcommand("compare", "adaptive versus fixed uniform meshes");
  add_common(cmp_cmd);

  CLI::App* rates_cmd = app.add_subcommand("rates", "predicted rates for (a_U, a_E)");
  double a_U = 0.0, a_E = 2.0;
  int dim = 0;
  rates_cmd->add_option("--a-U", a_U, "norm growth constant (default: LASSO value for --dim)");
  rates_cmd->add_option("--a-E", a_E, "energy decay constant");
  rates_cmd->add_option("--dim", dim, "LASSO dimension preset (1 or 2)");

  CLI::App* cert_cmd = app.add_subcommand("certify", "certificate of a saved reconstruction");
  std::string recon_path;
  cert_cmd->add_option("recon", recon_path, "recon.json written by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const RunConfig c = resolve(o);
      const RunResult r = run_to_dir(c, c.output.dir);
      const TraceRow& last = r.trace.back();
      std::printf("wrote %s (%zu rows)\n", c.output.dir.c_str(), r.trace.size());
      print_row("energy", last.energy);
      print_row("cont_gap", last.cont_gap);
      print_row("disc_gap", last.disc_gap);
      print_row("leaf_count", static_cast<double>(last.leaf_count));
      print_row("min_cell_width", last.min_cell_width);
    } else if (cmp_cmd->parsed()) {
      const RunConfig c = resolve(o);
      const auto arms = compare_to_dir(c, c.output.dir);
      for (const CompareArm& a : arms) {
        const TraceRow& last = a.result.trace.back();
        std::printf("%-12s slope %-10s final cont_gap %.4g, leaves %zu\n", a.name.c_str(),
                    a.slope ? std::to_string(*a.slope).c_str() : "n/a", last.cont_gap,
                    last.leaf_count);
      }
    } else if (rates_cmd->parsed()) {
      if (dim != 0) {
        const RateParams p = RateParams::lasso(dim);
        if (a_U == 0.0) a_U = p.a_U;
      }
      if (a_U == 0.0) a_U = 1.0;
      RateParams p{a_U, a_E, 0.5, dim == 0 ? 1 : dim};
      print_row("a_U", p.a_U);
      print_row("a_E", p.a_E);
      print_row("kappa", p.kappa());
      print_row("energy exponent 2(1-kappa)", p.energy_exponent());
      print_row("resolution exponent 2/(1+d)", p.resolution_exponent());
    } else if (cert_cmd->parsed()) {
      std::ifstream in(recon_path);
      if (!in) throw SchemaError(recon_path, "cannot open reconstruction");
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const Json::parse_error& e) {
        throw SchemaError(recon_path, std::string("invalid JSON: ") + e.what());
      }
      std::cout << certify_recon(doc).dump(2) << '\n';
    }
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return 2;
  } catch (const InfeasibleDual& e) {
    std::fprintf(stderr, "infeasible dual: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
