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

#include "rsfista/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "rsfista/errors.hpp"
#include "rsfista/serialize.hpp"

namespace rsfista {

namespace {

// Spatial rounds allowed per check before the solver continues.
constexpr int kMaxSpatialRounds = 8;

using Clock = std::chrono::steady_clock;

// Tracks the best primal and dual values seen so far.
class Recorder {
 public:
  Recorder(const Instance& inst, Clock::time_point start) : inst_(inst), start_(start) {}

  TraceRow row(std::int64_t n, const CertificateReport& r, std::size_t leaves, double width,
               int epoch, std::size_t screened) {
    const Energy& e = inst_.energy;
    best_primal_ = std::min(best_primal_, r.energy);
    best_dual_ = std::min(best_dual_, dual_energy(e, r.sigma0 * r.phi));
    const double s = 1.0 / inst_.energy_scale;
    TraceRow t;
    t.n = n;
    t.wall_time_s = std::chrono::duration<double>(Clock::now() - start_).count();
    t.energy = s * r.energy;
    t.disc_gap = s * r.disc_gap;
    t.cont_gap = s * r.cont_gap;
    // Both bests are attained at (possibly different) checks; their sum
    // still bounds E(best iterate) - E*.
    t.min_so_far_cont_gap = std::max(0.0, s * (best_primal_ + best_dual_));
    t.disc_grad = s * r.disc_grad;
    t.cont_grad = s * r.cont_grad;
    t.leaf_count = leaves;
    t.min_cell_width = width;
    t.epoch = epoch;
    t.screened_cells = screened;
    return t;
  }

 private:
  const Instance& inst_;
  Clock::time_point start_;
  double best_primal_ = std::numeric_limits<double>::infinity();
  double best_dual_ = std::numeric_limits<double>::infinity();
};

bool is_check(std::int64_t n, std::int64_t iters, int every) {
  return n == 0 || n == iters || n % every == 0;
}

void run_mesh(const RunConfig& c, const Instance& inst, RunResult& out) {
  const Energy& e = inst.energy;
  const KernelOperator& op = inst.op;
  const RefinePolicy& policy = c.policy;
  const int d = inst.spec.d;
  const auto t0 = Clock::now();

  DyadicMesh mesh = DyadicMesh::uniform(inst.spec.domain, inst.spec.initial_level,
                                        std::max(policy.max_depth, inst.spec.initial_level));
  LinearModel model{op.mesh_columns(mesh), leaf_measures(mesh)};
  SolverState st = SolverState::start(
      model, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.leaf_count()), c.solver.x0),
      c.solver.schedule);

  // Rebuilds the model after a change of leaves, reusing unchanged columns.
  auto rebuild = [&](const std::vector<Cell>& old_leaves, const Transfer& t) {
    const auto& leaves = mesh.leaves();
    Eigen::MatrixXd cols(op.m(), static_cast<Eigen::Index>(leaves.size()));
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const std::ptrdiff_t src = t.source[i];
      const auto col = static_cast<Eigen::Index>(i);
      if (src >= 0 && old_leaves[static_cast<std::size_t>(src)] == leaves[i]) {
        cols.col(col) = model.columns.col(src);
      } else {
        cols.col(col) = op.cell_inner_products(mesh, leaves[i]);
      }
    }
    model.columns = std::move(cols);
    model.weights = leaf_measures(mesh);
    st.carry(t);
    st.refresh(model);
  };

  // The a-priori mode ties the resolution to the epoch: h^k at epoch k.
  const bool apriori = policy.mode == RefineMode::AprioriSchedule;
  int k = 0;
  auto level_cap = [&] {
    return inst.spec.initial_level +
           static_cast<int>(std::ceil(k * std::log2(1.0 / policy.rates.h) - 1e-9));
  };

  auto refine = [&](std::vector<Cell> cells) {
    if (apriori) {
      const int cap = level_cap();
      std::erase_if(cells, [cap](const Cell& c) { return c.level >= cap; });
    }
    const std::size_t per = (std::size_t{1} << d) - 1;
    const std::size_t room =
        mesh.leaf_count() >= policy.max_leaves ? 0 : (policy.max_leaves - mesh.leaf_count()) / per;
    if (room == 0) {
      out.leaf_capped = true;
      return false;
    }
    if (cells.size() > room) {
      cells.resize(room);
      out.leaf_capped = true;
    }
    const std::vector<Cell> old = mesh.leaves();
    auto rr = mesh.refine(cells);
    if (rr.depth_capped) out.depth_capped = true;
    if (rr.refined == 0) return false;
    rebuild(old, rr.transfer);
    return true;
  };

  auto certify = [&] { return gaps(e, op, mesh, model, st.x, c.certify); };

  Recorder rec(inst, t0);
  bool have_beta = false;
  const std::int64_t iters = c.solver.iters;
  for (std::int64_t n = 0;; ++n) {
    if (n > 0) step(st, e, model);
    if (!is_check(n, iters, c.output.check_every)) continue;
    CertificateReport r = certify();
    if (!have_beta) {
      out.beta = policy.beta.value_or(monitored_value(policy.mode, r));
      if (!(out.beta > 0.0)) out.beta = std::numeric_limits<double>::min();
      have_beta = true;
    }
    if (c.adaptive) {
      if (n > 0 && should_refine(policy, out.beta, r, k, n)) {
        if (refine(select_cells(e, r, mesh, policy.gap_factor, policy.max_cells))) r = certify();
        ++k;
        out.epoch_starts.push_back(n);
        // Deepen the most uncertain of the finest cells until the epoch's
        // resolution is reached.
        for (int guard = 0; apriori && guard < 64 && mesh.max_level() < level_cap(); ++guard) {
          const int top = mesh.max_level();
          Eigen::Index best = -1;
          for (std::size_t i = 0; i < mesh.leaf_count(); ++i) {
            const auto j = static_cast<Eigen::Index>(i);
            if (mesh.leaves()[i].level == top && (best < 0 || r.cell_bounds[j] > r.cell_bounds[best]))
              best = j;
          }
          if (!refine({mesh.leaves()[static_cast<std::size_t>(best)]})) break;
          r = certify();
        }
      }
      for (int round = 0; round < kMaxSpatialRounds && r.cont_gap > policy.gap_factor * r.disc_gap;
           ++round) {
        if (!refine(select_cells(e, r, mesh, policy.gap_factor, policy.max_cells))) break;
        r = certify();
      }
    }
    std::vector<Cell> screened = screen(e, r, mesh, c.screen);
    if (c.adaptive && policy.coarsen && !screened.empty()) {
      std::vector<Cell> zero;
      for (const Cell& cell : screened) {
        const std::size_t i = mesh.position(cell);
        const auto j = static_cast<Eigen::Index>(i);
        if (st.x[j] == 0.0 && st.z[j] == 0.0 && st.x_prev[j] == 0.0 && st.snapshot[j] == 0.0)
          zero.push_back(cell);
      }
      const std::vector<Cell> old = mesh.leaves();
      Transfer t = mesh.coarsen_zero(zero);
      if (mesh.leaf_count() != old.size()) {
        rebuild(old, t);
        r = certify();
        screened = screen(e, r, mesh, c.screen);
      }
    }
    out.trace.push_back(
        rec.row(n, r, mesh.leaf_count(), mesh.min_cell_width(), k, screened.size()));
    if (n >= iters) break;
  }
  out.restarts = st.restarts;
  out.x = st.x;
  out.mesh.emplace(std::move(mesh));
}

void run_wavelet(const RunConfig& c, const Instance& inst, RunResult& out) {
  const Energy& e = inst.energy;
  const KernelOperator& op = inst.op;
  const RefinePolicy& policy = c.policy;
  const auto t0 = Clock::now();

  WaveletTree tree(inst.spec.domain, std::max(policy.max_depth, inst.spec.initial_level));
  for (int l = 0; l < inst.spec.initial_level; ++l) {
    const std::vector<Cell> leaves = tree.leaf_mesh().leaves();
    tree.expand(leaves);
  }
  Eigen::MatrixXd cols(op.m(), 0);
  tree.update_columns(op, cols);
  LinearModel model{cols, Eigen::VectorXd::Ones(cols.cols())};
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(cols.cols());
  // The scaling function is 1/sqrt|Ω| on the whole domain.
  x0[0] = c.solver.x0 * std::sqrt(inst.spec.domain.measure());
  SolverState st = SolverState::start(model, x0, c.solver.schedule);

  auto certify = [&] { return gaps(e, op, tree, model, st.x, c.certify); };

  Recorder rec(inst, t0);
  const std::int64_t iters = c.solver.iters;
  for (std::int64_t n = 0;; ++n) {
    if (n > 0) step(st, e, model);
    if (!is_check(n, iters, c.output.check_every)) continue;
    CertificateReport r = certify();
    if (c.adaptive) {
      const std::size_t room = tree.size() >= policy.max_leaves ? 0 : policy.max_leaves - tree.size();
      if (room == 0) {
        out.leaf_capped = true;
      } else {
        auto g = tree.grow(op, r.phi, e.mu, r.disc_grad, policy.wavelet_factor, room);
        if (g.depth_capped) out.depth_capped = true;
        if (!g.added.empty()) {
          tree.update_columns(op, model.columns);
          model.weights = Eigen::VectorXd::Ones(model.columns.cols());
          st.extend(model.columns.cols());
          st.refresh(model);
          r = certify();
          if (tree.size() >= policy.max_leaves) out.leaf_capped = true;
        }
      }
    }
    const std::vector<Cell> screened = screen(e, r, tree.leaf_mesh(), ScreenVariant::Continuous);
    const DyadicMesh& m = tree.leaf_mesh();
    out.trace.push_back(rec.row(n, r, m.leaf_count(), m.min_cell_width(),
                                static_cast<int>(m.epoch()), screened.size()));
    if (n >= iters) break;
  }
  out.restarts = st.restarts;
  out.x = st.x;
  out.tree.emplace(std::move(tree));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* const kHeader[] = {"n",         "wall_time_s", "energy",        "disc_gap",
                               "cont_gap",  "min_so_far_cont_gap",          "disc_grad",
                               "cont_grad", "leaf_count",  "min_cell_width", "epoch",
                               "screened_cells"};

}  // namespace

RunResult run(const RunConfig& config) {
  config.policy.validate();
  const Instance inst = instantiate(config.problem);
  RunResult out;
  out.operator_scale = inst.operator_scale;
  out.energy_scale = inst.energy_scale;
  if (config.problem.discretization == Discretization::Wavelet) {
    run_wavelet(config, inst, out);
  } else {
    run_mesh(config, inst, out);
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  for (std::size_t i = 0; i < std::size(kHeader); ++i) out << (i ? "," : "") << kHeader[i];
  out << "\r\n";
  for (const TraceRow& r : rows) {
    out << r.n << ',' << fmt(r.wall_time_s) << ',' << fmt(r.energy) << ',' << fmt(r.disc_gap)
        << ',' << fmt(r.cont_gap) << ',' << fmt(r.min_so_far_cont_gap) << ',' << fmt(r.disc_grad)
        << ',' << fmt(r.cont_grad) << ',' << r.leaf_count << ',' << fmt(r.min_cell_width) << ','
        << r.epoch << ',' << r.screened_cells << "\r\n";
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != std::size(kHeader)) throw SchemaError("trace.csv", "wrong column count");
    TraceRow r;
    r.n = std::stoll(f[0]);
    r.wall_time_s = std::stod(f[1]);
    r.energy = std::stod(f[2]);
    r.disc_gap = std::stod(f[3]);
    r.cont_gap = std::stod(f[4]);
    r.min_so_far_cont_gap = std::stod(f[5]);
    r.disc_grad = std::stod(f[6]);
    r.cont_grad = std::stod(f[7]);
    r.leaf_count = std::stoull(f[8]);
    r.min_cell_width = std::stod(f[9]);
    r.epoch = std::stoi(f[10]);
    r.screened_cells = std::stoull(f[11]);
    rows.push_back(r);
  }
  return rows;
}

Json recon_json(const RunConfig& config, const RunResult& result) {
  Json j;
  j["problem"] = to_json(config.problem);
  j["certify"] = {{"taylor_order", config.certify.taylor_order}};
  if (result.tree) {
    j["discretization"] = "wavelet";
    j["tree"] = tree_to_json(*result.tree, result.x);
  } else if (result.mesh) {
    j["discretization"] = "mesh";
    j["mesh"] = mesh_to_json(*result.mesh, result.x);
  }
  return j;
}

Json meta_json(const RunConfig& config, const RunResult& result) {
  Json j;
  j["config"] = to_json(config);
  j["seed"] = config.problem.seed;
  j["operator_scale"] = result.operator_scale;
  j["energy_scale"] = result.energy_scale;
  const RateParams& rates = config.policy.rates;
  j["kappa"] = rates.kappa();
  j["predicted_energy_exponent"] = rates.energy_exponent();
  j["predicted_resolution_exponent"] = rates.resolution_exponent();
  j["beta"] = result.beta;
  j["epoch_starts"] = result.epoch_starts;
  j["restarts"] = result.restarts;
  j["depth_capped"] = result.depth_capped;
  j["leaf_capped"] = result.leaf_capped;
  j["rng"] = "mt19937_64; uniform = (next >> 11) * 2^-53; normal by Box-Muller; "
             "Laplace by inverse CDF";
  return j;
}

RunResult run_to_dir(const RunConfig& config, const std::string& dir) {
  std::filesystem::create_directories(dir);
  RunResult result = run(config);
  const std::filesystem::path base(dir);
  {
    std::ofstream f(base / "trace.csv", std::ios::binary);
    write_trace_csv(f, result.trace);
  }
  {
    std::ofstream f(base / "recon.json");
    f << recon_json(config, result).dump(1) << '\n';
  }
  {
    std::ofstream f(base / "meta.json");
    f << meta_json(config, result).dump(2) << '\n';
  }
  return result;
}

std::optional<double> loglog_slope(const std::vector<double>& n, const std::vector<double>& value,
                                   double lo, double hi) {
  if (n.size() != value.size()) throw DomainMismatch("slope inputs differ in length");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < lo || n[i] > hi || !(value[i] > 0.0) || !(n[i] > 0.0)) continue;
    const double x = std::log(n[i]), y = std::log(value[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::nullopt;
  const double den = count * sxx - sx * sx;
  if (den <= 0.0) return std::nullopt;
  return (count * sxy - sx * sy) / den;
}

namespace {

std::optional<double> trace_slope(const std::vector<TraceRow>& rows, double lo, double hi) {
  std::vector<double> n, v;
  for (const TraceRow& r : rows) {
    n.push_back(static_cast<double>(r.n));
    v.push_back(r.min_so_far_cont_gap);
  }
  return loglog_slope(n, v, lo, hi);
}

std::vector<CompareArm> make_arms(const RunConfig& config) {
  std::vector<CompareArm> arms;
  arms.push_back({"adaptive", config, {}, std::nullopt});
  arms.back().config.adaptive = true;
  const int d = config.problem.d;
  for (std::int64_t cells : config.compare.fixed_cells) {
    int level = 0;
    while ((std::int64_t{1} << (d * level)) < cells && level < 30) ++level;
    if ((std::int64_t{1} << (d * level)) != cells)
      throw SchemaError("compare.fixed_cells", "cell counts must be powers of 2^d");
    CompareArm arm{"fixed_" + std::to_string(cells), config, {}, std::nullopt};
    arm.config.adaptive = false;
    arm.config.problem.initial_level = level;
    arm.config.problem.discretization = Discretization::Mesh;
    arms.push_back(std::move(arm));
  }
  return arms;
}

}  // namespace

std::vector<CompareArm> compare(const RunConfig& config) {
  std::vector<CompareArm> arms = make_arms(config);
  std::vector<std::future<RunResult>> jobs;
  for (const CompareArm& a : arms)
    jobs.push_back(std::async(std::launch::async, [&a] { return run(a.config); }));
  for (std::size_t i = 0; i < arms.size(); ++i) {
    arms[i].result = jobs[i].get();
    arms[i].slope = trace_slope(arms[i].result.trace, config.compare.window_lo,
                                config.compare.window_hi);
  }
  return arms;
}

std::vector<CompareArm> compare_to_dir(const RunConfig& config, const std::string& dir) {
  const std::vector<CompareArm> arms = make_arms(config);
  std::vector<std::future<RunResult>> jobs;
  const std::filesystem::path base(dir);
  for (const CompareArm& a : arms) {
    const std::string sub = (base / a.name).string();
    jobs.push_back(std::async(std::launch::async, [&a, sub] { return run_to_dir(a.config, sub); }));
  }
  std::vector<CompareArm> out = arms;
  Json slopes;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].result = jobs[i].get();
    out[i].slope =
        trace_slope(out[i].result.trace, config.compare.window_lo, config.compare.window_hi);
    slopes[out[i].name] = out[i].slope ? Json(*out[i].slope) : Json(nullptr);
  }
  Json doc = {{"window", {config.compare.window_lo, config.compare.window_hi}},
              {"quantity", "min_so_far_cont_gap"},
              {"slopes", slopes}};
  std::ofstream f(base / "slopes.json");
  f << doc.dump(2) << '\n';
  return out;
}

Json certify_recon(const Json& recon) {
  if (!recon.is_object() || !recon.contains("problem"))
    throw SchemaError("recon", "expected a reconstruction document");
  const ProblemSpec spec = parse_problem(recon.at("problem"), "recon.problem");
  const Instance inst = instantiate(spec);
  CertifyOptions opts;
  if (recon.contains("certify"))
    opts.taylor_order = recon.at("certify").value("taylor_order", opts.taylor_order);
  CertificateReport r;
  std::size_t leaves = 0;
  if (recon.value("discretization", "mesh") == "wavelet") {
    if (!recon.contains("tree")) throw SchemaError("recon.tree", "missing");
    const TreeFunction f = tree_from_json(recon.at("tree"), "recon.tree");
    if (f.tree.dim() != spec.d) throw SchemaError("recon.tree.domain", "dimension differs from the problem");
    Eigen::MatrixXd cols(inst.op.m(), 0);
    f.tree.update_columns(inst.op, cols);
    LinearModel model{cols, Eigen::VectorXd::Ones(cols.cols())};
    r = gaps(inst.energy, inst.op, f.tree, model, f.coeffs, opts);
    leaves = f.tree.leaf_mesh().leaf_count();
  } else {
    if (!recon.contains("mesh")) throw SchemaError("recon.mesh", "missing");
    const MeshFunction f = mesh_from_json(recon.at("mesh"), "recon.mesh");
    if (f.mesh.dim() != spec.d) throw SchemaError("recon.mesh.domain", "dimension differs from the problem");
    LinearModel model{inst.op.mesh_columns(f.mesh), leaf_measures(f.mesh)};
    r = gaps(inst.energy, inst.op, f.mesh, model, f.coeffs, opts);
    leaves = f.mesh.leaf_count();
  }
  const double s = 1.0 / inst.energy_scale;
  return Json{{"energy", s * r.energy},       {"disc_gap", s * r.disc_gap},
              {"cont_gap", s * r.cont_gap},   {"disc_grad", s * r.disc_grad},
              {"cont_grad", s * r.cont_grad}, {"sigma", r.sigma},
              {"sigma0", r.sigma0},           {"screen_ratio", r.screen_ratio},
              {"leaf_count", leaves},         {"clamped", r.clamped}};
}

}  // namespace rsfista
