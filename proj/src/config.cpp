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

#include "rsfista/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "rsfista/errors.hpp"

namespace rsfista {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string join(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Typed access to one JSON object that remembers which keys were read.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number()) throw SchemaError(join(path_, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(join(path_, key), "expected a finite number");
    return d;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e18)
        return static_cast<std::int64_t>(d);
    }
    throw SchemaError(join(path_, key), "expected an integer");
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) throw SchemaError(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_string()) throw SchemaError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw SchemaError(join(path_, it.key()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs a parser for an enum-like string, rewrapping its error with the path.
template <typename F>
auto wrap(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

Point parse_point(const Json& v, int d, const std::string& path) {
  if (v.is_number() && d == 1) return {v.get<double>(), 0.0};
  if (!v.is_array() || static_cast<int>(v.size()) != d)
    throw SchemaError(path, "expected an array of " + std::to_string(d) + " numbers");
  Point p{0.0, 0.0};
  for (int k = 0; k < d; ++k) {
    if (!v[static_cast<std::size_t>(k)].is_number()) throw SchemaError(path, "expected numbers");
    p[k] = v[static_cast<std::size_t>(k)].get<double>();
  }
  return p;
}

Json point_json(const Point& p, int d) {
  Json a = Json::array();
  for (int k = 0; k < d; ++k) a.push_back(p[k]);
  return a;
}

const Json& array_at(Reader& r, const std::string& key) {
  const Json& v = r.raw(key);
  if (!v.is_array()) throw SchemaError(join(r.path(), key), "expected an array");
  return v;
}

void parse_operator(const Json& doc, const std::string& path, ProblemSpec& p) {
  Reader r(doc, path);
  OperatorConfig& op = p.op;
  if (r.has("kind"))
    op.kind = wrap(join(path, "kind"), [&] { return kernel_kind_from_string(r.string("kind", "")); });
  op.sigma = r.number("sigma", op.sigma);
  if (r.has("frequencies")) {
    const Json& a = array_at(r, "frequencies");
    op.frequencies.clear();
    for (std::size_t i = 0; i < a.size(); ++i)
      op.frequencies.push_back(parse_point(a[i], p.d, join(join(path, "frequencies"), i)));
  }
  if (r.has("centers")) {
    const Json& a = array_at(r, "centers");
    op.centers.clear();
    op.lattice.reset();
    for (std::size_t i = 0; i < a.size(); ++i)
      op.centers.push_back(parse_point(a[i], p.d, join(join(path, "centers"), i)));
  }
  if (r.has("lattice")) {
    const std::string lp = join(path, "lattice");
    const Json& lv = r.raw("lattice");
    if (lv.is_null()) {
      op.lattice.reset();
    } else {
      Reader l(lv, lp);
      GaussianLattice g = op.lattice.value_or(GaussianLattice{});
      if (l.has("origin")) g.origin = parse_point(l.raw("origin"), p.d, join(lp, "origin"));
      g.spacing = l.number("spacing", g.spacing);
      g.per_axis = static_cast<int>(l.integer("per_axis", g.per_axis));
      l.finish();
      op.lattice = g;
    }
  }
  if (r.has("strips")) {
    const Json& a = array_at(r, "strips");
    op.strips.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string sp = join(join(path, "strips"), i);
      Reader s(a[i], sp);
      Strip st;
      if (s.has("direction")) st.direction = parse_point(s.raw("direction"), p.d, join(sp, "direction"));
      st.lo = s.number("lo", st.lo);
      st.hi = s.number("hi", st.hi);
      st.block = static_cast<int>(s.integer("block", st.block));
      s.finish();
      op.strips.push_back(st);
    }
  }
  r.finish();
}

Json operator_json(const ProblemSpec& p) {
  Json j;
  j["kind"] = to_string(p.op.kind);
  switch (p.op.kind) {
    case KernelKind::Cosine: {
      Json a = Json::array();
      for (const Point& w : p.op.frequencies) a.push_back(point_json(w, p.d));
      j["frequencies"] = a;
      break;
    }
    case KernelKind::Gaussian: {
      j["sigma"] = p.op.sigma;
      if (p.op.lattice) {
        j["lattice"] = {{"origin", point_json(p.op.lattice->origin, p.d)},
                        {"spacing", p.op.lattice->spacing},
                        {"per_axis", p.op.lattice->per_axis}};
      } else {
        Json a = Json::array();
        for (const Point& c : p.op.centers) a.push_back(point_json(c, p.d));
        j["centers"] = a;
      }
      break;
    }
    case KernelKind::Indicator: {
      Json a = Json::array();
      for (const Strip& s : p.op.strips)
        a.push_back({{"direction", point_json(s.direction, p.d)},
                     {"lo", s.lo},
                     {"hi", s.hi},
                     {"block", s.block}});
      j["strips"] = a;
      break;
    }
  }
  return j;
}

StepSchedule parse_schedule(const Json& doc, const std::string& path) {
  Reader r(doc, path);
  const std::string kind = r.string("kind", "chambolle_dossal");
  StepSchedule s = StepSchedule::greedy();
  if (kind == "chambolle_dossal") {
    const double a = r.number("a", 20.0);
    s = wrap(join(path, "a"), [&] { return StepSchedule::chambolle_dossal(a); });
  } else if (kind != "greedy") {
    throw SchemaError(join(path, "kind"), "expected 'chambolle_dossal' or 'greedy'");
  }
  r.finish();
  return s;
}

RefinePolicy parse_policy(const Json& doc, const std::string& path, RunConfig& c) {
  Reader r(doc, path);
  RefinePolicy p = c.policy;
  if (r.has("mode"))
    p.mode = wrap(join(path, "mode"), [&] { return refine_mode_from_string(r.string("mode", "")); });
  if (r.has("beta")) {
    const Json& b = r.raw("beta");
    if (b.is_null()) {
      p.beta.reset();
    } else if (b.is_number()) {
      p.beta = b.get<double>();
    } else {
      throw SchemaError(join(path, "beta"), "expected a number or null");
    }
  }
  p.gap_factor = r.number("gap_factor", p.gap_factor);
  if (r.has("check_every")) p.check_every = static_cast<int>(r.integer("check_every", 0));
  p.max_cells = static_cast<std::size_t>(r.integer("max_cells", static_cast<std::int64_t>(p.max_cells)));
  p.max_depth = static_cast<int>(r.integer("max_depth", p.max_depth));
  p.max_leaves = static_cast<std::size_t>(r.integer("max_leaves", static_cast<std::int64_t>(p.max_leaves)));
  p.backstop = r.boolean("backstop", p.backstop);
  p.apriori_c = r.number("apriori_c", p.apriori_c);
  p.wavelet_factor = r.number("wavelet_factor", p.wavelet_factor);
  p.coarsen = r.boolean("coarsen", p.coarsen);
  if (r.has("rates")) {
    const std::string rp = join(path, "rates");
    Reader q(r.raw("rates"), rp);
    p.rates.a_U = q.number("a_U", p.rates.a_U);
    p.rates.a_E = q.number("a_E", p.rates.a_E);
    p.rates.h = q.number("h", p.rates.h);
    p.rates.d = static_cast<int>(q.integer("d", p.rates.d));
    q.finish();
  }
  c.adaptive = r.boolean("adaptive", c.adaptive);
  if (r.has("screen")) {
    const std::string s = r.string("screen", "");
    if (s == "continuous") {
      c.screen = ScreenVariant::Continuous;
    } else if (s == "discrete") {
      c.screen = ScreenVariant::Discrete;
    } else {
      throw SchemaError(join(path, "screen"), "expected 'continuous' or 'discrete'");
    }
  }
  c.certify.taylor_order = static_cast<int>(r.integer("taylor_order", c.certify.taylor_order));
  if (c.certify.taylor_order != 0 && c.certify.taylor_order != 1)
    throw SchemaError(join(path, "taylor_order"), "expected 0 or 1");
  r.finish();
  wrap(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

}  // namespace

ProblemSpec parse_problem(const Json& doc, const std::string& path) {
  if (doc.is_string())
    return wrap(path, [&] { return preset(doc.get<std::string>()); });
  Reader r(doc, path);
  ProblemSpec p;
  const std::uint64_t seed = static_cast<std::uint64_t>(r.integer("seed", 1));
  if (r.has("preset")) {
    const std::string name = r.string("preset", "");
    p = wrap(join(path, "preset"), [&] {
      if (name == "radon_2d" && (r.has("angles") || r.has("bins"))) {
        ProblemSpec q = radon_2d(static_cast<int>(r.integer("angles", 10)),
                                 static_cast<int>(r.integer("bins", 20)));
        q.seed = seed;
        return q;
      }
      return preset(name, seed);
    });
  } else {
    p.seed = seed;
  }
  p.name = r.string("name", p.name);
  if (r.has("d")) {
    p.d = static_cast<int>(r.integer("d", 1));
    if (p.d != 1 && p.d != 2) throw SchemaError(join(path, "d"), "expected 1 or 2");
    p.domain.dim = p.d;
  }
  if (r.has("domain")) {
    const std::string dp = join(path, "domain");
    Reader b(r.raw("domain"), dp);
    if (b.has("lo")) p.domain.lo = parse_point(b.raw("lo"), p.d, join(dp, "lo"));
    if (b.has("hi")) p.domain.hi = parse_point(b.raw("hi"), p.d, join(dp, "hi"));
    b.finish();
    p.domain.dim = p.d;
  }
  if (r.has("operator")) parse_operator(r.raw("operator"), join(path, "operator"), p);
  if (r.has("fidelity")) {
    const std::string fp = join(path, "fidelity");
    Reader f(r.raw("fidelity"), fp);
    const std::string kind = f.string("kind", to_string(p.fidelity.kind));
    const double eps = f.number("eps", p.fidelity.eps);
    if (kind == "quadratic") {
      p.fidelity = Fidelity::quadratic();
    } else if (kind == "smoothed_robust") {
      p.fidelity = wrap(join(fp, "eps"), [&] { return Fidelity::smoothed_robust(eps); });
    } else {
      throw SchemaError(join(fp, "kind"), "expected 'quadratic' or 'smoothed_robust'");
    }
    f.finish();
  }
  p.mu = r.number("mu", p.mu);
  if (r.has("spikes")) {
    const Json& a = array_at(r, "spikes");
    p.spikes.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string sp = join(join(path, "spikes"), i);
      Reader s(a[i], sp);
      Spike k;
      if (s.has("location")) k.location = parse_point(s.raw("location"), p.d, join(sp, "location"));
      k.mass = s.number("mass", k.mass);
      s.finish();
      p.spikes.push_back(k);
    }
  }
  if (r.has("discs")) {
    const Json& a = array_at(r, "discs");
    p.discs.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string sp = join(join(path, "discs"), i);
      Reader s(a[i], sp);
      Disc c;
      if (s.has("center")) c.center = parse_point(s.raw("center"), 2, join(sp, "center"));
      c.radius = s.number("radius", c.radius);
      c.value = s.number("value", c.value);
      s.finish();
      p.discs.push_back(c);
    }
  }
  if (r.has("noise")) {
    const std::string np = join(path, "noise");
    Reader n(r.raw("noise"), np);
    if (n.has("kind"))
      p.noise.kind = wrap(join(np, "kind"), [&] { return noise_kind_from_string(n.string("kind", "")); });
    p.noise.level = n.number("level", p.noise.level);
    n.finish();
  }
  if (r.has("discretization"))
    p.discretization = wrap(join(path, "discretization"), [&] {
      return discretization_from_string(r.string("discretization", ""));
    });
  p.initial_level = static_cast<int>(r.integer("initial_level", p.initial_level));
  // Read only for the radon preset above; mark them seen either way.
  if (r.has("angles")) r.raw("angles");
  if (r.has("bins")) r.raw("bins");
  r.finish();
  wrap(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

Json to_json(const ProblemSpec& p) {
  Json j;
  j["name"] = p.name;
  j["d"] = p.d;
  j["domain"] = {{"lo", point_json(p.domain.lo, p.d)}, {"hi", point_json(p.domain.hi, p.d)}};
  j["operator"] = operator_json(p);
  j["fidelity"] = {{"kind", to_string(p.fidelity.kind)}, {"eps", p.fidelity.eps}};
  j["mu"] = p.mu;
  Json spikes = Json::array();
  for (const Spike& s : p.spikes)
    spikes.push_back({{"location", point_json(s.location, p.d)}, {"mass", s.mass}});
  j["spikes"] = spikes;
  Json discs = Json::array();
  for (const Disc& c : p.discs)
    discs.push_back({{"center", point_json(c.center, 2)}, {"radius", c.radius}, {"value", c.value}});
  j["discs"] = discs;
  j["noise"] = {{"kind", to_string(p.noise.kind)}, {"level", p.noise.level}};
  j["seed"] = p.seed;
  j["discretization"] = to_string(p.discretization);
  j["initial_level"] = p.initial_level;
  return j;
}

RunConfig parse_config(const Json& doc) {
  Reader r(doc, "");
  RunConfig c;
  if (r.has("problem")) c.problem = parse_problem(r.raw("problem"), "problem");
  // Default rates follow the problem dimension.
  c.policy.rates = RateParams::lasso(c.problem.d);
  if (r.has("solver")) {
    Reader s(r.raw("solver"), "solver");
    if (s.has("schedule")) c.solver.schedule = parse_schedule(s.raw("schedule"), "solver.schedule");
    c.solver.iters = s.integer("iters", c.solver.iters);
    if (c.solver.iters < 0) throw SchemaError("solver.iters", "must be nonnegative");
    if (s.has("x0")) {
      const Json& v = s.raw("x0");
      if (v.is_string() && v.get<std::string>() == "zero") {
        c.solver.x0 = 0.0;
      } else if (v.is_number()) {
        c.solver.x0 = v.get<double>();
      } else {
        throw SchemaError("solver.x0", "expected 'zero' or a number");
      }
    }
    s.finish();
  }
  if (r.has("policy")) c.policy = parse_policy(r.raw("policy"), "policy", c);
  if (r.has("output")) {
    Reader o(r.raw("output"), "output");
    c.output.check_every = static_cast<int>(o.integer("check_every", c.policy.check_every));
    c.output.dir = o.string("dir", c.output.dir);
    o.finish();
    if (c.output.check_every < 1) throw SchemaError("output.check_every", "must be at least 1");
    c.policy.check_every = c.output.check_every;
  } else {
    c.output.check_every = c.policy.check_every;
  }
  if (r.has("compare")) {
    Reader m(r.raw("compare"), "compare");
    if (m.has("fixed_cells")) {
      const Json& a = array_at(m, "fixed_cells");
      c.compare.fixed_cells.clear();
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number_integer() || a[i].get<std::int64_t>() < 1)
          throw SchemaError(join("compare.fixed_cells", i), "expected a positive integer");
        c.compare.fixed_cells.push_back(a[i].get<std::int64_t>());
      }
    }
    if (m.has("window")) {
      const Json& w = array_at(m, "window");
      if (w.size() != 2 || !w[0].is_number() || !w[1].is_number() ||
          !(w[0].get<double>() > 0.0) || !(w[1].get<double>() > w[0].get<double>()))
        throw SchemaError("compare.window", "expected [lo, hi] with 0 < lo < hi");
      c.compare.window_lo = w[0].get<double>();
      c.compare.window_hi = w[1].get<double>();
    }
    m.finish();
  }
  r.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open config file");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

Json to_json(const RunConfig& c) {
  Json j;
  j["problem"] = to_json(c.problem);
  Json sched;
  if (c.solver.schedule.kind() == ScheduleKind::Greedy) {
    sched = {{"kind", "greedy"}};
  } else {
    sched = {{"kind", "chambolle_dossal"}, {"a", c.solver.schedule.a()}};
  }
  j["solver"] = {{"schedule", sched}, {"iters", c.solver.iters}, {"x0", c.solver.x0}};
  const RefinePolicy& p = c.policy;
  Json pol;
  pol["mode"] = to_string(p.mode);
  pol["beta"] = p.beta ? Json(*p.beta) : Json(nullptr);
  pol["gap_factor"] = p.gap_factor;
  pol["max_cells"] = p.max_cells;
  pol["max_depth"] = p.max_depth;
  pol["max_leaves"] = p.max_leaves;
  pol["backstop"] = p.backstop;
  pol["apriori_c"] = p.apriori_c;
  pol["wavelet_factor"] = p.wavelet_factor;
  pol["coarsen"] = p.coarsen;
  pol["rates"] = {{"a_U", p.rates.a_U}, {"a_E", p.rates.a_E}, {"h", p.rates.h}, {"d", p.rates.d}};
  pol["adaptive"] = c.adaptive;
  pol["screen"] = c.screen == ScreenVariant::Continuous ? "continuous" : "discrete";
  pol["taylor_order"] = c.certify.taylor_order;
  j["policy"] = pol;
  j["output"] = {{"check_every", c.output.check_every}, {"dir", c.output.dir}};
  j["compare"] = {{"fixed_cells", c.compare.fixed_cells},
                  {"window", {c.compare.window_lo, c.compare.window_hi}}};
  return j;
}

}  // namespace rsfista
