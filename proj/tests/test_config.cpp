#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "rsfista/config.hpp"
#include "rsfista/errors.hpp"

using namespace rsfista;

namespace {

std::string schema_path(const Json& doc) {
  try {
    parse_config(doc);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config(Json::object());
  CHECK(c.problem.name == "gaussian_1d");
  CHECK(c.solver.schedule.kind() == ScheduleKind::ChambolleDossal);
  CHECK(c.solver.schedule.a() == 20.0);
  CHECK(c.policy.mode == RefineMode::DiscGap);
  CHECK(c.output.check_every == c.policy.check_every);
  CHECK(c.policy.rates.a_U == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("round trip through the resolved document") {
  Json doc = {
      {"problem", {{"preset", "radon_2d"}, {"angles", 4}, {"bins", 6}, {"seed", 3}}},
      {"solver", {{"schedule", {{"kind", "greedy"}}}, {"iters", 123}, {"x0", 0.5}}},
      {"policy",
       {{"mode", "cont_grad"}, {"beta", 2.5}, {"gap_factor", 3.0}, {"max_depth", 9},
        {"backstop", false}, {"rates", {{"a_E", 3.0}}}, {"screen", "discrete"},
        {"taylor_order", 0}, {"coarsen", true}}},
      {"output", {{"check_every", 7}, {"dir", "x/y"}}},
      {"compare", {{"fixed_cells", {16, 64}}, {"window", {10.0, 1000.0}}}}};
  const RunConfig c = parse_config(doc);
  CHECK(c.problem.op.strips.size() == 24);
  CHECK(c.problem.seed == 3);
  CHECK(c.solver.schedule.kind() == ScheduleKind::Greedy);
  CHECK(c.solver.iters == 123);
  CHECK(c.solver.x0 == 0.5);
  CHECK(c.policy.mode == RefineMode::ContGrad);
  CHECK(*c.policy.beta == 2.5);
  CHECK(c.policy.rates.a_E == 3.0);
  CHECK(c.policy.rates.d == 2);
  CHECK(c.screen == ScreenVariant::Discrete);
  CHECK(c.certify.taylor_order == 0);
  CHECK(c.policy.check_every == 7);
  CHECK(c.compare.fixed_cells == std::vector<std::int64_t>{16, 64});

  const Json resolved = to_json(c);
  const RunConfig again = parse_config(resolved);
  CHECK(to_json(again) == resolved);

  // Every preset survives the round trip, including custom operators.
  for (const char* name : {"fourier_1d", "gaussian_1d", "radon_2d", "gaussian_2d_smlm"}) {
    const Json d = {{"problem", {{"preset", name}, {"seed", 2}}}};
    const Json r = to_json(parse_config(d));
    CHECK(to_json(parse_config(r)) == r);
  }
}

TEST_CASE("problem overrides") {
  const RunConfig c = parse_config(
      {{"problem",
        {{"preset", "gaussian_1d"},
         {"mu", 0.5},
         {"spikes", {{{"location", 0.25}, {"mass", 2.0}}}},
         {"noise", {{"kind", "laplace"}, {"level", 0.1}}},
         {"fidelity", {{"kind", "smoothed_robust"}, {"eps", 0.01}}}}}});
  CHECK(c.problem.mu == 0.5);
  REQUIRE(c.problem.spikes.size() == 1);
  CHECK(c.problem.spikes[0].location[0] == 0.25);
  CHECK(c.problem.noise.kind == NoiseKind::Laplace);
  CHECK(c.problem.fidelity.kind == FidelityKind::SmoothedRobust);
  CHECK(parse_config({{"problem", "fourier_1d"}}).problem.name == "fourier_1d");
}

TEST_CASE("schema errors name the offending key") {
  CHECK(schema_path({{"bogus", 1}}) == "bogus");
  CHECK(schema_path({{"solver", {{"iters", "many"}}}}) == "solver.iters");
  CHECK(schema_path({{"solver", {{"iters", -1}}}}) == "solver.iters");
  CHECK(schema_path({{"solver", {{"schedule", {{"a", 1.0}}}}}}) == "solver.schedule.a");
  CHECK(schema_path({{"solver", {{"schedule", {{"kind", "nesterov"}}}}}}) == "solver.schedule.kind");
  CHECK(schema_path({{"solver", {{"x0", true}}}}) == "solver.x0");
  CHECK(schema_path({{"policy", {{"mode", "sometimes"}}}}) == "policy.mode");
  CHECK(schema_path({{"policy", {{"rates", {{"a_X", 1}}}}}}) == "policy.rates.a_X");
  CHECK(schema_path({{"policy", {{"gap_factor", 0.5}}}}) == "policy");
  CHECK(schema_path({{"policy", {{"taylor_order", 2}}}}) == "policy.taylor_order");
  CHECK(schema_path({{"output", {{"check_every", 0}}}}) == "output.check_every");
  CHECK(schema_path({{"compare", {{"fixed_cells", {4, -2}}}}}) == "compare.fixed_cells[1]");
  CHECK(schema_path({{"compare", {{"window", {5.0, 1.0}}}}}) == "compare.window");
  CHECK(schema_path({{"problem", {{"preset", "mystery"}}}}) == "problem.preset");
  CHECK(schema_path({{"problem", {{"spikes", {{{"location", {0.1, 0.2}}}}}}}}) ==
        "problem.spikes[0].location");
  CHECK(schema_path({{"problem", {{"operator", {{"kind", "wavelet"}}}}}}) == "problem.operator.kind");
  CHECK(schema_path({{"problem", {{"noise", {{"hue", 1}}}}}}) == "problem.noise.hue");
  CHECK(schema_path(Json::array()) == "");
}

TEST_CASE("config files") {
  const std::string path = "test_config_tmp.json";
  {
    std::ofstream out(path);
    out << R"({"solver": {"iters": 42}})";
  }
  CHECK(load_config(path).solver.iters == 42);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_config(path), SchemaError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("does/not/exist.json"), SchemaError);
}
