#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "raceway/empc.hpp"
#include "raceway/forecast.hpp"
#include "raceway/nlp.hpp"

using namespace raceway;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

NlpProblem box_problem(std::vector<double> lower, std::vector<double> upper,
                       std::vector<double> guess,
                       std::function<double(const std::vector<double>&)> f) {
  NlpProblem p;
  p.lower = std::move(lower);
  p.upper = std::move(upper);
  p.guess = std::move(guess);
  p.objective = std::move(f);
  return p;
}

WeatherSeries constant_series(std::int64_t t0, std::int64_t t1, Disturbance d) {
  WeatherSeries s;
  for (std::int64_t t = t0; t <= t1; t += 60) s.push_back(t, d);
  return s;
}

Disturbance noon_weather() {
  Disturbance d;
  d.irradiance = 800.0;
  d.t_amb = 24.0;
  d.t_soil = 20.0;
  d.wind = 2.0;
  d.humidity = 50.0;
  return d;
}

}  // namespace

TEST_CASE("move blocking layout arithmetic") {
  SECTION("Np=24, Nc=6: 43 decision variables in blocks of 4") {
    const MoveLayout lay = MoveLayout::make(24, 6);
    CHECK(lay.size() == 43);
    CHECK(lay.block_len == 4);
    CHECK(lay.block_of(0) == 0);
    CHECK(lay.block_of(3) == 0);
    CHECK(lay.block_of(4) == 1);
    CHECK(lay.block_of(23) == 5);
    CHECK(lay.flow_index(0, 0) == 0);
    CHECK(lay.flow_index(2, 1) == 7);
    CHECK(lay.flow_index(5, 2) == 17);
    CHECK(lay.slack_level_index(0) == 18);
    CHECK(lay.slack_level_index(23) == 41);
    CHECK(lay.slack_terminal_index() == 42);
  }

  SECTION("uneven division: the last block absorbs the tail") {
    const MoveLayout lay = MoveLayout::make(5, 2);
    CHECK(lay.block_len == 3);
    CHECK(lay.block_of(2) == 0);
    CHECK(lay.block_of(3) == 1);
    CHECK(lay.block_of(4) == 1);
  }

  SECTION("degenerate and invalid layouts") {
    CHECK(MoveLayout::make(1, 1).size() == 5);
    CHECK_THROWS_AS(MoveLayout::make(24, 0), invalid_parameter);
    CHECK_THROWS_AS(MoveLayout::make(24, 25), invalid_parameter);
    CHECK_THROWS_AS(MoveLayout::make(0, 1), invalid_parameter);
  }
}

TEST_CASE("solver recovers the analytic minimizer of a convex quadratic") {
  const std::vector<double> c{0.31, 0.62, 0.47};
  NlpProblem p = box_problem({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {0.5, 0.5, 0.5},
                             [&c](const std::vector<double>& z) {
                               double f = 0.0;
                               for (std::size_t i = 0; i < z.size(); ++i)
                                 f += (z[i] - c[i]) * (z[i] - c[i]);
                               return f;
                             });
  SolverOptions opt;
  opt.fd_step = 1e-9;  // keep the forward-difference bias below the tolerance
  const NlpSolution sol = solve(p, opt);
  CHECK(sol.status == "converged");
  CHECK(sol.optimality < 1e-6);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK_THAT(sol.z[i], WithinAbs(c[i], 1e-6));
  CHECK(sol.objective < 1e-11);
}

TEST_CASE("bound-active quadratic stops exactly at the box face") {
  NlpProblem p = box_problem({0.0, 0.0}, {1.0, 1.0}, {0.5, 0.5},
                             [](const std::vector<double>& z) {
                               const double a = z[0] - 1.7;
                               const double b = z[1] + 0.4;
                               return a * a + b * b;
                             });
  const NlpSolution sol = solve(p);
  CHECK(sol.status == "converged");
  CHECK(sol.z[0] == 1.0);
  CHECK(sol.z[1] == 0.0);
  CHECK_THAT(sol.objective, WithinRel(0.49 + 0.16, 1e-9));
}

TEST_CASE("a guess outside the box is reported, not repaired") {
  NlpProblem p = box_problem({0.0}, {1.0}, {1.5},
                             [](const std::vector<double>& z) { return z[0]; });
  const NlpSolution sol = solve(p);
  CHECK(sol.status == "infeasible-guess");
  CHECK(sol.z[0] == 1.5);
  CHECK(sol.iterations == 0);
}

TEST_CASE("solver input validation") {
  NlpProblem p = box_problem({0.0, 0.0}, {1.0}, {0.5},
                             [](const std::vector<double>&) { return 0.0; });
  CHECK_THROWS_AS(solve(p), invalid_parameter);

  NlpProblem q = box_problem({2.0}, {1.0}, {1.5},
                             [](const std::vector<double>&) { return 0.0; });
  CHECK_THROWS_AS(solve(q), invalid_parameter);
}

TEST_CASE("accepted iterates never increase the merit on a nonconvex surface") {
  NlpProblem p = box_problem(
      {0.0, 0.0}, {2.0, 2.0}, {0.2, 1.8}, [](const std::vector<double>& z) {
        const double a = z[1] - z[0] * z[0];
        const double b = 1.0 - z[0];
        return 100.0 * a * a + b * b;
      });
  const NlpSolution sol = solve(p);
  CHECK(sol.objective <= p.objective(p.guess));
  for (double v : sol.z) {
    CHECK(v >= 0.0);
    CHECK(v <= 2.0);
  }
  REQUIRE(sol.merit_history.size() >= 2);
  for (std::size_t i = 1; i < sol.merit_history.size(); ++i)
    CHECK(sol.merit_history[i] < sol.merit_history[i - 1]);
}

TEST_CASE("inequalities are enforced through the augmented Lagrangian") {
  SECTION("single active constraint pulls the solution off the unconstrained optimum") {
    NlpProblem p = box_problem({0.0}, {1.0}, {0.5},
                               [](const std::vector<double>& z) {
                                 return (z[0] - 0.2) * (z[0] - 0.2);
                               });
    p.inequality = [](const std::vector<double>& z) {
      return std::vector<double>{0.7 - z[0]};  // z >= 0.7
    };
    const NlpSolution sol = solve(p);
    CHECK(sol.constraint_violation <= 1e-6);
    CHECK_THAT(sol.z[0], WithinAbs(0.7, 1e-3));
    CHECK_THAT(sol.objective, WithinRel(0.25, 1e-2));
  }

  SECTION("independent constraints bind per component") {
    NlpProblem p = box_problem({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0},
                               {0.5, 0.5, 0.5},
                               [](const std::vector<double>& z) {
                                 return z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
                               });
    p.inequality = [](const std::vector<double>& z) {
      return std::vector<double>{0.3 - z[0], 0.55 - z[1]};
    };
    const NlpSolution sol = solve(p);
    CHECK(sol.constraint_violation <= 1e-6);
    CHECK_THAT(sol.z[0], WithinAbs(0.3, 2e-3));
    CHECK_THAT(sol.z[1], WithinAbs(0.55, 2e-3));
    CHECK(sol.z[2] <= 1e-4);
  }
}

TEST_CASE("warm start shifts blocked moves and resets slacks") {
  SECTION("one-step shift with unit blocks, repeating the last move") {
    const MoveLayout lay = MoveLayout::make(4, 4);
    std::vector<double> prev(static_cast<std::size_t>(lay.size()), 0.0);
    for (int b = 0; b < 4; ++b)
      for (int k = 0; k < 3; ++k)
        prev[static_cast<std::size_t>(lay.flow_index(b, k))] = 10.0 * b + k;
    // put nonzero slacks in to confirm they reset
    prev[static_cast<std::size_t>(lay.slack_level_index(0))] = -0.5;
    prev[static_cast<std::size_t>(lay.slack_terminal_index())] = -0.1;

    std::vector<double> lower(static_cast<std::size_t>(lay.size()), -1.0);
    std::vector<double> upper(static_cast<std::size_t>(lay.size()), 100.0);
    const std::vector<double> g = warm_start(prev, lay, lay, lower, upper, 5.0);

    for (int k = 0; k < 3; ++k) {
      CHECK(g[static_cast<std::size_t>(lay.flow_index(0, k))] == 10.0 + k);
      CHECK(g[static_cast<std::size_t>(lay.flow_index(1, k))] == 20.0 + k);
      CHECK(g[static_cast<std::size_t>(lay.flow_index(2, k))] == 30.0 + k);
      CHECK(g[static_cast<std::size_t>(lay.flow_index(3, k))] == 30.0 + k);
    }
    CHECK(g[static_cast<std::size_t>(lay.slack_level_index(0))] == 0.0);
    CHECK(g[static_cast<std::size_t>(lay.slack_terminal_index())] == 0.0);
  }

  SECTION("without a previous solution every flow starts at the default") {
    const MoveLayout lay = MoveLayout::make(24, 6);
    std::vector<double> lower(static_cast<std::size_t>(lay.size()), 0.0);
    std::vector<double> upper(static_cast<std::size_t>(lay.size()), 500.0);
    const std::vector<double> g = warm_start({}, MoveLayout{}, lay, lower, upper, 5.0);
    for (int b = 0; b < lay.nc; ++b)
      for (int k = 0; k < 3; ++k)
        CHECK(g[static_cast<std::size_t>(lay.flow_index(b, k))] == 5.0);
    CHECK(g[static_cast<std::size_t>(lay.slack_level_index(3))] == 0.0);
  }

  SECTION("a shrunken horizon truncates the shift and stays in bounds") {
    const MoveLayout prev_lay = MoveLayout::make(8, 4);
    std::vector<double> prev(static_cast<std::size_t>(prev_lay.size()), 0.0);
    for (int b = 0; b < 4; ++b)
      for (int k = 0; k < 3; ++k)
        prev[static_cast<std::size_t>(prev_lay.flow_index(b, k))] = 80.0 + b;

    const MoveLayout next_lay = MoveLayout::make(6, 3);
    std::vector<double> lower(static_cast<std::size_t>(next_lay.size()), 0.0);
    std::vector<double> upper(static_cast<std::size_t>(next_lay.size()), 75.0);
    upper[0] = 500.0;  // air bound wider, like the real problem
    const std::vector<double> g =
        warm_start(prev, prev_lay, next_lay, lower, upper, 5.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(g[i] >= lower[i]);
      CHECK(g[i] <= upper[i]);
    }
    // block 1 of the new layout reads old step 3 -> old block 1 (value 81),
    // clamped to the 75 L/min bound for the dilution/harvest columns
    CHECK(g[static_cast<std::size_t>(next_lay.flow_index(1, 1))] == 75.0);
    CHECK(g[static_cast<std::size_t>(next_lay.flow_index(0, 0))] == 80.0);
  }
}

TEST_CASE("forward differences of the transcription match central differences") {
  const ModelParams model;
  const GasParams gas;
  const CostParams cost;
  EmpcConfig cfg;

  const std::int64_t noon = 12 * 3600;
  const WeatherSeries w = constant_series(noon, noon + 4 * 3600, noon_weather());
  const PerfectForecast forecast(w);

  ReactorState s;
  const NlpProblem prob = transcribe(s, static_cast<double>(noon), 8, forecast,
                                     s.biomass, model, gas, cost, cfg);

  // Slacks stay at their resting value (zero). With a slack pulled into the
  // interior the 1e11-weighted penalty dominates the objective and any flow
  // perturbation drowns in floating-point roundoff, which is a property of
  // the test point, not of the model gradients.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> frac(0.2, 0.8);
  const std::size_t n_flows = static_cast<std::size_t>(3 * prob.layout.nc);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> z(prob.lower.size(), 0.0);
    for (std::size_t i = 0; i < n_flows; ++i)
      z[i] = prob.lower[i] + frac(rng) * (prob.upper[i] - prob.lower[i]);

    const double f0 = prob.objective(z);
    for (std::size_t i = 0; i < n_flows; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(z[i]));
      std::vector<double> zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double forward = (prob.objective(zp) - f0) / h;
      const double central = (prob.objective(zp) - prob.objective(zm)) / (2.0 * h);
      CHECK(std::abs(forward - central) <=
            1e-4 * std::max(1.0, std::abs(central)));
    }
  }
}

TEST_CASE("plant-problem solve never worsens the default guess") {
  const ModelParams model;
  const GasParams gas;
  const CostParams cost;
  EmpcConfig cfg;

  const std::int64_t noon = 12 * 3600;
  const WeatherSeries w = constant_series(noon, noon + 4 * 3600, noon_weather());
  const PerfectForecast forecast(w);

  ReactorState s;
  const NlpProblem prob = transcribe(s, static_cast<double>(noon), 8, forecast,
                                     s.biomass, model, gas, cost, cfg);
  const double at_guess = prob.objective(prob.guess);
  const NlpSolution sol = solve(prob);
  CHECK(sol.objective <= at_guess + 1e-6);
  for (std::size_t i = 0; i < sol.z.size(); ++i) {
    CHECK(sol.z[i] >= prob.lower[i] - 1e-12);
    CHECK(sol.z[i] <= prob.upper[i] + 1e-12);
  }

  SECTION("shifting the solved moves stays near the stationary optimum") {
    // constant weather makes consecutive problems identical, so the shifted
    // guess should already be close to optimal
    const std::vector<double> shifted =
        warm_start(sol.z, prob.layout, prob.layout, prob.lower, prob.upper,
                   cfg.default_flow);
    const double at_shifted = prob.objective(shifted);
    CHECK(std::abs(at_shifted - sol.objective) <=
          0.05 * std::abs(sol.objective) + 1e-6);
  }
}
