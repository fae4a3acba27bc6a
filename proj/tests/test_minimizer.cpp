#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "dcone/minimizer.hpp"

using namespace dcone;
using Catch::Approx;

namespace {

std::shared_ptr<const DiskGrid> uniform_grid(int nr, int nt) {
  return DiskGrid::build(nr, nt, 1.0, 1.0 / (2 * nr - 1));
}

}  // namespace

TEST_CASE("config validation") {
  MinimizeConfig cfg;
  cfg.h_schedule = {0.1, 0.05};
  REQUIRE_NOTHROW(cfg.validate());
  cfg.h_schedule = {0.05, 0.1};
  REQUIRE_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg.h_schedule = {0.1};
  cfg.ls_shrink = 1.5;
  REQUIRE_THROWS_AS(cfg.validate(), InvalidParameter);
  cfg.ls_shrink = 0.5;
  cfg.grad_tol = 0.0;
  REQUIRE_THROWS_AS(cfg.validate(), InvalidParameter);
}

TEST_CASE("non-finite initial states are rejected") {
  auto grid = uniform_grid(12, 24);
  auto s = FieldState::zero(grid, BoundaryCondition::zero(*grid));
  s.v(3, 5) = std::numeric_limits<double>::quiet_NaN();
  MinimizeConfig cfg;
  REQUIRE_THROWS_AS(minimize(s, 0.1, 2.5, cfg), InvalidParameter);
}

TEST_CASE("already minimal state converges immediately") {
  // membrane-only sector: zero pins make the zero state the global minimum
  auto grid = uniform_grid(12, 24);
  auto s = FieldState::zero(grid, BoundaryCondition::zero(*grid));
  MinimizeConfig cfg;
  cfg.max_iters = 50;
  const auto res = minimize(s, 0.1, 2.5, cfg);
  REQUIRE(res.converged);
  REQUIRE(res.iters == 0);
  REQUIRE(res.breakdown.total == 0.0);
}

TEST_CASE("monotone descent from the smoothed ansatz") {
  const auto trace = ConeTrace::build(paper_default_profile());
  auto grid = DiskGrid::build(32, 64, 1.02, 0.004);
  auto bc = BoundaryCondition::from_trace(*grid, trace);
  const FieldState start = ansatz_state(grid, bc, trace, 0.05, 2.5);
  const double e0 = energy(start, 0.05, 2.5).total;

  MinimizeConfig cfg;
  cfg.max_iters = 150;
  const auto res = minimize(start, 0.05, 2.5, cfg);
  REQUIRE(res.breakdown.total <= e0);
  for (std::size_t k = 1; k < res.history.size(); ++k)
    REQUIRE(res.history[k].energy <= res.history[k - 1].energy);

  SECTION("boundary pins survive bit-exactly") {
    const int last = grid->n_r() - 1;
    for (int j = 0; j < grid->n_theta(); ++j) {
      REQUIRE(res.state.u1(last, j) == bc.boundary_u1(j));
      REQUIRE(res.state.u2(last, j) == bc.boundary_u2(j));
      REQUIRE(res.state.v(last, j) == bc.boundary_v(j));
    }
  }
}

TEST_CASE("line search failure at the numerical floor") {
  // unreachable gradient tolerance: descent must eventually report that no
  // representable step decreases the energy
  auto grid = uniform_grid(8, 16);
  auto bc = BoundaryCondition::from_functions(
      *grid, [](const Vec2&) { return Vec2::Zero(); },
      [](const Vec2& x) { return 0.5 * x.squaredNorm(); });
  auto s = FieldState::sample(grid, bc, [](const Vec2&) { return Vec2::Zero(); },
                              [](const Vec2& x) { return 0.5 * x.squaredNorm(); });
  MinimizeConfig cfg;
  cfg.max_iters = 20000;
  cfg.grad_tol = 1e-300;
  cfg.stall_window = 1000000;  // disabled
  const auto res = minimize(s, 0.1, 2.5, cfg);
  REQUIRE(res.line_search_failed);
  REQUIRE_FALSE(res.converged);
  REQUIRE(res.iters < 20000);
}

TEST_CASE("power law fit") {
  SECTION("exact synthetic data") {
    std::vector<double> hs, es;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) {
      hs.push_back(h);
      es.push_back(3.7 * std::pow(h, 5.0 / 3.0));
    }
    const auto fit = fit_power_law(hs, es);
    REQUIRE(fit.slope == Approx(5.0 / 3.0).margin(1e-12));
    REQUIRE(fit.slope_stderr == Approx(0.0).margin(1e-10));
  }
  SECTION("degenerate inputs") {
    REQUIRE(std::isnan(fit_power_law({0.1}, {1.0}).slope));
    REQUIRE(std::isnan(fit_power_law({}, {}).slope));
  }
}

TEST_CASE("continuation run on a small grid") {
  auto grid = DiskGrid::build(48, 96, 1.03, 0.002);
  MinimizeConfig cfg;
  cfg.max_iters = 500;
  cfg.h_schedule = {0.1, 0.05};
  const auto report = continuation_run(paper_default_profile(), 2.5, cfg, grid);

  REQUIRE(report.entries.size() == 2);
  REQUIRE(report.theoretical_slope == Approx(5.0 / 3.0));
  REQUIRE(std::isfinite(report.fitted_slope));

  const auto trace = ConeTrace::build(paper_default_profile());
  for (const auto& entry : report.entries) {
    const auto upper = ansatz_energy(SmoothedCone(trace, entry.h, 2.5));
    REQUIRE(entry.breakdown.total <= 1.05 * upper.total);
  }

  SECTION("inadmissible profile is rejected up front") {
    REQUIRE_THROWS_AS(
        continuation_run(BoundaryProfile({0.0}, {1.0}), 2.5, cfg, grid),
        AdmissibilityViolation);
  }
}

TEST_CASE("warm start dominance is logged, not enforced") {
  auto grid = DiskGrid::build(32, 64, 1.02, 0.004);
  MinimizeConfig cfg;
  cfg.max_iters = 250;
  cfg.h_schedule = {0.1, 0.05};
  const auto report = continuation_run(paper_default_profile(), 2.5, cfg, grid);
  const auto trace = ConeTrace::build(paper_default_profile());
  const auto bc = BoundaryCondition::from_trace(*grid, trace);
  const FieldState cold = ansatz_state(grid, bc, trace, 0.05, 2.5);
  const auto cold_res = minimize(cold, 0.05, 2.5, cfg);
  if (report.entries[1].iters > cold_res.iters)
    WARN("warm start took more iterations than a cold start: "
         << report.entries[1].iters << " vs " << cold_res.iters);
  SUCCEED();
}
