#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dcone/boundary_profile.hpp"

using namespace dcone;
using Catch::Approx;

namespace {

BoundaryProfile random_profile(std::mt19937_64& rng, int k_max) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> a(k_max + 1), b(k_max);
  for (double& c : a) c = coef(rng);
  for (double& c : b) c = coef(rng);
  return BoundaryProfile(a, b);
}

/// Random profile projected onto the vanishing-integral condition: a_0 is
/// chosen so that 2 pi a_0^2 cancels the (negative) higher-harmonic sum.
BoundaryProfile random_admissible_profile(std::mt19937_64& rng, int k_max) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> a(k_max + 1, 0.0), b(k_max, 0.0);
  for (int k = 2; k <= k_max; ++k) {
    a[k] = coef(rng);
    b[k - 1] = coef(rng);
  }
  double s = 0.0;
  for (int k = 2; k <= k_max; ++k)
    s += (1.0 - double(k) * k) * (a[k] * a[k] + b[k - 1] * b[k - 1]);
  a[0] = std::sqrt(-s / 2.0);
  return BoundaryProfile(a, b);
}

}  // namespace

TEST_CASE("beta evaluation by term-wise differentiation") {
  const BoundaryProfile sine({0.0}, {1.0});  // beta = sin t
  REQUIRE(sine.eval(M_PI / 2, 0) == Approx(1.0).margin(1e-15));
  REQUIRE(sine.eval(M_PI / 2, 2) == Approx(-1.0).margin(1e-15));

  const BoundaryProfile pd = paper_default_profile();
  REQUIRE(pd.eval(0.0, 0) == Approx(std::sqrt(1.5) + 1.0).margin(1e-15));
  REQUIRE(pd.eval(0.0, 1) == Approx(0.0).margin(1e-15));
  REQUIRE(pd.eval(0.0, 2) == Approx(-4.0).margin(1e-15));

  REQUIRE_THROWS_AS(pd.eval(0.0, 3), InvalidParameter);
}

TEST_CASE("profile validation") {
  REQUIRE_THROWS_AS(BoundaryProfile(std::vector<double>(40, 1.0), {}),
                    InvalidParameter);
  REQUIRE_THROWS_AS(
      BoundaryProfile({std::nan("")}, {}), InvalidParameter);
}

TEST_CASE("admissibility of the canonical cases") {
  SECTION("pure first harmonic is killed by 1 + d^2/dt^2") {
    const auto rep = check_admissibility(BoundaryProfile({0.0}, {1.0}));
    REQUIRE(std::abs(rep.condition1) < 1e-12);
    REQUIRE(rep.condition2 < 1e-12);
    REQUIRE_FALSE(rep.admissible);
  }
  SECTION("zero profile") {
    const auto rep = check_admissibility(BoundaryProfile({0.0}, {}));
    REQUIRE_FALSE(rep.admissible);
    REQUIRE_THROWS_AS(require_admissible(BoundaryProfile({0.0}, {})),
                      AdmissibilityViolation);
  }
  SECTION("paper default is admissible") {
    const auto rep = check_admissibility(paper_default_profile());
    // Parseval: 2 pi (3/2) + pi (1 - 4) = 0
    REQUIRE(std::abs(rep.condition1) < 1e-12);
    REQUIRE(std::abs(rep.condition1_closed) < 1e-12);
    // quadrature oracle (independent high-precision evaluation); the
    // integrand has |.| kinks, so the trapezoid value is second-order
    REQUIRE(rep.condition2 == Approx(13.014675818544149).epsilon(1e-3));
    REQUIRE(rep.admissible);
  }
}

TEST_CASE("Parseval and quadrature routes agree on random profiles") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const auto profile = random_profile(rng, 1 + int(rng() % 8));
    const auto rep = check_admissibility(profile);
    REQUIRE(std::abs(rep.condition1 - rep.condition1_closed) < 1e-10);
  }
}

TEST_CASE("cone trace closure") {
  SECTION("paper default closes up") {
    const auto trace = ConeTrace::build(paper_default_profile());
    REQUIRE(std::abs(trace.zeta(0.0)) < 1e-14);
    REQUIRE(std::abs(trace.closure_residual()) < 1e-12);
    REQUIRE(trace.zeta(two_pi) == Approx(0.0).margin(1e-12));
    // closed form: zeta(t) = sqrt(1.5)/2 sin 2t + 5/16 sin 4t
    REQUIRE(trace.zeta(M_PI / 4) == Approx(0.6123724356957945).epsilon(1e-12));
  }
  SECTION("constant profile has a secular trace") {
    const double c = 0.7;
    try {
      ConeTrace::build(BoundaryProfile({c}, {}));
      FAIL("expected NonPeriodicZeta");
    } catch (const NonPeriodicZeta& err) {
      // zeta(t) = c^2 t / 2, so the closure defect is pi c^2
      REQUIRE(err.residual == Approx(M_PI * c * c).epsilon(1e-12));
    }
    const auto trace = ConeTrace::build(BoundaryProfile({c}, {}), false);
    REQUIRE(trace.zeta(1.0) == Approx(c * c / 2.0).epsilon(1e-12));
  }
  SECTION("zeta periodic iff condition1 vanishes, randomized") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
      const auto generic = random_profile(rng, 4);
      const auto rep = check_admissibility(generic);
      if (std::abs(rep.condition1) > 1e-6) {
        REQUIRE_THROWS_AS(ConeTrace::build(generic), NonPeriodicZeta);
      }
      const auto projected = random_admissible_profile(rng, 5);
      const auto trace = ConeTrace::build(projected);
      REQUIRE(std::abs(trace.closure_residual()) < 1e-10);
    }
  }
  SECTION("gamma is a negative square") {
    const auto trace = ConeTrace::build(paper_default_profile());
    for (int j = 0; j < 64; ++j) REQUIRE(trace.gamma(two_pi * j / 64) <= 0.0);
  }
}

TEST_CASE("cone fields") {
  const auto trace = ConeTrace::build(paper_default_profile());
  const auto& prof = trace.profile();

  SECTION("unit radius, angle 0") {
    const auto f = cone_fields(trace, {1.0, 0.0});
    REQUIRE(f.v == Approx(prof.eval(0.0, 0)).epsilon(1e-14));
    REQUIRE(f.dv[0] == Approx(prof.eval(0.0, 0)).epsilon(1e-14));
    REQUIRE(f.dv[1] == Approx(prof.eval(0.0, 1)).margin(1e-14));
  }
  SECTION("derived value at (0.5, 0)") {
    const auto f = cone_fields(trace, {0.5, 0.0});
    REQUIRE(f.v == Approx(1.1123724356957945).epsilon(1e-12));
  }
  SECTION("gradient is 0-homogeneous") {
    const Vec2 x{0.3, -0.4};
    const auto f1 = cone_fields(trace, x);
    const auto f2 = cone_fields(trace, 2.0 * x);
    REQUIRE((f1.dv - f2.dv).norm() < 1e-14);
  }
  SECTION("undefined at the origin") {
    REQUIRE_THROWS_AS(cone_fields(trace, {0.0, 0.0}), OriginUndefined);
  }
}

TEST_CASE("von Karman isometry of the cone") {
  std::mt19937_64 rng(2024);
  std::vector<BoundaryProfile> profiles{paper_default_profile(),
                                        random_admissible_profile(rng, 4),
                                        random_admissible_profile(rng, 6)};
  std::uniform_real_distribution<double> rad(0.2, 0.95), ang(0.0, two_pi);
  const double h_fd = 1e-6;
  for (const auto& profile : profiles) {
    const auto trace = ConeTrace::build(profile);
    for (int trial = 0; trial < 12; ++trial) {
      const Vec2 x = rad(rng) * unit_radial(ang(rng));
      // finite differences of the in-plane displacement
      Mat2 du;
      for (int k = 0; k < 2; ++k) {
        Vec2 dx = Vec2::Zero();
        dx[k] = h_fd;
        const Vec2 up = cone_fields(trace, x + dx).u;
        const Vec2 um = cone_fields(trace, x - dx).u;
        du.col(k) = (up - um) / (2.0 * h_fd);
      }
      const Vec2 dv = cone_fields(trace, x).dv;
      const Mat2 eps = sym(du) + 0.5 * outer(dv, dv);
      REQUIRE(eps.norm() < 1e-5);

      // the closed-form displacement gradient matches the FD one
      REQUIRE((du - trace.displacement_gradient(std::atan2(x[1], x[0]))).norm() <
              1e-5);
    }
  }
}
