#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dcone/cone_ansatz.hpp"

using namespace dcone;
using Catch::Approx;

namespace {

BoundaryProfile second_admissible_profile() {
  // k = 3 content, a_0 projected so the stretch integral vanishes
  std::vector<double> a{0.0, 0.0, 0.0, 0.5};
  std::vector<double> b{0.0, 0.0, -0.3};
  double s = 0.0;
  for (int k = 2; k <= 3; ++k)
    s += (1.0 - double(k) * k) * (a[k] * a[k] + b[k - 1] * b[k - 1]);
  a[0] = std::sqrt(-s / 2.0);
  return BoundaryProfile(a, b);
}

double fitted_slope(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    sx += std::log(h[i]);
    sy += std::log(e[i]);
  }
  for (std::size_t i = 0; i < h.size(); ++i) {
    sxx += (std::log(h[i]) - sx / n) * (std::log(h[i]) - sx / n);
    sxy += (std::log(h[i]) - sx / n) * (std::log(e[i]) - sy / n);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("dual exponent") {
  REQUIRE(dual_exponent(2.0) == Approx(2.0));
  REQUIRE(dual_exponent(2.5) == Approx(5.0 / 3.0).epsilon(1e-15));
  REQUIRE(dual_exponent(8.0 / 3.0) == Approx(1.6).epsilon(1e-15));
  REQUIRE_THROWS_AS(dual_exponent(1.0), InvalidParameter);
  REQUIRE_THROWS_AS(dual_exponent(0.5), InvalidParameter);
}

TEST_CASE("cutoff profile") {
  REQUIRE(Cutoff::eta(0.5) == 0.0);
  REQUIRE(Cutoff::eta(1.0) == 1.0);
  REQUIRE(Cutoff::eta(0.3) == 0.0);
  REQUIRE(Cutoff::eta(1.7) == 1.0);
  REQUIRE(Cutoff::eta_d(0.5) == 0.0);
  REQUIRE(Cutoff::eta_d(1.0) == 0.0);
  REQUIRE(Cutoff::eta_dd(0.5) == 0.0);
  REQUIRE(Cutoff::eta_dd(1.0) == 0.0);

  SECTION("monotone on the transition") {
    double prev = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double val = Cutoff::eta(0.5 + 0.005 * k);
      REQUIRE(val >= prev - 1e-15);
      prev = val;
    }
  }
  SECTION("derivatives consistent with finite differences") {
    const double fd = 1e-6;
    for (double t : {0.55, 0.7, 0.85, 0.99}) {
      const double d1 = (Cutoff::eta(t + fd) - Cutoff::eta(t - fd)) / (2 * fd);
      const double d2 =
          (Cutoff::eta_d(t + fd) - Cutoff::eta_d(t - fd)) / (2 * fd);
      REQUIRE(Cutoff::eta_d(t) == Approx(d1).epsilon(1e-6));
      REQUIRE(Cutoff::eta_dd(t) == Approx(d2).epsilon(1e-6));
    }
  }
}

TEST_CASE("smoothed cone fields") {
  const auto trace = ConeTrace::build(paper_default_profile());
  const SmoothedCone sc(trace, 0.05, 2.5);
  const double rho = sc.core_radius();
  REQUIRE(rho == Approx(std::pow(0.05, 5.0 / 6.0)).epsilon(1e-15));

  SECTION("outside the core the fields are the exact cone") {
    for (double r : {rho * 1.0001, 0.3, 0.9}) {
      const Vec2 x = r * unit_radial(0.9);
      const auto f = ansatz_fields(sc, x);
      const auto cone = cone_fields(trace, x);
      REQUIRE((f.dv - cone.dv).norm() < 1e-13);
      REQUIRE(f.v == Approx(cone.v).epsilon(1e-13));
      // cone Hessian has Frobenius norm |beta'' + beta| / r
      const double expect =
          std::abs(trace.profile().eval(0.9, 2) + trace.profile().eval(0.9, 0)) / r;
      REQUIRE(f.d2v.norm() == Approx(expect).epsilon(1e-12));
      // membrane integrand vanishes there
      const Mat2 eps =
          sym(trace.displacement_gradient(0.9)) + 0.5 * outer(f.dv, f.dv);
      REQUIRE(eps.norm() < 1e-12);
    }
  }
  SECTION("dead core") {
    const Vec2 x = 0.4 * rho * unit_radial(2.0);
    const auto f = ansatz_fields(sc, x);
    REQUIRE(f.v == 0.0);
    REQUIRE(f.dv.norm() == 0.0);
    REQUIRE(f.d2v.norm() == 0.0);
    const auto cone = cone_fields(trace, x);
    REQUIRE((f.u - cone.u).norm() < 1e-15);
  }
  SECTION("chained derivatives match finite differences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ang(0.0, two_pi);
    for (double r : {0.55 * rho, 0.75 * rho, 0.95 * rho, 2.0 * rho, 0.5}) {
      const double delta = 1e-6 * std::max(rho, r);
      const Vec2 x = r * unit_radial(ang(rng));
      const auto f = ansatz_fields(sc, x);
      Vec2 dv_fd;
      Mat2 d2v_fd;
      for (int k = 0; k < 2; ++k) {
        Vec2 dx = Vec2::Zero();
        dx[k] = delta;
        const auto fp = ansatz_fields(sc, x + dx);
        const auto fm = ansatz_fields(sc, x - dx);
        dv_fd[k] = (fp.v - fm.v) / (2 * delta);
        d2v_fd.col(k) = (fp.dv - fm.dv) / (2 * delta);
      }
      const double scale = std::max(1.0, f.dv.norm());
      REQUIRE((f.dv - dv_fd).norm() / scale < 1e-6);
      const double hscale = std::max(1.0, f.d2v.norm());
      REQUIRE((f.d2v - sym(d2v_fd)).norm() / hscale < 1e-5);
    }
  }
}

TEST_CASE("ansatz energy scaling") {
  const auto trace = ConeTrace::build(paper_default_profile());

  SECTION("reference values at h = 0.05, p = 2.5") {
    const auto bd = ansatz_energy(SmoothedCone(trace, 0.05, 2.5));
    // independent quadrature oracle values
    REQUIRE(bd.membrane == Approx(1.14281181).epsilon(2e-3));
    REQUIRE(bd.bending == Approx(5.94897919).epsilon(2e-3));
    REQUIRE(bd.total == bd.membrane + bd.bending);
  }

  SECTION("quadrature refinement stability") {
    for (double h : {0.0625, 0.004}) {
      const SmoothedCone sc(trace, h, 2.5);
      const auto coarse = ansatz_energy(sc);
      QuadratureSpec fine;
      const auto base = DiskQuadrature::build(sc.core_radius(), {});
      fine.n_radial = 2 * (int(base.r.size()) - 4);
      fine.n_angular = 1024;
      fine.inner_cells = 8;
      const auto refined = ansatz_energy(sc, fine);
      REQUIRE(std::abs(refined.total - coarse.total) / refined.total < 0.005);
    }
  }

  SECTION("unresolved core is rejected") {
    const SmoothedCone sc(trace, 0.01, 2.5);
    QuadratureSpec coarse;
    coarse.n_radial = 24;
    REQUIRE_THROWS_AS(ansatz_energy(sc, coarse), UnresolvedCore);
  }

  SECTION("bending raw integral grows like h^{(2-p)p'/2}") {
    const double p = 2.5;
    std::vector<double> hs, raws;
    for (int k = 6; k <= 12; ++k) {
      const double h = std::pow(2.0, -k);
      hs.push_back(h);
      raws.push_back(ansatz_energy(SmoothedCone(trace, h, p)).bending_raw);
    }
    const double expect = (2.0 - p) * dual_exponent(p) / 2.0;
    REQUIRE(fitted_slope(hs, raws) == Approx(expect).margin(0.05));
  }

  SECTION("total energy slope is the dual exponent, two profiles") {
    for (const auto& profile :
         {paper_default_profile(), second_admissible_profile()}) {
      const auto tr = ConeTrace::build(profile);
      for (double p : {2.5, 2.2}) {
        std::vector<double> hs, es;
        for (int k = 4; k <= 12; ++k) {
          const double h = std::pow(2.0, -k);
          hs.push_back(h);
          es.push_back(ansatz_energy(SmoothedCone(tr, h, p)).total);
        }
        REQUIRE(fitted_slope(hs, es) == Approx(dual_exponent(p)).margin(0.05));
      }
    }
  }
}
