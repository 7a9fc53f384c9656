#include "dysonlab/shape.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace dyson;

namespace {

double cubic_defect(cplx r, cplx zeta) { return std::abs(r * r * r - 3.0 * r + 2.0 * zeta); }

const DensityProfile& semicircle_profile() {
  static const DensityProfile p = scan(ModelSpec::flat(Matrix::Zero(1, 1)), -3.0, 3.0, 601);
  return p;
}

}  // namespace

TEST_SUITE("shape") {
  TEST_CASE("shape functions against high-precision values") {
    CHECK(psi_edge(0.0) == 0.0);
    CHECK(psi_min(0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(psi_edge(1.0) == doctest::Approx(oracle::kPsiEdge1).epsilon(1e-14));
    CHECK(psi_edge(0.01) == doctest::Approx(oracle::kPsiEdge001).epsilon(1e-14));
    CHECK(psi_edge(40.0) == doctest::Approx(oracle::kPsiEdge40).epsilon(1e-14));
    CHECK(psi_min(0.3) == doctest::Approx(oracle::kPsiMin03).epsilon(1e-13));
    CHECK(psi_min(2.0) == doctest::Approx(oracle::kPsiMin2).epsilon(1e-14));
    CHECK(psi_min(-7.0) == doctest::Approx(oracle::kPsiMinM7).epsilon(1e-14));
    for (double l : {1e-6, 0.1, 0.7, 3.0, 250.0}) CHECK(psi_min(l) == psi_min(-l));
    CHECK_THROWS_AS(psi_edge(-0.1), DomainError);
  }

  TEST_CASE("Cardano roots") {
    const CardanoRoots z0 = cardano_roots(0.0);
    // {0, sqrt 3, -sqrt 3}; the plus branch is the one continuous with the double root at zeta = 1
    CHECK(std::abs(z0.plus) < 1e-15);
    CHECK(std::abs(z0.minus - std::sqrt(3.0)) < 1e-14);
    CHECK(std::abs(z0.zero + std::sqrt(3.0)) < 1e-14);
    const CardanoRoots z1 = cardano_roots(1.0);
    CHECK(std::abs(z1.plus - 1.0) < 1e-12);
    CHECK(std::abs(z1.minus - 1.0) < 1e-12);
    CHECK(std::abs(z1.zero + 2.0) < 1e-12);

    double worst = 0.0;
    for (int i = 0; i < 100; ++i)
      for (int k = 0; k < 100; ++k) {
        const cplx zeta(-4.0 + 8.0 * i / 99, -2.0 + 4.0 * k / 99);
        const CardanoRoots r = cardano_roots(zeta);
        const double scale = 1.0 + std::pow(std::abs(zeta), 3);
        for (cplx w : {r.plus, r.minus, r.zero}) worst = std::max(worst, cubic_defect(w, zeta) / scale);
        // the three values are the three roots: elementary symmetric functions
        CHECK(std::abs(r.plus + r.minus + r.zero) <= 1e-11 * scale);
        CHECK(std::abs(r.plus * r.minus * r.zero + 2.0 * zeta) <= 1e-11 * scale);
      }
    CHECK(worst <= 1e-11);
  }

  TEST_CASE("representation identities and small-lambda law") {
    double e_edge = 0.0, e_min = 0.0;
    for (int i = 0; i <= 5000; ++i) {
      const double l = 50.0 * i / 5000;
      e_edge = std::max(e_edge, std::abs(psi_edge(l) - cardano_roots(1.0 + 2.0 * l).plus.imag() /
                                                           (2.0 * std::sqrt(3.0))));
      const double m = -10.0 + 20.0 * i / 5000;
      e_min = std::max(e_min, std::abs(psi_min(m) - (omega_hat_min(m) - omega_hat_min(0.0)).imag() /
                                                        std::sqrt(3.0)));
    }
    CHECK(e_edge <= 1e-12);
    CHECK(e_min <= 1e-12);
    for (int i = 1; i <= 200; ++i) {
      const double l = 0.1 * i / 200;
      CHECK(std::abs(psi_edge(l) - std::sqrt(l) / 3.0) <= std::pow(l, 5.0 / 6.0));
    }
  }

  TEST_CASE("semicircle shape parameters at the edge") {
    for (int n : {1, 4}) {
      ModelSpec w = ModelSpec::flat(Matrix::Zero(n, n));
      ShapeParams p = shape_params(w, 2.0);
      CHECK(p.sigma == doctest::Approx(-std::pow(M_PI, 3)).epsilon(1e-3));
      CHECK(std::abs(p.psi) < 1e-6);
      CHECK(p.rho0 < 1e-3);
      CHECK(p.separation > 0.5);
      ShapeParams q = shape_params(w, -2.0);
      CHECK(q.sigma == doctest::Approx(-p.sigma).epsilon(1e-9));
    }
  }

  TEST_CASE("classification and prediction on the semicircle") {
    ModelSpec w = ModelSpec::flat(Matrix::Zero(1, 1));
    const DensityProfile& p = semicircle_profile();
    BandStructure bs = band_structure(w, p);
    SingularityReport r = classify(w, bs, 2.0);
    CHECK(r.kind == SingularityKind::RightEdge);
    CHECK(r.delta_gap == 1.0);
    CHECK(r.fit.exponent == doctest::Approx(0.5).epsilon(0.01));
    for (double om : {1e-3, 3e-3, 1e-2}) {
      const double truth = oracle::semicircle_density(2.0 - om);
      CHECK(std::abs(predict_density(r, -om) / truth - 1.0) < 0.02);
      CHECK(predict_density(r, om) == 0.0);
    }
    SingularityReport l = classify(w, bs, -2.0);
    CHECK(l.kind == SingularityKind::LeftEdge);
    CHECK(std::string(to_string(l.kind)) == "left_edge");

    // the profile overload sees the same exponent
    LocalFit f = fit_local_exponent(p, 2.0, Side::Left, 0.05, 0.5);
    CHECK(f.exponent == doctest::Approx(0.5).epsilon(0.05));
    CHECK_THROWS_AS(fit_local_exponent(p, 2.0, Side::Left, 1e-4, 1e-3), DomainError);

    SingularityReport amb;
    CHECK_THROWS_AS(predict_density(amb, 0.1), DomainError);
  }

  TEST_CASE("cubic equation near the semicircle edge") {
    ModelSpec w = ModelSpec::flat(Matrix::Zero(2, 2));
    CubicResidual c1 = cubic_residual(w, 2.0, -1e-4);
    CubicResidual c2 = cubic_residual(w, 2.0, -1e-5);
    // neglected terms are O(|Theta|^4 + |omega| |Theta|)
    CHECK(c1.residual <= 10.0 * (std::pow(c1.theta, 4) + 1e-4 * c1.theta));
    CHECK(c2.residual <= 10.0 * (std::pow(c2.theta, 4) + 1e-5 * c2.theta));
    CHECK(c2.residual < c1.residual / 10.0);
    CHECK(c1.theta > 0.0);
  }

  TEST_CASE("two-component minimum at alpha = 0.2") {
    ModelSpec tc = build_two_component(0.1, 0.2);
    ShapeParams p = shape_params(tc, 0.7597997);
    CHECK(p.rho0 == doctest::Approx(0.0444114).epsilon(1e-4));
    CHECK(std::abs(p.sigma) <= 0.05);
    CHECK(p.psi > 0.0);
    CHECK(p.gamma_big == doctest::Approx(std::sqrt(27.0) * M_PI / (2.0 * p.psi)));
    ShapeParams m = shape_params(tc, -0.7597997);
    CHECK(m.sigma == doctest::Approx(-p.sigma).epsilon(1e-8));
    CHECK(m.psi == doctest::Approx(p.psi).epsilon(1e-8));

    DensityProfile prof = scan(tc, 0.6, 0.9, 61);
    BandStructure bs = band_structure(tc, prof);
    REQUIRE_FALSE(bs.minima.empty());
    SingularityReport r = classify(tc, bs, bs.minima.front().tau);
    CHECK(r.kind == SingularityKind::InternalMin);
    CHECK(r.rho_tilde == doctest::Approx(r.rho0 / std::cbrt(r.params.gamma_big)));
    CHECK(predict_density(r, 0.0) == doctest::Approx(r.rho0));
  }
}
