#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magconn/manifold.hpp>
#include <magconn/rng.hpp>

using namespace magconn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("flat torus has vanishing Christoffels and curvature") {
  auto s = flatTorus(3);
  Rng rng(1);
  for (int it = 0; it < 10; ++it) {
    VectorXd p = rng.vector(3, 0.0, 2.0 * M_PI);
    auto gamma = christoffel(s.metric, p);
    for (auto& gk : gamma) CHECK(gk.norm() == 0.0);
    CHECK(riemannOperator(s.metric, p, rng.vector(3), rng.vector(3)).norm() < 1e-12);
  }
}

TEST_CASE("conformal torus Christoffels match the conformal formula") {
  ConformalTorusParams par;
  par.c1 = 0.1;
  par.c2 = par.c3 = 0.0;  // phi = 0.1 cos(x1)
  auto s = conformalTorus2(par);
  Rng rng(2);
  for (int it = 0; it < 50; ++it) {
    VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
    auto gamma = christoffel(s.metric, p);
    double d1 = par.phi1(p(0), p(1)), d2 = par.phi2(p(0), p(1));
    VectorXd dphi(2);
    dphi << d1, d2;
    // conformal: Gamma^k_ij = d_i phi delta_kj + d_j phi delta_ki - d_k phi delta_ij
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double expect = dphi(i) * (k == j) + dphi(j) * (k == i) - dphi(k) * (i == j);
          CHECK(gamma[k](i, j) == doctest::Approx(expect).epsilon(1e-8));
        }
  }
}

TEST_CASE("finite-difference metric derivatives agree with analytic ones") {
  auto analytic = conformalTorus2();
  auto fd = withFiniteDifferences(analytic);
  Rng rng(3);
  for (int it = 0; it < 20; ++it) {
    VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
    auto ga = christoffel(analytic.metric, p);
    auto gf = christoffel(fd.metric, p);
    for (int k = 0; k < 2; ++k) CHECK((ga[k] - gf[k]).norm() < 1e-7);
  }
}

TEST_CASE("christoffel symmetry and metric compatibility") {
  auto s = conformalTorus2();
  Rng rng(4);
  for (int it = 0; it < 20; ++it) {
    VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
    auto gamma = christoffel(s.metric, p);
    for (int k = 0; k < 2; ++k) CHECK((gamma[k] - gamma[k].transpose()).norm() < 1e-13);
    // nabla g = 0: d_k g_ij = Gamma^m_ki g_mj + Gamma^m_kj g_im
    auto dg = s.metric.metricDerivatives(p);
    MatrixXd g = s.metric.metric(p);
    for (int k = 0; k < 2; ++k) {
      MatrixXd gk = christoffelContract(gamma, VectorXd::Unit(2, k));
      // [Gamma(e_k)]^m_j = Gamma^m_kj
      MatrixXd expect = gk.transpose() * g + g * gk;
      CHECK((dg[k] - expect).norm() < 1e-10);
    }
  }
}

TEST_CASE("constant curvature charts") {
  Rng rng(5);
  SUBCASE("round sphere has sec = +1") {
    auto s = sphereChart(3);
    for (int it = 0; it < 20; ++it) {
      VectorXd p = rng.vector(3, -0.5, 0.5);
      VectorXd x = rng.vector(3), y = rng.vector(3);
      CHECK(sectional(s.metric, p, x, y) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("hyperbolic chart has sec = -1") {
    auto s = hyperbolicChart(3);
    for (int it = 0; it < 20; ++it) {
      VectorXd p = rng.vector(3, -0.4, 0.4);
      VectorXd x = rng.vector(3), y = rng.vector(3);
      CHECK(sectional(s.metric, p, x, y) == doctest::Approx(-1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("riemann is tensorial and has the classical symmetries") {
  auto s = conformalTorus2();
  auto sph = sphereChart(3);
  Rng rng(6);
  SUBCASE("linearity") {
    VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
    VectorXd x = rng.vector(2), y = rng.vector(2), z = rng.vector(2);
    double a = rng.uniform(-2, 2);
    CHECK((riemann(s.metric, p, VectorXd(a * x), y, z) - a * riemann(s.metric, p, x, y, z)).norm() <
          1e-10);
  }
  SUBCASE("first Bianchi and pair symmetry on the sphere chart") {
    for (int it = 0; it < 10; ++it) {
      VectorXd p = rng.vector(3, -0.5, 0.5);
      VectorXd x = rng.vector(3), y = rng.vector(3), z = rng.vector(3), w = rng.vector(3);
      VectorXd cyc = riemann(sph.metric, p, x, y, z) + riemann(sph.metric, p, y, z, x) +
                     riemann(sph.metric, p, z, x, y);
      CHECK(cyc.norm() < 1e-8);
      MatrixXd g = sph.metric.metric(p);
      double rxyzw = riemann(sph.metric, p, x, y, z).dot(g * w);
      double rzwxy = riemann(sph.metric, p, z, w, x).dot(g * y);
      CHECK(rxyzw == doctest::Approx(rzwxy).epsilon(1e-6));
    }
  }
}

TEST_CASE("lorentz endomorphism") {
  SUBCASE("zero form gives zero force") {
    auto s = flatTorus(3);
    CHECK(lorentz(s, VectorXd::Zero(3)).norm() == 0.0);
  }
  SUBCASE("constant field on flat T2 is a scaled quarter turn") {
    auto s = constantFieldTorus2(0.7);
    MatrixXd om = lorentz(s, VectorXd::Zero(2));
    MatrixXd expect(2, 2);
    expect << 0, -0.7, 0.7, 0;
    CHECK((om - expect).norm() < 1e-15);
  }
  SUBCASE("g-skewness and duality at random points") {
    auto s = conformalTorus2();
    Rng rng(7);
    double worstSkew = 0.0, worstDual = 0.0;
    for (int it = 0; it < 1000; ++it) {
      VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
      MatrixXd om = lorentz(s, p);
      MatrixXd g = s.metric.metric(p);
      VectorXd x = rng.vector(2), y = rng.vector(2);
      worstSkew = std::max(worstSkew, std::abs((om * x).dot(g * y) + x.dot(g * (om * y))));
      worstDual = std::max(worstDual, std::abs((om * x).dot(g * y) - x.dot(s.sigmaAt(p) * y)));
    }
    CHECK(worstSkew < 1e-12);
    CHECK(worstDual < 1e-12);
  }
}

TEST_CASE("covariant derivative of the Lorentz tensor") {
  SUBCASE("constant field is parallel on the flat torus") {
    auto s = constantFieldTorus2(0.5);
    Rng rng(8);
    VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
    CHECK(nablaOmega(s, p, rng.vector(2)).norm() < 1e-14);
  }
  SUBCASE("sinusoidal field on flat T2 differentiates analytically") {
    // sigma = sin(x1) dx1 ^ dx2, so Omega = sin(x1) J and nabla_{e1} Omega = cos(x1) J.
    auto s = flatTorus(2);
    s.sigma = [](const VectorXd& p) {
      MatrixXd S(2, 2);
      S << 0.0, std::sin(p(0)), -std::sin(p(0)), 0.0;
      return S;
    };
    s.dsigma = nullptr;
    Rng rng(9);
    for (int it = 0; it < 20; ++it) {
      VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
      MatrixXd d = nablaOmega(s, p, VectorXd::Unit(2, 0));
      MatrixXd expect(2, 2);
      expect << 0.0, -std::cos(p(0)), std::cos(p(0)), 0.0;
      CHECK((d - expect).norm() < 1e-8);
    }
  }
  SUBCASE("tensorial in the direction") {
    auto s = conformalTorus2();
    Rng rng(10);
    VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
    VectorXd z1 = rng.vector(2), z2 = rng.vector(2);
    double a = rng.uniform(-3, 3);
    MatrixXd lhs = nablaOmega(s, p, VectorXd(a * z1 + z2));
    MatrixXd rhs = a * nablaOmega(s, p, z1) + nablaOmega(s, p, z2);
    CHECK((lhs - rhs).norm() < 1e-12);
  }
}

TEST_CASE("exterior derivative of sigma") {
  Rng rng(11);
  SUBCASE("top-degree forms on surfaces are closed") {
    auto s = conformalTorus2();
    VectorXd p = rng.vector(2, 0.0, 2.0 * M_PI);
    CHECK(std::abs(dSigma(s, p, rng.vector(2), rng.vector(2), rng.vector(2))) < 1e-14);
  }
  SUBCASE("Kahler form is closed") {
    auto s = kahlerTorus4(0.4);
    VectorXd p = rng.vector(4, 0.0, 2.0 * M_PI);
    CHECK(std::abs(dSigma(s, p, rng.vector(4), rng.vector(4), rng.vector(4))) < 1e-14);
  }
  SUBCASE("linear coefficient on a T3 chart") {
    auto s = flatTorus(3);
    s.sigma = [](const VectorXd& p) {
      MatrixXd S = MatrixXd::Zero(3, 3);
      S(0, 1) = p(2);
      S(1, 0) = -p(2);
      return S;
    };
    s.dsigma = nullptr;
    VectorXd p = rng.vector(3, -1.0, 1.0);
    double v = dSigma(s, p, VectorXd::Unit(3, 0), VectorXd::Unit(3, 1), VectorXd::Unit(3, 2));
    CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("alternating") {
    auto s = nonclosedTorus3();
    VectorXd p = rng.vector(3, 0.0, 2.0 * M_PI);
    VectorXd x = rng.vector(3), y = rng.vector(3), z = rng.vector(3);
    double v = dSigma(s, p, x, y, z);
    CHECK(dSigma(s, p, y, x, z) == doctest::Approx(-v).epsilon(1e-12));
    CHECK(dSigma(s, p, x, z, y) == doctest::Approx(-v).epsilon(1e-12));
    CHECK(std::abs(dSigma(s, p, x, x, z)) < 1e-14);
  }
  SUBCASE("nonclosed builtin really is not closed") {
    auto s = nonclosedTorus3();
    VectorXd p(3);
    p << 0.3, 0.9, 1.4;
    double v = dSigma(s, p, VectorXd::Unit(3, 0), VectorXd::Unit(3, 1), VectorXd::Unit(3, 2));
    CHECK(v == doctest::Approx(std::cos(1.4) - std::sin(0.3)).epsilon(1e-12));
    CHECK(std::abs(v) > 1e-3);
  }
}

TEST_CASE("builtins are periodic and sigma is antisymmetric") {
  Rng rng(12);
  std::vector<MagneticSystem> systems = {flatTorus(3), conformalTorus2(), nonclosedTorus3(),
                                         kahlerTorus4(0.4), constantFieldTorus2(0.7)};
  for (const auto& s : systems) {
    const int n = s.dim();
    REQUIRE(s.metric.periodic());
    for (int it = 0; it < 20; ++it) {
      VectorXd p = rng.vector(n, -5.0, 5.0);
      VectorXd shift = p;
      for (int k = 0; k < n; ++k)
        shift(k) += s.metric.period(k) * std::floor(rng.uniform(-3.0, 3.0));
      CHECK((s.metric.metric(p) - s.metric.metric(shift)).norm() < 1e-13);
      CHECK((s.sigmaAt(p) - s.sigmaAt(shift)).norm() < 1e-13);
      CHECK((s.sigmaAt(p) + s.sigmaAt(p).transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("metric positive definiteness is checked") {
  ChartedMetric bad;
  bad.n = 2;
  bad.g = [](const VectorXd&) {
    MatrixXd g(2, 2);
    g << 1.0, 0.0, 0.0, -1.0;
    return g;
  };
  bad.dg = [](const VectorXd&) { return std::vector<MatrixXd>(2, MatrixXd::Zero(2, 2)); };
  CHECK_THROWS((void)christoffel(bad, VectorXd::Zero(2)));
}
