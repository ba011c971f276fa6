#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <magconn/dynamics.hpp>
#include <magconn/rng.hpp>
#include <unsupported/Eigen/MatrixFunctions>

using namespace magconn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

FramePoint surfaceFrame(const MagneticSystem& s, const VectorXd& p, double theta) {
  double scale = 1.0 / std::sqrt(s.metric.metric(p)(0, 0));
  MatrixXd w(2, 2);
  w << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return {p, scale * w};
}

}  // namespace

TEST_CASE("magnetic geodesics") {
  SUBCASE("zero field on the flat torus: straight lines") {
    auto s = flatTorus(2);
    VectorXd p0(2), v0(2);
    p0 << 0.3, 1.1;
    v0 << std::cos(0.4), std::sin(0.4);
    auto traj = integrateGeodesic(s, p0, v0, 3.0, 1e-3);
    auto& last = traj.back();
    CHECK((last.p - (p0 + 3.0 * v0)).norm() < 1e-12);
    CHECK((last.v - v0).norm() < 1e-12);
  }
  SUBCASE("Larmor circle: radius 1/b, period 2 pi / b") {
    double b = 0.8;
    auto s = constantFieldTorus2(b);
    VectorXd p0 = VectorXd::Zero(2), v0(2);
    v0 << 1.0, 0.0;
    double period = 2.0 * M_PI / b;
    auto traj = integrateGeodesic(s, p0, v0, period, 1e-3);
    CHECK((traj.back().p - p0).norm() < 1e-7);
    CHECK((traj.back().v - v0).norm() < 1e-7);
    // radius: the center is p0 + (1/b) i v0; max distance from center is 1/b
    VectorXd center(2);
    center << 0.0, 1.0 / b;
    for (size_t i = 0; i < traj.size(); i += 100)
      CHECK(std::abs((traj[i].p - center).norm() - 1.0 / b) < 1e-8);
  }
  SUBCASE("great circle on the sphere chart returns at t = 2 pi") {
    auto s = sphereChart(2);
    VectorXd p0(2), v0(2);
    p0 << 1.0, 0.0;  // on the equator |x| = 1, where g = Id
    v0 << 0.0, 1.0;
    auto traj = integrateGeodesic(s, p0, v0, 2.0 * M_PI, 1e-3);
    CHECK((traj.back().p - p0).norm() < 1e-6);
    CHECK((traj.back().v - v0).norm() < 1e-6);
  }
  SUBCASE("speed is conserved") {
    auto s = conformalTorus2();
    Rng rng(1);
    for (int it = 0; it < 3; ++it) {
      FramePoint w = randomFramePoint(s, rng);
      auto traj = integrateGeodesic(s, w.p, VectorXd(w.W.col(0)), 10.0, 1e-3);
      double worst = 0.0;
      for (size_t i = 0; i < traj.size(); i += 50) {
        double speed = traj[i].v.dot(s.metric.metric(traj[i].p) * traj[i].v);
        worst = std::max(worst, std::abs(speed - 1.0));
      }
      CHECK(worst < 1e-9);
    }
  }
  SUBCASE("chart exit raises") {
    // A great circle through the stereographic chart origin reaches the
    // pole (chart infinity) at t = pi.
    auto s = sphereChart(2);
    VectorXd p0 = VectorXd::Zero(2), v0(2);
    v0 << 0.5, 0.0;  // unit vector at the origin where g = 4 Id
    CHECK_THROWS_AS((void)integrateGeodesic(s, p0, v0, 4.0, 1e-2), ChartExit);
  }
  SUBCASE("hyperbolic geodesics stay in the disk") {
    auto s = hyperbolicChart(2);
    VectorXd p0 = VectorXd::Zero(2), v0(2);
    v0 << 0.5, 0.0;
    auto traj = integrateGeodesic(s, p0, v0, 30.0, 1e-2);
    CHECK(traj.back().p.norm() < 1.0);
  }
}

TEST_CASE("magnetic frame flow") {
  Rng rng(2);
  SUBCASE("zero field on flat torus: constant columns") {
    auto s = flatTorus(3);
    FramePoint w0 = randomFramePoint(s, rng);
    auto traj = integrateFrameFlow(s, w0, 2.0, 1e-3);
    CHECK((traj.back().w.W - w0.W).norm() < 1e-12);
  }
  SUBCASE("first column is the magnetic geodesic velocity") {
    auto s = conformalTorus2();
    FramePoint w0 = randomFramePoint(s, rng);
    auto frames = integrateFrameFlow(s, w0, 4.0, 1e-3);
    auto geo = integrateGeodesic(s, w0.p, VectorXd(w0.W.col(0)), 4.0, 1e-3);
    double worst = 0.0;
    for (size_t i = 0; i < frames.size(); i += 100) {
      worst = std::max(worst, (frames[i].w.W.col(0) - geo[i].v).norm());
      worst = std::max(worst, (frames[i].w.p - geo[i].p).norm());
    }
    CHECK(worst < 1e-9);
  }
  SUBCASE("orthonormality is preserved") {
    auto s = conformalTorus2();
    FramePoint w0 = randomFramePoint(s, rng);
    auto frames = integrateFrameFlow(s, w0, 20.0, 1e-3);
    CHECK(frameResidual(s.metric, frames.back().w) < 1e-9);
  }
  SUBCASE("n = 2 constant field: the normal column co-rotates with gamma'") {
    double b = 0.7;
    auto s = constantFieldTorus2(b);
    FramePoint w0 = surfaceFrame(s, VectorXd::Zero(2), 0.3);
    auto frames = integrateFrameFlow(s, w0, 5.0, 1e-3);
    MatrixXd rot90(2, 2);
    rot90 << 0, -1, 1, 0;
    double worst = 0.0;
    for (size_t i = 0; i < frames.size(); i += 200) {
      VectorXd expect = rot90 * frames[i].w.W.col(0);
      worst = std::max(worst, (frames[i].w.W.col(1) - expect).norm());
    }
    CHECK(worst < 1e-9);
  }
  SUBCASE("Kahler torus: twisted-exponential closed form") {
    double c = 0.6;
    auto s = kahlerTorus4(c);
    // start at the identity frame: Omega0 = (c/2) J34 commutes with Omega
    FramePoint w0{VectorXd::Zero(4), MatrixXd::Identity(4, 4)};
    MatrixXd omega = lorentz(s, w0.p);
    MatrixXd om0 = omega0(omega);
    auto frames = integrateFrameFlow(s, w0, 3.0, 1e-3);
    double worst = 0.0;
    for (size_t i = 0; i < frames.size(); i += 300) {
      double t = frames[i].t;
      MatrixXd expect = (t * omega).exp() * (-t * om0).exp();
      worst = std::max(worst, (frames[i].w.W - expect).norm());
    }
    CHECK(worst < 1e-7);
  }
  SUBCASE("commutes with the right SO(n-1) action") {
    auto s = nonclosedTorus3();
    FramePoint w0 = randomFramePoint(s, rng);
    double alpha = 0.9;
    MatrixXd a = MatrixXd::Identity(3, 3);
    a(1, 1) = std::cos(alpha);
    a(1, 2) = -std::sin(alpha);
    a(2, 1) = std::sin(alpha);
    a(2, 2) = std::cos(alpha);
    auto flowThenRotate = integrateFrameFlow(s, w0, 3.0, 1e-3).back().w;
    flowThenRotate.W = flowThenRotate.W * a;
    auto rotateThenFlow = integrateFrameFlow(s, {w0.p, MatrixXd(w0.W * a)}, 3.0, 1e-3).back().w;
    CHECK((flowThenRotate.W - rotateThenFlow.W).norm() < 1e-8);
    CHECK((flowThenRotate.p - rotateThenFlow.p).norm() < 1e-8);
  }
  SUBCASE("time reversal returns the initial frame") {
    auto s = conformalTorus2();
    FramePoint w0 = randomFramePoint(s, rng);
    FramePoint mid = integrateFrameFlow(s, w0, 5.0, 1e-3).back().w;
    FramePoint back = integrateFrameFlow(s, mid, -5.0, 1e-3).back().w;
    CHECK((back.p - w0.p).norm() < 1e-7);
    CHECK((back.W - w0.W).norm() < 1e-7);
  }
}

TEST_CASE("covariant derivative along the flow") {
  Rng rng(3);
  SUBCASE("transported frame columns are parallel") {
    auto s = conformalTorus2();
    FramePoint w0 = randomFramePoint(s, rng);
    auto frames = integrateFrameFlow(s, w0, 2.0, 1e-3);
    std::vector<VectorXd> samples(frames.size());
    for (size_t i = 0; i < frames.size(); ++i) samples[i] = frames[i].w.W.col(1);
    auto deriv = magneticCovariantDerivative(s, frames, samples);
    double worst = 0.0;
    for (size_t i = 0; i < deriv.size(); ++i) worst = std::max(worst, deriv[i].norm());
    CHECK(worst < 1e-9);
  }
  SUBCASE("zero field: matches the Christoffel formula") {
    ConformalTorusParams par;
    par.b0 = par.b1 = par.b2 = 0.0;
    auto s = conformalTorus2(par);
    FramePoint w0 = randomFramePoint(s, rng);
    auto frames = integrateFrameFlow(s, w0, 1.0, 1e-3);
    // s(t) = f(t) * (second frame column) for a smooth scalar f
    std::vector<VectorXd> samples(frames.size());
    for (size_t i = 0; i < frames.size(); ++i)
      samples[i] = std::sin(1.3 * frames[i].t + 0.2) * frames[i].w.W.col(1);
    auto deriv = magneticCovariantDerivative(s, frames, samples);
    double worst = 0.0;
    for (size_t i = 1; i + 1 < frames.size(); i += 37) {
      // classical nabla_t s = s' + Gamma(gamma') s, via central differences of s
      double dt = frames[1].t - frames[0].t;
      VectorXd sdot = (samples[i + 1] - samples[i - 1]) / (2.0 * dt);
      VectorXd classical =
          sdot + christoffelContract(s.metric, frames[i].w.p, VectorXd(frames[i].w.W.col(0))) *
                     samples[i];
      worst = std::max(worst, (deriv[i] - classical).norm());
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("product rule") {
    auto s = conformalTorus2();
    FramePoint w0 = randomFramePoint(s, rng);
    auto frames = integrateFrameFlow(s, w0, 0.5, 5e-5);
    std::vector<VectorXd> sa(frames.size()), sb(frames.size());
    for (size_t i = 0; i < frames.size(); ++i) {
      double t = frames[i].t;
      sa[i] = std::cos(0.9 * t) * frames[i].w.W.col(1);
      sb[i] = (0.4 + std::sin(1.7 * t)) * frames[i].w.W.col(1);
    }
    auto da = magneticCovariantDerivative(s, frames, sa);
    auto db = magneticCovariantDerivative(s, frames, sb);
    double worst = 0.0;
    for (size_t i = 1; i + 1 < frames.size(); i += 731) {
      double t = frames[i].t;
      // <sa, sb>_g = cos(0.9 t)(0.4 + sin(1.7 t)) since the column is unit
      double lhs = -0.9 * std::sin(0.9 * t) * (0.4 + std::sin(1.7 * t)) +
                   std::cos(0.9 * t) * 1.7 * std::cos(1.7 * t);
      MatrixXd g = s.metric.metric(frames[i].w.p);
      double rhs = da[i].dot(g * sb[i]) + sa[i].dot(g * db[i]);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-8);
  }
  SUBCASE("non-normal samples are rejected") {
    auto s = conformalTorus2();
    FramePoint w0 = randomFramePoint(s, rng);
    auto frames = integrateFrameFlow(s, w0, 0.01, 1e-3);
    std::vector<VectorXd> samples(frames.size());
    for (size_t i = 0; i < frames.size(); ++i) samples[i] = frames[i].w.W.col(0);
    CHECK_THROWS_AS((void)magneticCovariantDerivative(s, frames, samples), std::invalid_argument);
  }
}

TEST_CASE("Jacobi propagation") {
  Rng rng(4);
  SUBCASE("flat, zero field: H grows linearly") {
    auto s = flatTorus(2);
    FramePoint w0 = randomFramePoint(s, rng);
    VectorXd h0(1), v0(1);
    h0 << 0.3;
    v0 << 0.7;
    auto traj = jacobiPropagate(s, w0, {0.0, h0, v0}, 2.0, 1e-3);
    CHECK(std::abs(traj.back().j.H(0) - (0.3 + 2.0 * 0.7)) < 1e-10);
    CHECK(std::abs(traj.back().j.V(0) - 0.7) < 1e-10);
    CHECK(std::abs(traj.back().j.a) < 1e-10);
  }
  SUBCASE("constant field: harmonic oscillator closed form") {
    double b = 0.9;
    auto s = constantFieldTorus2(b);
    FramePoint w0 = surfaceFrame(s, VectorXd::Zero(2), 0.4);
    double h0 = 0.5, v0 = -0.2, a0 = 0.1;
    VectorXd H0(1), V0(1);
    H0 << h0;
    V0 << v0;
    auto traj = jacobiPropagate(s, w0, {a0, H0, V0}, 4.0, 1e-3);
    double worst = 0.0;
    for (size_t i = 0; i < traj.size(); i += 100) {
      double t = traj[i].t;
      double expectH = h0 * std::cos(b * t) + v0 / b * std::sin(b * t);
      double expectV = -h0 * b * std::sin(b * t) + v0 * std::cos(b * t);
      double expectA = a0 + h0 * std::sin(b * t) + v0 / b * (1.0 - std::cos(b * t));
      worst = std::max(worst, std::abs(traj[i].j.H(0) - expectH));
      worst = std::max(worst, std::abs(traj[i].j.V(0) - expectV));
      worst = std::max(worst, std::abs(traj[i].j.a - expectA));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("variation oracle") {
  Rng rng(5);
  SUBCASE("flow direction gives (1, 0, 0)") {
    auto s = conformalTorus2();
    FramePoint w0 = randomFramePoint(s, rng);
    // Z = X^sigma as a chart pair (dp, dv)
    VectorXd v0 = w0.W.col(0);
    VectorXd dp = v0;
    VectorXd dv = -christoffelContract(s.metric, w0.p, v0) * v0 + lorentz(s, w0.p) * v0;
    auto traj = jacobiFdOracle(s, w0, dp, dv, 2.0, 1e-3);
    double worst = 0.0;
    for (size_t i = 0; i < traj.size(); i += 100) {
      worst = std::max(worst, std::abs(traj[i].j.a - 1.0));
      worst = std::max(worst, traj[i].j.H.norm());
      worst = std::max(worst, traj[i].j.V.norm());
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("constant field, vertical start: matches the closed form") {
    double b = 0.8;
    auto s = constantFieldTorus2(b);
    FramePoint w0 = surfaceFrame(s, VectorXd::Zero(2), 0.0);
    // vertical lift of the normal vector w2: dp = 0, dv = w2
    auto traj = jacobiFdOracle(s, w0, VectorXd::Zero(2), VectorXd(w0.W.col(1)), 4.0, 1e-3);
    double worst = 0.0;
    for (size_t i = 0; i < traj.size(); i += 100) {
      double t = traj[i].t;
      worst = std::max(worst, std::abs(traj[i].j.H(0) - std::sin(b * t) / b));
      worst = std::max(worst, std::abs(traj[i].j.V(0) - std::cos(b * t)));
    }
    CHECK(worst < 1e-5);
  }
  SUBCASE("agrees with jacobiPropagate on builtins") {
    std::vector<MagneticSystem> systems = {conformalTorus2(), nonclosedTorus3()};
    for (const auto& s : systems) {
      const int n = s.dim();
      FramePoint w0 = randomFramePoint(s, rng);
      // random SM tangent: dp arbitrary, dv with the unit-norm constraint
      VectorXd dp = rng.vector(n), dvRaw = rng.vector(n);
      VectorXd v0 = w0.W.col(0);
      MatrixXd g = s.metric.metric(w0.p);
      auto dgs = s.metric.metricDerivatives(w0.p);
      double gdot = 0.0;
      for (int k = 0; k < n; ++k) gdot += dp(k) * v0.dot(dgs[k] * v0);
      // enforce d/deps |v|_g^2 = 0
      VectorXd dv = dvRaw - (v0.dot(g * dvRaw) + 0.5 * gdot) / v0.dot(g * v0) * v0;

      auto oracle = jacobiFdOracle(s, w0, dp, dv, 5.0, 1e-3);
      // initial moving-frame data from the same decomposition the oracle uses
      JacobiState j0 = oracle.front().j;
      auto prop = jacobiPropagate(s, w0, j0, 5.0, 1e-3);
      double worst = 0.0;
      for (size_t i = 0; i < prop.size(); i += 100) {
        worst = std::max(worst, std::abs(prop[i].j.a - oracle[i].j.a));
        worst = std::max(worst, (prop[i].j.H - oracle[i].j.H).norm());
        worst = std::max(worst, (prop[i].j.V - oracle[i].j.V).norm());
      }
      INFO("system: ", s.name);
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("frame-bundle Jacobi form projects onto the moving-frame form") {
  Rng rng(6);
  auto s = conformalTorus2();
  FramePoint w0 = randomFramePoint(s, rng);
  VectorXd h0(1), v0(1);
  h0 << 0.4;
  v0 << -0.9;
  VectorXd e1 = VectorXd::Unit(2, 0);
  VectorXd vFull = VectorXd::Zero(2);
  vFull.tail(1) = v0;
  JacobiFMState j0{0.2, h0, wedge<double>(e1, vFull)};
  auto fm = jacobiPropagateFM(s, w0, j0, 3.0, 1e-3);
  auto sm = jacobiPropagate(s, w0, {0.2, h0, v0}, 3.0, 1e-3);
  double worst = 0.0;
  for (size_t i = 0; i < fm.size(); i += 50) {
    worst = std::max(worst, std::abs(fm[i].second.a - sm[i].j.a));
    worst = std::max(worst, (fm[i].second.H - sm[i].j.H).norm());
    VectorXd ve1 = fm[i].second.V * e1;
    worst = std::max(worst, (ve1.tail(1) - sm[i].j.V).norm());
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("conjugate points") {
  Rng rng(7);
  SUBCASE("flat torus, zero field: none") {
    auto s = flatTorus(2);
    FramePoint w0 = randomFramePoint(s, rng);
    CHECK(conjugatePoints(s, w0, 10.0, 1e-2).empty());
  }
  SUBCASE("constant field: multiples of pi / b") {
    double b = 0.9;
    auto s = constantFieldTorus2(b);
    FramePoint w0 = surfaceFrame(s, VectorXd::Zero(2), 0.7);
    auto zeros = conjugatePoints(s, w0, 8.0, 1e-3);
    REQUIRE(zeros.size() == 2);
    CHECK(std::abs(zeros[0] - M_PI / b) < 1e-4);
    CHECK(std::abs(zeros[1] - 2.0 * M_PI / b) < 1e-4);
  }
  SUBCASE("round sphere: antipodal point at pi") {
    auto s = sphereChart(2);
    VectorXd p0(2);
    p0 << 1.0, 0.0;
    MatrixXd w(2, 2);
    double scale = 1.0 / std::sqrt(s.metric.metric(p0)(0, 0));
    w << 0.0, -1.0, 1.0, 0.0;
    FramePoint w0{p0, scale * w};
    auto zeros = conjugatePoints(s, w0, 4.0, 1e-3);
    REQUIRE(!zeros.empty());
    CHECK(std::abs(zeros[0] - M_PI) < 1e-4);
  }
}
