#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "magconn/framebundle.hpp"
#include "magconn/magtensor.hpp"
#include "magconn/manifold.hpp"

// Magnetic geodesic integration, the magnetic frame flow, covariant
// differentiation along trajectories, magnetic Jacobi propagation with a
// finite-difference variation oracle, and conjugate-point detection.
// Fixed-step classical RK4 throughout: trajectories are reproducible.

namespace magconn {

struct GeodesicState {
  double t;
  Eigen::VectorXd p, v;
};

struct FrameState {
  double t;
  FramePoint w;
};

/// (a, H, V) of the magnetic Jacobi equation, components in the moving
/// frame transported by the magnetic frame flow.
struct JacobiState {
  double a;
  Eigen::VectorXd H, V;  // n-1 normal components each
};

struct JacobiSample {
  double t;
  JacobiState j;
};

namespace detail {

template <typename State, typename Deriv>
State rk4Step(const Deriv& f, const State& y, double dt) {
  State k1 = f(y);
  State k2 = f(y + k1 * (dt / 2.0));
  State k3 = f(y + k2 * (dt / 2.0));
  State k4 = f(y + k3 * dt);
  return y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
}

struct PhaseState {
  Eigen::VectorXd p, v;
  PhaseState operator+(const PhaseState& o) const { return {p + o.p, v + o.v}; }
  PhaseState operator*(double s) const { return {p * s, v * s}; }
};

}  // namespace detail

/// Magnetic geodesic equation in the chart: p' = v, v' = -Gamma(v) v + Omega v.
inline detail::PhaseState magneticRhs(const MagneticSystem& s, const detail::PhaseState& y) {
  Eigen::MatrixXd gm = christoffelContract(s.metric, y.p, y.v);
  return {y.v, Eigen::VectorXd(-gm * y.v + lorentz(s, y.p) * y.v)};
}

/// Integrates the magnetic geodesic with unit initial speed. Throws
/// ChartExit if the trajectory leaves a bounded chart.
inline std::vector<GeodesicState> integrateGeodesic(const MagneticSystem& s,
                                                    const Eigen::VectorXd& p0,
                                                    const Eigen::VectorXd& v0, double T,
                                                    double dt) {
  if (dt <= 0.0) throw std::invalid_argument("integrateGeodesic: dt must be positive");
  detail::PhaseState y{p0, v0};
  auto f = [&s](const detail::PhaseState& st) { return magneticRhs(s, st); };
  const int steps = static_cast<int>(std::llround(std::abs(T) / dt));
  const double h = T / steps;
  std::vector<GeodesicState> out;
  out.reserve(steps + 1);
  out.push_back({0.0, y.p, y.v});
  for (int i = 0; i < steps; ++i) {
    y = detail::rk4Step(f, y, h);
    s.metric.checkDomain(y.p);
    out.push_back({(i + 1) * h, y.p, y.v});
  }
  return out;
}

/// Frame-flow right-hand side: the first column follows the magnetic
/// geodesic, the normal columns are transported with the Omega0 twist.
inline FMVelocity frameFlowRhs(const MagneticSystem& s, const FramePoint& w) {
  return magneticGenerator(s)(w);
}

/// Integrates the magnetic frame flow; re-projects the frame onto the
/// g-orthonormal constraint whenever the drift exceeds driftTol.
inline std::vector<FrameState> integrateFrameFlow(const MagneticSystem& s, const FramePoint& w0,
                                                  double T, double dt, double driftTol = 1e-9) {
  FramePoint w = w0;
  auto f = [&s](const FramePoint& st) -> FramePoint {
    FMVelocity vel = magneticGenerator(s)(st);
    return {vel.base, vel.frame};
  };
  const int steps = static_cast<int>(std::llround(std::abs(T) / dt));
  const double h = T / steps;
  std::vector<FrameState> out;
  out.reserve(steps + 1);
  out.push_back({0.0, w});
  for (int i = 0; i < steps; ++i) {
    // RK4 on the pair (p, W)
    auto k1 = f(w);
    FramePoint w2{w.p + 0.5 * h * k1.p, w.W + 0.5 * h * k1.W};
    auto k2 = f(w2);
    FramePoint w3{w.p + 0.5 * h * k2.p, w.W + 0.5 * h * k2.W};
    auto k3 = f(w3);
    FramePoint w4{w.p + h * k3.p, w.W + h * k3.W};
    auto k4 = f(w4);
    w.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    w.W += h / 6.0 * (k1.W + 2.0 * k2.W + 2.0 * k3.W + k4.W);
    s.metric.checkDomain(w.p);
    if (frameResidual(s.metric, w) > driftTol) w.W = polarProject(s.metric.metric(w.p), w.W);
    out.push_back({(i + 1) * h, w});
  }
  return out;
}

/// Covariant derivative along the flow of a normal field given by samples:
/// the plain time derivative of the field's components in the moving frame
/// (central differences inside, one-sided at the ends).
inline std::vector<Eigen::VectorXd> magneticCovariantDerivative(
    const MagneticSystem& s, const std::vector<FrameState>& frames,
    const std::vector<Eigen::VectorXd>& samples, double normalTol = 1e-8) {
  const size_t m = frames.size();
  if (samples.size() != m || m < 3)
    throw std::invalid_argument("magneticCovariantDerivative: bad sample count");
  const int n = s.dim();
  // components in the moving frame
  std::vector<Eigen::VectorXd> comp(m);
  for (size_t i = 0; i < m; ++i) {
    Eigen::VectorXd c = frames[i].w.W.partialPivLu().solve(samples[i]);
    if (std::abs(c(0)) > normalTol)
      throw std::invalid_argument("magneticCovariantDerivative: sample not normal to the flow");
    comp[i] = c;
  }
  const double dt = frames[1].t - frames[0].t;
  std::vector<Eigen::VectorXd> out(m);
  for (size_t i = 0; i < m; ++i) {
    Eigen::VectorXd dc(n);
    if (i == 0)
      dc = (-3.0 * comp[0] + 4.0 * comp[1] - comp[2]) / (2.0 * dt);
    else if (i == m - 1)
      dc = (3.0 * comp[m - 1] - 4.0 * comp[m - 2] + comp[m - 3]) / (2.0 * dt);
    else
      dc = (comp[i + 1] - comp[i - 1]) / (2.0 * dt);
    dc(0) = 0.0;
    out[i] = frames[i].w.W * dc;
  }
  return out;
}

namespace detail {

struct JointState {
  Eigen::VectorXd p;
  Eigen::MatrixXd W;
  Eigen::VectorXd j;  // packed Jacobi data (one or several solutions)
  JointState operator+(const JointState& o) const { return {p + o.p, W + o.W, j + o.j}; }
  JointState operator*(double s) const { return {p * s, W * s, j * s}; }
};

}  // namespace detail

/// Propagates the magnetic Jacobi equation a' = <H, Omega v>, H' = V,
/// V' = -M H in moving-frame components, jointly with the frame flow so the
/// tangential curvature is evaluated at the RK4 stage points.
inline std::vector<JacobiSample> jacobiPropagate(const MagneticSystem& s, const FramePoint& w0,
                                                 const JacobiState& j0, double T, double dt) {
  const int n = s.dim();
  const int nn = n - 1;
  auto pack = [nn](const JacobiState& j) {
    Eigen::VectorXd out(1 + 2 * nn);
    out(0) = j.a;
    out.segment(1, nn) = j.H;
    out.segment(1 + nn, nn) = j.V;
    return out;
  };
  auto unpack = [nn](const Eigen::VectorXd& y) {
    return JacobiState{y(0), y.segment(1, nn), y.segment(1 + nn, nn)};
  };

  auto rhs = [&](const detail::JointState& y) -> detail::JointState {
    FramePoint w{y.p, y.W};
    FMVelocity vel = magneticGenerator(s)(w);
    auto sample = sampleCurvature(s, w);
    Eigen::VectorXd ome1 = (sample.omega * Eigen::VectorXd::Unit(n, 0)).tail(nn);
    Eigen::MatrixXd tangential = tangentialCurvatureMatrix(sample);
    JacobiState j = unpack(y.j);
    JacobiState dj{j.H.dot(ome1), j.V, Eigen::VectorXd(-tangential * j.H)};
    return {vel.base, vel.frame, pack(dj)};
  };

  detail::JointState y{w0.p, w0.W, pack(j0)};
  const int steps = static_cast<int>(std::llround(std::abs(T) / dt));
  const double h = T / steps;
  std::vector<JacobiSample> out;
  out.reserve(steps + 1);
  out.push_back({0.0, j0});
  for (int i = 0; i < steps; ++i) {
    y = detail::rk4Step(rhs, y, h);
    s.metric.checkDomain(y.p);
    if (frameResidual(s.metric, {y.p, y.W}) > 1e-9) y.W = polarProject(s.metric.metric(y.p), y.W);
    out.push_back({(i + 1) * h, unpack(y.j)});
  }
  return out;
}

/// Frame-bundle form of the Jacobi equation: a' = <H, Omega e1>,
/// H' = (V e1)-normal, V' = -R^sigma(H, e1) with V valued in so(n).
/// Projecting V to V e1 recovers the moving-frame form.
struct JacobiFMState {
  double a;
  Eigen::VectorXd H;   // n-1 components
  Eigen::MatrixXd V;   // so(n)
};

inline std::vector<std::pair<double, JacobiFMState>> jacobiPropagateFM(
    const MagneticSystem& s, const FramePoint& w0, const JacobiFMState& j0, double T, double dt) {
  const int n = s.dim();
  const int nn = n - 1;
  auto pack = [&](const JacobiFMState& j) {
    Eigen::VectorXd out(1 + nn + n * n);
    out(0) = j.a;
    out.segment(1, nn) = j.H;
    out.segment(1 + nn, n * n) = Eigen::Map<const Eigen::VectorXd>(j.V.data(), n * n);
    return out;
  };
  auto unpack = [&](const Eigen::VectorXd& y) {
    JacobiFMState j;
    j.a = y(0);
    j.H = y.segment(1, nn);
    j.V = Eigen::Map<const Eigen::MatrixXd>(y.segment(1 + nn, n * n).data(), n, n);
    return j;
  };
  auto rhs = [&](const detail::JointState& y) -> detail::JointState {
    FramePoint w{y.p, y.W};
    FMVelocity vel = magneticGenerator(s)(w);
    auto sample = sampleCurvature(s, w);
    JacobiFMState j = unpack(y.j);
    Eigen::VectorXd e1 = Eigen::VectorXd::Unit(n, 0);
    Eigen::VectorXd hFull = Eigen::VectorXd::Zero(n);
    hFull.tail(nn) = j.H;
    JacobiFMState dj;
    dj.a = j.H.dot(Eigen::VectorXd((sample.omega * e1).tail(nn)));
    dj.H = (j.V * e1).tail(nn);
    dj.V = -curvature(sample, hFull, e1);
    return {vel.base, vel.frame, pack(dj)};
  };

  detail::JointState y{w0.p, w0.W, pack(j0)};
  const int steps = static_cast<int>(std::llround(std::abs(T) / dt));
  const double h = T / steps;
  std::vector<std::pair<double, JacobiFMState>> out;
  out.reserve(steps + 1);
  out.push_back({0.0, j0});
  for (int i = 0; i < steps; ++i) {
    y = detail::rk4Step(rhs, y, h);
    if (frameResidual(s.metric, {y.p, y.W}) > 1e-9) y.W = polarProject(s.metric.metric(y.p), y.W);
    out.push_back({(i + 1) * h, unpack(y.j)});
  }
  return out;
}

/// Variation oracle: integrates two magnetic geodesics with initial data
/// displaced by +-eps Z (Z an SM tangent as a chart pair (dp, dv)), central
/// differences the phase trajectories, and decomposes the derivative in the
/// moving frame of the central frame flow into (a, H, V).
inline std::vector<JacobiSample> jacobiFdOracle(const MagneticSystem& s, const FramePoint& w0,
                                                const Eigen::VectorXd& dp,
                                                const Eigen::VectorXd& dv, double T, double dt,
                                                double eps = 1e-5) {
  const int n = s.dim();
  Eigen::VectorXd v0 = w0.W.col(0);

  auto shifted = [&](double sign) {
    Eigen::VectorXd p = w0.p + sign * eps * dp;
    Eigen::VectorXd v = v0 + sign * eps * dv;
    v /= std::sqrt(v.dot(s.metric.metric(p) * v));  // keep unit speed
    return integrateGeodesic(s, p, v, T, dt);
  };
  auto plus = shifted(1.0), minus = shifted(-1.0);
  auto frames = integrateFrameFlow(s, w0, T, dt);

  std::vector<JacobiSample> out;
  out.reserve(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    const FramePoint& w = frames[i].w;
    Eigen::VectorXd deltaP = (plus[i].p - minus[i].p) / (2.0 * eps);
    Eigen::VectorXd deltaV = (plus[i].v - minus[i].v) / (2.0 * eps);
    // connector: K = dv + Gamma(dp) v
    Eigen::VectorXd k = deltaV + christoffelContract(s.metric, w.p, deltaP) * w.W.col(0);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(w.W);
    Eigen::VectorXd base = lu.solve(deltaP);
    double a = base(0);
    Eigen::VectorXd hFull = base;
    hFull(0) = 0.0;

    Eigen::MatrixXd omega = omegaFrame(s, w);
    Eigen::VectorXd rest = lu.solve(k) - a * omega * Eigen::VectorXd::Unit(n, 0) -
                           0.5 * perp<double>(Eigen::VectorXd(omega * hFull));
    out.push_back({frames[i].t, {a, hFull.tail(n - 1), rest.tail(n - 1)}});
  }
  return out;
}

/// Times in (0, T] where the vertical-start Jacobi family degenerates:
/// zeros of det of the (n-1) x (n-1) H-block, located by sign change and
/// bisection to dt/100.
inline std::vector<double> conjugatePoints(const MagneticSystem& s, const FramePoint& w0, double T,
                                           double dt) {
  const int n = s.dim();
  const int nn = n - 1;

  // joint state: frame plus (H, V) blocks for the nn vertical solutions
  auto rhs = [&](const detail::JointState& y) -> detail::JointState {
    FramePoint w{y.p, y.W};
    FMVelocity vel = magneticGenerator(s)(w);
    auto sample = sampleCurvature(s, w);
    Eigen::MatrixXd tangential = tangentialCurvatureMatrix(sample);
    Eigen::Map<const Eigen::MatrixXd> hb(y.j.data(), nn, nn);
    Eigen::Map<const Eigen::MatrixXd> vb(y.j.data() + nn * nn, nn, nn);
    Eigen::VectorXd dj(2 * nn * nn);
    Eigen::Map<Eigen::MatrixXd>(dj.data(), nn, nn) = vb;
    Eigen::Map<Eigen::MatrixXd>(dj.data() + nn * nn, nn, nn) = -tangential * hb;
    return {vel.base, vel.frame, dj};
  };

  Eigen::VectorXd j0 = Eigen::VectorXd::Zero(2 * nn * nn);
  Eigen::Map<Eigen::MatrixXd>(j0.data() + nn * nn, nn, nn).setIdentity();
  detail::JointState y{w0.p, w0.W, j0};

  auto detAt = [&](const detail::JointState& st) {
    Eigen::Map<const Eigen::MatrixXd> hb(st.j.data(), nn, nn);
    return Eigen::MatrixXd(hb).determinant();
  };

  const int steps = static_cast<int>(std::llround(T / dt));
  const double h = T / steps;
  std::vector<double> zeros;
  double prevDet = detAt(y);  // zero at t = 0 (vertical start), skip it
  detail::JointState prev = y;
  for (int i = 0; i < steps; ++i) {
    y = detail::rk4Step(rhs, y, h);
    double det = detAt(y);
    double t0 = i * h;
    bool crossing = (prevDet < 0.0) != (det < 0.0);
    if (crossing && i == 0) crossing = false;  // leaving the trivial zero at t = 0
    if (crossing) {
      // bisect by re-integrating from the stored step start
      double lo = 0.0, hi = h;
      double flo = prevDet;
      while (hi - lo > dt / 100.0) {
        double mid = 0.5 * (lo + hi);
        detail::JointState z = detail::rk4Step(rhs, prev, mid);
        double fmid = detAt(z);
        if ((flo < 0.0) != (fmid < 0.0))
          hi = mid;
        else {
          lo = mid;
          flo = fmid;
        }
      }
      zeros.push_back(t0 + 0.5 * (lo + hi));
    }
    prev = y;
    prevDet = det;
  }
  return zeros;
}

}  // namespace magconn
