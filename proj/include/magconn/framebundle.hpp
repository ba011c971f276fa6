#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

#include "magconn/liealg.hpp"
#include "magconn/manifold.hpp"
#include "magconn/rng.hpp"

// Points and vector fields on the orthonormal frame bundle FM, in chart
// coordinates (p, W): W's columns are the frame vectors. Fields are
// evaluation maps; their formulas extend smoothly off the orthonormality
// constraint, which is what the finite-difference bracket oracle needs.

namespace magconn {

struct FramePoint {
  Eigen::VectorXd p;
  Eigen::MatrixXd W;

  int dim() const { return static_cast<int>(p.size()); }
};

/// Velocity of a curve on FM in chart coordinates.
struct FMVelocity {
  Eigen::VectorXd base;
  Eigen::MatrixXd frame;

  FMVelocity operator+(const FMVelocity& o) const { return {base + o.base, frame + o.frame}; }
  FMVelocity operator-(const FMVelocity& o) const { return {base - o.base, frame - o.frame}; }
  FMVelocity operator*(double s) const { return {base * s, frame * s}; }
  double norm() const { return std::sqrt(base.squaredNorm() + frame.squaredNorm()); }
};

using FMVectorField = std::function<FMVelocity(const FramePoint&)>;

/// |W^T g W - Id|: distance from the g-orthonormality constraint.
inline double frameResidual(const ChartedMetric& m, const FramePoint& w) {
  Eigen::MatrixXd gram = w.W.transpose() * m.metric(w.p) * w.W;
  return (gram - Eigen::MatrixXd::Identity(w.dim(), w.dim())).norm();
}

inline void checkFramePoint(const ChartedMetric& m, const FramePoint& w, double tol = 1e-8) {
  if (frameResidual(m, w) > tol) throw std::invalid_argument("frame is not g-orthonormal");
  if (w.W.determinant() <= 0.0) throw std::invalid_argument("frame is not positively oriented");
}

/// g-orthonormalizes the columns of a; flips the last column if needed so
/// that the result is positively oriented.
inline Eigen::MatrixXd gramSchmidt(const Eigen::MatrixXd& g, const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.cols();
  Eigen::MatrixXd w = a;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < j; ++k)
      w.col(j) -= w.col(k).dot(g * w.col(j)) * w.col(k);
    double nrm = std::sqrt(w.col(j).dot(g * w.col(j)));
    if (nrm < 1e-12) throw std::runtime_error("gramSchmidt: degenerate input");
    w.col(j) /= nrm;
  }
  if (w.determinant() < 0.0) w.col(n - 1) *= -1.0;
  return w;
}

/// Nearest g-orthonormal frame in the polar sense: W (W^T g W)^{-1/2}.
inline Eigen::MatrixXd polarProject(const Eigen::MatrixXd& g, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd gram = w.transpose() * g * w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  Eigen::MatrixXd invSqrt = es.operatorInverseSqrt();
  return w * invSqrt;
}

/// Uniform random point of the chart (periodic cell, or a ball well inside
/// the chart domain) with a random positively oriented g-orthonormal frame.
inline FramePoint randomFramePoint(const MagneticSystem& s, Rng& rng) {
  const int n = s.dim();
  Eigen::VectorXd p(n);
  if (s.metric.periodic()) {
    for (int i = 0; i < n; ++i) p(i) = rng.uniform(0.0, s.metric.period(i));
  } else {
    double r = s.metric.domainRadius > 0 ? 0.5 * std::min(s.metric.domainRadius, 1.6) : 0.8;
    do {
      p = rng.vector(n, -r, r);
    } while (p.norm() >= r);
  }
  Eigen::MatrixXd a;
  Eigen::MatrixXd g = s.metric.metric(p);
  do {
    a = rng.matrix(n, n);
  } while (std::abs(a.determinant()) < 1e-3);
  return {p, gramSchmidt(g, a)};
}

// ---------------------------------------------------------------------------
// Frame components of the magnetic data
// ---------------------------------------------------------------------------

/// Lorentz force in frame components, W^{-1} Omega W.
inline Eigen::MatrixXd omegaFrame(const MagneticSystem& s, const FramePoint& w) {
  return w.W.partialPivLu().solve(lorentz(s, w.p) * w.W);
}

/// Frame components of nabla Omega in the frame direction w(x).
inline Eigen::MatrixXd nablaOmegaFrame(const MagneticSystem& s, const FramePoint& w,
                                       const Eigen::VectorXd& x) {
  return w.W.partialPivLu().solve(nablaOmega(s, w.p, w.W * x) * w.W);
}

/// so(n-1) part of the lifted force: Omega0 = (Omega - e1 ^ Omega e1) / 2.
inline Eigen::MatrixXd omega0(const Eigen::MatrixXd& omega) {
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(omega.rows(), 0);
  return 0.5 * (omega - wedge<double>(e1, Eigen::VectorXd(omega * e1)));
}

/// Twisted force driving the frame-flow lift: e1 ^ Omega e1 + Omega0.
inline Eigen::MatrixXd omegaTilde(const Eigen::MatrixXd& omega) {
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(omega.rows(), 0);
  return 0.5 * (omega + wedge<double>(e1, Eigen::VectorXd(omega * e1)));
}

/// Contorsion T_x = -<x,e1> Omega0 + (Omega e1 ^ x - e1 ^ Omega x)/2,
/// the so(n)-valued correction in B^sigma_x = B_x - Y_{T_x}.
inline Eigen::MatrixXd contorsion(const Eigen::MatrixXd& omega, const Eigen::VectorXd& x) {
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(omega.rows(), 0);
  return -x(0) * omega0(omega) +
         0.5 * (wedge<double>(Eigen::VectorXd(omega * e1), x) -
                wedge<double>(e1, Eigen::VectorXd(omega * x)));
}

// ---------------------------------------------------------------------------
// Vector fields
// ---------------------------------------------------------------------------

/// Fundamental field Y_xi: rotates the frame, fixes the base point.
inline FMVectorField fundamentalField(const Eigen::MatrixXd& xi) {
  Eigen::MatrixXd skew = makeSkew<double>(xi);
  return [skew](const FramePoint& w) -> FMVelocity {
    return {Eigen::VectorXd::Zero(w.dim()), w.W * skew};
  };
}

/// Standard field B_x: moves the base along w(x), parallel-transports the
/// frame columns.
inline FMVectorField standardField(const MagneticSystem& s, const Eigen::VectorXd& x) {
  return [&s, x](const FramePoint& w) -> FMVelocity {
    Eigen::VectorXd u = w.W * x;
    return {u, -christoffelContract(s.metric, w.p, u) * w.W};
  };
}

/// Magnetic standard field B^sigma_x = B_x - Y_{T_x}, with the contorsion
/// evaluated pointwise from the frame components of the Lorentz force.
inline FMVectorField magneticStandardField(const MagneticSystem& s, const Eigen::VectorXd& x) {
  return [&s, x](const FramePoint& w) -> FMVelocity {
    Eigen::VectorXd u = w.W * x;
    Eigen::MatrixXd t = contorsion(omegaFrame(s, w), x);
    return {u, -christoffelContract(s.metric, w.p, u) * w.W - w.W * t};
  };
}

/// Generator of the magnetic frame flow, B^sigma_{e1} = B_{e1} + Y_{Omega~}.
inline FMVectorField magneticGenerator(const MagneticSystem& s) {
  return magneticStandardField(s, Eigen::VectorXd::Unit(s.dim(), 0));
}

// ---------------------------------------------------------------------------
// Bracket oracle and tangent decomposition
// ---------------------------------------------------------------------------

/// Lie bracket [U, V](w) = DV(w)[U(w)] - DU(w)[V(w)] with the directional
/// Jacobian actions taken by central differences of step h in the chart
/// coordinates of FM. Second-order accurate in h.
inline FMVelocity fdBracket(const FMVectorField& u, const FMVectorField& v, const FramePoint& w,
                            double h = 1e-5) {
  auto directional = [h, &w](const FMVectorField& f, const FMVelocity& dir) -> FMVelocity {
    double scale = dir.norm();
    double eps = h / std::max(1.0, scale);
    if (eps < 1e-13) throw std::runtime_error("fdBracket: step underflow");
    FramePoint plus{w.p + eps * dir.base, w.W + eps * dir.frame};
    FramePoint minus{w.p - eps * dir.base, w.W - eps * dir.frame};
    FMVelocity df = f(plus) - f(minus);
    return df * (1.0 / (2.0 * eps));
  };
  FMVelocity uw = u(w), vw = v(w);
  return directional(v, uw) - directional(u, vw);
}

/// Unique decomposition Z = c X^sigma + B^sigma_h (h perp e1) + Y_xi of an
/// FM tangent vector at w.
struct FMDecomposition {
  double c;
  Eigen::VectorXd h;    // n-1 normal components
  Eigen::MatrixXd xi;   // so(n)
  double skewResidual;  // how far the vertical remainder was from so(n)
};

inline FMDecomposition decomposeFMVector(const MagneticSystem& s, const FramePoint& w,
                                         const FMVelocity& z) {
  const int n = s.dim();
  if (std::abs(w.W.determinant()) < 1e-10)
    throw std::invalid_argument("decomposeFMVector: ill-conditioned frame");
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(w.W);
  Eigen::VectorXd comps = lu.solve(z.base);
  double c = comps(0);
  Eigen::VectorXd x = comps;
  x(0) = 0.0;

  FMVelocity expected = magneticStandardField(s, Eigen::VectorXd::Unit(n, 0))(w) * c +
                        magneticStandardField(s, x)(w);
  Eigen::MatrixXd rem = lu.solve(z.frame - expected.frame);
  double skewResidual = (rem + rem.transpose()).norm();
  return {c, x.tail(n - 1), Eigen::MatrixXd(0.5 * (rem - rem.transpose())), skewResidual};
}

}  // namespace magconn
