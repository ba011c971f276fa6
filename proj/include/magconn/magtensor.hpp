#pragma once

#include <Eigen/Dense>
#include <vector>

#include "magconn/framebundle.hpp"
#include "magconn/liealg.hpp"
#include "magconn/manifold.hpp"

// Closed-form magnetic tensors at a frame point: contorsion, torsion,
// curvature, tangential and full magnetic sectional curvature, the Bianchi
// cyclic sum with its right-hand side, the constant curvature tensor G, and
// the pinched decomposition R0.

namespace magconn {

/// All frame-pulled tensor data needed at one frame point: the Riemann
/// tensor, the Lorentz force, its covariant derivative in every frame
/// direction, and the exterior derivative of sigma.
struct CurvatureSample {
  FramePoint w;
  Eigen::MatrixXd omega;                    // frame components of the Lorentz force
  std::vector<Eigen::MatrixXd> nablaOmega;  // nablaOmega[a] = frame components of nabla_{w_a} Omega
  Eigen::MatrixXd riem;                     // riem(a*n+b, c*n+d) = <R(e_a,e_b) e_c, e_d>
  std::vector<double> dOmegaTensor;         // dOmega[(a*n+b)*n+c] = d sigma(w_a, w_b, w_c)

  int dim() const { return w.dim(); }

  /// Riemann operator z -> R(x, y) z in frame components.
  Eigen::MatrixXd riemann(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const int n = dim();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < n; ++c)
      for (int d = 0; d < n; ++d) {
        double v = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) v += x(a) * y(b) * riem(a * n + b, c * n + d);
        out(d, c) = v;
      }
    return out;
  }

  /// Covariant derivative of the force in the frame direction x.
  Eigen::MatrixXd dOmegaDir(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim(), dim());
    for (int a = 0; a < dim(); ++a) out += x(a) * nablaOmega[a];
    return out;
  }

  double dOmega(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                const Eigen::VectorXd& z) const {
    const int n = dim();
    double out = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          out += x(a) * y(b) * z(c) * dOmegaTensor[(a * n + b) * n + c];
    return out;
  }
};

inline CurvatureSample sampleCurvature(const MagneticSystem& s, const FramePoint& w) {
  const int n = s.dim();
  CurvatureSample c;
  c.w = w;
  c.omega = omegaFrame(s, w);
  c.nablaOmega.resize(n);
  for (int a = 0; a < n; ++a) c.nablaOmega[a] = nablaOmegaFrame(s, w, Eigen::VectorXd::Unit(n, a));

  c.riem.resize(n * n, n * n);
  Eigen::MatrixXd g = s.metric.metric(w.p);
  RiemannTensor chartR = riemannTensor(s.metric, w.p);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Eigen::MatrixXd rop = chartR.contract(Eigen::VectorXd(w.W.col(a)), Eigen::VectorXd(w.W.col(b)));
      for (int cc = 0; cc < n; ++cc) {
        Eigen::VectorXd rc = rop * w.W.col(cc);
        for (int d = 0; d < n; ++d) c.riem(a * n + b, cc * n + d) = rc.dot(g * w.W.col(d));
      }
    }

  c.dOmegaTensor.assign(n * n * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int cc = b + 1; cc < n; ++cc) {
        double v = dSigma(s, w.p, Eigen::VectorXd(w.W.col(a)), Eigen::VectorXd(w.W.col(b)),
                          Eigen::VectorXd(w.W.col(cc)));
        int idx[3] = {a, b, cc};
        int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
        for (int pi = 0; pi < 6; ++pi) {
          double sgn = pi < 3 ? 1.0 : -1.0;
          c.dOmegaTensor[(idx[perm[pi][0]] * n + idx[perm[pi][1]]) * n + idx[perm[pi][2]]] =
              sgn * v;
        }
      }
  return c;
}

inline Eigen::MatrixXd contorsion(const CurvatureSample& c, const Eigen::VectorXd& x) {
  return contorsion(c.omega, x);
}

/// Magnetic torsion tau(x, y) = -[(x ^ y) Omega e1]perp / 2 + <Omega x, y> e1.
inline Eigen::VectorXd torsion(const CurvatureSample& c, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y) {
  const int n = c.dim();
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(n, 0);
  Eigen::VectorXd v = wedge<double>(x, y) * (c.omega * e1);
  return -0.5 * perp<double>(v) + (c.omega * x).dot(y) * e1;
}

/// Derivative term B_x T_y assembled from the frame components of
/// nabla Omega: -(<y,e1> D + e1 ^ (D y))/2 + (D e1) ^ yperp / 2, D = nabla_x Omega.
inline Eigen::MatrixXd contorsionDerivative(const CurvatureSample& c, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& y) {
  const int n = c.dim();
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(n, 0);
  Eigen::MatrixXd d = c.dOmegaDir(x);
  return -0.5 * (y(0) * d + wedge<double>(e1, Eigen::VectorXd(d * y))) +
         0.5 * wedge<double>(Eigen::VectorXd(d * e1), perp<double>(y));
}

/// Magnetic curvature R^sigma(x, y), an so(n)-valued 2-form: the Riemann
/// part, the contorsion derivative terms, and the algebraic quarter terms.
inline Eigen::MatrixXd curvature(const CurvatureSample& c, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) {
  const int n = c.dim();
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(n, 0);
  const Eigen::MatrixXd& om = c.omega;
  Eigen::VectorXd ome1 = om * e1;
  Eigen::MatrixXd om2 = om * om;

  Eigen::MatrixXd out = c.riemann(x, y);
  out += contorsionDerivative(c, x, y) - contorsionDerivative(c, y, x);
  out += 0.25 * (ome1.squaredNorm() * wedge<double>(perp<double>(x), perp<double>(y)) +
                 wedge<double>(perp<double>(Eigen::VectorXd(om2 * x)), y) +
                 wedge<double>(x, perp<double>(Eigen::VectorXd(om2 * y))) -
                 wedge<double>(Eigen::VectorXd(om * x), Eigen::VectorXd(om * y)) -
                 2.0 * (om * x).dot(y) * om);
  return out;
}

/// Tangential magnetic curvature M z for z normal (components 2..n), the
/// quadratic form driving the Jacobi and Pestov estimates. Returns the n-1
/// normal components of
///   R(z,e1)e1 - (nabla_z Omega)e1 + [(nabla_e1 Omega) z]perp/2
///   + 3<Omega e1, z> Omega e1 / 4 - [Omega^2 z]perp / 4.
inline Eigen::VectorXd tangentialCurvature(const CurvatureSample& c, const Eigen::VectorXd& zNormal) {
  const int n = c.dim();
  if (zNormal.size() != n - 1) throw std::invalid_argument("tangentialCurvature: expected n-1 components");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  z.tail(n - 1) = zNormal;
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(n, 0);
  const Eigen::MatrixXd& om = c.omega;
  Eigen::VectorXd ome1 = om * e1;

  Eigen::VectorXd out = c.riemann(z, e1) * e1;
  out -= c.dOmegaDir(z) * e1;
  out += 0.5 * perp<double>(Eigen::VectorXd(c.dOmegaDir(e1) * z));
  out += 0.75 * ome1.dot(z) * ome1;
  out -= 0.25 * perp<double>(Eigen::VectorXd(om * (om * z)));
  return out.tail(n - 1);
}

/// Matrix of the tangential curvature on the normal space.
inline Eigen::MatrixXd tangentialCurvatureMatrix(const CurvatureSample& c) {
  const int m = c.dim() - 1;
  Eigen::MatrixXd out(m, m);
  for (int j = 0; j < m; ++j) out.col(j) = tangentialCurvature(c, Eigen::VectorXd::Unit(m, j));
  return out;
}

/// Magnetic sectional curvature of the plane span(x, y) at the sample's
/// frame point, <R^sigma(x,y), y ^ x> / |x ^ y|^2.
inline double secSigma(const CurvatureSample& c, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y) {
  double denom = x.squaredNorm() * y.squaredNorm() - std::pow(x.dot(y), 2);
  if (denom < 1e-16) throw std::invalid_argument("secSigma: degenerate plane");
  return innerSkew<double>(curvature(c, x, y), wedge<double>(y, x)) / denom;
}

/// Both sides of the magnetic first Bianchi identity: the cyclic sum of
/// R^sigma(x,y)z and its closed form in d sigma and nabla Omega.
struct BianchiPair {
  Eigen::VectorXd lhs, rhs;
};

inline BianchiPair bianchiPair(const CurvatureSample& c, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  const int n = c.dim();
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(n, 0);
  Eigen::MatrixXd xOmega = c.dOmegaDir(e1);
  Eigen::MatrixXd e1OmOm = wedge<double>(e1, Eigen::VectorXd(c.omega * (c.omega * e1)));

  Eigen::VectorXd lhs = curvature(c, x, y) * z + curvature(c, y, z) * x + curvature(c, z, x) * y;

  auto term = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& cc) {
    // quarter term - (X Omega) term + d sigma term, cyclic slot (a, b, cc).
    // The derivative terms carry the sign that makes the identity hold; it is
    // pinned against the alternating sum of B_a T_b both in closed form and
    // by finite differences of the contorsion along the flow.
    Eigen::VectorXd out = 0.25 * innerSkew<double>(wedge<double>(a, cc), e1OmOm) * b;
    out -= 0.5 * (xOmega * cc).dot(a) * perp<double>(b);
    out += 0.5 * c.dOmega(a, e1, cc) * perp<double>(b);
    return out;
  };
  Eigen::VectorXd rhs = c.dOmega(x, y, z) * e1;
  rhs += term(x, y, z) + term(y, z, x) + term(z, x, y);
  return {lhs, rhs};
}

/// Constant curvature tensor <G(a,b)c, d> = <a,c><b,d> - <b,c><a,d>.
inline double constantCurvature4(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                 const Eigen::VectorXd& c, const Eigen::VectorXd& d) {
  return a.dot(c) * b.dot(d) - b.dot(c) * a.dot(d);
}

/// Pinched remainder R0(a,b,c,d) = <R^sigma(a,b)c, d> - K (1+delta)/2 G(a,b,c,d).
inline double pinchedDecomposition(const CurvatureSample& cs, double k, double delta,
                                   const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                   const Eigen::VectorXd& c, const Eigen::VectorXd& d) {
  if (k <= 0.0 || delta <= 0.0 || delta > 1.0)
    throw std::invalid_argument("pinchedDecomposition: need K > 0 and delta in (0, 1]");
  return (curvature(cs, a, b) * c).dot(d) - k * (1.0 + delta) / 2.0 * constantCurvature4(a, b, c, d);
}

/// Cyclic sum of the pinched remainder over the first three slots.
inline double pinchedCyclicSum(const CurvatureSample& cs, double k, double delta,
                               const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               const Eigen::VectorXd& c, const Eigen::VectorXd& d) {
  return pinchedDecomposition(cs, k, delta, a, b, c, d) +
         pinchedDecomposition(cs, k, delta, b, c, a, d) +
         pinchedDecomposition(cs, k, delta, c, a, b, d);
}

/// Deterministic quasi-uniform mesh of 2-planes: estimates the pinching
/// window of sec^sigma at the sample point. Reports violation instead of
/// throwing when the window crosses zero.
struct PinchingEstimate {
  double k = 0.0;       // -min sec
  double delta = 0.0;   // max sec / min sec
  bool pinched = false; // true when every sampled sec is negative
};

inline PinchingEstimate estimatePinching(const CurvatureSample& cs, int meshSize = 2000) {
  const int n = cs.dim();
  // Additive Kronecker sequence on [0,1)^{2n}, generalized golden ratio.
  double gamma = 1.0;
  for (int it = 0; it < 64; ++it) gamma = std::pow(1.0 + gamma, 1.0 / (2 * n + 1));
  std::vector<double> alpha(2 * n);
  for (int d = 0; d < 2 * n; ++d) alpha[d] = std::fmod(std::pow(1.0 / gamma, d + 1), 1.0);

  double lo = 1e300, hi = -1e300;
  std::vector<double> u(2 * n, 0.5);
  for (int m = 0; m < meshSize; ++m) {
    for (int d = 0; d < 2 * n; ++d) u[d] = std::fmod(u[d] + alpha[d], 1.0);
    Eigen::VectorXd x(n), y(n);
    for (int d = 0; d < n; ++d) {
      x(d) = 2.0 * u[d] - 1.0;
      y(d) = 2.0 * u[n + d] - 1.0;
    }
    if (x.norm() < 1e-3) continue;
    y -= y.dot(x) / x.squaredNorm() * x;
    if (y.norm() < 1e-3) continue;
    double sec = secSigma(cs, x, y);
    lo = std::min(lo, sec);
    hi = std::max(hi, sec);
  }
  PinchingEstimate est;
  est.pinched = hi < 0.0;
  if (est.pinched) {
    est.k = -lo;
    est.delta = hi / lo;
  }
  return est;
}

}  // namespace magconn
