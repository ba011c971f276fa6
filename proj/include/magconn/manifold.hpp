#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Chart-based Riemannian metrics with a magnetic 2-form: metric and
// Christoffel data, Riemann curvature, Lorentz force and its covariant
// derivative, exterior derivative of the 2-form, and the builtin catalogue
// of test systems (tori, conformal torus, sphere/hyperbolic charts, Kahler
// torus, constant-field torus).

namespace magconn {

using MetricFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using MetricDerivFn = std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>;

struct ChartExit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Single-patch metric chart. Derivatives come from analytic closures when
/// provided, otherwise from second-order central differences of step fdStep.
struct ChartedMetric {
  int n = 0;
  MetricFn g;
  MetricDerivFn dg;              // optional: dg(p)[k] = d_k g(p)
  Eigen::VectorXd period;        // size 0 = aperiodic chart
  double domainRadius = 0.0;     // > 0: chart valid on |p| < domainRadius
  double fdStep = 1e-4;
  double gammaFdStep = 1e-5;     // step for differentiating Christoffels

  bool periodic() const { return period.size() > 0; }

  void checkDomain(const Eigen::VectorXd& p) const {
    if (domainRadius > 0.0 && p.norm() >= domainRadius)
      throw ChartExit("point left the chart domain");
  }

  Eigen::MatrixXd metric(const Eigen::VectorXd& p) const { return g(p); }

  std::vector<Eigen::MatrixXd> metricDerivatives(const Eigen::VectorXd& p) const {
    if (dg) return dg(p);
    std::vector<Eigen::MatrixXd> out(n);
    Eigen::VectorXd q = p;
    for (int k = 0; k < n; ++k) {
      q(k) = p(k) + fdStep;
      Eigen::MatrixXd plus = g(q);
      q(k) = p(k) - fdStep;
      out[k] = (plus - g(q)) / (2.0 * fdStep);
      q(k) = p(k);
    }
    return out;
  }
};

/// Christoffel symbols: gamma[k](i,j) = Gamma^k_ij.
inline std::vector<Eigen::MatrixXd> christoffel(const ChartedMetric& m, const Eigen::VectorXd& p) {
  const int n = m.n;
  Eigen::MatrixXd gp = m.metric(p);
  Eigen::LDLT<Eigen::MatrixXd> solver(gp);
  if (solver.info() != Eigen::Success || !solver.isPositive())
    throw std::runtime_error("christoffel: metric not positive definite");
  std::vector<Eigen::MatrixXd> dgp = m.metricDerivatives(p);

  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  Eigen::MatrixXd rhs(n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        rhs(l, i * n + j) = 0.5 * (dgp[i](l, j) + dgp[j](l, i) - dgp[l](i, j));
  Eigen::MatrixXd sol = solver.solve(rhs);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gamma[k](i, j) = sol(k, i * n + j);
  return gamma;
}

/// Gamma(u): the matrix with entries Gamma(u)^k_m = Gamma^k_im u^i.
inline Eigen::MatrixXd christoffelContract(const std::vector<Eigen::MatrixXd>& gamma,
                                           const Eigen::VectorXd& u) {
  const int n = static_cast<int>(gamma.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int mm = 0; mm < n; ++mm)
      for (int i = 0; i < n; ++i) out(k, mm) += gamma[k](i, mm) * u(i);
  return out;
}

inline Eigen::MatrixXd christoffelContract(const ChartedMetric& m, const Eigen::VectorXd& p,
                                           const Eigen::VectorXd& u) {
  return christoffelContract(christoffel(m, p), u);
}

/// Chart Riemann tensor at a point: op[i*n+j] is the curvature operator
/// z -> R(d_i, d_j) z of [nabla_i, nabla_j] - nabla_[i,j], with dGamma by
/// central differences of Christoffels.
struct RiemannTensor {
  int n = 0;
  std::vector<Eigen::MatrixXd> op;

  Eigen::MatrixXd contract(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (x(i) * y(j) != 0.0) out += x(i) * y(j) * op[i * n + j];
    return out;
  }
};

inline RiemannTensor riemannTensor(const ChartedMetric& m, const Eigen::VectorXd& p) {
  const int n = m.n;
  const double h = m.gammaFdStep;
  std::vector<std::vector<Eigen::MatrixXd>> dGamma(n);
  Eigen::VectorXd q = p;
  for (int k = 0; k < n; ++k) {
    q(k) = p(k) + h;
    auto plus = christoffel(m, q);
    q(k) = p(k) - h;
    auto minus = christoffel(m, q);
    q(k) = p(k);
    dGamma[k].resize(n);
    for (int l = 0; l < n; ++l) dGamma[k][l] = (plus[l] - minus[l]) / (2.0 * h);
  }
  auto gamma = christoffel(m, p);
  std::vector<Eigen::MatrixXd> gi(n);
  for (int i = 0; i < n; ++i) gi[i] = christoffelContract(gamma, Eigen::VectorXd::Unit(n, i));

  RiemannTensor r;
  r.n = n;
  r.op.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik + [G_i, G_j]^l_k
      Eigen::MatrixXd out = gi[i] * gi[j] - gi[j] * gi[i];
      for (int l = 0; l < n; ++l)
        for (int k = 0; k < n; ++k) out(l, k) += dGamma[i][l](j, k) - dGamma[j][l](i, k);
      r.op[i * n + j] = out;
    }
  return r;
}

/// Curvature operator z -> R(x,y)z in chart components.
inline Eigen::MatrixXd riemannOperator(const ChartedMetric& m, const Eigen::VectorXd& p,
                                       const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return riemannTensor(m, p).contract(x, y);
}

inline Eigen::VectorXd riemann(const ChartedMetric& m, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& z) {
  return riemannOperator(m, p, x, y) * z;
}

/// Sectional curvature of span(x, y): <R(x,y)y, x>_g / |x ^ y|_g^2.
inline double sectional(const ChartedMetric& m, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd gp = m.metric(p);
  double gxx = x.dot(gp * x), gyy = y.dot(gp * y), gxy = x.dot(gp * y);
  double denom = gxx * gyy - gxy * gxy;
  if (denom < 1e-16) throw std::invalid_argument("sectional: degenerate plane");
  return riemann(m, p, x, y, y).dot(gp * x) / denom;
}

using TwoFormFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using TwoFormDerivFn = std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>;

/// A charted metric plus a magnetic 2-form. sigma(p) stores the component
/// matrix S_ij = sigma(d_i, d_j); the Lorentz endomorphism satisfies
/// g(Omega x, y) = sigma(x, y).
struct MagneticSystem {
  std::string name = "custom";
  ChartedMetric metric;
  TwoFormFn sigma;
  TwoFormDerivFn dsigma;  // optional: dsigma(p)[k] = d_k S
  bool closedHint = false;

  int dim() const { return metric.n; }

  Eigen::MatrixXd sigmaAt(const Eigen::VectorXd& p) const { return sigma(p); }

  std::vector<Eigen::MatrixXd> sigmaDerivatives(const Eigen::VectorXd& p) const {
    if (dsigma) return dsigma(p);
    const double h = metric.fdStep;
    std::vector<Eigen::MatrixXd> out(metric.n);
    Eigen::VectorXd q = p;
    for (int k = 0; k < metric.n; ++k) {
      q(k) = p(k) + h;
      Eigen::MatrixXd plus = sigma(q);
      q(k) = p(k) - h;
      out[k] = (plus - sigma(q)) / (2.0 * h);
      q(k) = p(k);
    }
    return out;
  }
};

/// Lorentz endomorphism Omega with g(Omega x, y) = sigma(x, y);
/// in components Omega = g^{-1} S^T.
inline Eigen::MatrixXd lorentz(const MagneticSystem& s, const Eigen::VectorXd& p) {
  Eigen::MatrixXd gp = s.metric.metric(p);
  return gp.ldlt().solve(s.sigmaAt(p).transpose());
}

/// Covariant derivative of the (1,1) Lorentz tensor in direction z:
/// nabla_z Omega = d_z Omega + [Gamma(z), Omega].
inline Eigen::MatrixXd nablaOmega(const MagneticSystem& s, const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& z) {
  const int n = s.dim();
  Eigen::MatrixXd gp = s.metric.metric(p);
  Eigen::LDLT<Eigen::MatrixXd> ginv(gp);
  std::vector<Eigen::MatrixXd> dgp = s.metric.metricDerivatives(p);
  std::vector<Eigen::MatrixXd> dS = s.sigmaDerivatives(p);

  Eigen::MatrixXd dzg = Eigen::MatrixXd::Zero(n, n), dzS = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    dzg += z(k) * dgp[k];
    dzS += z(k) * dS[k];
  }
  Eigen::MatrixXd omega = ginv.solve(s.sigmaAt(p).transpose());
  // d_z (g^{-1} S^T) = -g^{-1} (d_z g) Omega + g^{-1} (d_z S)^T
  Eigen::MatrixXd dzOmega = ginv.solve(Eigen::MatrixXd(dzS.transpose() - dzg * omega));
  Eigen::MatrixXd gz = christoffelContract(s.metric, p, z);
  return dzOmega + gz * omega - omega * gz;
}

/// Exterior derivative of sigma on (x, y, z).
inline double dSigma(const MagneticSystem& s, const Eigen::VectorXd& p, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  const int n = s.dim();
  std::vector<Eigen::MatrixXd> dS = s.sigmaDerivatives(p);
  double out = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double t = dS[i](j, k) + dS[j](k, i) + dS[k](i, j);  // = (d sigma)_ijk
        out += t * x(i) * y(j) * z(k);
      }
  return out;
}

// ---------------------------------------------------------------------------
// Builtin catalogue
// ---------------------------------------------------------------------------

/// Coefficients of the conformal torus T^2: metric e^{2 phi} Id with
/// phi = c1 cos x1 + c2 sin x2 + c3 cos(x1 + x2), and magnetic field
/// sigma = b(x) vol_g with b = b0 + b1 cos x1 + b2 sin x2.
struct ConformalTorusParams {
  double c1 = 0.10, c2 = 0.07, c3 = 0.05;
  double b0 = 0.30, b1 = 0.10, b2 = 0.08;

  double phi(double x1, double x2) const {
    return c1 * std::cos(x1) + c2 * std::sin(x2) + c3 * std::cos(x1 + x2);
  }
  double phi1(double x1, double x2) const { return -c1 * std::sin(x1) - c3 * std::sin(x1 + x2); }
  double phi2(double x1, double x2) const { return c2 * std::cos(x2) - c3 * std::sin(x1 + x2); }
  double phi11(double x1, double x2) const { return -c1 * std::cos(x1) - c3 * std::cos(x1 + x2); }
  double phi22(double x1, double x2) const { return -c2 * std::sin(x2) - c3 * std::cos(x1 + x2); }
  double phi12(double x1, double x2) const { return -c3 * std::cos(x1 + x2); }
  double b(double x1, double x2) const { return b0 + b1 * std::cos(x1) + b2 * std::sin(x2); }
  double bx1(double x1, double) const { return -b1 * std::sin(x1); }
  double bx2(double, double x2) const { return b2 * std::cos(x2); }
};

inline MagneticSystem flatTorus(int n, double fieldB = 0.0) {
  MagneticSystem s;
  s.name = "flat-t" + std::to_string(n);
  s.metric.n = n;
  s.metric.g = [n](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(n, n); };
  s.metric.dg = [n](const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n));
  };
  s.metric.period = Eigen::VectorXd::Constant(n, 2.0 * M_PI);
  s.sigma = [n, fieldB](const Eigen::VectorXd&) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    if (n >= 2) {
      S(0, 1) = fieldB;
      S(1, 0) = -fieldB;
    }
    return S;
  };
  s.dsigma = [n](const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n));
  };
  s.closedHint = true;
  return s;
}

/// Flat T^2 with constant field sigma = b dx1 ^ dx2.
inline MagneticSystem constantFieldTorus2(double b) {
  MagneticSystem s = flatTorus(2, b);
  s.name = "constant-b-t2";
  return s;
}

inline MagneticSystem conformalTorus2(const ConformalTorusParams& par = {}) {
  MagneticSystem s;
  s.name = "conformal-t2";
  s.metric.n = 2;
  s.metric.g = [par](const Eigen::VectorXd& p) {
    return Eigen::MatrixXd(std::exp(2.0 * par.phi(p(0), p(1))) * Eigen::Matrix2d::Identity());
  };
  s.metric.dg = [par](const Eigen::VectorXd& p) {
    double e2 = std::exp(2.0 * par.phi(p(0), p(1)));
    std::vector<Eigen::MatrixXd> out(2);
    out[0] = 2.0 * par.phi1(p(0), p(1)) * e2 * Eigen::Matrix2d::Identity();
    out[1] = 2.0 * par.phi2(p(0), p(1)) * e2 * Eigen::Matrix2d::Identity();
    return out;
  };
  s.metric.period = Eigen::VectorXd::Constant(2, 2.0 * M_PI);
  // sigma = b vol_g = b e^{2 phi} dx1 ^ dx2
  s.sigma = [par](const Eigen::VectorXd& p) {
    double v = par.b(p(0), p(1)) * std::exp(2.0 * par.phi(p(0), p(1)));
    Eigen::MatrixXd S(2, 2);
    S << 0.0, v, -v, 0.0;
    return S;
  };
  s.dsigma = [par](const Eigen::VectorXd& p) {
    double e2 = std::exp(2.0 * par.phi(p(0), p(1)));
    double b = par.b(p(0), p(1));
    double d1 = (par.bx1(p(0), p(1)) + 2.0 * b * par.phi1(p(0), p(1))) * e2;
    double d2 = (par.bx2(p(0), p(1)) + 2.0 * b * par.phi2(p(0), p(1))) * e2;
    std::vector<Eigen::MatrixXd> out(2, Eigen::MatrixXd::Zero(2, 2));
    out[0](0, 1) = d1;
    out[0](1, 0) = -d1;
    out[1](0, 1) = d2;
    out[1](1, 0) = -d2;
    return out;
  };
  s.closedHint = true;  // top-degree form on a surface
  return s;
}

/// Stereographic chart of the round unit sphere, g = 4/(1+|x|^2)^2 Id.
inline MagneticSystem sphereChart(int n) {
  MagneticSystem s;
  s.name = "sphere-s" + std::to_string(n);
  s.metric.n = n;
  s.metric.g = [n](const Eigen::VectorXd& p) {
    double f = 2.0 / (1.0 + p.squaredNorm());
    return Eigen::MatrixXd(f * f * Eigen::MatrixXd::Identity(n, n));
  };
  s.metric.dg = [n](const Eigen::VectorXd& p) {
    double f = 2.0 / (1.0 + p.squaredNorm());
    std::vector<Eigen::MatrixXd> out(n);
    for (int k = 0; k < n; ++k)
      out[k] = (-2.0 * f * f * f * p(k)) * Eigen::MatrixXd::Identity(n, n);
    return out;
  };
  s.metric.domainRadius = 1e6;
  s.sigma = [n](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(n, n); };
  s.dsigma = [n](const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n));
  };
  s.closedHint = true;
  return s;
}

/// Poincare disk chart, g = 4/(1-|x|^2)^2 Id, with optional constant
/// magnetic form sigma = b dx1 ^ dx2.
inline MagneticSystem hyperbolicChart(int n, double b = 0.0) {
  MagneticSystem s;
  s.name = "hyperbolic-h" + std::to_string(n);
  s.metric.n = n;
  s.metric.g = [n](const Eigen::VectorXd& p) {
    double f = 2.0 / (1.0 - p.squaredNorm());
    return Eigen::MatrixXd(f * f * Eigen::MatrixXd::Identity(n, n));
  };
  s.metric.dg = [n](const Eigen::VectorXd& p) {
    double r2 = p.squaredNorm();
    double f = 2.0 / (1.0 - r2);
    std::vector<Eigen::MatrixXd> out(n);
    for (int k = 0; k < n; ++k)
      out[k] = (2.0 * f * f * f * p(k)) * Eigen::MatrixXd::Identity(n, n);
    return out;
  };
  s.metric.domainRadius = 1.0;
  s.sigma = [n, b](const Eigen::VectorXd&) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    if (n >= 2) {
      S(0, 1) = b;
      S(1, 0) = -b;
    }
    return S;
  };
  s.dsigma = [n](const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n));
  };
  s.closedHint = true;
  return s;
}

/// Flat Kahler T^4 with Omega = c J for the standard complex structure:
/// sigma = c (dx1 ^ dx2 + dx3 ^ dx4), a parallel form.
inline MagneticSystem kahlerTorus4(double c = 0.4) {
  MagneticSystem s = flatTorus(4, 0.0);
  s.name = "kahler-t4";
  s.sigma = [c](const Eigen::VectorXd&) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(4, 4);
    S(0, 1) = c;
    S(1, 0) = -c;
    S(2, 3) = c;
    S(3, 2) = -c;
    return S;
  };
  return s;
}

/// Flat T^3 with a non-closed sigma = sin(x3) dx1^dx2 + cos(x1) dx2^dx3.
inline MagneticSystem nonclosedTorus3() {
  MagneticSystem s = flatTorus(3, 0.0);
  s.name = "nonclosed-t3";
  s.sigma = [](const Eigen::VectorXd& p) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, 3);
    S(0, 1) = std::sin(p(2));
    S(1, 0) = -S(0, 1);
    S(1, 2) = std::cos(p(0));
    S(2, 1) = -S(1, 2);
    return S;
  };
  s.dsigma = [](const Eigen::VectorXd& p) {
    std::vector<Eigen::MatrixXd> out(3, Eigen::MatrixXd::Zero(3, 3));
    out[0](1, 2) = -std::sin(p(0));
    out[0](2, 1) = std::sin(p(0));
    out[2](0, 1) = std::cos(p(2));
    out[2](1, 0) = -std::cos(p(2));
    return out;
  };
  s.closedHint = false;
  return s;
}

/// Drops the analytic derivative closures so finite-difference paths can be
/// exercised against the analytic ones.
inline MagneticSystem withFiniteDifferences(MagneticSystem s) {
  s.metric.dg = nullptr;
  s.dsigma = nullptr;
  return s;
}

}  // namespace magconn
