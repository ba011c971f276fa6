#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

// Quadrature rules for compact-group integrals: periodic trapezoid, exact
// half-period rules with sin^p weights (via full-circle sampling and
// per-mode integrals), and Haar grids on SO(3) and SO(4).

namespace magconn {

/// Nodes and weights with sum_j w_j f(beta_j) = int_0^pi f(beta) sin^p(beta)
/// dbeta, exact for trigonometric polynomials f of degree < M/2 - p - 1.
/// The nodes are the M uniform points of the full circle; the weights come
/// from the exact integrals of e^{i k beta} over the half period.
struct HalfPeriodRule {
  std::vector<double> nodes, weights;
};

inline HalfPeriodRule halfPeriodSinRule(int m, int power) {
  HalfPeriodRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int j = 0; j < m; ++j) {
    double beta = 2.0 * M_PI * j / m;
    rule.nodes[j] = beta;
    // c_j = (1/M) sum_k I_k e^{-i k beta_j}, I_k = int_0^pi e^{i k b} db
    double c = M_PI;  // k = 0 term
    for (int k = 1; k < (m + 1) / 2; ++k) {
      if (k % 2 == 1) c += 2.0 * (2.0 / k) * std::sin(k * beta);
    }
    rule.weights[j] = c / m * std::pow(std::sin(beta), power);
  }
  return rule;
}

/// Haar-distributed nodes on SO(3) via Euler angles R_z(a) R_y(b) R_z(c),
/// weights normalized so that the constant 1 integrates to 1. Exact for
/// band-limited functions (matrix-coefficient polynomials of modest degree).
struct GroupRule {
  std::vector<Eigen::MatrixXd> nodes;
  std::vector<double> weights;
};

inline Eigen::Matrix3d rotZ(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}
inline Eigen::Matrix3d rotY(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

inline GroupRule so3HaarRule(int res) {
  GroupRule rule;
  HalfPeriodRule beta = halfPeriodSinRule(res, 1);
  const double wz = 2.0 * M_PI / res;
  rule.nodes.reserve(static_cast<size_t>(res) * res * res);
  rule.weights.reserve(rule.nodes.capacity());
  for (int ia = 0; ia < res; ++ia) {
    Eigen::Matrix3d ra = rotZ(2.0 * M_PI * ia / res);
    for (int ib = 0; ib < res; ++ib) {
      if (std::abs(beta.weights[ib]) < 1e-300) continue;
      Eigen::Matrix3d rab = ra * rotY(beta.nodes[ib]);
      for (int ic = 0; ic < res; ++ic) {
        rule.nodes.push_back(rab * rotZ(2.0 * M_PI * ic / res));
        rule.weights.push_back(wz * wz * beta.weights[ib] / (8.0 * M_PI * M_PI));
      }
    }
  }
  return rule;
}

/// Unit quaternions sampled on S^3 with the uniform probability measure:
/// q = (cos chi, sin chi sin v cos f, sin chi sin v sin f, sin chi cos v),
/// d mu = sin^2(chi) sin(v) dchi dv df / (2 pi^2).
struct QuaternionRule {
  std::vector<Eigen::Vector4d> nodes;
  std::vector<double> weights;
};

inline QuaternionRule s3HaarRule(int res) {
  QuaternionRule rule;
  HalfPeriodRule chi = halfPeriodSinRule(res, 2);
  HalfPeriodRule pol = halfPeriodSinRule(res, 1);
  const double wf = 2.0 * M_PI / res;
  for (int ic = 0; ic < res; ++ic) {
    if (std::abs(chi.weights[ic]) < 1e-300) continue;
    double sc = std::sin(chi.nodes[ic]), cc = std::cos(chi.nodes[ic]);
    for (int iv = 0; iv < res; ++iv) {
      if (std::abs(pol.weights[iv]) < 1e-300) continue;
      double sv = std::sin(pol.nodes[iv]), cv = std::cos(pol.nodes[iv]);
      for (int jf = 0; jf < res; ++jf) {
        double f = 2.0 * M_PI * jf / res;
        rule.nodes.push_back(
            Eigen::Vector4d(cc, sc * sv * std::cos(f), sc * sv * std::sin(f), sc * cv));
        rule.weights.push_back(chi.weights[ic] * pol.weights[iv] * wf / (2.0 * M_PI * M_PI));
      }
    }
  }
  return rule;
}

/// Rotation x -> p x conj(q) of R^4 = H; the double cover of SO(4).
inline Eigen::Matrix4d so4FromQuaternions(const Eigen::Vector4d& p, const Eigen::Vector4d& q) {
  auto leftMul = [](const Eigen::Vector4d& a) {
    Eigen::Matrix4d m;
    m << a(0), -a(1), -a(2), -a(3),
         a(1),  a(0), -a(3),  a(2),
         a(2),  a(3),  a(0), -a(1),
         a(3), -a(2),  a(1),  a(0);
    return m;
  };
  auto rightMulConj = [](const Eigen::Vector4d& a) {
    // x -> x * conj(a)
    Eigen::Matrix4d m;
    m << a(0),  a(1),  a(2),  a(3),
        -a(1),  a(0), -a(3),  a(2),
        -a(2),  a(3),  a(0), -a(1),
        -a(3), -a(2),  a(1),  a(0);
    return m;
  };
  return leftMul(p) * rightMulConj(q);
}

/// Haar rule on SO(4) as the pushforward of uniform x uniform on S^3 x S^3.
inline GroupRule so4HaarRule(int res) {
  QuaternionRule s3 = s3HaarRule(res);
  GroupRule rule;
  rule.nodes.reserve(s3.nodes.size() * s3.nodes.size());
  rule.weights.reserve(rule.nodes.capacity());
  for (size_t a = 0; a < s3.nodes.size(); ++a)
    for (size_t b = 0; b < s3.nodes.size(); ++b) {
      rule.nodes.push_back(so4FromQuaternions(s3.nodes[a], s3.nodes[b]));
      rule.weights.push_back(s3.weights[a] * s3.weights[b]);
    }
  return rule;
}

}  // namespace magconn
