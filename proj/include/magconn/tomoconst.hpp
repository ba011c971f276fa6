#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>

// Exact rational verification of the tensor-tomography constant algebra:
// the degree-coupling coefficients a_-, a_0, a_+, the quadratic-form
// constants alpha, beta, gamma, and the identity C = beta^2/(4 alpha) -
// gamma = m(m-1)/(2m+n-2) + (n-2)(m-1)/m. Floating point is deliberately
// absent from this module.

namespace magconn {
namespace tomo {

using Rational = boost::multiprecision::cpp_rational;

inline Rational aMinus(long k, long n) { return Rational(1, n + k - 3); }
inline Rational aZero(long k, long n) { return Rational(n - 2, k * (k + n - 2)); }
inline Rational aPlus(long k, long /*n*/) { return Rational(1, k + 1); }

struct TomoCoeffs {
  long m = 0, n = 0;
  Rational a_minus, a_zero, a_plus;  // at level k = m
  Rational alpha, beta, gamma, C;
};

inline void checkPre(long m, long n) {
  if (m < 1 || n < 2 || m + n < 4)
    throw std::invalid_argument("tomo: need m >= 1, n >= 2, m + n >= 4");
}

/// All constants of the degree-m tail estimate. The quadratic-form
/// constants couple level m to level m+1: alpha, beta, gamma carry
/// a_-^{m+1} while the zero-coefficient enters at level m.
inline TomoCoeffs coeffs(long m, long n) {
  checkPre(m, n);
  TomoCoeffs c;
  c.m = m;
  c.n = n;
  c.a_minus = aMinus(m, n);
  c.a_zero = aZero(m, n);
  c.a_plus = aPlus(m, n);

  Rational am1 = aMinus(m + 1, n);
  Rational mix = am1 + c.a_zero;
  Rational base = Rational(m) * (m + n - 2);
  c.alpha = base * ((1 + am1) * (1 + am1) - 1) + (n - 1);
  c.beta = -2 * base * (1 + am1) * mix;
  c.gamma = base * mix * mix;
  c.C = c.beta * c.beta / (4 * c.alpha) - c.gamma;
  return c;
}

/// Closed form C(m, n) = m(m-1)/(2m+n-2) + (n-2)(m-1)/m.
inline Rational closedFormC(long m, long n) {
  checkPre(m, n);
  return Rational(m * (m - 1), 2 * m + n - 2) + Rational((n - 2) * (m - 1), m);
}

struct CVerification {
  Rational quadratic, closed;
  bool equal = false;
};

/// Computes C both ways in exact arithmetic and compares.
inline CVerification verifyC(long m, long n) {
  CVerification v;
  v.quadratic = coeffs(m, n).C;
  v.closed = closedFormC(m, n);
  v.equal = v.quadratic == v.closed;
  return v;
}

/// The m = 2 specialization n/2 - 1 + 2/(n+2).
inline Rational introSpecialization(long n) {
  if (n < 2) throw std::invalid_argument("introSpecialization: need n >= 2");
  return Rational(n, 2) - 1 + Rational(2, n + 2);
}

/// The auxiliary inequality used to drop the level-(m-1) terms:
/// (m-1)(m+n-3)(1 + a_-^m)^2 + (n-1) >= (m-1)(m+n-3).
inline bool dropInequalityHolds(long m, long n) {
  checkPre(m, n);
  Rational lhs = Rational((m - 1) * (m + n - 3)) * (1 + aMinus(m, n)) * (1 + aMinus(m, n)) + (n - 1);
  return lhs >= Rational((m - 1) * (m + n - 3));
}

}  // namespace tomo
}  // namespace magconn
