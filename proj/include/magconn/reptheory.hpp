#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "magconn/quadrature.hpp"
#include "magconn/rng.hpp"

// Weight lattices of so(n), Casimir scalars in exact rational arithmetic,
// first Laplace eigenvalues nu(K) for the subgroup catalogue, the pinching
// threshold delta*(n) with its margin, and the Poincare inequality on SO(n)
// checked by Haar quadrature.

namespace magconn {

using Rational = boost::multiprecision::cpp_rational;
using Weight = std::vector<Rational>;  // coefficients in the standard e-basis of t*

inline int weightRank(int n) { return n / 2; }

/// Fundamental weights of so(n) in the e-basis; the last one (two for even
/// n) are the half-integer spin weights.
inline std::vector<Weight> fundamentalWeights(int n) {
  if (n < 3) throw std::invalid_argument("fundamentalWeights: need n >= 3");
  const int m = weightRank(n);
  std::vector<Weight> out;
  auto ones = [m](int upTo) {
    Weight w(m, Rational(0));
    for (int i = 0; i < upTo; ++i) w[i] = 1;
    return w;
  };
  if (n % 2 == 1) {
    for (int i = 1; i <= m - 1; ++i) out.push_back(ones(i));
    Weight spin(m, Rational(1, 2));
    out.push_back(spin);
  } else {
    for (int i = 1; i <= m - 2; ++i) out.push_back(ones(i));
    Weight spinMinus(m, Rational(1, 2)), spinPlus(m, Rational(1, 2));
    spinMinus[m - 1] = Rational(-1, 2);
    out.push_back(spinMinus);
    out.push_back(spinPlus);
  }
  return out;
}

/// Positive roots of so(n): e_i - e_j and e_i + e_j for i < j, plus the
/// short roots e_i when n is odd.
inline std::vector<Weight> positiveRoots(int n) {
  const int m = weightRank(n);
  std::vector<Weight> out;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Weight diff(m, Rational(0)), sum(m, Rational(0));
      diff[i] = 1;
      diff[j] = -1;
      sum[i] = 1;
      sum[j] = 1;
      out.push_back(diff);
      out.push_back(sum);
    }
  if (n % 2 == 1)
    for (int i = 0; i < m; ++i) {
      Weight e(m, Rational(0));
      e[i] = 1;
      out.push_back(e);
    }
  return out;
}

/// Half the sum of the positive roots: (m-1/2, ..., 1/2) for n = 2m+1 and
/// (m-1, m-2, ..., 1, 0) for n = 2m.
inline Weight halfSum(int n) {
  if (n < 3) throw std::invalid_argument("halfSum: need n >= 3");
  const int m = weightRank(n);
  Weight out(m, Rational(0));
  for (const Weight& root : positiveRoots(n))
    for (int i = 0; i < m; ++i) out[i] += root[i] / 2;
  return out;
}

inline bool isDominant(const Weight& w, int n) {
  const int m = weightRank(n);
  if (static_cast<int>(w.size()) != m) return false;
  for (int i = 0; i + 1 < m; ++i)
    if (w[i] < w[i + 1]) return false;
  if (n % 2 == 1) return m == 0 || w[m - 1] >= 0;
  return m < 2 || w[m - 2] >= abs(w[m - 1]);
}

/// Analytically integral for SO(n) (not just Spin(n)): integer coefficients.
inline bool isSOIntegral(const Weight& w) {
  for (const Rational& c : w)
    if (denominator(c) != 1) return false;
  return true;
}

/// Casimir scalar <lambda, lambda + 2 delta_n> in the metric dual to the
/// Killing form B = (n-2) <.,.>; in e-coordinates the plain sum divided by
/// n - 2.
inline Rational casimirScalar(const Weight& lambda, int n) {
  if (!isDominant(lambda, n)) throw std::invalid_argument("casimirScalar: weight not dominant");
  Weight delta = halfSum(n);
  Rational sum = 0;
  for (size_t i = 0; i < lambda.size(); ++i) sum += lambda[i] * (lambda[i] + 2 * delta[i]);
  return sum / (n - 2);
}

/// Eigenvalue of the Laplacian on SO(n) for the -Tr/2 metric on the
/// irreducible representation of highest weight lambda: (n-2) Casimir_B.
inline Rational laplaceEigenvalue(const Weight& lambda, int n) {
  return casimirScalar(lambda, n) * (n - 2);
}

/// Dominant SO(n)-integral weights with |lambda|_1 <= maxSum.
inline std::vector<Weight> dominantIntegralWeights(int n, int maxSum) {
  const int m = weightRank(n);
  std::vector<Weight> out;
  std::vector<long> cur(m, 0);
  std::function<void(int, long)> rec = [&](int pos, long budget) {
    if (pos == m) {
      Weight w(m);
      for (int i = 0; i < m; ++i) w[i] = cur[i];
      if (isDominant(w, n)) out.push_back(w);
      return;
    }
    long cap = pos == 0 ? budget : std::min<long>(budget, cur[pos - 1]);
    bool lastEven = (n % 2 == 0) && pos == m - 1;
    for (long v = lastEven ? -cap : 0; v <= cap; ++v) {
      cur[pos] = v;
      rec(pos + 1, budget - std::abs(v));
    }
  };
  rec(0, maxSum);
  return out;
}

// ---------------------------------------------------------------------------
// Subgroup catalogue and pinching thresholds
// ---------------------------------------------------------------------------

/// Radon-Hurwitz number: n = 2^{4a+b} u with u odd gives 8a + 2^b.
inline int radonHurwitz(int n) {
  int twos = 0;
  while (n % 2 == 0) {
    n /= 2;
    ++twos;
  }
  return 8 * (twos / 4) + (1 << (twos % 4));
}

struct GroupTag {
  enum Kind { SphereProduct, UnitaryThree, ExceptionalG2, E7Quotient } kind = SphereProduct;
  int q = 1;  // for SO(q) x SO(n-1-q)

  std::string name(int n) const {
    switch (kind) {
      case UnitaryThree: return "U(3)";
      case ExceptionalG2: return "G2";
      case E7Quotient: return "E7/Z2";
      default:
        return "SO(" + std::to_string(q) + ")xSO(" + std::to_string(n - 1 - q) + ")";
    }
  }
};

/// The list of maximal candidate transitivity groups inside SO(n-1); empty
/// for odd n != 7.
inline std::vector<GroupTag> groupList(int n) {
  if (n < 3) throw std::invalid_argument("groupList: need n >= 3");
  std::vector<GroupTag> out;
  if (n % 2 == 1) {
    if (n == 7) out.push_back({GroupTag::UnitaryThree, 0});
    return out;
  }
  if (n == 134) {
    out.push_back({GroupTag::E7Quotient, 0});
    out.push_back({GroupTag::SphereProduct, 1});
    return out;
  }
  if (n == 8) out.push_back({GroupTag::ExceptionalG2, 0});
  int qMax = std::min(radonHurwitz(n) - 1, (n - 2) / 2);
  if (n == 8) qMax = 3;
  for (int q = 1; q <= qMax; ++q) out.push_back({GroupTag::SphereProduct, q});
  return out;
}

/// Smallest nonzero Laplace eigenvalue of SO(n-1)/K for the quotient of the
/// -Tr/2 metric. Sphere products return the operative bound n-2 (exact for
/// q = 1); the two exceptional projective spaces have nu = 16; the E7 case
/// is out of computational reach and reported unknown.
struct NuValue {
  bool known = true;
  Rational value = 0;
};

inline NuValue nu(const GroupTag& k, int n) {
  bool listed = false;
  for (const auto& g : groupList(n))
    if (g.kind == k.kind && (g.kind != GroupTag::SphereProduct || g.q == k.q)) listed = true;
  if (!listed) throw std::invalid_argument("nu: group not in the catalogue for this n");
  switch (k.kind) {
    case GroupTag::UnitaryThree: return {true, 16};
    case GroupTag::ExceptionalG2: return {true, 16};
    case GroupTag::E7Quotient: return {false, 0};
    default: return {true, n - 2};
  }
}

/// chi(t) = 2 sqrt(t) / (3 + 2 sqrt(t)), increasing in t.
inline double chi(double t) {
  if (t <= 0.0) throw std::invalid_argument("chi: need t > 0");
  double s = std::sqrt(t);
  return 2.0 * s / (3.0 + 2.0 * s);
}

/// Pinching threshold delta*(n) = max over the catalogue of chi(nu(K));
/// zero when the catalogue is empty, exact rational when the maximizing nu
/// is a perfect square, unknown when the catalogue contains the E7 case.
struct DeltaStar {
  bool known = true;
  double value = 0.0;
  std::optional<Rational> exact;
};

inline DeltaStar deltaStar(int n) {
  auto groups = groupList(n);
  DeltaStar out;
  if (groups.empty()) {
    out.exact = Rational(0);
    return out;
  }
  Rational best = -1;
  for (const auto& g : groups) {
    NuValue v = nu(g, n);
    if (!v.known) {
      out.known = false;
      return out;
    }
    best = std::max(best, v.value);
  }
  // exact chi when nu is a perfect integer square
  boost::multiprecision::cpp_int num = numerator(best);
  boost::multiprecision::cpp_int root = sqrt(num);
  if (denominator(best) == 1 && root * root == num) {
    Rational exact = Rational(2 * root, 3 + 2 * root);
    out.exact = exact;
    double r = root.convert_to<double>();
    out.value = 2.0 * r / (3.0 + 2.0 * r);
  } else {
    out.value = chi(best.convert_to<double>());
  }
  return out;
}

/// Ergodicity margin 3 delta - 2 (1 - delta) sqrt(nu_max); positive exactly
/// above the threshold. Unknown nu (n = 134) propagates as nullopt.
inline std::optional<double> epsilonMargin(double delta, int n) {
  auto groups = groupList(n);
  if (groups.empty()) return 3.0 * delta;
  double best = 0.0;
  for (const auto& g : groups) {
    NuValue v = nu(g, n);
    if (!v.known) return std::nullopt;
    best = std::max(best, v.value.convert_to<double>());
  }
  return 3.0 * delta - 2.0 * (1.0 - delta) * std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Poincare inequality on SO(n) by Haar quadrature
// ---------------------------------------------------------------------------

using GroupObservable = std::function<double(const Eigen::MatrixXd&)>;

struct PoincareReport {
  double norm2 = 0.0;  // |f - mean|^2
  double grad2 = 0.0;  // |grad f . e1|^2
  double ratio = 0.0;
};

/// Checks |f - mean|^2 <= |grad^{SO(n)} f . e1|^2 on SO(3) or SO(4); the
/// gradient components are central differences along exp(t e1 ^ e_j).
inline PoincareReport poincareCheck(const GroupObservable& f, int n, int res, double fdStep = 1e-5) {
  if (n != 3 && n != 4) throw std::invalid_argument("poincareCheck: only SO(3) and SO(4)");
  GroupRule rule = n == 3 ? so3HaarRule(res) : so4HaarRule(res);

  // Haar sanity: mass 1 and the Schur moment of the standard representation
  double mass = 0.0, moment = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    mass += rule.weights[i];
    moment += rule.weights[i] * rule.nodes[i](0, 0) * rule.nodes[i](0, 0);
  }
  if (std::abs(mass - 1.0) > 1e-10 || std::abs(moment - 1.0 / n) > 1e-8)
    throw std::runtime_error("poincareCheck: resolution too coarse for Haar normalization");

  auto givens = [n](int j, double t) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    g(0, 0) = std::cos(t);
    g(j, j) = std::cos(t);
    g(j, 0) = std::sin(t);
    g(0, j) = -std::sin(t);
    return g;
  };

  double mean = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) mean += rule.weights[i] * f(rule.nodes[i]);

  PoincareReport rep;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    double d = f(rule.nodes[i]) - mean;
    rep.norm2 += rule.weights[i] * d * d;
    for (int j = 1; j < n; ++j) {
      double plus = f(rule.nodes[i] * givens(j, fdStep));
      double minus = f(rule.nodes[i] * givens(j, -fdStep));
      double der = (plus - minus) / (2.0 * fdStep);
      rep.grad2 += rule.weights[i] * der * der;
    }
  }
  rep.ratio = rep.grad2 > 1e-30 ? rep.norm2 / rep.grad2 : 0.0;
  return rep;
}

/// Random polynomial of degree <= 2 in the matrix entries; the band-limited
/// observables used in the Poincare property tests.
inline GroupObservable randomObservable(int n, Rng& rng) {
  struct Term {
    int i1, j1, i2, j2;
    double coef;
    bool quadratic;
  };
  auto terms = std::make_shared<std::vector<Term>>();
  int count = 4 + static_cast<int>(rng.uniform(0, 4));
  for (int t = 0; t < count; ++t) {
    Term term;
    term.i1 = static_cast<int>(rng.uniform(0, n));
    term.j1 = static_cast<int>(rng.uniform(0, n));
    term.i2 = static_cast<int>(rng.uniform(0, n));
    term.j2 = static_cast<int>(rng.uniform(0, n));
    term.coef = rng.uniform(-1.0, 1.0);
    term.quadratic = rng.uniform() < 0.5;
    terms->push_back(term);
  }
  return [terms](const Eigen::MatrixXd& w) {
    double out = 0.0;
    for (const auto& t : *terms)
      out += t.coef * w(t.i1, t.j1) * (t.quadratic ? w(t.i2, t.j2) : 1.0);
    return out;
  };
}

}  // namespace magconn
