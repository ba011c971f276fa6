#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

// Exact small-dimension linear algebra for the semidirect product
// so(n) x| R^n of skew endomorphisms and translations. All other modules
// inherit the wedge and inner-product conventions fixed here.

namespace magconn {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Mirrors the strict upper triangle so that A + A^T = 0 holds exactly.
template <typename Scalar>
MatX<Scalar> makeSkew(const MatX<Scalar>& a) {
  const Eigen::Index n = a.rows();
  MatX<Scalar> s = MatX<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      s(i, j) = a(i, j);
      s(j, i) = -a(i, j);
    }
  return s;
}

/// Wedge x ^ y, the skew matrix acting by z -> <x,z> y - <y,z> x.
/// The sign is chosen so that <xi x, y> = <xi, x ^ y> for the inner
/// product below; a unit test pins this once for the whole project.
template <typename Scalar>
MatX<Scalar> wedge(const VecX<Scalar>& x, const VecX<Scalar>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("wedge: dimension mismatch");
  return y * x.transpose() - x * y.transpose();
}

/// <xi, eta> = -1/2 Tr(xi eta) on so(n); makes the e_i ^ e_j orthonormal.
template <typename Scalar>
Scalar innerSkew(const MatX<Scalar>& a, const MatX<Scalar>& b) {
  return Scalar(-1) / Scalar(2) * (a * b).trace();
}

/// Element xi + x of so(n) x| R^n.
template <typename Scalar>
struct LieElementT {
  MatX<Scalar> skew;
  VecX<Scalar> vec;

  LieElementT(MatX<Scalar> s, VecX<Scalar> v)
      : skew(makeSkew<Scalar>(s)), vec(std::move(v)) {
    if (skew.rows() != vec.size())
      throw std::invalid_argument("LieElement: dimension mismatch");
  }

  static LieElementT fromSkew(const MatX<Scalar>& s) {
    return LieElementT(s, VecX<Scalar>::Zero(s.rows()));
  }
  static LieElementT fromVec(const VecX<Scalar>& v) {
    return LieElementT(MatX<Scalar>::Zero(v.size(), v.size()), v);
  }

  Eigen::Index dim() const { return vec.size(); }
};

using LieElement = LieElementT<double>;

/// [xi + x, eta + y] = [xi, eta] + (xi y - eta x).
template <typename Scalar>
LieElementT<Scalar> bracket(const LieElementT<Scalar>& a, const LieElementT<Scalar>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("bracket: dimension mismatch");
  MatX<Scalar> comm = a.skew * b.skew - b.skew * a.skew;
  return LieElementT<Scalar>(comm, a.skew * b.vec - b.skew * a.vec);
}

/// <xi + x, eta + y> = -1/2 Tr(xi eta) + <x, y>.
template <typename Scalar>
Scalar inner(const LieElementT<Scalar>& a, const LieElementT<Scalar>& b) {
  return innerSkew<Scalar>(a.skew, b.skew) + a.vec.dot(b.vec);
}

/// Orthogonal splitting so(n) = so(n-1) + e1 ^ R^{n-1}: the second part is
/// e1 ^ (xi e1), the first is the remainder (it kills e1).
template <typename Scalar>
std::pair<MatX<Scalar>, MatX<Scalar>> splitSo(const MatX<Scalar>& xi) {
  VecX<Scalar> e1 = VecX<Scalar>::Zero(xi.rows());
  e1(0) = Scalar(1);
  MatX<Scalar> e1Part = wedge<Scalar>(e1, VecX<Scalar>(xi * e1));
  return {xi - e1Part, e1Part};
}

/// Projection x -> x - <x,e1> e1 onto the complement of e1.
template <typename Scalar>
VecX<Scalar> perp(const VecX<Scalar>& x) {
  VecX<Scalar> r = x;
  r(0) = Scalar(0);
  return r;
}

}  // namespace magconn
