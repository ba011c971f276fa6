#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "magconn/magtensor.hpp"
#include "magconn/manifold.hpp"
#include "magconn/rng.hpp"

// Spectral engine on the unit tangent bundle of a conformal torus (n = 2):
// vertical/horizontal/magnetic derivatives, fiberwise Fourier projections,
// degree-raising/lowering parts of the flow, and residual evaluation of the
// magnetic Pestov identities. Everything is sampled on a periodic grid over
// T^2 x S^1 and differentiated spectrally; with band-limited data the
// identities are exact up to rounding.

namespace magconn {

struct FiberField {
  Eigen::ArrayXd v;

  FiberField() = default;
  explicit FiberField(Eigen::Index size) : v(Eigen::ArrayXd::Zero(size)) {}
  explicit FiberField(Eigen::ArrayXd values) : v(std::move(values)) {}

  FiberField operator+(const FiberField& o) const { return FiberField(v + o.v); }
  FiberField operator-(const FiberField& o) const { return FiberField(v - o.v); }
  FiberField operator*(double s) const { return FiberField(v * s); }
};

/// Grid over T^2 x S^1 for a conformal torus with magnetic field b, with the
/// coefficient tables every operator needs.
class CircleBundle {
 public:
  CircleBundle(const ConformalTorusParams& par, int n1, int n2, int nt)
      : par_(par), n1_(n1), n2_(n2), nt_(nt) {
    const auto idx2 = [this](int i, int j) { return i * n2_ + j; };
    cosT_.resize(nt_);
    sinT_.resize(nt_);
    for (int k = 0; k < nt_; ++k) {
      double th = 2.0 * M_PI * k / nt_;
      cosT_(k) = std::cos(th);
      sinT_(k) = std::sin(th);
    }
    emphi_.resize(n1_ * n2_);
    e2phi_.resize(n1_ * n2_);
    phi1_.resize(n1_ * n2_);
    phi2_.resize(n1_ * n2_);
    gauss_.resize(n1_ * n2_);
    b_.resize(n1_ * n2_);
    b1_.resize(n1_ * n2_);
    b2_.resize(n1_ * n2_);
    for (int i = 0; i < n1_; ++i)
      for (int j = 0; j < n2_; ++j) {
        double x1 = 2.0 * M_PI * i / n1_, x2 = 2.0 * M_PI * j / n2_;
        double phi = par.phi(x1, x2);
        emphi_(idx2(i, j)) = std::exp(-phi);
        e2phi_(idx2(i, j)) = std::exp(2.0 * phi);
        phi1_(idx2(i, j)) = par.phi1(x1, x2);
        phi2_(idx2(i, j)) = par.phi2(x1, x2);
        gauss_(idx2(i, j)) = -std::exp(-2.0 * phi) * (par.phi11(x1, x2) + par.phi22(x1, x2));
        b_(idx2(i, j)) = par.b(x1, x2);
        b1_(idx2(i, j)) = par.bx1(x1, x2);
        b2_(idx2(i, j)) = par.bx2(x1, x2);
      }
  }

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int nt() const { return nt_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(n1_) * n2_ * nt_; }
  const ConformalTorusParams& params() const { return par_; }

  Eigen::Index index(int i, int j, int k) const {
    return (static_cast<Eigen::Index>(i) * n2_ + j) * nt_ + k;
  }
  double theta(int k) const { return 2.0 * M_PI * k / nt_; }
  double x1(int i) const { return 2.0 * M_PI * i / n1_; }
  double x2(int j) const { return 2.0 * M_PI * j / n2_; }

  /// Sample a closure f(x1, x2, theta) on the grid.
  template <typename F>
  FiberField sample(F&& f) const {
    FiberField out(size());
    for (int i = 0; i < n1_; ++i)
      for (int j = 0; j < n2_; ++j)
        for (int k = 0; k < nt_; ++k) out.v(index(i, j, k)) = f(x1(i), x2(j), theta(k));
    return out;
  }

  /// Spectral derivative along axis 0 (x1), 1 (x2) or 2 (theta).
  FiberField deriv(const FiberField& u, int axis) const {
    FiberField out(size());
    const int len = axis == 0 ? n1_ : axis == 1 ? n2_ : nt_;
    std::vector<double> line(len);
    std::vector<std::complex<double>> spec(len);
    Eigen::FFT<double> fft;
    auto run = [&](auto&& get, auto&& put) {
      for (int a = 0; a < len; ++a) line[a] = get(a);
      fft.fwd(spec, line);
      for (int a = 0; a < len; ++a) {
        int k = a <= len / 2 ? a : a - len;
        if (2 * a == len) k = 0;  // drop the Nyquist mode in derivatives
        spec[a] *= std::complex<double>(0.0, k);
      }
      fft.inv(line, spec);
      for (int a = 0; a < len; ++a) put(a, line[a]);
    };
    if (axis == 2) {
      for (int i = 0; i < n1_; ++i)
        for (int j = 0; j < n2_; ++j)
          run([&](int k) { return u.v(index(i, j, k)); },
              [&](int k, double val) { out.v(index(i, j, k)) = val; });
    } else if (axis == 1) {
      for (int i = 0; i < n1_; ++i)
        for (int k = 0; k < nt_; ++k)
          run([&](int j) { return u.v(index(i, j, k)); },
              [&](int j, double val) { out.v(index(i, j, k)) = val; });
    } else {
      for (int j = 0; j < n2_; ++j)
        for (int k = 0; k < nt_; ++k)
          run([&](int i) { return u.v(index(i, j, k)); },
              [&](int i, double val) { out.v(index(i, j, k)) = val; });
    }
    return out;
  }

  /// Keeps only the fiber modes e^{+-i m theta}.
  FiberField projectHarmonic(const FiberField& u, int m) const {
    if (m < 0) throw std::invalid_argument("projectHarmonic: m must be nonnegative");
    FiberField out(size());
    std::vector<double> line(nt_);
    std::vector<std::complex<double>> spec(nt_);
    Eigen::FFT<double> fft;
    for (int i = 0; i < n1_; ++i)
      for (int j = 0; j < n2_; ++j) {
        for (int k = 0; k < nt_; ++k) line[k] = u.v(index(i, j, k));
        fft.fwd(spec, line);
        for (int a = 0; a < nt_; ++a) {
          int k = a <= nt_ / 2 ? a : a - nt_;
          if (std::abs(k) != m) spec[a] = 0.0;
          if (2 * a == nt_) spec[a] = 0.0;
        }
        fft.inv(line, spec);
        for (int k = 0; k < nt_; ++k) out.v(index(i, j, k)) = line[k];
      }
    return out;
  }

  /// Fraction of the energy in the top third of any axis spectrum; a
  /// band-limit check guarding against aliasing in products.
  double spectralTailFraction(const FiberField& u) const {
    double total = u.v.matrix().squaredNorm() + 1e-300;
    double worst = 0.0;
    Eigen::FFT<double> fft;
    for (int axis = 0; axis < 3; ++axis) {
      const int len = axis == 0 ? n1_ : axis == 1 ? n2_ : nt_;
      std::vector<double> line(len);
      std::vector<std::complex<double>> spec(len);
      double tail = 0.0;
      auto scan = [&](auto&& get) {
        for (int a = 0; a < len; ++a) line[a] = get(a);
        fft.fwd(spec, line);
        for (int a = 0; a < len; ++a) {
          int k = a <= len / 2 ? a : a - len;
          if (std::abs(k) > len / 3) tail += std::norm(spec[a]) / len;
        }
      };
      if (axis == 2) {
        for (int i = 0; i < n1_; ++i)
          for (int j = 0; j < n2_; ++j) scan([&](int k) { return u.v(index(i, j, k)); });
      } else if (axis == 1) {
        for (int i = 0; i < n1_; ++i)
          for (int k = 0; k < nt_; ++k) scan([&](int j) { return u.v(index(i, j, k)); });
      } else {
        for (int j = 0; j < n2_; ++j)
          for (int k = 0; k < nt_; ++k) scan([&](int i) { return u.v(index(i, j, k)); });
      }
      worst = std::max(worst, tail / total);
    }
    return worst;
  }

  void requireBandlimited(const FiberField& u, double tol = 1e-10) const {
    if (spectralTailFraction(u) > tol)
      throw std::invalid_argument("field is not band-limited on this grid (aliasing)");
  }

  /// L^2 inner product of the Liouville volume e^{2 phi} dx dtheta.
  double inner(const FiberField& u, const FiberField& w) const {
    double cell = std::pow(2.0 * M_PI, 3) / size();
    double acc = 0.0;
    for (int i = 0; i < n1_; ++i)
      for (int j = 0; j < n2_; ++j) {
        double wgt = e2phi_(i * n2_ + j);
        for (int k = 0; k < nt_; ++k) {
          Eigen::Index id = index(i, j, k);
          acc += u.v(id) * w.v(id) * wgt;
        }
      }
    return acc * cell;
  }
  double norm2(const FiberField& u) const { return inner(u, u); }

  // pointwise coefficient multiplications
  FiberField mulBase(const FiberField& u, const Eigen::ArrayXd& table) const {
    FiberField out(size());
    for (int i = 0; i < n1_; ++i)
      for (int j = 0; j < n2_; ++j) {
        double c = table(i * n2_ + j);
        for (int k = 0; k < nt_; ++k) out.v(index(i, j, k)) = c * u.v(index(i, j, k));
      }
    return out;
  }
  FiberField mulTheta(const FiberField& u, const Eigen::ArrayXd& table) const {
    FiberField out(size());
    for (int i = 0; i < n1_; ++i)
      for (int j = 0; j < n2_; ++j)
        for (int k = 0; k < nt_; ++k) out.v(index(i, j, k)) = table(k) * u.v(index(i, j, k));
    return out;
  }

  const Eigen::ArrayXd& cosTheta() const { return cosT_; }
  const Eigen::ArrayXd& sinTheta() const { return sinT_; }
  const Eigen::ArrayXd& expMinusPhi() const { return emphi_; }
  const Eigen::ArrayXd& expTwoPhi() const { return e2phi_; }
  const Eigen::ArrayXd& phi1() const { return phi1_; }
  const Eigen::ArrayXd& phi2() const { return phi2_; }
  const Eigen::ArrayXd& gaussCurvature() const { return gauss_; }
  const Eigen::ArrayXd& fieldB() const { return b_; }
  const Eigen::ArrayXd& fieldB1() const { return b1_; }
  const Eigen::ArrayXd& fieldB2() const { return b2_; }

 private:
  ConformalTorusParams par_;
  int n1_, n2_, nt_;
  Eigen::ArrayXd cosT_, sinT_;
  Eigen::ArrayXd emphi_, e2phi_, phi1_, phi2_, gauss_, b_, b1_, b2_;
};

/// Vertical derivative d/dtheta (spectral, exact on band-limited fields).
inline FiberField verticalDerivative(const CircleBundle& g, const FiberField& u) {
  return g.deriv(u, 2);
}

/// Geodesic vector field in the conformal chart.
inline FiberField geodesicField(const CircleBundle& g, const FiberField& u) {
  FiberField d1 = g.deriv(u, 0), d2 = g.deriv(u, 1), dt = g.deriv(u, 2);
  FiberField out = g.mulTheta(d1, g.cosTheta()) + g.mulTheta(d2, g.sinTheta());
  out = out - g.mulTheta(g.mulBase(dt, g.phi1()), g.sinTheta());
  out = out + g.mulTheta(g.mulBase(dt, g.phi2()), g.cosTheta());
  return g.mulBase(out, g.expMinusPhi());
}

/// Horizontal field: the derivative along the horizontal lift of i v.
inline FiberField horizontalField(const CircleBundle& g, const FiberField& u) {
  FiberField d1 = g.deriv(u, 0), d2 = g.deriv(u, 1), dt = g.deriv(u, 2);
  FiberField out = g.mulTheta(d2, g.cosTheta()) - g.mulTheta(d1, g.sinTheta());
  out = out - g.mulTheta(g.mulBase(dt, g.phi1()), g.cosTheta());
  out = out - g.mulTheta(g.mulBase(dt, g.phi2()), g.sinTheta());
  return g.mulBase(out, g.expMinusPhi());
}

/// Magnetic vector field X + b d/dtheta.
inline FiberField xSigma(const CircleBundle& g, const FiberField& u) {
  return geodesicField(g, u) + g.mulBase(g.deriv(u, 2), g.fieldB());
}

struct XPlusMinus {
  FiberField plus, minus, zero;
  double leakage;       // energy fraction of X^sigma u outside degrees m-1, m, m+1
  double purityInput;   // how far u was from a pure degree-m harmonic
};

/// Splits X^sigma u_m into the degree-raising, degree-lowering and
/// degree-preserving parts; the middle part is b d/dtheta u.
inline XPlusMinus xPlusMinus(const CircleBundle& g, const FiberField& um, int m) {
  FiberField pure = g.projectHarmonic(um, m);
  double purity = std::sqrt(g.norm2(pure - um) / (g.norm2(um) + 1e-300));
  if (purity > 1e-9) throw std::invalid_argument("xPlusMinus: input is not a pure harmonic");
  FiberField xu = xSigma(g, um);
  XPlusMinus out{g.projectHarmonic(xu, m + 1),
                 m >= 1 ? g.projectHarmonic(xu, m - 1) : FiberField(g.size()),
                 g.projectHarmonic(xu, m), 0.0, purity};
  FiberField rest = xu - out.plus - out.minus - out.zero;
  out.leakage = std::sqrt(g.norm2(rest) / (g.norm2(xu) + 1e-300));
  return out;
}

/// Magnetic horizontal gradient of a scalar: nabla_H u minus the Omega0
/// correction. On a surface the correction vanishes identically; it is
/// still assembled from the frame algebra so the code path exists.
inline FiberField magneticHorizontalGradient(const CircleBundle& g, const FiberField& u) {
  FiberField hu = horizontalField(g, u);
  FiberField dt = g.deriv(u, 2);
  // coefficient <(1/2)[Omega iv]^perp, iv>_g with Omega = b J_g: J_g(iv) = -v,
  // so the normal projection is zero; keep the assembly explicit.
  FiberField correction(g.size());
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) {
      double b = g.fieldB()(i * g.n2() + j);
      for (int k = 0; k < g.nt(); ++k) {
        // v and iv in euclidean chart components, |v|_g = 1
        double c = g.cosTheta()(k), s = g.sinTheta()(k);
        double emp = g.expMinusPhi()(i * g.n2() + j);
        Eigen::Vector2d v(emp * c, emp * s), iv(-emp * s, emp * c);
        Eigen::Vector2d jiv = b * Eigen::Vector2d(-iv(1), iv(0));  // Omega(iv)
        double gw = 1.0 / (emp * emp);                             // e^{2 phi}
        double along = jiv.dot(v) * gw;                            // <Omega iv, v>_g
        Eigen::Vector2d perpPart = jiv - along * v;
        double coeff = 0.5 * perpPart.dot(iv) * gw;                // normal component
        correction.v(g.index(i, j, k)) = coeff * dt.v(g.index(i, j, k));
      }
    }
  return hu - correction;
}

/// Scalar tangential magnetic curvature m(x, theta) on the grid from the
/// closed-form surface specialization K - db(iv) + b^2.
inline Eigen::ArrayXd tangentialTableClosedForm(const CircleBundle& g) {
  Eigen::ArrayXd out(g.size());
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) {
      int ij = i * g.n2() + j;
      double k = g.gaussCurvature()(ij);
      double emp = g.expMinusPhi()(ij);
      double b = g.fieldB()(ij), b1 = g.fieldB1()(ij), b2 = g.fieldB2()(ij);
      for (int kk = 0; kk < g.nt(); ++kk) {
        double dbiv = emp * (-g.sinTheta()(kk) * b1 + g.cosTheta()(kk) * b2);
        out(g.index(i, j, kk)) = k - dbiv + b * b;
      }
    }
  return out;
}

/// The same table computed through the frame-bundle curvature machinery;
/// the independent cross-check of the surface specialization.
inline Eigen::ArrayXd tangentialTableFrameBundle(const CircleBundle& g) {
  auto system = conformalTorus2(g.params());
  Eigen::ArrayXd out(g.size());
  Eigen::VectorXd zn(1);
  zn << 1.0;
  for (int i = 0; i < g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) {
      Eigen::VectorXd p(2);
      p << g.x1(i), g.x2(j);
      double emp = g.expMinusPhi()(i * g.n2() + j);
      for (int k = 0; k < g.nt(); ++k) {
        double c = g.cosTheta()(k), s = g.sinTheta()(k);
        Eigen::MatrixXd w(2, 2);
        w << c, -s, s, c;
        auto sample = sampleCurvature(system, {p, emp * w});
        out(g.index(i, j, k)) = tangentialCurvature(sample, zn)(0);
      }
    }
  return out;
}

struct PestovReport {
  double nvXs = 0.0;      // |nabla_V X^sigma u|^2
  double xsNv = 0.0;      // |X^sigma nabla_V u|^2
  double xs = 0.0;        // (n-1) |X^sigma u|^2 at n = 2
  double curv = 0.0;      // <M nabla_V u, nabla_V u>
  double residual = 0.0;  // nvXs - xsNv - xs + curv
};

/// Evaluates every term of the scalar magnetic Pestov identity.
inline PestovReport pestovResidual(const CircleBundle& g, const FiberField& u,
                                   const Eigen::ArrayXd& tangentialTable) {
  g.requireBandlimited(u);
  PestovReport r;
  FiberField xu = xSigma(g, u);
  FiberField nvU = g.deriv(u, 2);
  r.nvXs = g.norm2(g.deriv(xu, 2));
  r.xsNv = g.norm2(xSigma(g, nvU));
  r.xs = g.norm2(xu);
  FiberField weighted(Eigen::ArrayXd(nvU.v * tangentialTable));
  r.curv = g.inner(nvU, weighted);
  r.residual = r.nvXs - (r.xsNv + r.xs - r.curv);
  return r;
}

inline PestovReport pestovResidual(const CircleBundle& g, const FiberField& u) {
  return pestovResidual(g, u, tangentialTableClosedForm(g));
}

struct LocalizedPestovReport {
  double xMinus = 0.0;   // coefficient-weighted |X_- u|^2
  double xPlus = 0.0;    // coefficient-weighted |X_+ u|^2
  double omegaV = 0.0;   // [1 + 0] |(Omega v) u|^2 at n = 2
  double zNorm = 0.0;    // |Z_m u|^2
  double curv = 0.0;     // <M nabla_V u, nabla_V u>
  double residual = 0.0;
};

/// Decomposition of the magnetic horizontal gradient of u_m in H^m into the
/// vertical images of X_+ and X_- plus the divergence-free remainder; the
/// third summand carries the factor n - 2 and vanishes on surfaces.
struct GradientDecomposition {
  FiberField gradH, compPlus, compMinus, compOmega, z;
  double reconstructionResidual = 0.0;
  double maxPairwiseInner = 0.0;
};

inline GradientDecomposition gradientDecomposition(const CircleBundle& g, const FiberField& um,
                                                   int m) {
  if (m < 2) throw std::invalid_argument("gradientDecomposition: need m >= 2 at n = 2");
  auto parts = xPlusMinus(g, um, m);
  GradientDecomposition out;
  out.gradH = magneticHorizontalGradient(g, um);
  out.compPlus = g.deriv(parts.plus, 2) * (1.0 / (m + 1));
  out.compMinus = g.deriv(parts.minus, 2) * (-1.0 / (m - 1));
  // factor (n - 2) / (m (m + n - 2)) is zero at n = 2
  out.compOmega = g.deriv(g.mulBase(g.deriv(um, 2), g.fieldB()), 2) * 0.0;
  out.z = out.gradH - out.compPlus - out.compMinus - out.compOmega;

  FiberField sum = out.compPlus + out.compMinus + out.compOmega + out.z;
  out.reconstructionResidual = std::sqrt(g.norm2(sum - out.gradH));
  const FiberField* comps[4] = {&out.compPlus, &out.compMinus, &out.compOmega, &out.z};
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      out.maxPairwiseInner = std::max(out.maxPairwiseInner,
                                      std::abs(g.inner(*comps[a], *comps[b])));
  return out;
}

/// Localized magnetic Pestov identity for u_m in H^m, m >= 2 on surfaces.
inline LocalizedPestovReport localizedPestovResidual(const CircleBundle& g, const FiberField& um,
                                                     int m,
                                                     const Eigen::ArrayXd& tangentialTable) {
  if (m < 2) throw std::invalid_argument("localizedPestovResidual: need m >= 2 at n = 2");
  g.requireBandlimited(um);
  const int n = 2;
  auto parts = xPlusMinus(g, um, m);
  LocalizedPestovReport r;
  double cMinus = static_cast<double>(n + m - 2) * (n + 2 * m - 4) / (n + m - 3);
  double cPlus = static_cast<double>(m) * (n + 2 * m) / (m + 1);
  double cOmega = 1.0 + std::pow(n - 2.0, 2) / (4.0 * m * (n + m - 2));
  r.xMinus = cMinus * g.norm2(parts.minus);
  r.xPlus = cPlus * g.norm2(parts.plus);
  r.omegaV = cOmega * g.norm2(parts.zero);
  r.zNorm = g.norm2(gradientDecomposition(g, um, m).z);
  FiberField nvU = g.deriv(um, 2);
  r.curv = g.inner(nvU, FiberField(Eigen::ArrayXd(nvU.v * tangentialTable)));
  r.residual = r.xMinus - r.xPlus + r.omegaV + r.zNorm - r.curv;
  return r;
}

inline LocalizedPestovReport localizedPestovResidual(const CircleBundle& g, const FiberField& um,
                                                     int m) {
  return localizedPestovResidual(g, um, m, tangentialTableClosedForm(g));
}

/// Random real trigonometric polynomial of the given degree in each axis.
inline FiberField randomBandlimited(const CircleBundle& g, int degree, int waves, Rng& rng) {
  FiberField out(g.size());
  for (int w = 0; w < waves; ++w) {
    int k1 = static_cast<int>(std::floor(rng.uniform(-degree, degree + 1)));
    int k2 = static_cast<int>(std::floor(rng.uniform(-degree, degree + 1)));
    int kt = static_cast<int>(std::floor(rng.uniform(-degree, degree + 1)));
    double amp = rng.uniform(-1.0, 1.0), phase = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 0; i < g.n1(); ++i)
      for (int j = 0; j < g.n2(); ++j)
        for (int k = 0; k < g.nt(); ++k)
          out.v(g.index(i, j, k)) +=
              amp * std::cos(k1 * g.x1(i) + k2 * g.x2(j) + kt * g.theta(k) + phase);
  }
  return out;
}

/// Random element of H^m: f1(x) cos(m theta) + f2(x) sin(m theta).
inline FiberField randomHarmonic(const CircleBundle& g, int m, int degree, int waves, Rng& rng) {
  FiberField out(g.size());
  for (int w = 0; w < waves; ++w) {
    int k1 = static_cast<int>(std::floor(rng.uniform(-degree, degree + 1)));
    int k2 = static_cast<int>(std::floor(rng.uniform(-degree, degree + 1)));
    double a1 = rng.uniform(-1.0, 1.0), p1 = rng.uniform(0.0, 2.0 * M_PI);
    double a2 = rng.uniform(-1.0, 1.0), p2 = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 0; i < g.n1(); ++i)
      for (int j = 0; j < g.n2(); ++j) {
        double base1 = a1 * std::cos(k1 * g.x1(i) + k2 * g.x2(j) + p1);
        double base2 = a2 * std::cos(k1 * g.x1(i) + k2 * g.x2(j) + p2);
        for (int k = 0; k < g.nt(); ++k)
          out.v(g.index(i, j, k)) += base1 * std::cos(m * g.theta(k)) +
                                     base2 * std::sin(m * g.theta(k));
      }
  }
  return out;
}

}  // namespace magconn
