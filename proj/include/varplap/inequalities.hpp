#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <utility>
#include <vector>

#include "varplap/errors.hpp"

namespace varplap {

/// Uniform result shape for inequality checks: margin = rhs - lhs, so a valid
/// inequality lhs <= rhs reports a nonnegative margin.
template <typename Scalar>
struct MarginReport {
  Scalar lhs{0};
  Scalar rhs{0};
  Scalar margin{0};
  std::vector<Scalar> inputs;  // echo of the arguments, flattened

  static MarginReport make(Scalar lhs, Scalar rhs, std::vector<Scalar> inputs) {
    return MarginReport{lhs, rhs, rhs - lhs, std::move(inputs)};
  }
};

namespace detail {

template <typename Scalar>
Scalar clarkson_constant(Scalar p) {
  return p * (p - Scalar(1)) / std::pow(Scalar(2), p + Scalar(1));
}

template <typename Scalar>
Scalar pow_abs(Scalar t, Scalar e) {
  return std::pow(std::abs(t), e);
}

}  // namespace detail

/// Two-point convexity inequality for real scalars in the regime 1 < p <= 2:
///   |(a+b)/2|^p + p(p-1)/2^{p+1} * |a-b|^2 / (|a|+|b|)^{2-p} <= (|a|^p+|b|^p)/2.
/// `constant_scale` rescales the p(p-1)/2^{p+1} factor; it exists solely as a
/// fault-injection knob for harness self-checks and defaults to the true value.
template <typename Scalar>
MarginReport<Scalar> clarkson_scalar_low(Scalar a, Scalar b, Scalar p,
                                         Scalar constant_scale = Scalar(1)) {
  if (!(p > Scalar(1) && p <= Scalar(2)))
    throw DomainError("clarkson_scalar_low: requires 1 < p <= 2");
  const Scalar sum_abs = std::abs(a) + std::abs(b);
  if (sum_abs == Scalar(0))
    throw DegenerateInputError("clarkson_scalar_low: requires |a| + |b| != 0");
  const Scalar lhs = detail::pow_abs((a + b) / Scalar(2), p) +
                     constant_scale * detail::clarkson_constant(p) * (a - b) * (a - b) /
                         std::pow(sum_abs, Scalar(2) - p);
  const Scalar rhs = (detail::pow_abs(a, p) + detail::pow_abs(b, p)) / Scalar(2);
  return MarginReport<Scalar>::make(lhs, rhs, {a, b, p});
}

/// Clarkson's inequality for real scalars and p >= 2:
///   |(a+b)/2|^p + |(a-b)/2|^p <= (|a|^p+|b|^p)/2.
template <typename Scalar>
MarginReport<Scalar> clarkson_scalar_high(Scalar a, Scalar b, Scalar p) {
  if (!(p >= Scalar(2))) throw DomainError("clarkson_scalar_high: requires p >= 2");
  const Scalar lhs = detail::pow_abs((a + b) / Scalar(2), p) + detail::pow_abs((a - b) / Scalar(2), p);
  const Scalar rhs = (detail::pow_abs(a, p) + detail::pow_abs(b, p)) / Scalar(2);
  return MarginReport<Scalar>::make(lhs, rhs, {a, b, p});
}

/// Complex version. For 1 < p <= 2 the second term carries the denominator
/// (|z1|^2+|z2|^2)^{(2-p)/2}, which differs from the scalar case; for p >= 2
/// the form matches the scalar one with moduli.
template <typename Scalar>
MarginReport<Scalar> clarkson_complex(std::complex<Scalar> z1, std::complex<Scalar> z2, Scalar p,
                                      Scalar constant_scale = Scalar(1)) {
  if (!(p > Scalar(1))) throw DomainError("clarkson_complex: requires p > 1");
  const Scalar n1 = std::abs(z1), n2 = std::abs(z2);
  const Scalar mid = std::abs((z1 + z2) / Scalar(2));
  const Scalar diff = std::abs(z1 - z2);
  const Scalar rhs = (std::pow(n1, p) + std::pow(n2, p)) / Scalar(2);
  Scalar lhs;
  if (p <= Scalar(2)) {
    const Scalar sq = n1 * n1 + n2 * n2;
    if (sq == Scalar(0)) throw DegenerateInputError("clarkson_complex: requires |z1|^2 + |z2|^2 != 0");
    lhs = std::pow(mid, p) + constant_scale * detail::clarkson_constant(p) * diff * diff /
                                 std::pow(sq, (Scalar(2) - p) / Scalar(2));
  } else {
    lhs = std::pow(mid, p) + std::pow(diff / Scalar(2), p);
  }
  return MarginReport<Scalar>::make(lhs, rhs, {z1.real(), z1.imag(), z2.real(), z2.imag(), p});
}

/// Hilbert-space version with Euclidean norms. For 1 <= p <= 2 the second term
/// has the denominator (||u||+||v||)^{2-p}; for p >= 2 it is the plain
/// Clarkson form.
template <typename DA, typename DB>
MarginReport<typename DA::Scalar> clarkson_vector(const Eigen::MatrixBase<DA>& u,
                                                  const Eigen::MatrixBase<DB>& v,
                                                  typename DA::Scalar p,
                                                  typename DA::Scalar constant_scale = 1) {
  using Scalar = typename DA::Scalar;
  if (!(p >= Scalar(1))) throw DomainError("clarkson_vector: requires p >= 1");
  if (u.size() != v.size()) throw DimensionError("clarkson_vector: dimension mismatch");
  const Scalar nu = u.norm(), nv = v.norm();
  const Scalar mid = (u + v).norm() / Scalar(2);
  const Scalar diff = (u - v).norm();
  const Scalar rhs = (std::pow(nu, p) + std::pow(nv, p)) / Scalar(2);
  Scalar lhs;
  if (p <= Scalar(2)) {
    if (nu + nv == Scalar(0))
      throw DegenerateInputError("clarkson_vector: requires ||u|| + ||v|| != 0 for p <= 2");
    lhs = std::pow(mid, p) + constant_scale * detail::clarkson_constant(p) * diff * diff /
                                 std::pow(nu + nv, Scalar(2) - p);
  } else {
    lhs = std::pow(mid, p) + std::pow(diff / Scalar(2), p);
  }
  std::vector<Scalar> echo;
  echo.reserve(static_cast<std::size_t>(u.size() + v.size()) + 1);
  for (Eigen::Index i = 0; i < u.size(); ++i) echo.push_back(u[i]);
  for (Eigen::Index i = 0; i < v.size(); ++i) echo.push_back(v[i]);
  echo.push_back(p);
  return MarginReport<Scalar>::make(lhs, rhs, std::move(echo));
}

/// g(p) = (p-1)^{2/(2-p)} on [1, 2); satisfies 0 <= g(p) < e^{-2} and is
/// strictly increasing.
template <typename Scalar>
Scalar bound_estimate_g(Scalar p) {
  if (!(p >= Scalar(1) && p < Scalar(2))) throw DomainError("bound_estimate_g: requires 1 <= p < 2");
  if (p == Scalar(1)) return Scalar(0);
  return std::pow(p - Scalar(1), Scalar(2) / (Scalar(2) - p));
}

namespace detail {

/// |v|^{p-2} v with the ray-limit convention |0|^{p-2} 0 = 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> power_flux(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v, Scalar p) {
  const Scalar n = v.norm();
  if (n == Scalar(0)) return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(v.size());
  return std::pow(n, p - Scalar(2)) * v;
}

}  // namespace detail

/// Both sides of the algebraic identity
///   (|u|^{p-2}u - |v|^{p-2}v).(u-v)
///     = (|u|^{p-2}-|v|^{p-2})(|u|^2-|v|^2)/2 + (|u|^{p-2}+|v|^{p-2})|u-v|^2/2.
/// For p < 2 the right-hand side is singular at |u| = 0 or |v| = 0, such
/// inputs are rejected.
template <typename DA, typename DB>
std::pair<typename DA::Scalar, typename DA::Scalar> monotonicity_identity(
    const Eigen::MatrixBase<DA>& u, const Eigen::MatrixBase<DB>& v, typename DA::Scalar p) {
  using Scalar = typename DA::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (u.size() != v.size()) throw DimensionError("monotonicity_identity: dimension mismatch");
  const Vec uu = u, vv = v;
  const Scalar nu = uu.norm(), nv = vv.norm();
  if (p < Scalar(2) && (nu == Scalar(0) || nv == Scalar(0)))
    throw DegenerateInputError("monotonicity_identity: |u|^{p-2} singular at 0 for p < 2");
  const Scalar wu = std::pow(nu, p - Scalar(2));  // pow(0, 0) == 1 covers p == 2 at the origin
  const Scalar wv = std::pow(nv, p - Scalar(2));
  const Vec d = uu - vv;
  const Scalar lhs = (wu * uu - wv * vv).dot(d);
  const Scalar rhs =
      (wu - wv) * (nu * nu - nv * nv) / Scalar(2) + (wu + wv) * d.squaredNorm() / Scalar(2);
  return {lhs, rhs};
}

template <typename Scalar>
std::pair<Scalar, Scalar> monotonicity_identity(Scalar u, Scalar v, Scalar p) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a(1), b(1);
  a << u;
  b << v;
  return monotonicity_identity(a, b, p);
}

/// Margin of |u-v|^p <= gamma * (|u|^{p-2}u - |v|^{p-2}v).(u-v) for p >= 2.
/// The sign of the margin is only guaranteed when gamma dominates the true
/// ratio; see calibrate_gamma.
template <typename DA, typename DB>
MarginReport<typename DA::Scalar> uniqueness_high(const Eigen::MatrixBase<DA>& u,
                                                  const Eigen::MatrixBase<DB>& v,
                                                  typename DA::Scalar p,
                                                  typename DA::Scalar gamma) {
  using Scalar = typename DA::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (!(p >= Scalar(2))) throw DomainError("uniqueness_high: requires p >= 2");
  if (!(gamma > Scalar(0))) throw DomainError("uniqueness_high: requires gamma > 0");
  if (u.size() != v.size()) throw DimensionError("uniqueness_high: dimension mismatch");
  const Vec uu = u, vv = v;
  const Vec d = uu - vv;
  const Scalar lhs = std::pow(d.norm(), p);
  const Scalar rhs =
      gamma * (detail::power_flux<Scalar>(uu, p) - detail::power_flux<Scalar>(vv, p)).dot(d);
  std::vector<Scalar> echo;
  for (Eigen::Index i = 0; i < uu.size(); ++i) echo.push_back(uu[i]);
  for (Eigen::Index i = 0; i < vv.size(); ++i) echo.push_back(vv[i]);
  echo.push_back(p);
  echo.push_back(gamma);
  return MarginReport<Scalar>::make(lhs, rhs, std::move(echo));
}

template <typename Scalar>
MarginReport<Scalar> uniqueness_high(Scalar u, Scalar v, Scalar p, Scalar gamma) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a(1), b(1);
  a << u;
  b << v;
  return uniqueness_high(a, b, p, gamma);
}

/// Margin of the strong-monotonicity bound for 1 < p <= 2:
///   (p-1)|u-v|^2 (1+|u|^2+|v|^2)^{(p-2)/2} <= (|u|^{p-2}u - |v|^{p-2}v).(u-v),
/// with the convention |0|^{p-2} 0 = 0.
template <typename DA, typename DB>
MarginReport<typename DA::Scalar> uniqueness_low(const Eigen::MatrixBase<DA>& u,
                                                 const Eigen::MatrixBase<DB>& v,
                                                 typename DA::Scalar p) {
  using Scalar = typename DA::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (!(p > Scalar(1) && p <= Scalar(2))) throw DomainError("uniqueness_low: requires 1 < p <= 2");
  if (u.size() != v.size()) throw DimensionError("uniqueness_low: dimension mismatch");
  const Vec uu = u, vv = v;
  const Vec d = uu - vv;
  const Scalar lhs =
      (p - Scalar(1)) * d.squaredNorm() *
      std::pow(Scalar(1) + uu.squaredNorm() + vv.squaredNorm(), (p - Scalar(2)) / Scalar(2));
  const Scalar rhs = (detail::power_flux<Scalar>(uu, p) - detail::power_flux<Scalar>(vv, p)).dot(d);
  std::vector<Scalar> echo;
  for (Eigen::Index i = 0; i < uu.size(); ++i) echo.push_back(uu[i]);
  for (Eigen::Index i = 0; i < vv.size(); ++i) echo.push_back(vv[i]);
  echo.push_back(p);
  return MarginReport<Scalar>::make(lhs, rhs, std::move(echo));
}

template <typename Scalar>
MarginReport<Scalar> uniqueness_low(Scalar u, Scalar v, Scalar p) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a(1), b(1);
  a << u;
  b << v;
  return uniqueness_low(a, b, p);
}

/// Empirical supremum of |u-v|^p / ((|u|^{p-2}u - |v|^{p-2}v).(u-v)) over
/// `samples` random pairs plus a deterministic collinear sweep v = t*u with
/// t in [-1, 1]. This is the smallest gamma that makes the p >= 2 uniqueness
/// bound hold on the sampled pairs; the collinear sweep is included because
/// the supremum of this radially symmetric ratio sits on collinear pairs.
template <typename Scalar>
Scalar calibrate_gamma(Scalar p, long samples, unsigned long seed = 2024) {
  if (!(p >= Scalar(2))) throw DomainError("calibrate_gamma: requires p >= 2");
  if (samples < 10000) throw DomainError("calibrate_gamma: requires at least 10^4 samples");
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  Scalar sup = Scalar(0);

  auto consider = [&](const Vec& u, const Vec& v) {
    const Vec d = u - v;
    const Scalar denom =
        (detail::power_flux<Scalar>(u, p) - detail::power_flux<Scalar>(v, p)).dot(d);
    if (denom <= Scalar(0)) return;
    sup = std::max(sup, std::pow(d.norm(), p) / denom);
  };

  for (long s = 0; s < samples; ++s) {
    const int dim = 1 + int(s % 4);
    Vec u(dim), v(dim);
    for (int i = 0; i < dim; ++i) {
      u[i] = Scalar(box(rng));
      v[i] = Scalar(box(rng));
    }
    consider(u, v);
  }
  // Collinear sweep, t = -1 (v = -u) included exactly.
  const long sweep_points = std::max<long>(samples, 20001);
  Vec e(1);
  e << Scalar(1);
  for (long s = 0; s < sweep_points; ++s) {
    const Scalar t = Scalar(-1) + Scalar(2) * Scalar(s) / Scalar(sweep_points - 1);
    Vec v(1);
    v << t;
    consider(e, v);
  }
  return sup;
}

}  // namespace varplap
