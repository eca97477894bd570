#pragma once

#include <algorithm>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "varplap/inequalities.hpp"

namespace varplap {

/// Worst case found by a randomized margin scan. Margins are tracked relative
/// to max(|rhs|, 1), so the pass threshold -1e-12 absorbs rounding at the
/// equality configurations (a = b, a = -b, p = 2) without masking a genuinely
/// violated inequality.
template <typename Scalar>
struct ScanResult {
  std::string name;
  long samples{0};
  Scalar worst_scaled_margin{std::numeric_limits<Scalar>::infinity()};
  MarginReport<Scalar> worst_case;
  bool pass(Scalar tol = Scalar(1e-12)) const { return worst_scaled_margin >= -tol; }
};

struct ScanOptions {
  long samples{100000};
  unsigned long seed{12345};
  double p_low_min{1.0 + 1e-6};  // exponent range for the 1 < p <= 2 scans
  double p_high_max{10.0};       // upper exponent for the p >= 2 scans
  double constant_scale{1.0};    // fault-injection knob for harness self-checks
};

namespace detail {

template <typename Scalar>
void track(ScanResult<Scalar>& res, const MarginReport<Scalar>& rep) {
  const Scalar scaled = rep.margin / std::max(std::abs(rep.rhs), Scalar(1));
  if (scaled < res.worst_scaled_margin) {
    res.worst_scaled_margin = scaled;
    res.worst_case = rep;
  }
  ++res.samples;
}

}  // namespace detail

template <typename Scalar = double>
ScanResult<Scalar> scan_clarkson_scalar_low(const ScanOptions& opt) {
  ScanResult<Scalar> res{"clarkson_scalar_low"};
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> box(-10.0, 10.0), unit(0.0, 1.0);
  std::uniform_real_distribution<double> pd(opt.p_low_min, 2.0);
  const Scalar cs = Scalar(opt.constant_scale);
  for (long s = 0; s < opt.samples; ++s) {
    Scalar a = Scalar(box(rng)), b = Scalar(box(rng));
    const Scalar p = Scalar(pd(rng));
    switch (s % 5) {
      case 1: b = a; break;                          // equality case
      case 2: b = -a; break;                         // antipodal case
      case 3: b = a + Scalar(1e-9 * box(rng)); break;  // near-equality
      case 4: a *= Scalar(1e-8); b *= Scalar(1e-8); break;  // tiny magnitudes
      default: break;
    }
    if (std::abs(a) + std::abs(b) == Scalar(0)) a = Scalar(1e-12);
    detail::track(res, clarkson_scalar_low(a, b, p, cs));
  }
  detail::track(res, clarkson_scalar_low(Scalar(1), Scalar(1), Scalar(2), cs));
  detail::track(res, clarkson_scalar_low(Scalar(1), Scalar(-1), Scalar(1.5), cs));
  return res;
}

template <typename Scalar = double>
ScanResult<Scalar> scan_clarkson_scalar_high(const ScanOptions& opt) {
  ScanResult<Scalar> res{"clarkson_scalar_high"};
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::uniform_real_distribution<double> pd(2.0, opt.p_high_max);
  for (long s = 0; s < opt.samples; ++s) {
    Scalar a = Scalar(box(rng)), b = Scalar(box(rng));
    const Scalar p = Scalar(pd(rng));
    if (s % 4 == 1) b = a;
    if (s % 4 == 2) b = -a;
    detail::track(res, clarkson_scalar_high(a, b, p));
  }
  return res;
}

template <typename Scalar = double>
ScanResult<Scalar> scan_clarkson_complex(const ScanOptions& opt, bool low_regime) {
  ScanResult<Scalar> res{low_regime ? "clarkson_complex_low" : "clarkson_complex_high"};
  std::mt19937_64 rng(opt.seed + 2);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::uniform_real_distribution<double> plow(opt.p_low_min, 2.0), phigh(2.0, 6.0);
  const Scalar cs = Scalar(opt.constant_scale);
  for (long s = 0; s < opt.samples; ++s) {
    std::complex<Scalar> z1(Scalar(box(rng)), Scalar(box(rng)));
    std::complex<Scalar> z2(Scalar(box(rng)), Scalar(box(rng)));
    if (s % 4 == 1) z2 = z1;
    if (s % 4 == 2) z2 = -z1;
    const Scalar p = Scalar(low_regime ? plow(rng) : phigh(rng));
    if (std::norm(z1) + std::norm(z2) == Scalar(0)) z1 = {Scalar(1e-12), Scalar(0)};
    detail::track(res, clarkson_complex(z1, z2, p, cs));
  }
  return res;
}

template <typename Scalar = double>
ScanResult<Scalar> scan_clarkson_vector(const ScanOptions& opt, int max_dim = 8) {
  ScanResult<Scalar> res{"clarkson_vector"};
  std::mt19937_64 rng(opt.seed + 3);
  std::uniform_real_distribution<double> box(-10.0, 10.0), coin(0.0, 1.0);
  std::uniform_real_distribution<double> plow(opt.p_low_min, 2.0), phigh(2.0, 6.0);
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Scalar cs = Scalar(opt.constant_scale);
  for (long s = 0; s < opt.samples; ++s) {
    const int d = 1 + int(s % max_dim);
    Vec u(d), v(d);
    for (int i = 0; i < d; ++i) {
      u[i] = Scalar(box(rng));
      v[i] = Scalar(box(rng));
    }
    if (s % 5 == 1) v = u;
    if (s % 5 == 2) v = -u;
    const Scalar p = Scalar(coin(rng) < 0.5 ? plow(rng) : phigh(rng));
    if (u.norm() + v.norm() == Scalar(0)) u[0] = Scalar(1e-12);
    detail::track(res, clarkson_vector(u, v, p, cs));
  }
  return res;
}

template <typename Scalar = double>
ScanResult<Scalar> scan_uniqueness_low(const ScanOptions& opt) {
  ScanResult<Scalar> res{"uniqueness_low"};
  std::mt19937_64 rng(opt.seed + 4);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::uniform_real_distribution<double> pd(opt.p_low_min, 2.0);
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  for (long s = 0; s < opt.samples; ++s) {
    const int d = 1 + int(s % 3);
    Vec u(d), v(d);
    for (int i = 0; i < d; ++i) {
      u[i] = Scalar(box(rng));
      v[i] = Scalar(box(rng));
    }
    if (s % 5 == 1) v = u;
    if (s % 5 == 2) v.setZero();
    if (s % 5 == 3) v = -u;
    detail::track(res, uniqueness_low(u, v, Scalar(pd(rng))));
  }
  return res;
}

/// gamma = 2 on 2 <= p < 3, the first branch of the uniqueness bound.
template <typename Scalar = double>
ScanResult<Scalar> scan_uniqueness_high(const ScanOptions& opt) {
  ScanResult<Scalar> res{"uniqueness_high_gamma2"};
  std::mt19937_64 rng(opt.seed + 5);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  std::uniform_real_distribution<double> pd(2.0, 3.0 - 1e-9);
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  for (long s = 0; s < opt.samples; ++s) {
    const int d = 1 + int(s % 3);
    Vec u(d), v(d);
    for (int i = 0; i < d; ++i) {
      u[i] = Scalar(box(rng));
      v[i] = Scalar(box(rng));
    }
    if (s % 5 == 1) v = u;
    if (s % 5 == 3) v = -u;
    detail::track(res, uniqueness_high(u, v, Scalar(pd(rng)), Scalar(2)));
  }
  return res;
}

/// The full battery the CLI and the acceptance suite run. The complex scan is
/// split by regime: the low branch as printed admits genuinely negative
/// margins (minimal counterexample z1 = 1, z2 = 3, p = 1.5), which the scan
/// surfaces rather than masks.
template <typename Scalar = double>
std::vector<ScanResult<Scalar>> run_inequality_scans(const ScanOptions& opt) {
  return {scan_clarkson_scalar_low<Scalar>(opt),
          scan_clarkson_scalar_high<Scalar>(opt),
          scan_clarkson_complex<Scalar>(opt, true),
          scan_clarkson_complex<Scalar>(opt, false),
          scan_clarkson_vector<Scalar>(opt),
          scan_uniqueness_low<Scalar>(opt),
          scan_uniqueness_high<Scalar>(opt)};
}

}  // namespace varplap
