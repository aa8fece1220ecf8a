#pragma once

#include <array>
#include <cmath>

#include "entswitch/model.hpp"

namespace entswitch::analytic {

/// The two capacity maxima plus the sampled point farthest above the
/// time-division line (reached at r = (0,1,1)).
struct Extremes {
  double c2_star = 0.0;  // max bipartite rate, at r = (1,0,*)
  double c3_star = 0.0;  // max tripartite rate, at r = (0,1,0)
  double c3_hat = 0.0;   // farthest-point coordinates, at r = (0,1,1)
  double c2_hat = 0.0;
};

struct Line {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
};

struct Anchor {
  double c3 = 0.0;
  double c2 = 0.0;
};

/// The two half-planes c2 <= line(c3) that bound the capacity region, plus
/// the three corner points they generate: (0, c2*), the lines' intersection
/// (c3_hat, c2_hat), and (c3*, 0).
struct BoundingLines {
  Line line1;  // tight for r = (0, r2, 1)
  Line line2;  // tight for r = (0, 1, r3)
  std::array<Anchor, 3> anchors{};
};

struct AreaBreakdown {
  double a_triangle = 0.0;  // region area above the time-division segment
  double a_tdm = 0.0;       // time-division reference term ((c2*)^2+(c3*)^2)/4
  double a_total = 0.0;
  double ratio = 0.0;       // a_triangle / a_total
};

namespace detail {

inline void require_b1(const SwitchConfig& cfg) {
  if (cfg.buffer_size != 1)
    throw ValidationError("closed forms cover buffer size 1 only; use the chain solver for B=2");
}

inline void require_no_decoherence(const SwitchConfig& cfg) {
  if (cfg.alpha != 0.0)
    throw ValidationError("this closed form requires alpha = 0; use the decoherence variant");
}

/// Common denominator of the buffer-one closed forms (mu-free).
inline double denom_b1(int k, const PolicyParams& pol) {
  const double kk = k;
  const double rb1 = 1.0 - pol.r1;
  return (kk - 2 + 2 * pol.r3) * ((kk - 1) * pol.r1 + kk) +
         (kk - 1) * rb1 * ((kk - 2) * pol.r2 + kk);
}

}  // namespace detail

/// Stationary distribution of the buffer-one chain without decoherence,
/// ordered ((0,0), (1,0), (1,1)).
inline std::array<double, 3> stationary_b1(const SwitchConfig& cfg,
                                           const PolicyParams& pol) {
  validate_config(cfg, pol);
  detail::require_b1(cfg);
  detail::require_no_decoherence(cfg);
  const double k = cfg.k;
  const double d = detail::denom_b1(cfg.k, pol);
  const double p10 = k * (k - 2 + 2 * pol.r3) / d;
  const double p11 = k * (k - 1) * (1.0 - pol.r1) / d;
  return {1.0 - p10 - p11, p10, p11};
}

/// Closed-form capacities for buffer size 1, alpha = 0.  The mu factor is
/// applied last, so scaling mu scales both coordinates exactly.
inline CapacityPoint capacities_b1(const SwitchConfig& cfg, const PolicyParams& pol) {
  validate_config(cfg, pol);
  detail::require_b1(cfg);
  detail::require_no_decoherence(cfg);
  const double k = cfg.k;
  const double rb1 = 1.0 - pol.r1;
  const double d = detail::denom_b1(cfg.k, pol);
  const double c2 = k * (k - 1) * (k - 2 + 2 * pol.r3 - (k - 2) * pol.r2 * rb1) / d;
  const double c3 = k * (k - 1) * (k - 2) * pol.r2 * rb1 / d;
  return {c3 * cfg.mu, c2 * cfg.mu, pol};
}

/// Closed-form capacities for buffer size 1 with decoherence.  Reduces
/// bit-exactly to capacities_b1 when alpha = 0.
inline CapacityPoint capacities_b1_decoherence(const SwitchConfig& cfg,
                                               const PolicyParams& pol) {
  validate_config(cfg, pol);
  detail::require_b1(cfg);
  if (cfg.alpha == 0.0) return capacities_b1(cfg, pol);
  const double k = cfg.k;
  const double mu = cfg.mu;
  const double a = cfg.alpha;
  const double rb1 = 1.0 - pol.r1;
  const double d = (k - 1) * mu * rb1 * ((k - 2) * mu * pol.r2 + k * mu) +
                   (k * mu + (k - 1) * mu * pol.r1 + a) *
                       ((k - 2 + 2 * pol.r3) * mu + 2 * a);
  const double c2 = k * (k - 1) * mu * mu *
                    (2 * (a * pol.r1 + mu * pol.r3) +
                     (k - 2) * mu * (1 - pol.r2 * rb1)) /
                    d;
  const double c3 = k * mu * mu * mu * (k - 1) * (k - 2) * rb1 * pol.r2 / d;
  return {c3, c2, pol};
}

/// Capacity maxima and farthest point for buffer size 1, alpha = 0.
inline Extremes extremes_b1(const SwitchConfig& cfg) {
  validate_config(cfg, {0, 1, 1});
  detail::require_b1(cfg);
  detail::require_no_decoherence(cfg);
  const double k = cfg.k;
  Extremes e;
  e.c2_star = (k * (k - 1) / (2 * k - 1)) * cfg.mu;
  e.c3_star = (k * (k - 1) * (k - 2) / (k * (2 * k - 3) + (k - 1) * (k - 2))) * cfg.mu;
  const CapacityPoint hat = capacities_b1(cfg, {0, 1, 1});
  e.c3_hat = hat.c3;
  e.c2_hat = hat.c2;
  return e;
}

/// Same maxima under decoherence; the optimizing policies are unchanged
/// (r = (1,0,0) for c2, (0,1,0) for c3, (0,1,1) for the farthest point).
inline Extremes extremes_b1_decoherence(const SwitchConfig& cfg) {
  validate_config(cfg, {0, 1, 1});
  detail::require_b1(cfg);
  if (cfg.alpha == 0.0) return extremes_b1(cfg);
  Extremes e;
  e.c2_star = capacities_b1_decoherence(cfg, {1, 0, 0}).c2;
  e.c3_star = capacities_b1_decoherence(cfg, {0, 1, 0}).c3;
  const CapacityPoint hat = capacities_b1_decoherence(cfg, {0, 1, 1});
  e.c3_hat = hat.c3;
  e.c2_hat = hat.c2;
  return e;
}

/// Outer bounds of the buffer-one capacity region, valid for alpha >= 0.
inline BoundingLines bounding_lines_b1(const SwitchConfig& cfg) {
  validate_config(cfg, {0, 1, 1});
  detail::require_b1(cfg);
  const double k = cfg.k;
  const double mu = cfg.mu;
  const double a = cfg.alpha;
  BoundingLines bl;
  if (a == 0.0) {
    bl.line1 = {-(3 * k - 2) / (2 * k - 1), (k * (k - 1) / (2 * k - 1)) * mu};
    bl.line2 = {-(k * (k - 2) + 2 * (k - 1) * (k - 1)) / (k * (k - 2)),
                (k - 1) * mu};
  } else {
    bl.line1 = {-(mu * (3 * k - 2) * (a + (k - 2) * mu) + 2 * a * a) /
                    (mu * (k - 2) * ((2 * k - 1) * mu + a)),
                k * (k - 1) * mu * mu / ((2 * k - 1) * mu + a)};
    bl.line2 = {-(2 * (k - 1) * (k - 1) * mu * mu +
                  (k * mu + a) * ((k - 2) * mu + 2 * a)) /
                    (mu * (k - 2) * (k * mu + a)),
                k * (k - 1) * mu * mu / (k * mu + a)};
  }
  const Extremes e = cfg.alpha == 0.0 ? extremes_b1(cfg) : extremes_b1_decoherence(cfg);
  bl.anchors = {Anchor{0.0, e.c2_star}, Anchor{e.c3_hat, e.c2_hat},
                Anchor{e.c3_star, 0.0}};
  return bl;
}

/// Signed elevation of (x, y) above the time-division segment from
/// (0, c2_star) to (c3_star, 0); positive means outside it.
inline double tdm_elevation(const Extremes& e, double x, double y) {
  return y - e.c2_star * (1.0 - x / e.c3_star);
}

/// Triangle-vs-reference area comparison for the given extremes.
inline AreaBreakdown area_breakdown_from_extremes(const Extremes& e) {
  AreaBreakdown ab;
  ab.a_triangle = std::fabs(tdm_elevation(e, e.c3_hat, e.c2_hat)) * e.c3_star / 2.0;
  ab.a_tdm = (e.c2_star * e.c2_star + e.c3_star * e.c3_star) / 4.0;
  ab.a_total = ab.a_triangle + ab.a_tdm;
  ab.ratio = ab.a_triangle / ab.a_total;
  return ab;
}

/// Area of the region above the time-division segment relative to the total,
/// buffer size 1, alpha = 0.
inline AreaBreakdown area_ratio_b1(const SwitchConfig& cfg) {
  return area_breakdown_from_extremes(extremes_b1(cfg));
}

/// Closed-form value of a_tdm / a_triangle as a rational function of k;
/// the area ratio equals 1 / (1 + this).  Grows linearly in k, so the
/// ratio vanishes as k grows.
inline double area_quotient_polynomial(int k) {
  if (k < 3) throw ValidationError("k >= 3 required (got " + std::to_string(k) + ")");
  const double x = k;
  const double num =
      ((((((39 * x - 220) * x + 493) * x - 568) * x + 362) * x - 120) * x + 16);
  const double den =
      4 * (((((6 * x - 33) * x + 67) * x - 62) * x + 26) * x - 4);
  return num / den;
}

}  // namespace entswitch::analytic
