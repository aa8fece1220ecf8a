#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "entswitch/analytic.hpp"
#include "entswitch/ctmc.hpp"
#include "entswitch/model.hpp"

namespace entswitch::region {

enum class Engine { analytic, ctmc };

inline const char* to_string(Engine e) {
  return e == Engine::analytic ? "analytic" : "ctmc";
}

inline Engine engine_from_string(const std::string& s) {
  if (s == "analytic") return Engine::analytic;
  if (s == "ctmc") return Engine::ctmc;
  throw ValidationError("unknown engine '" + s + "' (expected analytic or ctmc)");
}

/// Endpoints of the time-division baseline: the segment from (0, c2_star)
/// to (c3_star, 0).
struct TdmSegment {
  double c2_star = 0.0;
  double c3_star = 0.0;
};

struct RegionResult {
  SwitchConfig config{};
  double grid_step = 0.0;
  Engine engine = Engine::analytic;
  std::vector<CapacityPoint> points;           // full grid, r1-major order
  std::vector<bool> on_frontier;               // parallel to points
  std::vector<CapacityPoint> upper_boundary;   // frontier, ascending c3
  TdmSegment tdm{};
  CapacityPoint farthest{};
  double farthest_elevation = 0.0;  // vertical gap above the TDM segment
  double farthest_distance = 0.0;   // Euclidean distance above the segment
  analytic::AreaBreakdown areas{};
  double area_under_boundary = 0.0;
};

/// Grid {0, step, 2*step, ...} with 1 always included.
inline std::vector<double> probability_grid(double step) {
  std::vector<double> g;
  for (int i = 0;; ++i) {
    const double v = i * step;
    if (v >= 1.0 - 1e-12) break;
    g.push_back(v);
  }
  g.push_back(1.0);
  return g;
}

namespace detail {

inline CapacityPoint evaluate(const SwitchConfig& cfg, const PolicyParams& pol,
                              Engine engine) {
  if (engine == Engine::analytic) return analytic::capacities_b1_decoherence(cfg, pol);
  return ctmc::solve_capacities(cfg, pol);
}

/// Marks Pareto-optimal points: sort by descending c3 (ties toward larger
/// c2), then keep every point that improves the best c2 seen so far.
inline std::vector<bool> pareto_flags(const std::vector<CapacityPoint>& pts) {
  std::vector<std::size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].c3 != pts[b].c3) return pts[a].c3 > pts[b].c3;
    if (pts[a].c2 != pts[b].c2) return pts[a].c2 > pts[b].c2;
    return a < b;
  });
  std::vector<bool> flags(pts.size(), false);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) {
    if (pts[i].c2 > best) {
      flags[i] = true;
      best = pts[i].c2;
    }
  }
  return flags;
}

/// Piecewise-linear upper boundary value with flat extension outside the
/// sampled c3 range.
inline double boundary_value(const std::vector<CapacityPoint>& boundary, double x) {
  if (boundary.empty()) return 0.0;
  if (x <= boundary.front().c3) return boundary.front().c2;
  if (x >= boundary.back().c3) return boundary.back().c2;
  for (std::size_t i = 1; i < boundary.size(); ++i) {
    if (x <= boundary[i].c3) {
      const double x0 = boundary[i - 1].c3, y0 = boundary[i - 1].c2;
      const double x1 = boundary[i].c3, y1 = boundary[i].c2;
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  }
  return boundary.back().c2;
}

/// Integral of max(0, U(x) - T(x)) where U is the boundary polyline and T
/// the time-division segment; both are piecewise linear, so the integrand
/// is integrated trapezoid-by-trapezoid with sign-crossing splits.
inline double area_above_tdm_polyline(const std::vector<CapacityPoint>& boundary,
                                      const TdmSegment& tdm) {
  if (boundary.empty()) return 0.0;
  const double xmax = std::max(boundary.back().c3, tdm.c3_star);
  std::vector<double> xs{0.0, xmax};
  for (const auto& p : boundary) xs.push_back(p.c3);
  if (tdm.c3_star > 0.0 && tdm.c3_star < xmax) xs.push_back(tdm.c3_star);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  auto tdm_at = [&](double x) {
    if (tdm.c3_star <= 0.0) return 0.0;
    return std::max(0.0, tdm.c2_star * (1.0 - x / tdm.c3_star));
  };
  auto diff = [&](double x) { return boundary_value(boundary, x) - tdm_at(x); };

  double area = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double x0 = xs[i - 1], x1 = xs[i];
    if (!(x1 > x0)) continue;
    const double d0 = diff(x0), d1 = diff(x1);
    if (d0 >= 0.0 && d1 >= 0.0) {
      area += 0.5 * (d0 + d1) * (x1 - x0);
    } else if (d0 > 0.0 && d1 < 0.0) {
      const double xc = x0 + (x1 - x0) * d0 / (d0 - d1);
      area += 0.5 * d0 * (xc - x0);
    } else if (d0 < 0.0 && d1 > 0.0) {
      const double xc = x0 + (x1 - x0) * (-d0) / (d1 - d0);
      area += 0.5 * d1 * (x1 - xc);
    }
  }
  return area;
}

inline double area_under_polyline(const std::vector<CapacityPoint>& boundary) {
  double area = 0.0;
  if (boundary.empty()) return area;
  // flat closure from x = 0 to the first breakpoint
  area += boundary.front().c2 * boundary.front().c3;
  for (std::size_t i = 1; i < boundary.size(); ++i)
    area += 0.5 * (boundary[i - 1].c2 + boundary[i].c2) *
            (boundary[i].c3 - boundary[i - 1].c3);
  return area;
}

}  // namespace detail

/// Single-objective maxima used for the time-division baseline.  Buffer
/// size 1 uses the closed forms; buffer size 2 takes the best corner policy
/// of the chain solver.
inline TdmSegment tdm_extremes(const SwitchConfig& cfg) {
  validate_config(cfg, {0, 1, 1});
  if (cfg.buffer_size == 1) {
    const analytic::Extremes e = cfg.alpha == 0.0
                                     ? analytic::extremes_b1(cfg)
                                     : analytic::extremes_b1_decoherence(cfg);
    return {e.c2_star, e.c3_star};
  }
  TdmSegment t;
  for (double r2 : {0.0, 1.0})
    for (double r3 : {0.0, 1.0}) {
      const CapacityPoint p = ctmc::solve_capacities(cfg, {0.0, r2, r3});
      t.c2_star = std::max(t.c2_star, p.c2);
      t.c3_star = std::max(t.c3_star, p.c3);
    }
  return t;
}

/// Rate pair reached by time-sharing the two single-objective optima:
/// `share` of the time spent maximizing c3, the rest maximizing c2.
inline CapacityPoint tdm_point(const SwitchConfig& cfg, double share) {
  if (!(share >= 0.0) || share > 1.0)
    throw ValidationError("time share must lie in [0,1]");
  const TdmSegment t = tdm_extremes(cfg);
  return {share * t.c3_star, (1.0 - share) * t.c2_star, {}};
}

/// Sweeps the policy grid and assembles the sampled capacity region.
inline RegionResult sweep(const SwitchConfig& cfg, double grid_step, Engine engine) {
  validate_config(cfg, {0, 1, 1});
  if (!(grid_step > 0.0) || grid_step > 0.5)
    throw ValidationError("grid step must lie in (0, 0.5]");
  if (engine == Engine::analytic && cfg.buffer_size != 1)
    throw ValidationError("analytic engine covers buffer size 1 only");

  RegionResult res;
  res.config = cfg;
  res.grid_step = grid_step;
  res.engine = engine;

  const std::vector<double> grid = probability_grid(grid_step);
  const std::vector<double> r1_grid =
      cfg.buffer_size == 2 ? std::vector<double>{0.0} : grid;

  res.points.reserve(r1_grid.size() * grid.size() * grid.size());
  for (double r1 : r1_grid)
    for (double r2 : grid)
      for (double r3 : grid)
        res.points.push_back(detail::evaluate(cfg, {r1, r2, r3}, engine));

  res.on_frontier = detail::pareto_flags(res.points);
  for (std::size_t i = 0; i < res.points.size(); ++i)
    if (res.on_frontier[i]) res.upper_boundary.push_back(res.points[i]);
  std::sort(res.upper_boundary.begin(), res.upper_boundary.end(),
            [](const CapacityPoint& a, const CapacityPoint& b) { return a.c3 < b.c3; });

  if (cfg.buffer_size == 1) {
    res.tdm = tdm_extremes(cfg);
  } else {
    // grid maxima (the corner policies are always on the grid)
    for (const auto& p : res.points) {
      res.tdm.c2_star = std::max(res.tdm.c2_star, p.c2);
      res.tdm.c3_star = std::max(res.tdm.c3_star, p.c3);
    }
  }

  double best_elev = -std::numeric_limits<double>::infinity();
  for (const auto& p : res.points) {
    const double elev =
        p.c2 - res.tdm.c2_star * (1.0 - p.c3 / res.tdm.c3_star);
    if (elev > best_elev) {
      best_elev = elev;
      res.farthest = p;
    }
  }
  res.farthest_elevation = best_elev;
  const double slope = res.tdm.c2_star / res.tdm.c3_star;
  res.farthest_distance = best_elev / std::sqrt(1.0 + slope * slope);

  if (cfg.buffer_size == 1) {
    // exact triangle between the two bounding lines and the TDM segment
    const analytic::Extremes e = cfg.alpha == 0.0
                                     ? analytic::extremes_b1(cfg)
                                     : analytic::extremes_b1_decoherence(cfg);
    res.areas = analytic::area_breakdown_from_extremes(e);
  } else {
    analytic::AreaBreakdown ab;
    ab.a_triangle = detail::area_above_tdm_polyline(res.upper_boundary, res.tdm);
    ab.a_tdm = (res.tdm.c2_star * res.tdm.c2_star +
                res.tdm.c3_star * res.tdm.c3_star) / 4.0;
    ab.a_total = ab.a_triangle + ab.a_tdm;
    ab.ratio = ab.a_triangle / ab.a_total;
    res.areas = ab;
  }
  res.area_under_boundary = detail::area_under_polyline(res.upper_boundary);
  return res;
}

struct BufferComparison {
  RegionResult first;
  RegionResult second;
  double delta_c2_star = 0.0;  // second minus first
  double delta_c3_star = 0.0;
};

/// Sweeps two configurations that differ only in buffer size and reports
/// the gain in the single-objective maxima.
inline BufferComparison compare_buffers(const SwitchConfig& a, const SwitchConfig& b,
                                        double grid_step) {
  if (a.k != b.k || a.mu != b.mu || a.alpha != b.alpha)
    throw ValidationError("buffer comparison requires identical k, mu, alpha");
  BufferComparison cmp;
  cmp.first = sweep(a, grid_step,
                    a.buffer_size == 1 ? Engine::analytic : Engine::ctmc);
  cmp.second = sweep(b, grid_step,
                     b.buffer_size == 1 ? Engine::analytic : Engine::ctmc);
  cmp.delta_c2_star = cmp.second.tdm.c2_star - cmp.first.tdm.c2_star;
  cmp.delta_c3_star = cmp.second.tdm.c3_star - cmp.first.tdm.c3_star;
  return cmp;
}

// --- emitters --------------------------------------------------------------

namespace detail {

inline void append_csv_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace detail

/// All sampled points: `r1,r2,r3,c3,c2,on_frontier`.
inline void write_points_csv(std::ostream& os, const RegionResult& r) {
  std::string out = "r1,r2,r3,c3,c2,on_frontier\n";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const CapacityPoint& p = r.points[i];
    detail::append_csv_number(out, p.policy.r1);
    out += ',';
    detail::append_csv_number(out, p.policy.r2);
    out += ',';
    detail::append_csv_number(out, p.policy.r3);
    out += ',';
    detail::append_csv_number(out, p.c3);
    out += ',';
    detail::append_csv_number(out, p.c2);
    out += ',';
    out += r.on_frontier[i] ? '1' : '0';
    out += '\n';
  }
  os << out;
}

/// Upper boundary polyline, ascending c3: `c3,c2`.
inline void write_boundary_csv(std::ostream& os, const RegionResult& r) {
  std::string out = "c3,c2\n";
  for (const CapacityPoint& p : r.upper_boundary) {
    detail::append_csv_number(out, p.c3);
    out += ',';
    detail::append_csv_number(out, p.c2);
    out += '\n';
  }
  os << out;
}

/// Time-division segment endpoints: `c3,c2`.
inline void write_tdm_csv(std::ostream& os, const RegionResult& r) {
  std::string out = "c3,c2\n";
  detail::append_csv_number(out, 0.0);
  out += ',';
  detail::append_csv_number(out, r.tdm.c2_star);
  out += '\n';
  detail::append_csv_number(out, r.tdm.c3_star);
  out += ',';
  detail::append_csv_number(out, 0.0);
  out += '\n';
  os << out;
}

inline nlohmann::json summary_json(const RegionResult& r) {
  nlohmann::json j;
  j["k"] = r.config.k;
  j["mu"] = r.config.mu;
  j["alpha"] = r.config.alpha;
  j["buffer_size"] = r.config.buffer_size;
  j["grid_step"] = r.grid_step;
  j["engine"] = to_string(r.engine);
  j["n_points"] = r.points.size();
  j["n_frontier"] = r.upper_boundary.size();
  j["tdm"] = {{"c2_star", r.tdm.c2_star}, {"c3_star", r.tdm.c3_star}};
  j["farthest"] = {{"r1", r.farthest.policy.r1}, {"r2", r.farthest.policy.r2},
                   {"r3", r.farthest.policy.r3}, {"c3", r.farthest.c3},
                   {"c2", r.farthest.c2},        {"elevation", r.farthest_elevation},
                   {"distance", r.farthest_distance}};
  j["areas"] = {{"above_tdm", r.areas.a_triangle},
                {"tdm_term", r.areas.a_tdm},
                {"total", r.areas.a_total},
                {"ratio", r.areas.ratio}};
  j["area_under_boundary"] = r.area_under_boundary;
  if (r.config.buffer_size == 2)
    j["note"] = "frontier sampled at the grid resolution; refine grid_step to sharpen it";
  return j;
}

}  // namespace entswitch::region
