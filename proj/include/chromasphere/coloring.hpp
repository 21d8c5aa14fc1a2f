#pragma once

// Region-based colorings of S^2(r): the tetrahedral Voronoi 4-coloring, the
// cap-plus-lunes 4-coloring for radii near 1/2, a unit-pair properness
// sampler, chord distance to color classes, the Borsuk-Ulam antipodal gap
// search, and the averaging lower bound on 4-chromatic subgraph sizes.

#include "chromasphere/parallel.hpp"
#include "chromasphere/rng.hpp"
#include "chromasphere/sphere.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace chromasphere {

struct BadPartition : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyColorClass : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Cap region: points within the chordal radius of the center.
struct CapRegion {
  Vec3 center;
  double chordal_radius = 0.0;
  bool closed = false;
};

/// Lune region: half-open longitude interval [lon_lo, lon_hi) in [0, 2pi],
/// all colatitudes.
struct LuneRegion {
  double lon_lo = 0.0;
  double lon_hi = 0.0;
};

/// Chordal Voronoi cell of one site against a shared site list. The
/// bisectors are planes through the origin, so cells are spherical convex
/// polygons bounded by great-circle arcs.
struct VoronoiRegion {
  std::shared_ptr<const std::vector<Vec3>> sites;
  int site = 0;
};

using Region = std::variant<CapRegion, LuneRegion, VoronoiRegion>;

namespace detail {

inline double longitude(const Vec3& v) {
  double l = std::atan2(v.y(), v.x());
  return l < 0.0 ? l + 2.0 * std::numbers::pi : l;
}

inline double colatitude(const Vec3& v) {
  return std::acos(std::clamp(v.z() / v.norm(), -1.0, 1.0));
}

inline double chord_from_cos_angle(double cos_psi, double r) {
  return r * std::sqrt(std::max(2.0 * (1.0 - cos_psi), 0.0));
}

inline bool region_contains(const Region& region, const Vec3& x) {
  return std::visit(
      [&](const auto& reg) -> bool {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, CapRegion>) {
          double dist = (x - reg.center).norm();
          return reg.closed ? dist <= reg.chordal_radius
                            : dist < reg.chordal_radius;
        } else if constexpr (std::is_same_v<T, LuneRegion>) {
          double l = longitude(x);
          return l >= reg.lon_lo && l < reg.lon_hi;
        } else {
          const auto& sites = *reg.sites;
          const Vec3& own = sites[reg.site];
          for (int j = 0; j < static_cast<int>(sites.size()); ++j) {
            if (j == reg.site) continue;
            if (x.dot(own - sites[j]) < 0.0) return false;
          }
          return true;
        }
      },
      region);
}

/// Chordal-scale slack to the region boundary: positive inside, negative
/// outside. A lower bound on the true boundary distance (plane distances
/// for lune walls and Voronoi bisectors), which is all the boundary-graze
/// test needs.
inline double region_signed_margin(const Region& region, const Vec3& x) {
  return std::visit(
      [&](const auto& reg) -> double {
        using T = std::decay_t<decltype(reg)>;
        if constexpr (std::is_same_v<T, CapRegion>) {
          return reg.chordal_radius - (x - reg.center).norm();
        } else if constexpr (std::is_same_v<T, LuneRegion>) {
          Vec3 n_lo(-std::sin(reg.lon_lo), std::cos(reg.lon_lo), 0.0);
          Vec3 n_hi(-std::sin(reg.lon_hi), std::cos(reg.lon_hi), 0.0);
          double margin = std::min(std::abs(x.dot(n_lo)), std::abs(x.dot(n_hi)));
          return region_contains(region, x) ? margin : -margin;
        } else {
          const auto& sites = *reg.sites;
          const Vec3& own = sites[reg.site];
          double margin = std::numeric_limits<double>::infinity();
          for (int j = 0; j < static_cast<int>(sites.size()); ++j) {
            if (j == reg.site) continue;
            Vec3 n = own - sites[j];
            margin = std::min(margin, x.dot(n) / n.norm());
          }
          return margin;
        }
      },
      region);
}

}  // namespace detail

/// Ordered list of colored regions with first-match-wins semantics; the
/// final region is the mandatory catch-all (its shape must equal the
/// leftover set; color_of never tests it). Total and deterministic by
/// construction.
class RegionColoring {
 public:
  RegionColoring(const SphereParams& params,
                 std::vector<std::pair<Region, int>> regions)
      : params_(params), regions_(std::move(regions)) {
    if (regions_.empty())
      throw std::invalid_argument("RegionColoring: no regions");
    int max_color = 0;
    for (const auto& [region, color] : regions_) {
      if (color < 0) throw std::invalid_argument("RegionColoring: negative color");
      max_color = std::max(max_color, color);
    }
    n_colors_ = max_color + 1;
    std::vector<bool> seen(n_colors_, false);
    for (const auto& [region, color] : regions_) seen[color] = true;
    for (int c = 0; c < n_colors_; ++c)
      if (!seen[c])
        throw std::invalid_argument("RegionColoring: color ids not contiguous");
  }

  const SphereParams& params() const { return params_; }
  int n_colors() const { return n_colors_; }
  const std::vector<std::pair<Region, int>>& regions() const { return regions_; }

  int color_of(const Vec3& x) const {
    return regions_[match_index(x)].second;
  }
  int color_of(const SpherePoint& x) const { return color_of(x.vec()); }

  /// Index of the region that claims x (the last one if none matched).
  int match_index(const Vec3& x) const {
    const int n = static_cast<int>(regions_.size());
    for (int i = 0; i < n - 1; ++i)
      if (detail::region_contains(regions_[i].first, x)) return i;
    return n - 1;
  }

  /// Lower bound on the chord distance from x to the nearest point whose
  /// color differs: the slack inside the matched region, capped by the
  /// proximity of every earlier region that could steal the point.
  double class_margin(const Vec3& x) const {
    int matched = match_index(x);
    double margin = detail::region_signed_margin(regions_[matched].first, x);
    for (int j = 0; j < matched; ++j)
      margin = std::min(
          margin, -detail::region_signed_margin(regions_[j].first, x));
    return margin;
  }

 private:
  SphereParams params_;
  std::vector<std::pair<Region, int>> regions_;
  int n_colors_;
};

/// Canonical inscribed regular tetrahedron directions.
inline std::vector<Vec3> tetrahedron_sites(double r) {
  const double s = r / std::sqrt(3.0);
  return {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
}

/// 4-coloring by chordal Voronoi cells of an inscribed regular tetrahedron;
/// boundary ties go to the lowest cell index.
inline RegionColoring tetrahedral_coloring(double r) {
  SphereParams params(r);
  auto sites = std::make_shared<const std::vector<Vec3>>(tetrahedron_sites(r));
  std::vector<std::pair<Region, int>> regions;
  for (int i = 0; i < 4; ++i)
    regions.emplace_back(VoronoiRegion{sites, i}, i);
  return RegionColoring(params, std::move(regions));
}

struct CapLuneParams {
  double theta0 = 0.0;  ///< angular cap radius; 0 selects the default
  double kappa = 8.0;   ///< default theta0 = min(kappa sqrt(eps), pi/4)
  std::array<double, 3> widths = {2.0 * std::numbers::pi / 3.0,
                                  2.0 * std::numbers::pi / 3.0,
                                  2.0 * std::numbers::pi / 3.0};
};

/// The near-1/2 4-coloring: an open polar cap of angular radius theta0
/// (color 0) over three longitude lunes. The default cap radius
/// kappa sqrt(eps) puts every unit neighbor of a near-south-pole point
/// inside the cap, while the lune widths block same-lune unit pairs.
inline RegionColoring cap_lune_coloring(double r, const CapLuneParams& p = {}) {
  if (!(r > 0.5) || r > 0.52)
    throw std::invalid_argument(
        "cap_lune_coloring: construction is valid for r in (1/2, 0.52], got " +
        std::to_string(r));
  const double eps = r - 0.5;
  const double pi = std::numbers::pi;
  double theta0 = p.theta0;
  if (theta0 == 0.0) theta0 = std::min(p.kappa * std::sqrt(eps), pi / 4.0);
  if (!(theta0 > 0.0) || theta0 > pi / 4.0)
    throw std::invalid_argument("cap_lune_coloring: theta0 must lie in (0, pi/4]");

  double sum = p.widths[0] + p.widths[1] + p.widths[2];
  if (!(p.widths[0] > 0.0) || !(p.widths[1] > 0.0) || !(p.widths[2] > 0.0) ||
      std::abs(sum - 2.0 * pi) > 1e-9)
    throw BadPartition("cap_lune_coloring: widths must be positive and "
                       "partition [0, 2pi)");

  SphereParams params(r);
  const Vec3 pole(0.0, 0.0, r);
  const double cap_chordal = 2.0 * r * std::sin(theta0 / 2.0);
  std::vector<std::pair<Region, int>> regions;
  regions.emplace_back(CapRegion{pole, cap_chordal, /*closed=*/false}, 0);
  double lo = 0.0;
  for (int i = 0; i < 3; ++i) {
    double hi = (i == 2) ? 2.0 * pi : lo + p.widths[i];
    regions.emplace_back(LuneRegion{lo, hi}, i + 1);
    lo = hi;
  }
  return RegionColoring(params, std::move(regions));
}

namespace detail {

inline Vec3 uniform_sphere_point(RngStream& rng, double r) {
  double z = r * (2.0 * rng.uniform01() - 1.0);
  double lon = 2.0 * std::numbers::pi * rng.uniform01();
  double s = std::sqrt(std::max(r * r - z * z, 0.0));
  return Vec3(s * std::cos(lon), s * std::sin(lon), z);
}

/// Point at exactly unit chord from x, at the given angle on the neighbor
/// circle around -x.
inline Vec3 unit_neighbor_point(const Vec3& x, double r, double angle) {
  Vec3 n = -x / r;
  Vec3 e1 = any_orthogonal(n);
  Vec3 e2 = n.cross(e1);
  double w = (0.5 - r * r) / r;              // plane offset along n
  double e = std::sqrt(4.0 * r * r - 1.0) / (2.0 * r);  // euclidean radius
  return w * n + e * (std::cos(angle) * e1 + std::sin(angle) * e2);
}

}  // namespace detail

/// Monochromatic unit pair found by the sampler.
struct Violation {
  Vec3 p;
  Vec3 q;
  double chord = 0.0;
  int color = 0;
  double margin_p = 0.0;
  double margin_q = 0.0;
};

struct SampleReport {
  long n_samples = 0;
  std::uint64_t seed = 0;
  double pair_tol = 0.0;
  std::vector<Violation> violations;       ///< both points strictly interior
  std::vector<Violation> boundary_grazes;  ///< monochromatic but near a boundary
};

/// Samples x uniformly on the sphere and y uniformly on the neighbor circle
/// of x, so every sampled pair is an exact unit chord. A monochromatic pair
/// counts as a violation only when both points sit further than pair_tol
/// inside their color class; boundary grazes are reported separately.
/// Chunked substreams make the report identical for every worker count.
inline SampleReport properness_sample(const RegionColoring& coloring,
                                      long n_samples, std::uint64_t seed,
                                      double pair_tol = 1e-12, int workers = 0) {
  if (n_samples < 1)
    throw std::invalid_argument("properness_sample: need n_samples >= 1");
  const double r = coloring.params().r();
  const long chunk_size = 1L << 16;
  const int chunks = static_cast<int>((n_samples + chunk_size - 1) / chunk_size);

  struct ChunkOut {
    std::vector<Violation> violations;
    std::vector<Violation> grazes;
  };
  std::vector<ChunkOut> outs(chunks);

  parallel_for(chunks, workers, [&](int c) {
    RngStream rng(seed, static_cast<std::uint64_t>(c));
    long begin = c * chunk_size;
    long end = std::min(n_samples, begin + chunk_size);
    for (long s = begin; s < end; ++s) {
      Vec3 x = detail::uniform_sphere_point(rng, r);
      double angle = 2.0 * std::numbers::pi * rng.uniform01();
      Vec3 y = detail::unit_neighbor_point(x, r, angle);
      int cx = coloring.color_of(x);
      if (cx != coloring.color_of(y)) continue;
      Violation v;
      v.p = x;
      v.q = y;
      v.chord = (x - y).norm();
      v.color = cx;
      v.margin_p = coloring.class_margin(x);
      v.margin_q = coloring.class_margin(y);
      if (v.margin_p > pair_tol && v.margin_q > pair_tol)
        outs[c].violations.push_back(v);
      else
        outs[c].grazes.push_back(v);
    }
  });

  SampleReport report;
  report.n_samples = n_samples;
  report.seed = seed;
  report.pair_tol = pair_tol;
  for (const auto& out : outs) {
    report.violations.insert(report.violations.end(), out.violations.begin(),
                             out.violations.end());
    report.boundary_grazes.insert(report.boundary_grazes.end(),
                                  out.grazes.begin(), out.grazes.end());
  }
  return report;
}

struct DistResult {
  double value = 0.0;
  double error_bound = 0.0;
};

namespace detail {

/// Chord distance from x to the closed cap of angular radius theta_t.
inline double cap_closure_distance(const Vec3& x, const Vec3& center,
                                   double theta_t, double r) {
  double cos_psi = std::clamp(x.dot(center) / (r * r), -1.0, 1.0);
  double psi = std::acos(cos_psi);
  if (psi <= theta_t) return 0.0;
  return 2.0 * r * std::sin((psi - theta_t) / 2.0);
}

/// Chord distance from x to the closure of a lune clipped to colatitudes
/// [beta_min, beta_max] (the part left after removing polar caps).
inline double lune_band_distance(const Vec3& x, double lon_lo, double lon_hi,
                                 double beta_min, double beta_max, double r) {
  const double alpha = colatitude(x);
  const double lambda = longitude(x);
  if (lambda >= lon_lo && lambda <= lon_hi) {
    if (alpha < beta_min) return 2.0 * r * std::sin((beta_min - alpha) / 2.0);
    if (alpha > beta_max) return 2.0 * r * std::sin((alpha - beta_max) / 2.0);
    return 0.0;
  }
  // Nearest point lies on one of the two meridian walls, clipped to the
  // colatitude band. cos psi = cos a cos b + sin a sin b cos(dlon) is
  // single-peaked in b; checking the clamped peak and both band endpoints
  // covers every case including circular wraparound.
  double best_cos = -1.0;
  for (double wall : {lon_lo, lon_hi}) {
    double cd = std::cos(lambda - wall);
    double beta_hat = std::atan2(std::sin(alpha) * cd, std::cos(alpha));
    for (double beta : {std::clamp(beta_hat, beta_min, beta_max), beta_min,
                        beta_max}) {
      double cos_psi = std::cos(alpha) * std::cos(beta) +
                       std::sin(alpha) * std::sin(beta) * cd;
      best_cos = std::max(best_cos, cos_psi);
    }
  }
  return chord_from_cos_angle(best_cos, r);
}

/// Chord distance from x to the closure of a Voronoi cell: zero inside,
/// otherwise the nearest of the great-circle edge projections and the cell
/// vertices.
inline double voronoi_cell_distance(const Vec3& x, const VoronoiRegion& reg,
                                    double r) {
  const auto& sites = *reg.sites;
  const Vec3& own = sites[reg.site];
  std::vector<Vec3> normals;
  for (int j = 0; j < static_cast<int>(sites.size()); ++j)
    if (j != reg.site) normals.push_back(own - sites[j]);

  auto in_cell = [&](const Vec3& p, double slack) {
    for (const auto& n : normals)
      if (p.dot(n) < -slack * n.norm()) return false;
    return true;
  };
  if (in_cell(x, 1e-12 * r)) return 0.0;

  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec3& cand) {
    if (!in_cell(cand, 1e-9 * r)) return;
    best = std::min(best, (x - cand).norm());
  };
  for (const auto& n : normals) {
    Vec3 nn = n.normalized();
    Vec3 proj = x - x.dot(nn) * nn;
    if (proj.norm() > 1e-14) consider(proj.normalized() * r);
  }
  for (size_t i = 0; i < normals.size(); ++i)
    for (size_t j = i + 1; j < normals.size(); ++j) {
      Vec3 dir = normals[i].cross(normals[j]);
      if (dir.norm() > 1e-14) {
        consider(dir.normalized() * r);
        consider(-dir.normalized() * r);
      }
    }
  return best;
}

/// Icosahedron subdivided `level` times, vertices on radius r. Each level
/// splits every face in four through projected edge midpoints, so vertex
/// sets are nested across levels.
inline std::vector<Vec3> icosphere_vertices(int level, double r) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v = v.normalized() * r;
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},   {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4},  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},   {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int lvl = 0; lvl < level; ++lvl) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized() * r;
      verts.push_back(m);
      int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (auto [a, b, c] : faces) {
      int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  return verts;
}

}  // namespace detail

/// Chord distance from x to the closure of a color class.
///
/// Exact closed forms: caps, lunes clipped by earlier polar caps, and
/// Voronoi cells (great-circle edge projection). Arrangements outside
/// those patterns fall back to a dense grid with the grid spacing reported
/// as the error bound.
inline DistResult dist_to_color(const Vec3& x, const RegionColoring& coloring,
                                int color_id) {
  if (color_id < 0 || color_id >= coloring.n_colors())
    throw EmptyColorClass("dist_to_color: color " + std::to_string(color_id) +
                          " not present");
  if (coloring.color_of(x) == color_id) return {0.0, 0.0};

  const double r = coloring.params().r();
  const auto& regions = coloring.regions();
  const Vec3 north(0.0, 0.0, r), south(0.0, 0.0, -r);

  double best = std::numeric_limits<double>::infinity();
  bool exact = true;
  for (size_t i = 0; i < regions.size() && exact; ++i) {
    const auto& [region, color] = regions[i];
    if (color != color_id) continue;
    if (const auto* cap = std::get_if<CapRegion>(&region)) {
      double theta_t = 2.0 * std::asin(std::clamp(
                           cap->chordal_radius / (2.0 * r), 0.0, 1.0));
      best = std::min(best,
                      detail::cap_closure_distance(x, cap->center, theta_t, r));
    } else if (const auto* lune = std::get_if<LuneRegion>(&region)) {
      // Earlier regions clip the lune; only polar caps keep this exact.
      double beta_min = 0.0, beta_max = std::numbers::pi;
      for (size_t j = 0; j < i && exact; ++j) {
        const auto* ecap = std::get_if<CapRegion>(&regions[j].first);
        if (!ecap) {
          exact = false;
          break;
        }
        double theta = 2.0 * std::asin(std::clamp(
                           ecap->chordal_radius / (2.0 * r), 0.0, 1.0));
        if ((ecap->center - north).norm() <= 1e-9 * r)
          beta_min = std::max(beta_min, theta);
        else if ((ecap->center - south).norm() <= 1e-9 * r)
          beta_max = std::min(beta_max, std::numbers::pi - theta);
        else
          exact = false;
      }
      if (exact)
        best = std::min(best, detail::lune_band_distance(
                                  x, lune->lon_lo, lune->lon_hi, beta_min,
                                  beta_max, r));
    } else if (const auto* cell = std::get_if<VoronoiRegion>(&region)) {
      // Earlier cells of the same site list only share boundaries, which
      // do not move the closure.
      for (size_t j = 0; j < i && exact; ++j) {
        const auto* ecell = std::get_if<VoronoiRegion>(&regions[j].first);
        if (!ecell || ecell->sites != cell->sites) exact = false;
      }
      if (exact)
        best = std::min(best, detail::voronoi_cell_distance(x, *cell, r));
    }
  }
  if (exact) return {best, 1e-12};

  // Fallback for exotic arrangements: dense grid over the class.
  const int level = 7;
  auto grid = detail::icosphere_vertices(level, r);
  double spacing = 1.0514622242382672 * r / (1 << level);  // icosa edge / 2^level
  best = std::numeric_limits<double>::infinity();
  for (const auto& v : grid)
    if (coloring.color_of(v) == color_id) best = std::min(best, (x - v).norm());
  if (!std::isfinite(best))
    throw EmptyColorClass("dist_to_color: no grid point carries color " +
                          std::to_string(color_id));
  return {best, spacing};
}

struct BorsukUlamResult {
  Vec3 x_star;
  double gap = std::numeric_limits<double>::infinity();
  std::array<double, 2> f_x = {0.0, 0.0};
  std::array<double, 2> f_neg = {0.0, 0.0};
  int grid_level = 0;
  double dist_error_bound = 0.0;
};

/// Minimizes gap(x) = |f(x) - f(-x)| for f = (dist to color_a closure,
/// dist to color_b closure) over a nested icosahedral grid, then refines
/// the best candidates by compass pattern search and a damped 2-variable
/// Newton polish. The Borsuk-Ulam theorem guarantees a zero of the gap.
inline BorsukUlamResult borsuk_ulam_search(const RegionColoring& coloring,
                                           int color_a, int color_b,
                                           int grid_level = 5,
                                           double refine_tol = 1e-8,
                                           int workers = 0) {
  const double r = coloring.params().r();
  double err_bound = 0.0;
  auto f = [&](const Vec3& v) -> std::array<double, 2> {
    DistResult da = dist_to_color(v, coloring, color_a);
    DistResult db = dist_to_color(v, coloring, color_b);
    err_bound = std::max({err_bound, da.error_bound, db.error_bound});
    return {da.value, db.value};
  };
  auto gap_of = [&](const Vec3& v) -> double {
    auto fx = f(v);
    auto fn = f(-v);
    return std::hypot(fx[0] - fn[0], fx[1] - fn[1]);
  };

  auto grid = detail::icosphere_vertices(grid_level, r);
  std::vector<double> gaps(grid.size());
  parallel_for(static_cast<int>(grid.size()), workers,
               [&](int i) { gaps[i] = gap_of(grid[i]); });

  std::vector<int> order(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return gaps[a] < gaps[b]; });

  Vec3 best_x = grid[order[0]];
  double best_gap = gaps[order[0]];
  auto track = [&](const Vec3& v, double gap) {
    if (gap < best_gap) {
      best_gap = gap;
      best_x = v;
    }
  };

  const double grid_spacing = 1.0514622242382672 * r / (1 << grid_level);
  const int candidates = std::min<int>(24, static_cast<int>(order.size()));
  for (int ci = 0; ci < candidates; ++ci) {
    Vec3 v = grid[order[ci]];
    double g = gaps[order[ci]];

    // Compass pattern search on the sphere.
    double step = grid_spacing;
    int evals = 0;
    while (step > 1e-13 * r && evals < 400) {
      Vec3 e1 = detail::any_orthogonal(v);
      Vec3 e2 = v.cross(e1).normalized();
      Vec3 best_move = v;
      double best_local = g;
      for (int dir = 0; dir < 8; ++dir) {
        double a = dir * std::numbers::pi / 4.0;
        Vec3 cand =
            (v + step * (std::cos(a) * e1 + std::sin(a) * e2)).normalized() * r;
        double cg = gap_of(cand);
        ++evals;
        track(cand, cg);
        if (cg < best_local) {
          best_local = cg;
          best_move = cand;
        }
      }
      if (best_local < g) {
        v = best_move;
        g = best_local;
      } else {
        step *= 0.5;
      }
      if (g <= refine_tol * 1e-3) break;
    }

    // Damped Newton polish on g(t) = f(x(t)) - f(-x(t)) in tangent coords.
    for (int it = 0; it < 30; ++it) {
      Vec3 e1 = detail::any_orthogonal(v);
      Vec3 e2 = v.cross(e1).normalized();
      auto retract = [&](double t1, double t2) {
        return (v + t1 * e1 + t2 * e2).normalized() * r;
      };
      auto gvec = [&](double t1, double t2) -> std::array<double, 2> {
        Vec3 p = retract(t1, t2);
        auto fx = f(p);
        auto fn = f(-p);
        return {fx[0] - fn[0], fx[1] - fn[1]};
      };
      auto g0 = gvec(0.0, 0.0);
      double gn0 = std::hypot(g0[0], g0[1]);
      track(v, gn0);
      if (gn0 <= refine_tol * 1e-6) break;
      const double h = std::max(1e-9 * r, gn0 * 1e-3);
      auto gp1 = gvec(h, 0.0), gm1 = gvec(-h, 0.0);
      auto gp2 = gvec(0.0, h), gm2 = gvec(0.0, -h);
      Eigen::Matrix2d Jm;
      Jm << (gp1[0] - gm1[0]) / (2 * h), (gp2[0] - gm2[0]) / (2 * h),
          (gp1[1] - gm1[1]) / (2 * h), (gp2[1] - gm2[1]) / (2 * h);
      if (std::abs(Jm.determinant()) < 1e-18) break;
      Eigen::Vector2d rhs(-g0[0], -g0[1]);
      Eigen::Vector2d t = Jm.partialPivLu().solve(rhs);
      double scale = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 8; ++bt) {
        Vec3 cand = retract(scale * t(0), scale * t(1));
        double cg = gap_of(cand);
        track(cand, cg);
        if (cg < gn0) {
          v = cand;
          moved = true;
          break;
        }
        scale *= 0.5;
      }
      if (!moved) break;
    }
  }

  BorsukUlamResult out;
  out.x_star = best_x;
  out.gap = best_gap;
  out.f_x = f(best_x);
  out.f_neg = f(-best_x);
  out.grid_level = grid_level;
  out.dist_error_bound = err_bound;
  return out;
}

struct AveragingBound {
  double r = 0.0;
  double eps = 0.0;
  double theta0 = 0.0;
  double s0 = 0.0;     ///< area of the color-0 cap
  double bound = 0.0;  ///< 4 pi r^2 / s0
};

/// Averaging lower bound on the vertex count of a 4-chromatic unit-distance
/// graph: a rotated copy of the coloring must place some vertex in the
/// color-0 class, so n >= (sphere area) / s0. The coloring must be proper
/// (checked by the sampler at the caller's budget).
inline AveragingBound n4_lower_bound(const RegionColoring& coloring) {
  const double r = coloring.params().r();
  const auto* cap = std::get_if<CapRegion>(&coloring.regions().front().first);
  if (!cap || coloring.regions().front().second != 0)
    throw EmptyColorClass("n4_lower_bound: color 0 must be a cap region");
  double theta0 =
      2.0 * std::asin(std::clamp(cap->chordal_radius / (2.0 * r), 0.0, 1.0));
  double s0 = 2.0 * std::numbers::pi * r * r * (1.0 - std::cos(theta0));
  AveragingBound out;
  out.r = r;
  out.eps = r - 0.5;
  out.theta0 = theta0;
  out.s0 = s0;
  out.bound = 4.0 * std::numbers::pi * r * r / s0;
  return out;
}

inline AveragingBound n4_lower_bound(double r, const CapLuneParams& p = {}) {
  return n4_lower_bound(cap_lune_coloring(r, p));
}

namespace detail {

inline Vec3 slerp(const Vec3& a, const Vec3& b, double t) {
  double r = a.norm();
  double omega = std::acos(std::clamp(a.dot(b) / (r * r), -1.0, 1.0));
  double so = std::sin(omega);
  if (so < 1e-14) return a;
  return (std::sin((1.0 - t) * omega) * a + std::sin(t * omega) * b) / so;
}

}  // namespace detail

/// Largest chord between two points of one (closed) tetrahedral Voronoi
/// cell, by optimization over the three boundary arcs: coarse grid over
/// every arc pair, then alternating golden-section refinement. The maximum
/// of a chord against a fixed point is linear in the other point, so it is
/// attained on the boundary.
inline double tetra_cell_diameter(double r) {
  auto sites = tetrahedron_sites(r);
  // Cell 0 is the spherical triangle with vertices -s_1, -s_2, -s_3.
  std::array<Vec3, 3> verts = {-sites[1], -sites[2], -sites[3]};
  std::array<std::pair<Vec3, Vec3>, 3> arcs = {
      std::make_pair(verts[0], verts[1]), std::make_pair(verts[1], verts[2]),
      std::make_pair(verts[2], verts[0])};

  auto chord_at = [&](const std::pair<Vec3, Vec3>& arc_p,
                      const std::pair<Vec3, Vec3>& arc_q, double t, double u) {
    return (detail::slerp(arc_p.first, arc_p.second, t) -
            detail::slerp(arc_q.first, arc_q.second, u))
        .norm();
  };

  double best = 0.0;
  for (int ai = 0; ai < 3; ++ai) {
    for (int aj = ai; aj < 3; ++aj) {
      const auto& A = arcs[ai];
      const auto& B = arcs[aj];
      const int n = 96;
      double bt = 0.0, bu = 0.0, bval = -1.0;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          double val = chord_at(A, B, double(i) / n, double(j) / n);
          if (val > bval) {
            bval = val;
            bt = double(i) / n;
            bu = double(j) / n;
          }
        }
      // Alternating golden-section ascent around the grid maximum.
      const double gold = 0.6180339887498949;
      double span = 2.0 / n;
      for (int round = 0; round < 60; ++round) {
        for (int axis = 0; axis < 2; ++axis) {
          double lo = std::max(0.0, (axis == 0 ? bt : bu) - span);
          double hi = std::min(1.0, (axis == 0 ? bt : bu) + span);
          for (int it = 0; it < 40; ++it) {
            double x1 = hi - gold * (hi - lo);
            double x2 = lo + gold * (hi - lo);
            double v1 = axis == 0 ? chord_at(A, B, x1, bu) : chord_at(A, B, bt, x1);
            double v2 = axis == 0 ? chord_at(A, B, x2, bu) : chord_at(A, B, bt, x2);
            if (v1 > v2) hi = x2; else lo = x1;
          }
          double arg = 0.5 * (lo + hi);
          double val = axis == 0 ? chord_at(A, B, arg, bu) : chord_at(A, B, bt, arg);
          if (val >= bval) {
            bval = val;
            (axis == 0 ? bt : bu) = arg;
          }
        }
        span = std::max(span * 0.5, 1e-12);
      }
      best = std::max(best, bval);
    }
  }
  return best;
}

/// Radius at which the intra-cell diameter of the tetrahedral coloring
/// crosses 1 (the properness threshold), by bisection on the optimizer.
inline double tetra_properness_threshold(double r_lo = 0.52, double r_hi = 0.62,
                                         double tol = 1e-9) {
  if (tetra_cell_diameter(r_lo) >= 1.0 || tetra_cell_diameter(r_hi) <= 1.0)
    throw std::invalid_argument("tetra_properness_threshold: bad bracket");
  while (r_hi - r_lo > tol) {
    double mid = 0.5 * (r_lo + r_hi);
    if (tetra_cell_diameter(mid) >= 1.0) r_hi = mid; else r_lo = mid;
  }
  return 0.5 * (r_lo + r_hi);
}

}  // namespace chromasphere
