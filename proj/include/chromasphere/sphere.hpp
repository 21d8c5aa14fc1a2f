#pragma once

// Spherical geometry on S^2(r) in the chord metric: all distances are plain
// Euclidean distances of R^3 between points of the sphere. Geodesic distance
// is available only through the conversion helpers.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chromasphere {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Relative tolerance for the on-sphere invariant of constructed points.
inline constexpr double kOnSphereRelTol = 1e-12;

/// Default cutoff for the circle-intersection discriminant (length^2 units).
inline constexpr double kDiscriminantTol = 1e-10;

struct DegenerateInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CoincidentCircles : std::domain_error {
  using std::domain_error::domain_error;
};

/// Sphere of radius r with the unit distance fixed at 1.
///
/// rho is the chordal radius of the circle of unit-chord neighbors of any
/// point, d its Euclidean diameter. Both are derived from r on demand; only
/// r is stored, so the three can never disagree.
class SphereParams {
 public:
  explicit SphereParams(double r) : r_(r) {
    if (!(r > 0.5))
      throw DegenerateInput("SphereParams: radius must exceed 1/2, got " +
                            std::to_string(r));
  }

  double r() const { return r_; }
  double rho() const { return std::sqrt(4.0 * r_ * r_ - 1.0); }
  double d() const { return rho() / r_; }

 private:
  double r_;
};

/// A point constrained to lie on S^2(r) within kOnSphereRelTol * r.
class SpherePoint {
 public:
  SpherePoint(const SphereParams& params, const Vec3& v) : r_(params.r()), v_(v) {
    if (std::abs(v_.norm() - r_) > kOnSphereRelTol * r_)
      throw DegenerateInput("SpherePoint: |v| = " + std::to_string(v_.norm()) +
                            " is off the sphere of radius " + std::to_string(r_));
  }

  /// Radially projects an arbitrary nonzero vector onto the sphere.
  static SpherePoint project(const SphereParams& params, const Vec3& v) {
    double n = v.norm();
    if (n <= 0.0)
      throw DegenerateInput("SpherePoint::project: cannot project the origin");
    return SpherePoint(params, v * (params.r() / n));
  }

  const Vec3& vec() const { return v_; }
  double r() const { return r_; }

  SpherePoint antipode() const {
    return SpherePoint(SphereParams(r_), -v_);
  }

 private:
  double r_;
  Vec3 v_;
};

inline double chord(const SpherePoint& a, const SpherePoint& b) {
  return (a.vec() - b.vec()).norm();
}

// Chord / central angle / geodesic conversions. chord = 2 r sin(angle / 2),
// geodesic = r * angle.
inline double chord_to_angle(double chord, double r) {
  double s = chord / (2.0 * r);
  if (s < 0.0 || s > 1.0 + 1e-12)
    throw DegenerateInput("chord_to_angle: chord outside [0, 2r]");
  return 2.0 * std::asin(std::min(s, 1.0));
}
inline double angle_to_chord(double angle, double r) {
  return 2.0 * r * std::sin(angle / 2.0);
}
inline double chord_to_geodesic(double chord, double r) {
  return r * chord_to_angle(chord, r);
}
inline double geodesic_to_chord(double geodesic, double r) {
  return angle_to_chord(geodesic / r, r);
}

namespace detail {

/// Deterministic unit vector orthogonal to n (|n| need not be 1).
inline Vec3 any_orthogonal(const Vec3& n) {
  Vec3 a = std::abs(n.x()) <= std::abs(n.y())
               ? (std::abs(n.x()) <= std::abs(n.z()) ? Vec3::UnitX() : Vec3::UnitZ())
               : (std::abs(n.y()) <= std::abs(n.z()) ? Vec3::UnitY() : Vec3::UnitZ());
  return n.cross(a).normalized();
}

inline void require_same_sphere(double ra, double rb, const char* what) {
  if (std::abs(ra - rb) > kOnSphereRelTol * std::max(ra, rb))
    throw DegenerateInput(std::string(what) + ": operands live on different spheres");
}

}  // namespace detail

/// A circle cut on the sphere by a plane, described by its spherical center
/// (a point of the sphere) and the chord distance from that center to every
/// circle point. Circle points p satisfy the plane-section identity
/// center . p = r^2 - chordal_radius^2 / 2.
class Circle {
 public:
  Circle(const SpherePoint& center, double chordal_radius)
      : center_(center), chordal_radius_(chordal_radius) {
    if (!(chordal_radius > 0.0) || !(chordal_radius < 2.0 * center.r()))
      throw DegenerateInput("Circle: chordal radius must lie in (0, 2r), got " +
                            std::to_string(chordal_radius));
  }

  const SpherePoint& center() const { return center_; }
  double chordal_radius() const { return chordal_radius_; }
  double r() const { return center_.r(); }

  double euclidean_radius() const {
    double t = chordal_radius_, r = center_.r();
    return t * std::sqrt(1.0 - t * t / (4.0 * r * r));
  }

  Vec3 unit_normal() const { return center_.vec() / center_.r(); }

  /// Offset w of the cutting plane: circle points satisfy unit_normal . p = w.
  double plane_offset() const {
    double t = chordal_radius_, r = center_.r();
    return (r * r - t * t / 2.0) / r;
  }

  /// Center of the circle inside its cutting plane (not on the sphere).
  Vec3 plane_center() const { return unit_normal() * plane_offset(); }

  /// Deterministic orthonormal basis of the cutting plane.
  std::pair<Vec3, Vec3> plane_basis() const {
    Vec3 n = unit_normal();
    Vec3 e1 = detail::any_orthogonal(n);
    Vec3 e2 = n.cross(e1);
    return {e1, e2};
  }

  /// Point of the circle at the given angle in the plane_basis frame.
  SpherePoint point_at(double angle) const {
    auto [e1, e2] = plane_basis();
    Vec3 v = plane_center() +
             euclidean_radius() * (std::cos(angle) * e1 + std::sin(angle) * e2);
    return SpherePoint(SphereParams(r()), v);
  }

 private:
  SpherePoint center_;
  double chordal_radius_;
};

enum class CapBoundary { Open, Closed };

/// Spherical cap: all sphere points within the given chord of the center.
class Cap {
 public:
  Cap(const SpherePoint& center, double chordal_radius,
      CapBoundary boundary = CapBoundary::Closed)
      : center_(center), chordal_radius_(chordal_radius), boundary_(boundary) {
    if (chordal_radius < 0.0 || chordal_radius > 2.0 * center.r())
      throw DegenerateInput("Cap: chordal radius must lie in [0, 2r]");
  }

  const SpherePoint& center() const { return center_; }
  double chordal_radius() const { return chordal_radius_; }
  CapBoundary boundary() const { return boundary_; }
  double r() const { return center_.r(); }

  bool contains(const Vec3& x) const {
    double dist = (x - center_.vec()).norm();
    return boundary_ == CapBoundary::Open ? dist < chordal_radius_
                                          : dist <= chordal_radius_;
  }
  bool contains(const SpherePoint& x) const { return contains(x.vec()); }

  /// Largest chord between two cap points. For caps at most a hemisphere
  /// this is the Euclidean diameter of the boundary circle.
  double euclidean_diameter() const {
    double t = chordal_radius_, r = center_.r();
    if (t * t >= 2.0 * r * r) return 2.0 * r;
    return 2.0 * t * std::sqrt(1.0 - t * t / (4.0 * r * r));
  }

 private:
  SpherePoint center_;
  double chordal_radius_;
  CapBoundary boundary_;
};

/// Circle of all unit-chord neighbors of x: centered at the antipode -x with
/// chordal radius rho = sqrt(4 r^2 - 1).
inline Circle neighbor_circle(const SpherePoint& x, const SphereParams& params) {
  detail::require_same_sphere(x.r(), params.r(), "neighbor_circle");
  return Circle(x.antipode(), params.rho());
}

/// The two circles of chordal radius rho through x and y, ordered by
/// handedness: det[x; y; c_r] > 0 and det[x; y; c_l] < 0.
///
/// Requires 0 < |x - y| < d; at |x - y| = d the two centers coincide and the
/// configuration is rejected rather than guessed at.
inline std::pair<SpherePoint, SpherePoint> circle_centers(
    const SpherePoint& x, const SpherePoint& y, const SphereParams& params) {
  detail::require_same_sphere(x.r(), params.r(), "circle_centers");
  detail::require_same_sphere(y.r(), params.r(), "circle_centers");
  const double r = params.r();
  const double sep = chord(x, y);
  if (!(sep > 0.0))
    throw DegenerateInput("circle_centers: x and y coincide");
  if (!(sep < params.d()))
    throw DegenerateInput("circle_centers: |x - y| = " + std::to_string(sep) +
                          " is not below d = " + std::to_string(params.d()));

  // A center c satisfies c.x = c.y = w with w = r^2 - rho^2/2 = 1/2 - r^2.
  const double w = 0.5 - r * r;
  const double s = x.vec().dot(y.vec());
  const double denom = r * r + s;  // equals (2r^2-1)^2/(2r^2) at sep = d
  Vec3 in_span = Vec3::Zero();
  if (w != 0.0) in_span = (w / denom) * (x.vec() + y.vec());
  double perp2 = std::max(r * r - in_span.squaredNorm(), 0.0);
  Vec3 u = x.vec().cross(y.vec());
  double gamma = std::sqrt(perp2) / u.norm();
  return {SpherePoint(params, in_span + gamma * u),
          SpherePoint(params, in_span - gamma * u)};
}

/// Intersection of two circles on the same sphere: 0, 1 (tangent within
/// disc_tol) or 2 points. Identical cutting planes raise CoincidentCircles.
inline std::vector<SpherePoint> circle_intersection(
    const Circle& a, const Circle& b, double disc_tol = kDiscriminantTol) {
  detail::require_same_sphere(a.r(), b.r(), "circle_intersection");
  const double r = a.r();
  const SphereParams params(r);
  const Vec3 n1 = a.unit_normal(), n2 = b.unit_normal();
  const double w1 = a.plane_offset(), w2 = b.plane_offset();
  const Vec3 u = n1.cross(n2);
  const double u2 = u.squaredNorm();

  if (u2 < 1e-24) {
    // Parallel cutting planes: either the same circle or no intersection.
    double sign = n1.dot(n2) >= 0.0 ? 1.0 : -1.0;
    if (std::abs(w1 - sign * w2) <= 1e-12) throw CoincidentCircles(
        "circle_intersection: identical cutting planes");
    return {};
  }

  // Foot of both planes in span{n1, n2}, then offset along u.
  const double c = n1.dot(n2);
  const double alpha = (w1 - c * w2) / u2;
  const double beta = (w2 - c * w1) / u2;
  const Vec3 p0 = alpha * n1 + beta * n2;
  const double disc = r * r - p0.squaredNorm();

  if (disc > disc_tol) {
    const double t = std::sqrt(disc / u2);
    return {SpherePoint(params, p0 + t * u), SpherePoint(params, p0 - t * u)};
  }
  if (disc >= -disc_tol) return {SpherePoint::project(params, p0)};
  return {};
}

/// Common unit-chord neighbors of x and z; the crossing of their neighbor
/// circles. Antipodal x, z on S^2(1/sqrt 2) share the whole equator, which
/// surfaces as CoincidentCircles.
inline std::vector<SpherePoint> unit_pair_neighbors(const SpherePoint& x,
                                                    const SpherePoint& z,
                                                    const SphereParams& params) {
  if (!(chord(x, z) > 0.0))
    throw DegenerateInput("unit_pair_neighbors: x and z coincide");
  return circle_intersection(neighbor_circle(x, params),
                             neighbor_circle(z, params));
}

/// Rotation by `angle` counterclockwise around the z-axis.
inline Mat3 rotation_about_z(double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return m;
}

inline SpherePoint rotate(const Mat3& rot, const SpherePoint& x) {
  return SpherePoint(SphereParams(x.r()), rot * x.vec());
}

/// Smallest closed cap containing all points, by enumeration of 1-, 2- and
/// 3-point support sets (the minimax center is supported by at most three
/// points; a singular 3-point system means the supports share a great
/// circle, whose poles are then the candidate centers).
inline Cap enclosing_cap(const std::vector<SpherePoint>& points) {
  if (points.empty())
    throw DegenerateInput("enclosing_cap: empty point list");
  const double r = points[0].r();
  const SphereParams params(r);
  for (const auto& p : points)
    detail::require_same_sphere(p.r(), r, "enclosing_cap");

  const int n = static_cast<int>(points.size());
  double best_radius = std::numeric_limits<double>::infinity();
  Vec3 best_center = points[0].vec();

  auto consider = [&](const Vec3& candidate) {
    double cn = candidate.norm();
    if (cn < 1e-14) return;
    Vec3 c = candidate * (r / cn);
    double radius = 0.0;
    for (const auto& p : points)
      radius = std::max(radius, (p.vec() - c).norm());
    if (radius < best_radius) {
      best_radius = radius;
      best_center = c;
    }
  };

  for (int i = 0; i < n; ++i) {
    consider(points[i].vec());
    for (int j = i + 1; j < n; ++j) {
      consider(points[i].vec() + points[j].vec());
      if ((points[i].vec() + points[j].vec()).norm() < 1e-12) {
        // Antipodal support pair: every direction orthogonal to both is a
        // candidate center of a half-sphere cap.
        consider(detail::any_orthogonal(points[i].vec()));
      }
      for (int k = j + 1; k < n; ++k) {
        Mat3 A;
        A.row(0) = points[i].vec();
        A.row(1) = points[j].vec();
        A.row(2) = points[k].vec();
        Eigen::PartialPivLU<Mat3> lu(A);
        if (std::abs(lu.determinant()) > 1e-12 * r * r * r) {
          Vec3 dir = lu.solve(Vec3::Ones());
          consider(dir);
          consider(-dir);
        } else {
          // Supports on one great circle: candidate centers are its poles.
          Vec3 nrm = (points[j].vec() - points[i].vec())
                         .cross(points[k].vec() - points[i].vec());
          if (nrm.norm() > 1e-14) {
            consider(nrm);
            consider(-nrm);
          }
        }
      }
    }
  }

  return Cap(SpherePoint(params, best_center), best_radius, CapBoundary::Closed);
}

}  // namespace chromasphere
