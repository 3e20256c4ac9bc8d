#pragma once

#include <cmath>
#include <optional>

#include "untangle/types.hpp"

namespace untangle {

struct SegTriHit {
    double t = 0;                 // segment parameter in (0, 1)
    double b1 = 0, b2 = 0, b3 = 0; // barycentric coordinates of the hit point
};

/// Segment-triangle crossing test (Moller-Trumbore). Returns the crossing iff
/// the segment pq transversally crosses triangle abc:
///   - barycentrics within the triangle up to `barycentric_slack` (hits on
///     edges count as inside),
///   - t strictly inside (parametric_slack, 1 - parametric_slack); endpoint
///     grazing is not a crossing,
///   - coplanar overlap is not a crossing (measure-zero configuration).
/// The triangle is assumed non-degenerate.
inline std::optional<SegTriHit> segment_triangle_intersect(const Vec3& p, const Vec3& q,
                                                           const Vec3& a, const Vec3& b,
                                                           const Vec3& c,
                                                           const Tolerances& tol = {}) {
    const Vec3 dir = q - p;
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 h = dir.cross(e2);
    const double det = e1.dot(h);
    if (det == 0.0) return std::nullopt; // parallel or coplanar
    const double inv_det = 1.0 / det;
    const Vec3 s = p - a;
    const double u = s.dot(h) * inv_det; // weight of b
    const Vec3 sxe1 = s.cross(e1);
    const double v = dir.dot(sxe1) * inv_det; // weight of c
    const double t = e2.dot(sxe1) * inv_det;
    if (!std::isfinite(u) || !std::isfinite(v) || !std::isfinite(t)) return std::nullopt;
    const double eb = tol.barycentric_slack;
    if (u < -eb || v < -eb || u + v > 1.0 + eb) return std::nullopt;
    if (t <= tol.parametric_slack || t >= 1.0 - tol.parametric_slack) return std::nullopt;
    return SegTriHit{t, 1.0 - u - v, u, v};
}

} // namespace untangle
