#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <functional>

namespace untangle {

using Vec3 = Eigen::Vector3d;

/// Identifies a vertex across a set of meshes (mesh slot, vertex index).
struct VertexRef {
    int mesh = 0;
    int vertex = 0;

    friend bool operator==(const VertexRef& a, const VertexRef& b) {
        return a.mesh == b.mesh && a.vertex == b.vertex;
    }
    friend bool operator<(const VertexRef& a, const VertexRef& b) {
        if (a.mesh != b.mesh) return a.mesh < b.mesh;
        return a.vertex < b.vertex;
    }
};

struct VertexRefHash {
    size_t operator()(const VertexRef& r) const {
        return std::hash<uint64_t>()((uint64_t(uint32_t(r.mesh)) << 32) | uint32_t(r.vertex));
    }
};

/// Geometric tolerance policy for the collision pipeline. All lengths in meters.
struct Tolerances {
    double box_inflation = 1e-6;     // AABB inflation for the broad phase
    double barycentric_slack = 1e-9; // hits on triangle edges count as inside
    double parametric_slack = 1e-9;  // segment endpoints grazing a face do not count
};

/// Faces with area below this are rejected at validation; the response math
/// divides by normal magnitude and cannot tolerate them.
inline constexpr double kDegenerateAreaTol = 1e-12; // m^2

} // namespace untangle
