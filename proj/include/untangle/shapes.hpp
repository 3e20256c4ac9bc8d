#pragma once

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>

#include "untangle/mesh.hpp"

namespace untangle {

/// Rectangular sheet in the z = `z` plane, `nx` x `ny` vertices spanning
/// `sx` x `sy` meters centered on (cx, cy). Front side faces +z.
inline TriangleMesh make_grid(int nx, int ny, double sx, double sy, double cx = 0.0,
                              double cy = 0.0, double z = 0.0) {
    TriangleMesh m;
    m.name = "grid";
    const double x0 = cx - sx / 2, y0 = cy - sy / 2;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.vertices.emplace_back(x0 + sx * i / (nx - 1), y0 + sy * j / (ny - 1), z);
    auto at = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    m.ensure_defaults();
    return m;
}

/// Axis-aligned box, 12 triangles wound outward.
inline TriangleMesh make_box(const Vec3& center, const Vec3& half_extents) {
    TriangleMesh m;
    m.name = "box";
    for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy)
            for (int dz = 0; dz < 2; ++dz)
                m.vertices.emplace_back(center.x() + (dx ? 1 : -1) * half_extents.x(),
                                        center.y() + (dy ? 1 : -1) * half_extents.y(),
                                        center.z() + (dz ? 1 : -1) * half_extents.z());
    auto quad = [&m](int a, int b, int c, int d) {
        m.faces.push_back({a, b, c});
        m.faces.push_back({a, c, d});
    };
    quad(4, 6, 7, 5); // +x
    quad(0, 1, 3, 2); // -x
    quad(2, 3, 7, 6); // +y
    quad(0, 4, 5, 1); // -y
    quad(1, 5, 7, 3); // +z
    quad(0, 2, 6, 4); // -z
    m.ensure_defaults();
    return m;
}

/// Icosphere: subdivided icosahedron projected onto a sphere of radius r.
/// subdivisions = 2 gives 162 vertices / 320 faces.
inline TriangleMesh make_icosphere(int subdivisions, double radius, const Vec3& center = Vec3::Zero()) {
    TriangleMesh m;
    m.name = "icosphere";
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    const double raw[12][3] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                               {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                               {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (const auto& p : raw) m.vertices.push_back(Vec3(p[0], p[1], p[2]).normalized());
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = m.vertex_count();
            m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.faces.size() * 4);
        for (const auto& f : m.faces) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    for (Vec3& v : m.vertices) v = center + radius * v;
    m.ensure_defaults();
    return m;
}

/// Torus around the z axis: `major_segments` x `minor_segments` vertices,
/// major radius R, tube radius r. 24 x 24 gives 576 vertices.
inline TriangleMesh make_torus(int major_segments, int minor_segments, double R, double r,
                               const Vec3& center = Vec3::Zero()) {
    TriangleMesh m;
    m.name = "torus";
    const double tau = 2.0 * std::numbers::pi;
    for (int i = 0; i < major_segments; ++i) {
        const double u = tau * i / major_segments;
        for (int j = 0; j < minor_segments; ++j) {
            const double v = tau * j / minor_segments;
            m.vertices.push_back(center + Vec3((R + r * std::cos(v)) * std::cos(u),
                                               (R + r * std::cos(v)) * std::sin(u),
                                               r * std::sin(v)));
        }
    }
    auto at = [&](int i, int j) {
        return (i % major_segments) * minor_segments + (j % minor_segments);
    };
    for (int i = 0; i < major_segments; ++i)
        for (int j = 0; j < minor_segments; ++j) {
            m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    m.ensure_defaults();
    return m;
}

/// Closed cone: apex at base_center + (0,0,height), circular base of the
/// given radius. Wound outward.
inline TriangleMesh make_cone(int segments, double radius, double height,
                              const Vec3& base_center = Vec3::Zero()) {
    TriangleMesh m;
    m.name = "cone";
    m.vertices.push_back(base_center + Vec3(0, 0, height)); // apex
    m.vertices.push_back(base_center);                      // base center
    const double tau = 2.0 * std::numbers::pi;
    for (int i = 0; i < segments; ++i) {
        const double a = tau * i / segments;
        m.vertices.push_back(base_center + Vec3(radius * std::cos(a), radius * std::sin(a), 0));
    }
    auto rim = [&](int i) { return 2 + (i % segments); };
    for (int i = 0; i < segments; ++i) {
        m.faces.push_back({0, rim(i), rim(i + 1)});
        m.faces.push_back({1, rim(i + 1), rim(i)});
    }
    m.ensure_defaults();
    return m;
}

} // namespace untangle
