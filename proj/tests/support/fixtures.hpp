#pragma once

// Shared geometric fixtures for the unit and acceptance suites.

#include <array>
#include <cstdint>
#include <vector>

#include "untangle/mesh.hpp"
#include "untangle/shapes.hpp"

namespace fixtures {

using untangle::TriangleMesh;
using untangle::Vec3;

inline TriangleMesh single_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                                    bool oriented = true) {
    TriangleMesh m;
    m.name = "tri";
    m.vertices = {a, b, c};
    m.faces = {{0, 1, 2}};
    m.oriented = oriented;
    m.ensure_defaults();
    return m;
}

/// An edge piercing a unit triangle: the edge (v0, v1) of the un-oriented
/// mesh crosses the oriented face at (0.25, 0.25, 0) with the apex v0 at
/// signed distance -0.4. The other two edges miss the face.
struct EdgeThroughFace {
    TriangleMesh edge_mesh; // slot 0
    TriangleMesh face_mesh; // slot 1
};

inline EdgeThroughFace edge_through_face() {
    EdgeThroughFace fx;
    fx.face_mesh = single_triangle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
    fx.face_mesh.name = "face";

    fx.edge_mesh.name = "edge";
    fx.edge_mesh.vertices = {Vec3(0.25, 0.25, -0.4), Vec3(0.25, 0.25, 0.6), Vec3(2.0, 2.0, 0.6)};
    fx.edge_mesh.faces = {{0, 1, 2}};
    fx.edge_mesh.oriented = false;
    fx.edge_mesh.ensure_defaults();
    return fx;
}

/// Two oriented faces forming a wedge (one in z = 0 with normal +z, one in
/// x = 0 with normal +x) and a single edge crossing both. Each endpoint is
/// legal with respect to one face and illegal with respect to the other.
struct WedgeFixture {
    TriangleMesh edge_mesh; // slot 0
    TriangleMesh face_mesh; // slot 1, two faces
};

inline WedgeFixture wedge() {
    WedgeFixture fx;
    fx.face_mesh.name = "wedge";
    fx.face_mesh.vertices = {Vec3(-1, -0.5, 0), Vec3(1, -0.5, 0),  Vec3(0, 1, 0),
                             Vec3(0, -0.5, -1), Vec3(0, 1.5, 0),   Vec3(0, -0.5, 1)};
    fx.face_mesh.faces = {{0, 1, 2}, {3, 4, 5}};
    fx.face_mesh.oriented = true;
    fx.face_mesh.ensure_defaults();

    fx.edge_mesh.name = "crossing";
    fx.edge_mesh.vertices = {Vec3(-0.5, 0.2, 0.5), Vec3(0.5, 0.2, -0.5), Vec3(5, 5, 5)};
    fx.edge_mesh.faces = {{0, 1, 2}};
    fx.edge_mesh.oriented = false;
    fx.edge_mesh.ensure_defaults();
    return fx;
}

/// Two edges sharing an apex below a large oriented face; both crossings
/// collapse to the same (apex, face) stencil.
struct SharedApexFixture {
    TriangleMesh edge_mesh; // slot 0
    TriangleMesh face_mesh; // slot 1
};

inline SharedApexFixture shared_apex() {
    SharedApexFixture fx;
    fx.face_mesh = single_triangle(Vec3(-2, -2, 0), Vec3(3, -2, 0), Vec3(0, 3, 0));
    fx.face_mesh.name = "big_face";

    fx.edge_mesh.name = "vee";
    fx.edge_mesh.vertices = {Vec3(0, 0, -0.3), Vec3(-0.5, 0.2, 0.5), Vec3(0.5, 0.2, 0.5)};
    fx.edge_mesh.faces = {{0, 1, 2}};
    fx.edge_mesh.oriented = false;
    fx.edge_mesh.ensure_defaults();
    return fx;
}

/// Icosphere pair with 20% radial overlap (centers 1.8 r apart), both
/// oriented; the end-to-end untangle fixture.
inline std::array<TriangleMesh, 2> overlapping_icospheres(double radius = 1.0) {
    std::array<TriangleMesh, 2> pair{untangle::make_icosphere(2, radius, Vec3(0, 0, 0)),
                                     untangle::make_icosphere(2, radius, Vec3(1.8 * radius, 0, 0))};
    pair[0].name = "sphere_a";
    pair[1].name = "sphere_b";
    pair[0].oriented = pair[1].oriented = true;
    return pair;
}

inline uint64_t hash_positions(const TriangleMesh& mesh) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](uint64_t bits) {
        h ^= bits;
        h *= 1099511628211ull;
    };
    for (const Vec3& p : mesh.vertices)
        for (int k = 0; k < 3; ++k) {
            uint64_t bits;
            const double value = p[k];
            static_assert(sizeof value == sizeof bits);
            __builtin_memcpy(&bits, &value, sizeof bits);
            mix(bits);
        }
    return h;
}

} // namespace fixtures
