#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "untangle/dcd.hpp"
#include "untangle/mesh.hpp"

namespace untangle {

/// Per-vertex, per-iteration state: a vertex is Legal/Illegal only when it is
/// an endpoint of at least one crossing edge; everything else stays Unknown.
enum class Legality : uint8_t { Unknown = 0, Legal = 1, Illegal = 2 };

using LegalityMap = std::vector<std::vector<Legality>>; // indexed [mesh][vertex]

/// The quadruple {x0, x1, x2, x3}: an illegally placed apex vertex plus the
/// oriented face it violates, with the face normal and signed distance frozen
/// at build time.
struct PenetrationStencil {
    VertexRef apex;                    // x0, on the back side of the face
    int face_mesh = 0;
    int face = 0;
    std::array<int, 3> face_vertices{}; // x1, x2, x3 in face_mesh
    Vec3 normal = Vec3::Zero();         // face normal at build time
    double distance = 0;                // signed distance, negative at build
};

inline void to_json(nlohmann::json& j, const PenetrationStencil& s) {
    j = nlohmann::json{{"apex_mesh", s.apex.mesh},
                       {"apex", s.apex.vertex},
                       {"face_mesh", s.face_mesh},
                       {"face", s.face},
                       {"face_vertices", {s.face_vertices[0], s.face_vertices[1], s.face_vertices[2]}},
                       {"normal", {s.normal.x(), s.normal.y(), s.normal.z()}},
                       {"distance", s.distance}};
}

/// A maximal set of stencils connected by shared vertices; solved as one
/// linear system. Zones partition the stencil list and are vertex-disjoint.
struct ImpactZone {
    std::vector<PenetrationStencil> stencils;
    std::vector<VertexRef> support; // sorted, unique, both meshes
};

/// Classifies the endpoints of every crossing edge against the face it
/// crosses: the endpoint behind the face plane (negative signed distance to
/// the face centroid along the normal) is Illegal, the other Legal. A vertex
/// that collects conflicting verdicts from different faces resolves to
/// Illegal, so every crossed face ends up with a constraint.
inline LegalityMap classify_vertices(const std::vector<EdgeFaceIntersection>& intersections,
                                     std::span<const TriangleMesh> meshes) {
    LegalityMap legality(meshes.size());
    for (size_t m = 0; m < meshes.size(); ++m)
        legality[m].assign(meshes[m].vertex_count(), Legality::Unknown);

    auto mark = [&](int mesh, int vertex, Legality verdict) {
        Legality& slot = legality[mesh][vertex];
        if (slot == Legality::Illegal) return; // pessimistic: Illegal wins
        slot = verdict == Legality::Illegal ? Legality::Illegal : Legality::Legal;
    };

    for (const auto& rec : intersections) {
        const TriangleMesh& fm = meshes[rec.face_mesh];
        if (!fm.oriented)
            throw std::runtime_error("classify_vertices: crossing references face of un-oriented mesh '" +
                                     fm.name + "'");
        const Vec3 n = face_normal(fm, rec.face);
        const Vec3 c = face_centroid(fm, rec.face);
        const TriangleMesh& em = meshes[rec.edge_mesh];
        for (int v : {rec.edge_v0, rec.edge_v1}) {
            const double side = n.dot(em.vertices[v] - c);
            mark(rec.edge_mesh, v, side < 0.0 ? Legality::Illegal : Legality::Legal);
        }
    }
    return legality;
}

/// Builds one stencil per crossing: the edge endpoint behind the crossed
/// oriented face becomes the apex. Exact duplicates (same apex, same face
/// vertices) collapse to one stencil; near-duplicates over the same vertices
/// but different faces are kept and handled jointly by the zone solve.
inline std::vector<PenetrationStencil> build_stencils(
    const std::vector<EdgeFaceIntersection>& intersections, std::span<const TriangleMesh> meshes) {
    std::vector<PenetrationStencil> stencils;
    struct KeyHash {
        size_t operator()(const std::array<int, 6>& k) const {
            size_t h = 1469598103934665603ull;
            for (int x : k) {
                h ^= static_cast<size_t>(static_cast<uint32_t>(x));
                h *= 1099511628211ull;
            }
            return h;
        }
    };
    std::unordered_set<std::array<int, 6>, KeyHash> seen;

    for (const auto& rec : intersections) {
        const TriangleMesh& fm = meshes[rec.face_mesh];
        if (!fm.oriented)
            throw std::runtime_error("build_stencils: crossing references face of un-oriented mesh '" +
                                     fm.name + "'");
        const TriangleMesh& em = meshes[rec.edge_mesh];
        const Vec3 n = face_normal(fm, rec.face);
        const Vec3 c = face_centroid(fm, rec.face);
        const double s0 = n.dot(em.vertices[rec.edge_v0] - c);
        const double s1 = n.dot(em.vertices[rec.edge_v1] - c);
        // A transversal crossing has exactly one endpoint behind the plane;
        // if numeric noise puts both in front, skip and let the next
        // iteration re-detect.
        const int apex = s0 < s1 ? rec.edge_v0 : rec.edge_v1;
        const double dist = std::min(s0, s1);
        if (dist >= 0.0) continue;

        const auto& fv = fm.faces[rec.face];
        std::array<int, 3> sorted_face = {fv[0], fv[1], fv[2]};
        std::sort(sorted_face.begin(), sorted_face.end());
        const std::array<int, 6> key = {rec.edge_mesh, apex,          rec.face_mesh,
                                        sorted_face[0], sorted_face[1], sorted_face[2]};
        if (!seen.insert(key).second) continue;

        PenetrationStencil st;
        st.apex = {rec.edge_mesh, apex};
        st.face_mesh = rec.face_mesh;
        st.face = rec.face;
        st.face_vertices = {fv[0], fv[1], fv[2]};
        st.normal = n;
        st.distance = dist;
        stencils.push_back(st);
    }
    return stencils;
}

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

inline std::array<VertexRef, 4> stencil_refs(const PenetrationStencil& s) {
    return {s.apex, VertexRef{s.face_mesh, s.face_vertices[0]},
            VertexRef{s.face_mesh, s.face_vertices[1]}, VertexRef{s.face_mesh, s.face_vertices[2]}};
}

} // namespace detail

/// Union-find over shared (mesh, vertex) keys. Zones come out ordered by
/// their smallest contained vertex key, stencils in input order within each
/// zone, so the partition is deterministic.
inline std::vector<ImpactZone> partition_impact_zones(const std::vector<PenetrationStencil>& stencils) {
    const int n = static_cast<int>(stencils.size());
    detail::UnionFind uf(n);
    std::unordered_map<VertexRef, int, VertexRefHash> owner; // vertex -> first stencil seen
    for (int i = 0; i < n; ++i) {
        for (const VertexRef& ref : detail::stencil_refs(stencils[i])) {
            auto [it, inserted] = owner.emplace(ref, i);
            if (!inserted) uf.unite(i, it->second);
        }
    }

    std::unordered_map<int, int> root_to_zone;
    std::vector<ImpactZone> zones;
    for (int i = 0; i < n; ++i) {
        const int root = uf.find(i);
        auto [it, inserted] = root_to_zone.emplace(root, static_cast<int>(zones.size()));
        if (inserted) zones.emplace_back();
        ImpactZone& zone = zones[it->second];
        zone.stencils.push_back(stencils[i]);
        for (const VertexRef& ref : detail::stencil_refs(stencils[i])) zone.support.push_back(ref);
    }
    for (ImpactZone& zone : zones) {
        std::sort(zone.support.begin(), zone.support.end());
        zone.support.erase(std::unique(zone.support.begin(), zone.support.end()), zone.support.end());
    }
    std::sort(zones.begin(), zones.end(), [](const ImpactZone& a, const ImpactZone& b) {
        return a.support.front() < b.support.front();
    });
    return zones;
}

} // namespace untangle
