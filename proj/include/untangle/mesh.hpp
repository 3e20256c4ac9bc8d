#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "untangle/types.hpp"

namespace untangle {

/// Triangle mesh with per-vertex masses and an orientation flag.
///
/// Winding convention: faces are counterclockwise when viewed from the front
/// side, so the front normal is normalize((x2-x1) x (x3-x1)).
///
/// A mesh is treated as immutable once built; algorithms that relocate
/// vertices produce a fresh position array and swap it in.
struct TriangleMesh {
    std::string name;
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    bool oriented = false;
    std::vector<double> masses;         // kg, > 0
    std::vector<uint8_t> pinned;        // pinned vertices behave as infinite mass

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }

    /// Fill masses/pinned with defaults (1 kg, unpinned) where missing.
    void ensure_defaults() {
        if (masses.size() != vertices.size()) masses.assign(vertices.size(), 1.0);
        if (pinned.size() != vertices.size()) pinned.assign(vertices.size(), 0);
    }

    double inverse_mass(int v) const { return pinned[v] ? 0.0 : 1.0 / masses[v]; }
};

inline Vec3 face_raw_normal(const TriangleMesh& mesh, int face) {
    const auto& f = mesh.faces[face];
    const Vec3& a = mesh.vertices[f[0]];
    return (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a);
}

inline double face_area(const TriangleMesh& mesh, int face) {
    return 0.5 * face_raw_normal(mesh, face).norm();
}

/// Unit front-face normal. Throws on degenerate faces instead of returning NaN.
inline Vec3 face_normal(const TriangleMesh& mesh, int face) {
    const Vec3 n = face_raw_normal(mesh, face);
    const double len = n.norm();
    if (0.5 * len < kDegenerateAreaTol)
        throw std::runtime_error("degenerate face " + std::to_string(face) + " in mesh '" +
                                 mesh.name + "' (area below tolerance)");
    return n / len;
}

inline Vec3 face_centroid(const TriangleMesh& mesh, int face) {
    const auto& f = mesh.faces[face];
    return (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
}

/// Validates the TriangleMesh invariants; throws with a description on the
/// first violation. Degenerate faces (repeated index or area below tolerance)
/// are rejected for every mesh, oriented or not.
inline void validate(const TriangleMesh& mesh) {
    const int nv = mesh.vertex_count();
    if (mesh.masses.size() != mesh.vertices.size())
        throw std::runtime_error("mesh '" + mesh.name + "': masses not sized to vertices");
    if (mesh.pinned.size() != mesh.vertices.size())
        throw std::runtime_error("mesh '" + mesh.name + "': pinned flags not sized to vertices");
    for (int v = 0; v < nv; ++v) {
        if (!(mesh.masses[v] > 0.0))
            throw std::runtime_error("mesh '" + mesh.name + "': non-positive mass at vertex " +
                                     std::to_string(v));
        if (!mesh.vertices[v].allFinite())
            throw std::runtime_error("mesh '" + mesh.name + "': non-finite position at vertex " +
                                     std::to_string(v));
    }
    for (int i = 0; i < mesh.face_count(); ++i) {
        const auto& f = mesh.faces[i];
        for (int k = 0; k < 3; ++k)
            if (f[k] < 0 || f[k] >= nv)
                throw std::runtime_error("mesh '" + mesh.name + "': face " + std::to_string(i) +
                                         " references out-of-range vertex " + std::to_string(f[k]));
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw std::runtime_error("mesh '" + mesh.name + "': face " + std::to_string(i) +
                                     " repeats a vertex index");
        if (face_area(mesh, i) < kDegenerateAreaTol)
            throw std::runtime_error("mesh '" + mesh.name + "': face " + std::to_string(i) +
                                     " is degenerate (area below tolerance)");
    }
}

/// Unique undirected edges with face incidence. Edges are sorted
/// lexicographically by (v0, v1) with v0 < v1, so construction is
/// deterministic. Non-manifold input (an edge with more than two incident
/// faces) is reported as an error, not repaired.
struct EdgeSet {
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 2>> incident_faces; // -1 when absent

    int edge_count() const { return static_cast<int>(edges.size()); }

    bool is_boundary(int e) const { return incident_faces[e][1] < 0; }

    static EdgeSet build(const TriangleMesh& mesh) {
        struct Rec {
            int a, b, face;
        };
        std::vector<Rec> recs;
        recs.reserve(mesh.faces.size() * 3);
        for (int i = 0; i < mesh.face_count(); ++i) {
            const auto& f = mesh.faces[i];
            for (int k = 0; k < 3; ++k) {
                int a = f[k], b = f[(k + 1) % 3];
                if (a > b) std::swap(a, b);
                recs.push_back({a, b, i});
            }
        }
        std::sort(recs.begin(), recs.end(), [](const Rec& x, const Rec& y) {
            if (x.a != y.a) return x.a < y.a;
            if (x.b != y.b) return x.b < y.b;
            return x.face < y.face;
        });
        EdgeSet es;
        for (size_t i = 0; i < recs.size();) {
            size_t j = i;
            while (j < recs.size() && recs[j].a == recs[i].a && recs[j].b == recs[i].b) ++j;
            if (j - i > 2)
                throw std::runtime_error("mesh '" + mesh.name + "': non-manifold edge (" +
                                         std::to_string(recs[i].a) + "," + std::to_string(recs[i].b) +
                                         ") with " + std::to_string(j - i) + " incident faces");
            es.edges.push_back({recs[i].a, recs[i].b});
            es.incident_faces.push_back({recs[i].face, j - i == 2 ? recs[i + 1].face : -1});
            i = j;
        }
        return es;
    }
};

inline bool is_closed(const EdgeSet& edges) {
    for (int e = 0; e < edges.edge_count(); ++e)
        if (edges.is_boundary(e)) return false;
    return true;
}

/// Signed enclosed volume by the divergence theorem (sum of tetrahedra to the
/// origin). Positive when faces wind counterclockwise toward the outside.
/// Requires a closed mesh.
inline double enclosed_volume(const TriangleMesh& mesh) {
    const EdgeSet es = EdgeSet::build(mesh);
    if (!is_closed(es))
        throw std::runtime_error("mesh '" + mesh.name + "': enclosed_volume requires a closed mesh");
    double vol = 0.0;
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        vol += a.dot(b.cross(c));
    }
    return vol / 6.0;
}

/// 1-ring vertex adjacency, each neighbor list sorted ascending.
inline std::vector<std::vector<int>> vertex_adjacency(const TriangleMesh& mesh, const EdgeSet& edges) {
    std::vector<std::vector<int>> adj(mesh.vertex_count());
    for (const auto& e : edges.edges) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

/// Vertices within topological distance k of `v`, including `v` itself.
/// ring(v, 0) == {v}; rings are nested as k grows.
inline std::vector<int> vertex_ring(const std::vector<std::vector<int>>& adjacency, int v, int k) {
    std::vector<int> dist(adjacency.size(), -1);
    std::queue<int> queue;
    dist[v] = 0;
    queue.push(v);
    std::vector<int> ring{v};
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop();
        if (dist[u] == k) continue;
        for (int w : adjacency[u]) {
            if (dist[w] >= 0) continue;
            dist[w] = dist[u] + 1;
            ring.push_back(w);
            queue.push(w);
        }
    }
    std::sort(ring.begin(), ring.end());
    return ring;
}

/// k-rings for all vertices.
struct VertexRings {
    int k = 0;
    std::vector<std::vector<int>> rings;

    static VertexRings build(const std::vector<std::vector<int>>& adjacency, int k) {
        VertexRings out;
        out.k = k;
        out.rings.resize(adjacency.size());
        for (size_t v = 0; v < adjacency.size(); ++v)
            out.rings[v] = vertex_ring(adjacency, static_cast<int>(v), k);
        return out;
    }
};

} // namespace untangle
