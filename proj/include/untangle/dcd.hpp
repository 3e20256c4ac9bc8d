#pragma once

#include <algorithm>
#include <future>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "untangle/bvh.hpp"
#include "untangle/intersect.hpp"
#include "untangle/mesh.hpp"

namespace untangle {

/// One edge-triangle crossing between two meshes.
struct EdgeFaceIntersection {
    int edge_mesh = 0;
    int edge = 0; // index into the edge mesh's EdgeSet
    int face_mesh = 0;
    int face = 0;
    int edge_v0 = 0, edge_v1 = 0; // endpoint vertex indices of the edge
    double t = 0;
    std::array<double, 3> bary{};
    Vec3 point = Vec3::Zero();
};

inline void to_json(nlohmann::json& j, const EdgeFaceIntersection& r) {
    j = nlohmann::json{{"edge_mesh", r.edge_mesh}, {"edge", r.edge},
                       {"face_mesh", r.face_mesh}, {"face", r.face},
                       {"t", r.t},                 {"bary", {r.bary[0], r.bary[1], r.bary[2]}},
                       {"point", {r.point.x(), r.point.y(), r.point.z()}}};
}

inline void write_jsonl(std::ostream& out, const std::vector<EdgeFaceIntersection>& records) {
    for (const auto& r : records) {
        nlohmann::json j = r;
        out << j.dump() << "\n";
    }
}

namespace detail {

inline std::optional<EdgeFaceIntersection> test_pair(const TriangleMesh& em, const EdgeSet& edges,
                                                     int edge_mesh_id, int e,
                                                     const TriangleMesh& fm, int face_mesh_id,
                                                     int f, const Tolerances& tol) {
    const auto& ev = edges.edges[e];
    const auto& fv = fm.faces[f];
    const Vec3& p = em.vertices[ev[0]];
    const Vec3& q = em.vertices[ev[1]];
    const auto hit = segment_triangle_intersect(p, q, fm.vertices[fv[0]], fm.vertices[fv[1]],
                                                fm.vertices[fv[2]], tol);
    if (!hit) return std::nullopt;
    EdgeFaceIntersection rec;
    rec.edge_mesh = edge_mesh_id;
    rec.edge = e;
    rec.face_mesh = face_mesh_id;
    rec.face = f;
    rec.edge_v0 = ev[0];
    rec.edge_v1 = ev[1];
    rec.t = hit->t;
    rec.bary = {hit->b1, hit->b2, hit->b3};
    rec.point = p + hit->t * (q - p);
    return rec;
}

inline void sort_records(std::vector<EdgeFaceIntersection>& records) {
    std::sort(records.begin(), records.end(),
              [](const EdgeFaceIntersection& a, const EdgeFaceIntersection& b) {
                  if (a.edge != b.edge) return a.edge < b.edge;
                  return a.face < b.face;
              });
}

} // namespace detail

/// All crossings between the edges of `edge_mesh` and the faces of
/// `face_mesh`, BVH-accelerated. The face mesh must be oriented: these
/// records feed stencil construction, which needs front/back sides.
/// Records are sorted by (edge, face), so the result is deterministic for
/// any thread count.
inline std::vector<EdgeFaceIntersection> find_intersections(
    const TriangleMesh& edge_mesh, const EdgeSet& edges, int edge_mesh_id,
    const TriangleMesh& face_mesh, int face_mesh_id, const Tolerances& tol = {},
    int threads = 1) {
    if (!face_mesh.oriented)
        throw std::runtime_error("find_intersections: face mesh '" + face_mesh.name +
                                 "' is not oriented");
    std::vector<EdgeFaceIntersection> records;
    if (edges.edge_count() == 0 || face_mesh.face_count() == 0) return records;

    std::vector<Aabb> face_boxes(face_mesh.face_count());
    for (int f = 0; f < face_mesh.face_count(); ++f) {
        const auto& fv = face_mesh.faces[f];
        face_boxes[f] = triangle_aabb(face_mesh.vertices[fv[0]], face_mesh.vertices[fv[1]],
                                      face_mesh.vertices[fv[2]])
                            .inflated(tol.box_inflation);
    }
    const Bvh bvh = Bvh::build(face_boxes);

    auto scan = [&](int begin, int end) {
        std::vector<EdgeFaceIntersection> local;
        for (int e = begin; e < end; ++e) {
            const auto& ev = edges.edges[e];
            const Aabb box = segment_aabb(edge_mesh.vertices[ev[0]], edge_mesh.vertices[ev[1]])
                                 .inflated(tol.box_inflation);
            bvh.collect(box, [&](int f) {
                if (auto rec = detail::test_pair(edge_mesh, edges, edge_mesh_id, e, face_mesh,
                                                 face_mesh_id, f, tol))
                    local.push_back(*rec);
            });
        }
        return local;
    };

    if (threads <= 1) {
        records = scan(0, edges.edge_count());
    } else {
        const int n = edges.edge_count();
        const int chunk = (n + threads - 1) / threads;
        std::vector<std::future<std::vector<EdgeFaceIntersection>>> futures;
        for (int begin = 0; begin < n; begin += chunk)
            futures.push_back(std::async(std::launch::async, scan, begin,
                                         std::min(begin + chunk, n)));
        for (auto& fut : futures) {
            auto part = fut.get();
            records.insert(records.end(), part.begin(), part.end());
        }
    }
    detail::sort_records(records);
    return records;
}

/// Exhaustive all-pairs scan with the same narrow phase; the reference the
/// BVH path is tested against, and the certifier for final untangle status.
inline std::vector<EdgeFaceIntersection> find_intersections_brute(
    const TriangleMesh& edge_mesh, const EdgeSet& edges, int edge_mesh_id,
    const TriangleMesh& face_mesh, int face_mesh_id, const Tolerances& tol = {}) {
    if (!face_mesh.oriented)
        throw std::runtime_error("find_intersections_brute: face mesh '" + face_mesh.name +
                                 "' is not oriented");
    std::vector<EdgeFaceIntersection> records;
    for (int e = 0; e < edges.edge_count(); ++e)
        for (int f = 0; f < face_mesh.face_count(); ++f)
            if (auto rec = detail::test_pair(edge_mesh, edges, edge_mesh_id, e, face_mesh,
                                             face_mesh_id, f, tol))
                records.push_back(*rec);
    detail::sort_records(records);
    return records;
}

} // namespace untangle
