#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "untangle/diffusion.hpp"
#include "untangle/log.hpp"
#include "untangle/response.hpp"

namespace untangle {

struct UntangleConfig {
    double post_distance = 0.0; // target signed distance after response (>= 0)
    int max_iters = 32;
    DiffusionConfig diffusion;
    Tolerances tol;
    bool alternate = true;       // both-oriented meshes swap face/edge roles per iteration
    bool damping_enabled = false; // halve corrections if the crossing count keeps growing
    int threads = 1;
    // Called after every repair pass; used for per-iteration snapshots.
    std::function<void(int iteration, const TriangleMesh&, const TriangleMesh&)> on_iteration;
};

struct IterationStats {
    int intersections = 0;
    int stencils = 0;
    int zones = 0;
    int unconverged_zones = 0;
    int illegal_vertices = 0;
    std::array<int, 2> stencil_apex_mesh{0, 0}; // stencil count per apex mesh slot
    double max_penetration = 0;                 // max |D| over stencils built this pass
    double seconds_detect = 0, seconds_classify = 0, seconds_solve = 0, seconds_diffuse = 0;
    std::vector<ZoneDiagnostics> zone_diagnostics;
};

enum class UntangleStatus { Resolved, IterationBudgetExhausted };

struct UntangleReport {
    UntangleStatus status = UntangleStatus::IterationBudgetExhausted;
    std::vector<IterationStats> iterations;
    int final_intersections = 0;
    double total_seconds = 0;

    bool resolved() const { return status == UntangleStatus::Resolved; }
};

inline void to_json(nlohmann::json& j, const ZoneDiagnostics& d) {
    j = nlohmann::json{{"rows", d.rows},
                       {"converged", d.converged},
                       {"residual", d.residual},
                       {"max_abs_lambda", d.max_abs_lambda},
                       {"condition_estimate", d.condition_estimate}};
}

inline void to_json(nlohmann::json& j, const IterationStats& s) {
    j = nlohmann::json{{"intersections", s.intersections},
                       {"stencils", s.stencils},
                       {"zones", s.zones},
                       {"unconverged_zones", s.unconverged_zones},
                       {"illegal_vertices", s.illegal_vertices},
                       {"stencil_apex_mesh", {s.stencil_apex_mesh[0], s.stencil_apex_mesh[1]}},
                       {"max_penetration", s.max_penetration},
                       {"seconds", {{"detect", s.seconds_detect},
                                    {"classify", s.seconds_classify},
                                    {"solve", s.seconds_solve},
                                    {"diffuse", s.seconds_diffuse}}},
                       {"zone_diagnostics", s.zone_diagnostics}};
}

inline void to_json(nlohmann::json& j, const UntangleReport& r) {
    j = nlohmann::json{{"schema", 1},
                       {"status", r.resolved() ? "resolved" : "budget_exhausted"},
                       {"iterations", r.iterations},
                       {"final_intersections", r.final_intersections},
                       {"total_seconds", r.total_seconds}};
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Topology caches for one mesh pair; rebuilt only when connectivity changes
/// (it never does inside the untangle loop).
struct PairContext {
    std::array<EdgeSet, 2> edges;
    std::array<std::vector<std::vector<int>>, 2> adjacency;

    PairContext(const TriangleMesh& a, const TriangleMesh& b)
        : edges{EdgeSet::build(a), EdgeSet::build(b)},
          adjacency{vertex_adjacency(a, edges[0]), vertex_adjacency(b, edges[1])} {}
};

/// Ordered (edge mesh, face mesh) pairs whose crossings are counted: every
/// direction with an oriented face side.
inline std::vector<std::array<int, 2>> detection_directions(const TriangleMesh& a,
                                                            const TriangleMesh& b) {
    std::vector<std::array<int, 2>> dirs;
    if (b.oriented) dirs.push_back({0, 1});
    if (a.oriented) dirs.push_back({1, 0});
    if (dirs.empty())
        throw std::runtime_error("untangle: neither mesh is oriented");
    return dirs;
}

/// The direction whose crossings become stencils this iteration. With both
/// meshes oriented the roles swap on iteration parity, starting with the
/// second mesh as the face side.
inline std::array<int, 2> stencil_direction(const TriangleMesh& a, const TriangleMesh& b,
                                            const UntangleConfig& config, int iteration) {
    if (a.oriented && b.oriented) {
        if (config.alternate && iteration % 2 == 1) return {1, 0};
        return {0, 1};
    }
    if (b.oriented) return {0, 1};
    if (a.oriented) return {1, 0};
    throw std::runtime_error("untangle: neither mesh is oriented");
}

struct DetectionResult {
    std::vector<EdgeFaceIntersection> stencil_source;
    int total = 0;
};

inline DetectionResult detect(std::span<TriangleMesh> meshes, const PairContext& ctx,
                              const UntangleConfig& config, int iteration) {
    const auto dirs = detection_directions(meshes[0], meshes[1]);
    const auto source_dir = stencil_direction(meshes[0], meshes[1], config, iteration);
    DetectionResult result;
    for (const auto& [em, fm] : dirs) {
        auto records = find_intersections(meshes[em], ctx.edges[em], em, meshes[fm], fm,
                                          config.tol, config.threads);
        result.total += static_cast<int>(records.size());
        if (em == source_dir[0] && fm == source_dir[1]) result.stencil_source = std::move(records);
    }
    return result;
}

/// Classify, build stencils, solve zones, diffuse, apply. Corrections from
/// unconverged zones are dropped; those penetrations are re-detected next
/// iteration.
inline void repair_pass(std::span<TriangleMesh> meshes, const PairContext& ctx,
                        const UntangleConfig& config, const DetectionResult& detection,
                        double correction_scale, IterationStats& stats) {
    const auto t0 = Clock::now();
    const LegalityMap legality = classify_vertices(detection.stencil_source, meshes);
    for (const auto& per_mesh : legality)
        for (Legality l : per_mesh)
            if (l == Legality::Illegal) ++stats.illegal_vertices;

    const std::vector<PenetrationStencil> stencils = build_stencils(detection.stencil_source, meshes);
    stats.stencils = static_cast<int>(stencils.size());
    for (const auto& s : stencils) {
        ++stats.stencil_apex_mesh[s.apex.mesh];
        stats.max_penetration = std::max(stats.max_penetration, -s.distance);
    }
    const std::vector<ImpactZone> zones = partition_impact_zones(stencils);
    stats.zones = static_cast<int>(zones.size());
    stats.seconds_classify = seconds_since(t0);

    const auto t1 = Clock::now();
    std::array<std::vector<std::pair<int, Vec3>>, 2> corrections;
    std::array<bool, 2> has_apex{false, false};
    for (const ImpactZone& zone : zones) {
        ZoneSystem sys = assemble_zone_system(zone, meshes, config.post_distance);
        ZoneDiagnostics diag = solve_multipliers(sys);
        stats.zone_diagnostics.push_back(diag);
        if (!diag.converged) {
            ++stats.unconverged_zones;
            continue;
        }
        for (const auto& [ref, delta] : displacement_updates(sys))
            corrections[ref.mesh].emplace_back(ref.vertex, correction_scale * delta);
        for (const auto& s : zone.stencils) has_apex[s.apex.mesh] = true;
    }
    stats.seconds_solve = seconds_since(t1);

    // Diffusion runs on the mesh(es) carrying illegal apex vertices; face-side
    // corrections on the other mesh are applied directly (a rings = 0 field).
    const auto t2 = Clock::now();
    for (int m = 0; m < 2; ++m) {
        if (corrections[m].empty()) continue;
        TriangleMesh& mesh = meshes[m];
        DisplacementField field =
            DisplacementField::make(mesh.vertex_count(), corrections[m], &mesh.pinned);
        DiffusionConfig diffusion = config.diffusion;
        if (!has_apex[m]) diffusion.rings = 0;
        diffuse(field, ctx.adjacency[m], diffusion);
        std::vector<Vec3> positions = mesh.vertices; // fresh array, swapped in whole
        apply_field(field, positions);
        mesh.vertices = std::move(positions);
    }
    stats.seconds_diffuse = seconds_since(t2);
}

} // namespace detail

/// One full detect -> classify -> relocate -> diffuse pass. `iteration`
/// selects the face side when both meshes are oriented.
inline IterationStats untangle_step(TriangleMesh& a, TriangleMesh& b, const UntangleConfig& config,
                                    int iteration = 0) {
    std::array<TriangleMesh, 2> pair{std::move(a), std::move(b)};
    std::span<TriangleMesh> meshes(pair);
    const detail::PairContext ctx(meshes[0], meshes[1]);
    IterationStats stats;
    const auto t0 = detail::Clock::now();
    const detail::DetectionResult detection = detail::detect(meshes, ctx, config, iteration);
    stats.intersections = detection.total;
    stats.seconds_detect = detail::seconds_since(t0);
    if (detection.total > 0) detail::repair_pass(meshes, ctx, config, detection, 1.0, stats);
    a = std::move(pair[0]);
    b = std::move(pair[1]);
    return stats;
}

/// Runs untangle steps until a detection pass certifies zero crossings or the
/// iteration budget runs out. The final detection pass is always what decides
/// the status; a solve that claims success never does.
inline UntangleReport untangle_meshes(TriangleMesh& a, TriangleMesh& b, const UntangleConfig& config) {
    const auto start = detail::Clock::now();
    std::array<TriangleMesh, 2> pair{std::move(a), std::move(b)};
    std::span<TriangleMesh> meshes(pair);
    const detail::PairContext ctx(meshes[0], meshes[1]);
    UntangleReport report;
    std::vector<int> counts;
    double correction_scale = 1.0;

    for (int iteration = 0;; ++iteration) {
        IterationStats stats;
        const auto t0 = detail::Clock::now();
        const detail::DetectionResult detection = detail::detect(meshes, ctx, config, iteration);
        stats.intersections = detection.total;
        stats.seconds_detect = detail::seconds_since(t0);
        counts.push_back(detection.total);

        if (detection.total == 0) {
            report.iterations.push_back(std::move(stats));
            report.status = UntangleStatus::Resolved;
            report.final_intersections = 0;
            break;
        }
        if (iteration >= config.max_iters) {
            report.iterations.push_back(std::move(stats));
            report.status = UntangleStatus::IterationBudgetExhausted;
            report.final_intersections = detection.total;
            break;
        }
        if (config.damping_enabled && counts.size() >= 3) {
            const size_t n = counts.size();
            if (counts[n - 3] < counts[n - 2] && counts[n - 2] < counts[n - 1]) {
                correction_scale = 0.5;
                UNTANGLE_LOG_INFO("untangle: crossing count rising for 3 iterations, damping corrections");
            }
        }
        detail::repair_pass(meshes, ctx, config, detection, correction_scale, stats);
        UNTANGLE_LOG_DEBUG("untangle iteration %d: %d crossings, %d stencils, %d zones", iteration,
                           stats.intersections, stats.stencils, stats.zones);
        report.iterations.push_back(std::move(stats));
        if (config.on_iteration) config.on_iteration(iteration, meshes[0], meshes[1]);
    }
    report.total_seconds = detail::seconds_since(start);
    a = std::move(pair[0]);
    b = std::move(pair[1]);
    return report;
}

/// Brute-force certification: scans every direction with an oriented face
/// side and reports the total crossing count on the current positions.
inline int certify_crossings(const TriangleMesh& a, const TriangleMesh& b,
                             const Tolerances& tol = {}) {
    const detail::PairContext ctx(a, b);
    const TriangleMesh* meshes[2] = {&a, &b};
    int total = 0;
    for (const auto& [em, fm] : detail::detection_directions(a, b))
        total += static_cast<int>(find_intersections_brute(*meshes[em], ctx.edges[em], em,
                                                           *meshes[fm], fm, tol)
                                      .size());
    return total;
}

} // namespace untangle
