#pragma once

#include <cstdint>
#include <queue>
#include <utility>
#include <vector>

#include "untangle/types.hpp"

namespace untangle {

struct DiffusionConfig {
    int rings = 2;            // active region radius around the Dirichlet set
    int iters = 20;           // Jacobi sweep budget
    double stop_delta = 1e-9; // early stop once the max sweep delta falls below (meters)
};

/// Per-vertex correction vectors. Dirichlet vertices hold fixed values (the
/// zone-solve corrections); diffusion smooths them into the surrounding
/// region. Values outside the active region are exactly zero, and pinned
/// vertices are clamped to zero wherever they sit.
struct DisplacementField {
    std::vector<Vec3> values;
    std::vector<uint8_t> dirichlet;
    std::vector<uint8_t> pinned;
    std::vector<uint8_t> active; // filled by diffuse()

    static DisplacementField make(int vertex_count,
                                  const std::vector<std::pair<int, Vec3>>& dirichlet_values,
                                  const std::vector<uint8_t>* pinned_flags = nullptr) {
        DisplacementField field;
        field.values.assign(vertex_count, Vec3::Zero());
        field.dirichlet.assign(vertex_count, 0);
        field.pinned.assign(vertex_count, 0);
        if (pinned_flags) field.pinned = *pinned_flags;
        for (const auto& [v, value] : dirichlet_values) {
            if (field.pinned[v]) continue; // pinned vertices never move
            field.values[v] = value;
            field.dirichlet[v] = 1;
        }
        return field;
    }
};

struct DiffusionStats {
    int sweeps = 0;
    double last_delta = 0;
    bool converged = false;
};

/// Uniform-weight graph-Laplacian Jacobi sweeps with Dirichlet clamping.
/// Each sweep replaces a free active vertex by the mean of its 1-ring; the
/// region boundary acts as zero, so the componentwise maximum principle
/// holds: every diffused value stays within [min, max] of the Dirichlet
/// values and zero. Double-buffered, hence deterministic.
inline DiffusionStats diffuse(DisplacementField& field,
                              const std::vector<std::vector<int>>& adjacency,
                              const DiffusionConfig& config) {
    const int n = static_cast<int>(field.values.size());
    field.active.assign(n, 0);

    // Multi-source BFS out to `rings` from the Dirichlet set.
    std::queue<std::pair<int, int>> frontier;
    for (int v = 0; v < n; ++v)
        if (field.dirichlet[v]) {
            field.active[v] = 1;
            frontier.emplace(v, 0);
        }
    while (!frontier.empty()) {
        const auto [v, depth] = frontier.front();
        frontier.pop();
        if (depth == config.rings) continue;
        for (int w : adjacency[v])
            if (!field.active[w]) {
                field.active[w] = 1;
                frontier.emplace(w, depth + 1);
            }
    }

    DiffusionStats stats;
    std::vector<Vec3> next = field.values;
    for (int sweep = 0; sweep < config.iters; ++sweep) {
        double max_delta = 0;
        for (int v = 0; v < n; ++v) {
            if (!field.active[v] || field.dirichlet[v] || field.pinned[v]) continue;
            if (adjacency[v].empty()) continue;
            Vec3 sum = Vec3::Zero();
            for (int w : adjacency[v]) sum += field.values[w];
            const Vec3 value = sum / static_cast<double>(adjacency[v].size());
            max_delta = std::max(max_delta, (value - field.values[v]).cwiseAbs().maxCoeff());
            next[v] = value;
        }
        field.values.swap(next);
        next = field.values;
        ++stats.sweeps;
        stats.last_delta = max_delta;
        if (max_delta < config.stop_delta) {
            stats.converged = true;
            break;
        }
    }
    return stats;
}

/// positions += field, all vertices. Values outside the active region are
/// zero, so untouched vertices keep their exact positions.
inline void apply_field(const DisplacementField& field, std::vector<Vec3>& positions) {
    for (size_t v = 0; v < positions.size(); ++v) positions[v] += field.values[v];
}

} // namespace untangle
