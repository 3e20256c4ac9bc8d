#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "untangle/stencil.hpp"

namespace untangle {

/// One linearized non-penetration constraint: four vertices with coefficient
/// blocks (+n, -n/3, -n/3, -n/3). The blocks sum to zero, which makes the
/// constraint translation-invariant and the response momentum-conserving.
struct ConstraintRow {
    std::array<VertexRef, 4> refs;
    std::array<Vec3, 4> blocks;
    double distance = 0; // row . x at build time == signed distance
};

inline ConstraintRow constraint_gradient(const PenetrationStencil& s) {
    ConstraintRow row;
    row.refs = {s.apex, VertexRef{s.face_mesh, s.face_vertices[0]},
                VertexRef{s.face_mesh, s.face_vertices[1]},
                VertexRef{s.face_mesh, s.face_vertices[2]}};
    row.blocks = {s.normal, -s.normal / 3.0, -s.normal / 3.0, -s.normal / 3.0};
    row.distance = s.distance;
    return row;
}

/// Signed plane distance of the apex from the face centroid along the
/// stencil's frozen normal; negative in penetration.
inline double signed_distance(const PenetrationStencil& s, std::span<const TriangleMesh> meshes) {
    const TriangleMesh& fm = meshes[s.face_mesh];
    const Vec3 centroid = (fm.vertices[s.face_vertices[0]] + fm.vertices[s.face_vertices[1]] +
                           fm.vertices[s.face_vertices[2]]) /
                          3.0;
    return s.normal.dot(meshes[s.apex.mesh].vertices[s.apex.vertex] - centroid);
}

inline double evaluate_row(const ConstraintRow& row, std::span<const TriangleMesh> meshes) {
    double d = 0;
    for (int i = 0; i < 4; ++i)
        d += row.blocks[i].dot(meshes[row.refs[i].mesh].vertices[row.refs[i].vertex]);
    return d;
}

/// The per-impact-zone linear system: Gram matrix A = grad_D M^-1 grad_D^T,
/// right-hand side grad_D x - d, Tikhonov-regularized so rank-deficient zones
/// (duplicate or dependent rows) still yield the minimum-norm multiplier.
struct ZoneSystem {
    std::vector<ConstraintRow> rows;
    std::vector<VertexRef> support;  // sorted unique vertices of all rows
    std::vector<double> inv_mass;    // aligned with support; 0 for pinned
    Eigen::MatrixXd gram;
    Eigen::VectorXd rhs;
    Eigen::VectorXd lambda;
    double regularization = 0;

    int row_count() const { return static_cast<int>(rows.size()); }

    int support_index(const VertexRef& ref) const {
        const auto it = std::lower_bound(support.begin(), support.end(), ref);
        return static_cast<int>(it - support.begin());
    }
};

struct ZoneDiagnostics {
    int rows = 0;
    bool converged = false;
    double residual = 0;           // relative, on the regularized system
    double max_abs_lambda = 0;
    double condition_estimate = 0; // Gershgorin bound ratio
};

inline ZoneSystem assemble_zone_system(const ImpactZone& zone, std::span<const TriangleMesh> meshes,
                                       double post_distance) {
    ZoneSystem sys;
    sys.support = zone.support;
    sys.inv_mass.resize(sys.support.size());
    for (size_t i = 0; i < sys.support.size(); ++i)
        sys.inv_mass[i] = meshes[sys.support[i].mesh].inverse_mass(sys.support[i].vertex);

    sys.rows.reserve(zone.stencils.size());
    for (const auto& s : zone.stencils) {
        const ConstraintRow row = constraint_gradient(s);
        const bool duplicate = std::any_of(sys.rows.begin(), sys.rows.end(), [&](const ConstraintRow& r) {
            if (r.refs != row.refs || r.distance != row.distance) return false;
            for (int p = 0; p < 4; ++p)
                if ((r.blocks[p].array() != row.blocks[p].array()).any()) return false;
            return true;
        });
        if (!duplicate) sys.rows.push_back(row);
    }

    const int k = sys.row_count();
    sys.gram.setZero(k, k);
    sys.rhs.resize(k);
    for (int i = 0; i < k; ++i) {
        sys.rhs(i) = sys.rows[i].distance - post_distance;
        for (int j = i; j < k; ++j) {
            double a = 0;
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q)
                    if (sys.rows[i].refs[p] == sys.rows[j].refs[q])
                        a += sys.inv_mass[sys.support_index(sys.rows[i].refs[p])] *
                             sys.rows[i].blocks[p].dot(sys.rows[j].blocks[q]);
            sys.gram(i, j) = a;
            sys.gram(j, i) = a;
        }
    }
    sys.regularization = k > 0 ? 1e-10 * sys.gram.trace() / k : 0.0;
    return sys;
}

namespace detail {

// Plain conjugate gradients; the Gram matrix is dense but zones above the
// direct-solve cutoff are rare, and 4k iterations bound the work.
inline void conjugate_gradient(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               Eigen::VectorXd& x, int max_iters, double rel_tol) {
    x.setZero(b.size());
    Eigen::VectorXd r = b;
    Eigen::VectorXd p = r;
    double rr = r.squaredNorm();
    const double target = rel_tol * rel_tol * b.squaredNorm();
    for (int it = 0; it < max_iters && rr > target; ++it) {
        const Eigen::VectorXd Ap = A * p;
        const double pAp = p.dot(Ap);
        if (pAp <= 0.0 || !std::isfinite(pAp)) break;
        const double alpha = rr / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
    }
}

} // namespace detail

inline constexpr int kDirectSolveCutoff = 64;
inline constexpr double kSolveRelTol = 1e-10;

/// Solves (A + sigma I) lambda = rhs. Multipliers are unconstrained in sign.
/// Returns diagnostics; `converged` is false when the relative residual
/// misses 1e-10 (the zone is then skipped for this iteration and re-detected
/// by the next one).
inline ZoneDiagnostics solve_multipliers(ZoneSystem& sys) {
    ZoneDiagnostics diag;
    const int k = sys.row_count();
    diag.rows = k;
    sys.lambda.setZero(k);
    if (k == 0) {
        diag.converged = true;
        return diag;
    }

    Eigen::MatrixXd reg = sys.gram;
    reg.diagonal().array() += sys.regularization;

    // Gershgorin bounds for a cheap conditioning estimate.
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (int i = 0; i < k; ++i) {
        const double off = reg.row(i).cwiseAbs().sum() - std::abs(reg(i, i));
        lo = std::min(lo, reg(i, i) - off);
        hi = std::max(hi, reg(i, i) + off);
    }
    diag.condition_estimate = hi / std::max(lo, std::max(sys.regularization, 1e-300));

    const double rhs_norm = sys.rhs.norm();
    if (rhs_norm == 0.0) {
        diag.converged = true;
        return diag;
    }

    if (k <= kDirectSolveCutoff) {
        sys.lambda = reg.ldlt().solve(sys.rhs);
    } else {
        detail::conjugate_gradient(reg, sys.rhs, sys.lambda, 4 * k, kSolveRelTol);
    }
    if (!sys.lambda.allFinite()) {
        sys.lambda.setZero(k);
        diag.residual = 1.0;
        return diag;
    }
    diag.residual = (reg * sys.lambda - sys.rhs).norm() / rhs_norm;
    diag.max_abs_lambda = sys.lambda.size() ? sys.lambda.cwiseAbs().maxCoeff() : 0.0;
    diag.converged = diag.residual < kSolveRelTol;
    if (!diag.converged) sys.lambda.setZero(k);
    return diag;
}

/// Per-vertex position corrections x' - x = -M^-1 grad_D^T lambda, in support
/// order. Vertices outside the support (and pinned vertices) move by zero.
inline std::vector<std::pair<VertexRef, Vec3>> displacement_updates(const ZoneSystem& sys) {
    std::vector<Vec3> delta(sys.support.size(), Vec3::Zero());
    for (int i = 0; i < sys.row_count(); ++i)
        for (int p = 0; p < 4; ++p) {
            const int s = sys.support_index(sys.rows[i].refs[p]);
            delta[s] -= sys.inv_mass[s] * sys.lambda(i) * sys.rows[i].blocks[p];
        }
    std::vector<std::pair<VertexRef, Vec3>> updates;
    updates.reserve(sys.support.size());
    for (size_t s = 0; s < sys.support.size(); ++s) updates.emplace_back(sys.support[s], delta[s]);
    return updates;
}

inline void apply_displacements(const ZoneSystem& sys, std::span<TriangleMesh> meshes) {
    for (const auto& [ref, delta] : displacement_updates(sys))
        meshes[ref.mesh].vertices[ref.vertex] += delta;
}

/// Full per-zone pipeline: assemble, solve, apply. Displacements are applied
/// only when the solve converged.
inline ZoneDiagnostics zone_response(const ImpactZone& zone, std::span<TriangleMesh> meshes,
                                     double post_distance) {
    ZoneSystem sys = assemble_zone_system(zone, meshes, post_distance);
    const ZoneDiagnostics diag = solve_multipliers(sys);
    if (diag.converged) apply_displacements(sys, meshes);
    return diag;
}

} // namespace untangle
