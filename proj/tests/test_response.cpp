#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/zones.hpp"
#include "untangle/response.hpp"

using namespace untangle;

namespace {

/// The edge-through-face fixture reduced to its single stencil and zone.
struct SingleStencilCase {
    std::array<TriangleMesh, 2> meshes;
    ImpactZone zone;
    PenetrationStencil stencil;
};

SingleStencilCase single_stencil_case() {
    auto fx = fixtures::edge_through_face();
    SingleStencilCase out{{fx.edge_mesh, fx.face_mesh}, {}, {}};
    const EdgeSet edges = EdgeSet::build(out.meshes[0]);
    const auto records = find_intersections(out.meshes[0], edges, 0, out.meshes[1], 1);
    const auto stencils = build_stencils(records, out.meshes);
    REQUIRE(stencils.size() == 1);
    out.stencil = stencils[0];
    auto partition = partition_impact_zones(stencils);
    out.zone = partition[0];
    return out;
}

} // namespace

TEST_CASE("signed_distance is the plane distance along the stored normal") {
    PenetrationStencil s;
    s.apex = {0, 0};
    s.face_mesh = 1;
    s.face_vertices = {0, 1, 2};
    s.normal = Vec3(0, 0, 1);

    std::array<TriangleMesh, 2> meshes;
    meshes[1].vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};

    meshes[0].vertices = {Vec3(0, 0, -1)};
    CHECK(signed_distance(s, meshes) == Catch::Approx(-1.0).margin(1e-15));

    meshes[0].vertices = {Vec3(0.3, 0.2, 0)};
    CHECK(signed_distance(s, meshes) == Catch::Approx(0.0).margin(1e-15));

    // tangential offset does not matter
    meshes[0].vertices = {Vec3(5, 7, 0.3)};
    CHECK(signed_distance(s, meshes) == Catch::Approx(0.3).margin(1e-12));
}

TEST_CASE("constraint gradient blocks are (+n, -n/3 x3) and sum to zero") {
    PenetrationStencil s;
    s.apex = {0, 4};
    s.face_mesh = 1;
    s.face_vertices = {7, 8, 9};
    s.normal = Vec3(0, 0, 1);
    s.distance = -0.25;

    const ConstraintRow row = constraint_gradient(s);
    CHECK((row.blocks[0] - Vec3(0, 0, 1)).norm() == 0.0);
    for (int k = 1; k < 4; ++k) CHECK((row.blocks[k] - Vec3(0, 0, -1.0 / 3.0)).norm() == 0.0);
    CHECK((row.blocks[0] + row.blocks[1] + row.blocks[2] + row.blocks[3]).norm() < 1e-15);
    CHECK(row.distance == -0.25);
}

TEST_CASE("cached distance equals the row evaluated at current positions") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        auto zone = zones::make_random_zone(rng, 1);
        const ConstraintRow row = constraint_gradient(zone.zone.stencils[0]);
        CHECK(std::abs(evaluate_row(row, zone.meshes) - row.distance) < 1e-12);
    }
}

TEST_CASE("gradient matches finite differences with the normal frozen") {
    std::mt19937_64 rng(5);
    const double h = 1e-7;
    for (int trial = 0; trial < 100; ++trial) {
        auto zone = zones::make_random_zone(rng, 1);
        const PenetrationStencil& s = zone.zone.stencils[0];
        const ConstraintRow row = constraint_gradient(s);

        // Direction over the 4 stencil vertices; keep |row . delta| away from zero.
        std::array<Vec3, 4> delta;
        double directional = 0;
        do {
            directional = 0;
            for (int k = 0; k < 4; ++k) {
                delta[k] = oracles::random_unit(rng);
                directional += row.blocks[k].dot(delta[k]);
            }
        } while (std::abs(directional) < 1e-3);

        auto moved = zone.meshes;
        for (int k = 0; k < 4; ++k)
            moved[row.refs[k].mesh].vertices[row.refs[k].vertex] += h * delta[k];
        const double fd = (signed_distance(s, moved) - signed_distance(s, zone.meshes)) / h;
        CHECK(std::abs(fd - directional) / std::abs(directional) < 1e-6);
    }
}

TEST_CASE("single stencil with uniform masses assembles to 4/(3m)") {
    auto c = single_stencil_case();
    for (double m : {1.0, 2.5}) {
        for (auto& mesh : c.meshes) mesh.masses.assign(mesh.vertex_count(), m);
        const ZoneSystem sys = assemble_zone_system(c.zone, c.meshes, 0.0);
        REQUIRE(sys.row_count() == 1);
        CHECK(sys.gram(0, 0) == Catch::Approx(4.0 / (3.0 * m)).margin(1e-12));
        CHECK(sys.rhs(0) == Catch::Approx(-0.4).margin(1e-12));
    }
}

TEST_CASE("vertex-disjoint stencils give a diagonal gram matrix") {
    std::mt19937_64 rng(8);
    auto a = zones::make_random_zone(rng, 1);
    auto b = zones::make_random_zone(rng, 1);
    // Merge b into a with shifted vertex indices.
    const int apex_off = a.meshes[0].vertex_count();
    const int face_off = a.meshes[1].vertex_count();
    for (int m : {0, 1}) {
        auto& src = b.meshes[m];
        a.meshes[m].vertices.insert(a.meshes[m].vertices.end(), src.vertices.begin(),
                                    src.vertices.end());
        a.meshes[m].masses.insert(a.meshes[m].masses.end(), src.masses.begin(), src.masses.end());
        a.meshes[m].pinned.insert(a.meshes[m].pinned.end(), src.pinned.begin(), src.pinned.end());
    }
    PenetrationStencil moved = b.zone.stencils[0];
    moved.apex.vertex += apex_off;
    for (int& v : moved.face_vertices) v += face_off;
    a.zone.stencils.push_back(moved);
    a.zone.support.push_back(moved.apex);
    for (int v : moved.face_vertices) a.zone.support.push_back({1, v});
    std::sort(a.zone.support.begin(), a.zone.support.end());

    const ZoneSystem sys = assemble_zone_system(a.zone, a.meshes, 0.0);
    REQUIRE(sys.row_count() == 2);
    CHECK(sys.gram(0, 1) == 0.0);
    CHECK(sys.gram(1, 0) == 0.0);
}

TEST_CASE("two stencils sharing a face with parallel normals couple by 1/3") {
    std::array<TriangleMesh, 2> meshes;
    meshes[1].oriented = true;
    meshes[1].vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    meshes[0].vertices = {Vec3(0.2, 0.2, -0.3), Vec3(0.4, 0.3, -0.2)};
    for (auto& m : meshes) m.ensure_defaults();

    ImpactZone zone;
    for (int apex = 0; apex < 2; ++apex) {
        PenetrationStencil s;
        s.apex = {0, apex};
        s.face_mesh = 1;
        s.face = 0;
        s.face_vertices = {0, 1, 2};
        s.normal = Vec3(0, 0, 1);
        s.distance = meshes[0].vertices[apex].z();
        zone.stencils.push_back(s);
        zone.support.push_back(s.apex);
    }
    for (int v = 0; v < 3; ++v) zone.support.push_back({1, v});
    std::sort(zone.support.begin(), zone.support.end());

    const ZoneSystem sys = assemble_zone_system(zone, meshes, 0.0);
    REQUIRE(sys.row_count() == 2);
    CHECK(sys.gram(0, 0) == Catch::Approx(4.0 / 3.0).margin(1e-12));
    CHECK(sys.gram(0, 1) == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(sys.gram(0, 1) == sys.gram(1, 0));
}

TEST_CASE("hand-solvable multiplier: lambda = -0.3 for D = -0.4") {
    auto c = single_stencil_case();
    ZoneSystem sys = assemble_zone_system(c.zone, c.meshes, 0.0);
    const ZoneDiagnostics diag = solve_multipliers(sys);
    REQUIRE(diag.converged);
    CHECK(sys.lambda(0) == Catch::Approx(-0.3).margin(1e-9));
}

TEST_CASE("zero right-hand side yields zero multipliers") {
    auto c = single_stencil_case();
    // d equal to the (negative) distance forces rhs = 0.
    ZoneSystem sys = assemble_zone_system(c.zone, c.meshes, -0.4);
    REQUIRE(sys.rhs.cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-12));
    const ZoneDiagnostics diag = solve_multipliers(sys);
    REQUIRE(diag.converged);
    CHECK(sys.lambda.cwiseAbs().maxCoeff() == 0.0);

    auto untouched = c.meshes;
    apply_displacements(sys, untouched);
    for (int m : {0, 1})
        for (int v = 0; v < c.meshes[m].vertex_count(); ++v)
            CHECK((untouched[m].vertices[v] - c.meshes[m].vertices[v]).norm() == 0.0);
}

TEST_CASE("duplicated rows: regularized solve splits the multiplier symmetrically") {
    auto c = single_stencil_case();
    ZoneSystem sys = assemble_zone_system(c.zone, c.meshes, 0.0);
    REQUIRE(sys.row_count() == 1);

    // Duplicate the row by hand (assembly itself would de-duplicate it).
    ZoneSystem dup = sys;
    dup.rows.push_back(dup.rows[0]);
    dup.gram.resize(2, 2);
    dup.gram.setConstant(sys.gram(0, 0));
    dup.rhs.resize(2);
    dup.rhs.setConstant(sys.rhs(0));
    dup.regularization = 1e-10 * dup.gram.trace() / 2;

    const ZoneDiagnostics diag = solve_multipliers(dup);
    REQUIRE(diag.converged);
    CHECK(dup.lambda(0) == Catch::Approx(dup.lambda(1)).margin(1e-15));

    // Minimum-norm reference from the eigendecomposition of the 2x2 system:
    // eigenvector (1,1)/sqrt(2) with eigenvalue 2a carries the solution.
    const double a = sys.gram(0, 0);
    const double min_norm = sys.rhs(0) / (2 * a);
    CHECK(dup.lambda(0) == Catch::Approx(min_norm).epsilon(1e-6));

    // Post-response distance still lands on d.
    auto moved = c.meshes;
    apply_displacements(dup, moved);
    CHECK(std::abs(evaluate_row(dup.rows[0], moved)) < 1e-8);
}

TEST_CASE("assembly removes exact duplicate rows") {
    auto c = single_stencil_case();
    c.zone.stencils.push_back(c.zone.stencils[0]);
    const ZoneSystem sys = assemble_zone_system(c.zone, c.meshes, 0.0);
    CHECK(sys.row_count() == 1);
}

TEST_CASE("closed-form displacement: apex +0.3 n, face vertices -0.1 n") {
    auto c = single_stencil_case();
    auto meshes = c.meshes;
    const ZoneDiagnostics diag = zone_response(c.zone, meshes, 0.0);
    REQUIRE(diag.converged);

    const Vec3 apex_delta = meshes[0].vertices[0] - c.meshes[0].vertices[0];
    CHECK((apex_delta - Vec3(0, 0, 0.3)).norm() < 1e-10);
    for (int v = 0; v < 3; ++v) {
        const Vec3 face_delta = meshes[1].vertices[v] - c.meshes[1].vertices[v];
        CHECK((face_delta - Vec3(0, 0, -0.1)).norm() < 1e-10);
    }
    CHECK(std::abs(signed_distance(c.stencil, meshes)) < 1e-10);
    // The non-stencil vertex of the edge mesh stays put.
    CHECK((meshes[0].vertices[2] - c.meshes[0].vertices[2]).norm() == 0.0);
}

TEST_CASE("unequal masses still land exactly on the target distance") {
    auto c = single_stencil_case();
    c.meshes[0].masses[0] = 2.0; // heavier apex
    auto meshes = c.meshes;
    const ZoneDiagnostics diag = zone_response(c.zone, meshes, 0.0);
    REQUIRE(diag.converged);

    // A = 1/2 + 1/3 = 5/6, lambda = -0.48: apex +0.24 n, face -0.16 n.
    CHECK((meshes[0].vertices[0] - c.meshes[0].vertices[0] - Vec3(0, 0, 0.24)).norm() < 1e-10);
    CHECK((meshes[1].vertices[0] - c.meshes[1].vertices[0] - Vec3(0, 0, -0.16)).norm() < 1e-10);
    CHECK(std::abs(signed_distance(c.stencil, meshes)) < 1e-10);
}

TEST_CASE("positive post-distance is reached exactly") {
    auto c = single_stencil_case();
    auto meshes = c.meshes;
    const ZoneDiagnostics diag = zone_response(c.zone, meshes, 0.05);
    REQUIRE(diag.converged);
    CHECK(signed_distance(c.stencil, meshes) == Catch::Approx(0.05).margin(1e-10));
}

TEST_CASE("pinned face vertices take no correction, apex absorbs all of it") {
    auto c = single_stencil_case();
    c.meshes[1].pinned.assign(3, 1);
    auto meshes = c.meshes;
    const ZoneDiagnostics diag = zone_response(c.zone, meshes, 0.0);
    REQUIRE(diag.converged);
    for (int v = 0; v < 3; ++v)
        CHECK((meshes[1].vertices[v] - c.meshes[1].vertices[v]).norm() == 0.0);
    CHECK((meshes[0].vertices[0] - c.meshes[0].vertices[0] - Vec3(0, 0, 0.4)).norm() < 1e-10);
    CHECK(std::abs(signed_distance(c.stencil, meshes)) < 1e-10);
}

TEST_CASE("an all-pinned zone reports non-convergence and moves nothing") {
    auto c = single_stencil_case();
    c.meshes[0].pinned.assign(c.meshes[0].vertex_count(), 1);
    c.meshes[1].pinned.assign(c.meshes[1].vertex_count(), 1);
    auto meshes = c.meshes;
    const ZoneDiagnostics diag = zone_response(c.zone, meshes, 0.0);
    CHECK_FALSE(diag.converged);
    for (int m : {0, 1})
        for (int v = 0; v < c.meshes[m].vertex_count(); ++v)
            CHECK((meshes[m].vertices[v] - c.meshes[m].vertices[v]).norm() == 0.0);
}

TEST_CASE("chained stencils all land on the target distance") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        auto z = zones::make_random_zone(rng, 3);
        const double d = trial % 2 == 0 ? 0.0 : 0.02;
        ZoneSystem sys = assemble_zone_system(z.zone, z.meshes, d);
        const ZoneDiagnostics diag = solve_multipliers(sys);
        REQUIRE(diag.converged);
        auto moved = z.meshes;
        apply_displacements(sys, moved);
        for (const auto& row : sys.rows)
            CHECK(evaluate_row(row, moved) == Catch::Approx(d).margin(1e-8));
    }
}

TEST_CASE("gram matrix is symmetric and PSD after regularization") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto z = zones::make_random_zone(rng, 1 + trial % 12);
        const ZoneSystem sys = assemble_zone_system(z.zone, z.meshes, 0.0);
        CHECK((sys.gram - sys.gram.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::MatrixXd reg = sys.gram;
        reg.diagonal().array() += sys.regularization;
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reg);
        CHECK(eig.eigenvalues().minCoeff() > -1e-9);
    }
}

TEST_CASE("translating a zone changes neither multipliers nor corrections") {
    std::mt19937_64 rng(29);
    auto z = zones::make_random_zone(rng, 4);
    ZoneSystem sys = assemble_zone_system(z.zone, z.meshes, 0.0);
    REQUIRE(solve_multipliers(sys).converged);
    const auto updates = displacement_updates(sys);

    auto shifted = z;
    const Vec3 t(3.5, -1.25, 0.75);
    for (auto& mesh : shifted.meshes)
        for (Vec3& v : mesh.vertices) v += t;
    // Rebuild stencil distances at the shifted positions the same way the
    // stencil builder would; zero-sum blocks make them agree up to roundoff.
    for (auto& s : shifted.zone.stencils) {
        const Vec3 centroid = (shifted.meshes[1].vertices[s.face_vertices[0]] +
                               shifted.meshes[1].vertices[s.face_vertices[1]] +
                               shifted.meshes[1].vertices[s.face_vertices[2]]) /
                              3.0;
        s.distance = s.normal.dot(shifted.meshes[0].vertices[s.apex.vertex] - centroid);
    }
    ZoneSystem sys2 = assemble_zone_system(shifted.zone, shifted.meshes, 0.0);
    REQUIRE(solve_multipliers(sys2).converged);
    CHECK((sys.lambda - sys2.lambda).cwiseAbs().maxCoeff() < 1e-10);
    const auto updates2 = displacement_updates(sys2);
    REQUIRE(updates.size() == updates2.size());
    for (size_t i = 0; i < updates.size(); ++i)
        CHECK((updates[i].second - updates2[i].second).norm() < 1e-10);
}

TEST_CASE("momentum is conserved: mass-weighted corrections sum to zero") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        auto z = zones::make_random_zone(rng, 1 + trial % 10);
        ZoneSystem sys = assemble_zone_system(z.zone, z.meshes, 0.0);
        REQUIRE(solve_multipliers(sys).converged);
        Vec3 momentum = Vec3::Zero();
        double scale = 0;
        for (const auto& [ref, delta] : displacement_updates(sys)) {
            const double m = z.meshes[ref.mesh].masses[ref.vertex];
            momentum += m * delta;
            scale += m * delta.norm();
        }
        if (scale == 0) continue;
        CHECK(momentum.norm() < 1e-9 * scale);
    }
}

TEST_CASE("correction is orthogonal to the null space of the constraint rows") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        auto z = zones::make_random_zone(rng, 3 + trial % 6);
        ZoneSystem sys = assemble_zone_system(z.zone, z.meshes, 0.0);
        REQUIRE(solve_multipliers(sys).converged);
        const auto updates = displacement_updates(sys);
        const int dims = static_cast<int>(sys.support.size()) * 3;

        // Rows as dense vectors over the support.
        std::vector<Eigen::VectorXd> rows;
        for (const auto& row : sys.rows) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(dims);
            for (int p = 0; p < 4; ++p) {
                const int s = sys.support_index(row.refs[p]);
                r.segment<3>(3 * s) += row.blocks[p];
            }
            rows.push_back(r);
        }
        // Orthonormalize (modified Gram-Schmidt).
        std::vector<Eigen::VectorXd> basis;
        for (Eigen::VectorXd r : rows) {
            for (const auto& b : basis) r -= b.dot(r) * b;
            if (r.norm() > 1e-12) basis.push_back(r.normalized());
        }

        Eigen::VectorXd weighted = Eigen::VectorXd::Zero(dims);
        for (size_t s = 0; s < updates.size(); ++s)
            weighted.segment<3>(3 * static_cast<int>(s)) =
                z.meshes[updates[s].first.mesh].masses[updates[s].first.vertex] * updates[s].second;

        for (int probe = 0; probe < 20; ++probe) {
            Eigen::VectorXd w(dims);
            for (int i = 0; i < dims; ++i)
                w(i) = std::normal_distribution<double>(0, 1)(rng);
            for (const auto& b : basis) w -= b.dot(w) * b;
            if (w.norm() < 1e-9) continue;
            w.normalize();
            CHECK(std::abs(weighted.dot(w)) < 1e-8 * std::max(1.0, weighted.norm()));
        }
    }
}
