#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "facesketch/bvh.hpp"
#include "facesketch/coarse.hpp"
#include "facesketch/idgmm.hpp"
#include "facesketch/imageops.hpp"
#include "facesketch/synthetic.hpp"
#include "oracles.hpp"

using namespace fsk;

namespace {

constexpr double kA = 0.06;
const double kVoxel = RefineConfig{}.voxel();

double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Vec2> circle(double cx, double cy, double r, int n = 96)
{
    std::vector<Vec2> c;
    for (int k = 0; k <= n; ++k) {
        const double t = 2 * std::numbers::pi * k / n;
        c.emplace_back(cx + r * std::cos(t), cy + r * std::sin(t));
    }
    return c;
}

// Merged face with two ears, the coarse stage's usual output.
const TriMesh& coarse_head()
{
    static const TriMesh mesh = [] {
        PartSketch s;
        s.layers["face"] = circle(256, 256, 128);
        s.layers["left_ear"] = circle(130, 250, 30);
        s.layers["right_ear"] = circle(382, 250, 30);
        return merge_parts(generate_parts(s));
    }();
    return mesh;
}

// Default-strength stroke across the forehead.
Stroke forehead(StrokeKind kind)
{
    Stroke s;
    s.kind = kind;
    s.polyline = {{200, 200}, {312, 200}};
    return s;
}

DepthMap flat_depth(int size, double z)
{
    DepthMap d(size, size);
    for (std::size_t k = 0; k < d.z.size(); ++k) {
        d.z.data[k] = z;
        d.valid.data[k] = 1;
    }
    return d;
}

// Symmetric vertex-to-surface Hausdorff through the BVH (checked against the
// brute-force oracle in the geometry tests); refined meshes are too large for
// the all-pairs version.
double fast_hausdorff(const TriMesh& a, const TriMesh& b)
{
    auto directed = [](const TriMesh& from, const TriMesh& to) {
        const TriangleBVH bvh(to);
        double worst = 0;
        for (const Vec3& v : from.vertices) worst = std::max(worst, bvh.closest(v).squared_distance);
        return std::sqrt(worst);
    };
    return std::max(directed(a, b), directed(b, a));
}

TriMesh points_only(std::vector<Vec3> pts)
{
    TriMesh m;
    m.vertices = std::move(pts);
    return m;
}

}  // namespace

// ------------------------------------------------------------------ config

TEST(RefineConfig, DefaultsAndValidation)
{
    const RefineConfig c;
    EXPECT_EQ(c.raster, 512);
    EXPECT_EQ(c.field_resolution, 128);
    EXPECT_EQ(c.idw_k, 8);
    EXPECT_EQ(c.idw_power, 2.0);
    EXPECT_EQ(c.idw_epsilon, 1e-7);
    EXPECT_EQ(c.step_clamp_voxels, 2.0);
    EXPECT_EQ(c.implicit_iterations, 1);
    EXPECT_EQ(c.depth_iterations, 1);
    EXPECT_EQ(c.amplitude, kA);
    EXPECT_NO_THROW(c.validate());

    RefineConfig bad = c;
    bad.idw_k = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = c;
    bad.step_clamp_voxels = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = c;
    bad.depth_iterations = -1;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

// --------------------------------------------------------- implicit update

TEST(ImplicitUpdate, SphereReachesZeroSetInOneStep)
{
    TriMesh mesh = make_icosphere(5, 1.2);
    ASSERT_GE(mesh.vertices.size(), 10000u);
    std::vector<Vec3> radial;
    for (const Vec3& v : mesh.vertices) radial.push_back(v.normalized());
    const SphereField field(Vec3::Zero(), 1.0);

    const auto t0 = std::chrono::steady_clock::now();
    const TriMesh out = implicit_update(mesh, field, radial, 1.0);
    const double ms = ms_since(t0);

    double worst = 0;
    for (const Vec3& v : out.vertices) worst = std::max(worst, std::abs(v.norm() - 1.0));
    EXPECT_LE(worst, 1e-6);
    EXPECT_LT(ms, 100.0);
}

TEST(ImplicitUpdate, MeshOnZeroSetIsUnchanged)
{
    const TriMesh mesh = make_icosphere(3, 1.0);
    const SphereField field(Vec3::Zero(), 1.0);
    const TriMesh out = implicit_update(mesh, field, 2 * kVoxel);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        EXPECT_LE((out.vertices[v] - mesh.vertices[v]).norm(), 1e-12);
}

TEST(ImplicitUpdate, EllipsoidResidualAtLeastHalves)
{
    const TriMesh mesh = make_icosphere(4, 0.5);
    const EllipsoidField field(Vec3::Zero(), Vec3(0.6, 0.5, 0.42));
    auto mean_abs = [&](const TriMesh& m) {
        double s = 0;
        for (const Vec3& v : m.vertices) s += std::abs(field.sample(v));
        return s / m.vertices.size();
    };
    const TriMesh out = implicit_update(mesh, field, 1.0);
    EXPECT_LE(mean_abs(out), 0.5 * mean_abs(mesh));
}

TEST(ImplicitUpdate, StepIsClamped)
{
    const TriMesh mesh = make_icosphere(2, 0.5);
    const ConstantField field(1.0);
    ImplicitUpdateStats stats;
    const TriMesh out = implicit_update(mesh, field, 0.01, &stats);
    EXPECT_EQ(stats.clamped, static_cast<int>(mesh.vertices.size()));
    const std::vector<Vec3> n = vertex_normals(mesh);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        EXPECT_LE((out.vertices[v] - (mesh.vertices[v] + 0.01 * n[v])).norm(), 1e-15);
}

TEST(ImplicitUpdate, FlipGuardHalvesThenFreezes)
{
    const TriMesh mesh = make_icosphere(2, 1.0);
    // vertex 0 pushed tangentially toward one of its neighbours
    int neighbour = -1;
    for (const Tri& t : mesh.triangles)
        for (int a = 0; a < 3; ++a)
            if (t[a] == 0) neighbour = t[(a + 1) % 3];
    ASSERT_GE(neighbour, 0);
    const Vec3 d = mesh.vertices[neighbour] - mesh.vertices[0];
    const double edge = d.norm();
    std::vector<Vec3> dirs(mesh.vertices.size(), Vec3::Zero());
    dirs[0] = d / edge;
    const ConstantField one(100.0);  // every step is the clamp

    // 3 edges flips, 1.5 edges flips, 0.75 edges does not
    ImplicitUpdateStats halved;
    const TriMesh a = implicit_update(mesh, one, dirs, 3.0 * edge, &halved);
    EXPECT_EQ(halved.halved, 1);
    EXPECT_EQ(halved.frozen, 0);
    EXPECT_NEAR((a.vertices[0] - mesh.vertices[0]).norm(), 0.75 * edge, 1e-12);

    // 12, 6, 3 and 1.5 edges all flip
    ImplicitUpdateStats frozen;
    const TriMesh b = implicit_update(mesh, one, dirs, 12.0 * edge, &frozen);
    EXPECT_EQ(frozen.frozen, 1);
    EXPECT_EQ(b.vertices[0], mesh.vertices[0]);
}

TEST(ImplicitUpdate, RejectsNormalCountMismatch)
{
    const TriMesh mesh = make_icosphere(1, 1.0);
    EXPECT_THROW(implicit_update(mesh, ConstantField(0), std::vector<Vec3>(3, Vec3::UnitZ()), 0.1),
                 std::invalid_argument);
}

// -------------------------------------------------------------------- IDW

TEST(Idw, AllNeighboursAtOnePointGiveThatPoint)
{
    const Vec3 q(0.3, -0.2, 0.1);
    PointCloud cloud;
    cloud.points.assign(8, q);
    const TriMesh out = idw_refine(points_only({Vec3(0, 0, 0)}), cloud, IdwOptions{});
    EXPECT_LE((out.vertices[0] - q).norm(), 1e-15);
}

TEST(Idw, ExactHitSnapsToThePoint)
{
    PointCloud cloud;
    cloud.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    const TriMesh out = idw_refine(points_only({Vec3(1, 0, 0), Vec3(1 + 1e-9, 0, 0)}), cloud, IdwOptions{});
    EXPECT_EQ(out.vertices[0], Vec3(1, 0, 0));
    EXPECT_EQ(out.vertices[1], Vec3(1, 0, 0));
}

TEST(Idw, HandEvaluatedTwoNeighbours)
{
    PointCloud cloud;
    cloud.points = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
    IdwOptions opt;
    opt.k = 2;
    const TriMesh out = idw_refine(points_only({Vec3(0, 0, 0)}), cloud, opt);
    EXPECT_DOUBLE_EQ(out.vertices[0].x(), 0.5);
    EXPECT_DOUBLE_EQ(out.vertices[0].y(), 0.5);
    EXPECT_DOUBLE_EQ(out.vertices[0].z(), 0.0);
}

TEST(Idw, MatchesBruteForceOnRandomInstances)
{
    for (unsigned seed = 1; seed <= 20; ++seed) {
        PointCloud cloud;
        cloud.points = oracle::random_points(100, -1, 1, seed);
        const std::vector<Vec3> verts = oracle::random_points(100, -1.2, 1.2, seed + 1000);
        for (double power : {1.0, 2.0, 3.0})
            for (int k : {1, 8, 100}) {
                IdwOptions opt;
                opt.k = k;
                opt.power = power;
                const TriMesh out = idw_refine(points_only(verts), cloud, opt);
                for (std::size_t v = 0; v < verts.size(); ++v) {
                    const Vec3 ref = oracle::brute_idw(verts[v], cloud.points, k, power, opt.epsilon);
                    ASSERT_LE((out.vertices[v] - ref).norm(), 1e-12) << "seed " << seed << " k " << k;
                }
            }
    }
}

TEST(Idw, RadiusMatchesBruteForce)
{
    PointCloud cloud;
    cloud.points = oracle::random_points(100, -1, 1, 5);
    const std::vector<Vec3> verts = oracle::random_points(200, -1.5, 1.5, 6);
    IdwOptions opt;
    opt.radius = 0.15;
    int moved = 0;
    const TriMesh out = idw_refine(points_only(verts), cloud, opt, nullptr, &moved);
    int expected_moved = 0;
    for (std::size_t v = 0; v < verts.size(); ++v) {
        const Vec3 ref = oracle::brute_idw(verts[v], cloud.points, opt.k, opt.power, opt.epsilon, opt.radius);
        EXPECT_LE((out.vertices[v] - ref).norm(), 1e-12);
        expected_moved += ref != verts[v];
    }
    EXPECT_EQ(moved, expected_moved);
    EXPECT_GT(moved, 0);
    EXPECT_LT(moved, static_cast<int>(verts.size()));
}

TEST(Idw, OutputInsideHullOfNeighbours)
{
    PointCloud cloud;
    cloud.points = oracle::random_points(300, -1, 1, 11);
    const std::vector<Vec3> verts = oracle::random_points(200, -1, 1, 12);
    const TriMesh out = idw_refine(points_only(verts), cloud, IdwOptions{});
    const PointIndex index(cloud.points);
    for (std::size_t v = 0; v < verts.size(); ++v) {
        std::vector<Vec3> hull{verts[v]};
        for (int i : index.nearest(verts[v], 8)) hull.push_back(cloud.points[i]);
        EXPECT_TRUE(oracle::inside_hull_by_support(out.vertices[v], hull, 64, static_cast<unsigned>(v)));
    }
}

TEST(Idw, InactiveVerticesStay)
{
    PointCloud cloud;
    cloud.points = {Vec3(1, 1, 1)};
    const std::vector<char> active{0, 1};
    const TriMesh out = idw_refine(points_only({Vec3(0, 0, 0), Vec3(0, 0, 0)}), cloud, IdwOptions{}, &active);
    EXPECT_EQ(out.vertices[0], Vec3(0, 0, 0));
    EXPECT_EQ(out.vertices[1], Vec3(1, 1, 1));
}

TEST(Idw, RejectsEmptyCloudAndBadK)
{
    const TriMesh m = points_only({Vec3::Zero()});
    EXPECT_THROW(idw_refine(m, PointCloud{}, IdwOptions{}), std::invalid_argument);
    PointCloud cloud;
    cloud.points = {Vec3::Zero()};
    IdwOptions opt;
    opt.k = 0;
    EXPECT_THROW(idw_refine(m, cloud, opt), std::invalid_argument);
}

TEST(PointIndex, TiesBreakByIndex)
{
    const PointIndex index({Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, 0, 3)});
    EXPECT_EQ(index.nearest(Vec3::Zero(), 3), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(index.nearest(Vec3::Zero(), 10).size(), 4u);
}

// --------------------------------------------------------------- providers

TEST(Providers, NoStrokesAreIdentity)
{
    const RefineConfig cfg;
    const TriMesh head = bump_head();
    const DepthMap dc = render_depth(head, OrthoCamera{});
    ProviderState state;
    prepare_provider_state(state, {}, dc, cfg);
    const DepthMap df = proc_depth_enhance(state, dc);
    EXPECT_EQ(df.z.data, dc.z.data);
    EXPECT_EQ(df.valid.data, dc.valid.data);
    const NormalMap n = proc_normal_synth(state, dc);
    const NormalMap ref = normal_from_depth(dc, OrthoCamera{});
    EXPECT_EQ(n.n.data, ref.n.data);
    for (double r : state.residual.data) EXPECT_EQ(r, 0.0);
}

TEST(Providers, RidgeIsAdditiveAndConfinedToSupport)
{
    const RefineConfig cfg;
    const DepthMap dc = flat_depth(cfg.raster, 0.2);
    const std::vector<Stroke> strokes{forehead(StrokeKind::ridge)};
    ProviderState state;
    prepare_provider_state(state, strokes, dc, cfg);
    const DepthMap df = proc_depth_enhance(state, dc);
    const Image<double> delta = stroke_displacement_field(strokes, cfg.raster, cfg.raster, cfg.amplitude);
    const Mask support = stroke_support(strokes, cfg.raster, cfg.raster);

    double max_diff = 0, max_delta = 0;
    for (std::size_t k = 0; k < df.z.size(); ++k) {
        const double diff = df.z.data[k] - dc.z.data[k];
        max_diff = std::max(max_diff, diff);
        max_delta = std::max(max_delta, delta.data[k]);
        if (!support.data[k]) EXPECT_EQ(diff, 0.0);
        else EXPECT_NEAR(diff, delta.data[k], 1e-9);
        EXPECT_NEAR(state.residual.data[k], delta.data[k], 1e-9);
    }
    EXPECT_NEAR(max_diff, max_delta, 1e-9);
    EXPECT_GT(max_delta, 0.0);
}

TEST(Providers, RelievedDepthLeavesNoResidual)
{
    // D_c that already carries the stroke relief: the target is unchanged
    // and nothing is left for the implicit stage
    const RefineConfig cfg;
    const std::vector<Stroke> strokes{forehead(StrokeKind::ridge)};
    DepthMap dc = flat_depth(cfg.raster, 0.2);
    const Image<double> delta = stroke_displacement_field(strokes, cfg.raster, cfg.raster, cfg.amplitude);
    for (std::size_t k = 0; k < dc.z.size(); ++k) dc.z.data[k] += delta.data[k];
    ProviderState state;
    prepare_provider_state(state, strokes, dc, cfg);
    const DepthMap df = proc_depth_enhance(state, dc);
    for (std::size_t k = 0; k < dc.z.size(); ++k) {
        EXPECT_NEAR(state.residual.data[k], 0.0, 1e-8);
        EXPECT_NEAR(df.z.data[k], dc.z.data[k], 1e-8);
    }
}

TEST(Providers, RidgeAndValleyNormalsTiltOppositely)
{
    const RefineConfig cfg;
    const DepthMap dc = flat_depth(cfg.raster, 0.2);
    auto normals = [&](StrokeKind kind) {
        ProviderState state;
        prepare_provider_state(state, {forehead(kind)}, dc, cfg);
        return proc_normal_synth(state, dc);
    };
    const NormalMap ridge = normals(StrokeKind::ridge);
    const NormalMap valley = normals(StrokeKind::valley);
    // the stroke runs along row 199.5; rows 199 - d and 200 + d are mirror images
    for (int d = 1; d <= 6; ++d) {
        const Vec3 above = ridge.n.at(256, 199 - d), below = ridge.n.at(256, 200 + d);
        EXPECT_GT(above.y(), 1e-3) << d;  // facing up, away from the axis
        EXPECT_NEAR(above.y(), -below.y(), 1e-9);
        EXPECT_NEAR(above.z(), below.z(), 1e-9);
        EXPECT_NEAR(std::abs(above.x()), 0.0, 1e-9);
        EXPECT_NEAR(valley.n.at(256, 199 - d).y(), -above.y(), 1e-9);
    }
}

TEST(ProceduralSdf, ZeroDisplacementIsTheBaseExactly)
{
    auto base = std::make_shared<SphereField>(Vec3::Zero(), 0.5);
    const ProceduralSdf g(base, Image<double>(64, 64, 0.0), 3 * kVoxel);
    for (const Vec3& p : oracle::random_points(500, -1, 1, 3)) EXPECT_EQ(g.sample(p), base->sample(p));
}

TEST(ProceduralSdf, ConstantPatchShiftsFrontalPlane)
{
    // positive inside, inside = z < 0; the zero set is the frontal plane z = 0
    auto plane = std::make_shared<LambdaField>([](const Vec3& p) { return -p.z(); });
    const double tau = 3 * kVoxel;
    const double delta0 = 0.2 * tau;
    const ProceduralSdf g(plane, Image<double>(64, 64, delta0), tau);
    double lo = 0.0, hi = tau;  // g(lo) > 0 > g(hi)
    ASSERT_GT(g.sample(Vec3(0, 0, lo)), 0.0);
    ASSERT_LT(g.sample(Vec3(0, 0, hi)), 0.0);
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g.sample(Vec3(0, 0, mid)) > 0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(lo, delta0, 0.1 * delta0);
}

TEST(ProceduralSdf, FarFieldIsUntouched)
{
    auto base = std::make_shared<SphereField>(Vec3::Zero(), 0.5);
    const double tau = 3 * kVoxel;
    const ProceduralSdf g(base, Image<double>(64, 64, kA), tau);
    for (const Vec3& p : oracle::random_points(2000, -1, 1, 9)) {
        if (std::abs(base->sample(p)) <= 5 * tau) continue;
        EXPECT_LT(std::abs(g.sample(p) - base->sample(p)), 1e-6 * kA);
    }
}

TEST(ProceduralSdf, BackFacingSideIsUntouched)
{
    auto base = std::make_shared<SphereField>(Vec3::Zero(), 0.5);
    const ProceduralSdf g(base, Image<double>(64, 64, kA), 3 * kVoxel);
    const Vec3 back(0.1, 0.2, -std::sqrt(0.25 - 0.05));
    EXPECT_EQ(g.sample(back), base->sample(back));
    const Vec3 front(0.1, 0.2, std::sqrt(0.25 - 0.05));
    EXPECT_GT(g.sample(front), base->sample(front));
}

TEST(CoarseField, VerticesSampleExactlyZero)
{
    const TriMesh head = bump_head();
    const auto field = coarse_field(head, RefineConfig{});
    for (const Vec3& v : head.vertices) EXPECT_EQ(field->sample(v), 0.0);
}

// ----------------------------------------------------- gating and guards

TEST(Visibility, FrontVisibleBackHidden)
{
    const TriMesh sphere = make_icosphere(3, 0.5);
    const OrthoCamera cam;
    const std::vector<char> vis = visible_vertices(sphere, render_depth(sphere, cam), cam, 2 * kVoxel);
    for (std::size_t v = 0; v < sphere.vertices.size(); ++v) {
        if (sphere.vertices[v].z() > 0.1) EXPECT_TRUE(vis[v]);
        if (sphere.vertices[v].z() < -0.1) EXPECT_FALSE(vis[v]);
    }
}

TEST(StrokeRegion, FrontFacingTrianglesNearTheStroke)
{
    const TriMesh head = bump_head();
    const OrthoCamera cam;
    const Stroke s = forehead(StrokeKind::ridge);
    const std::vector<int> region = stroke_region(head, {s}, cam);
    ASSERT_FALSE(region.empty());
    for (int t : region) {
        const Tri& tri = head.triangles[t];
        const Vec3 n = (head.vertices[tri[1]] - head.vertices[tri[0]]).cross(head.vertices[tri[2]] - head.vertices[tri[0]]);
        EXPECT_GT(n.z(), 0.0);
    }
    Stroke contour = s;
    contour.kind = StrokeKind::contour;
    EXPECT_TRUE(stroke_region(head, {contour}, cam).empty());
}

TEST(ChangedRegion, ThresholdDilationAndValidity)
{
    DepthMap a = flat_depth(32, 0.0), b = flat_depth(32, 0.0);
    b.z.at(10, 10) = 0.01;
    b.valid.at(20, 20) = 0;  // a validity flip alone is not a change
    const Mask tight = changed_region(a, b, 0.001, 0.0);
    const Mask wide = changed_region(a, b, 0.001, 2.0);
    const Mask none = changed_region(a, b, 0.02, 2.0);
    int n_tight = 0, n_wide = 0, n_none = 0;
    for (std::size_t k = 0; k < tight.size(); ++k) {
        n_tight += tight.data[k];
        n_wide += wide.data[k];
        n_none += none.data[k];
    }
    EXPECT_EQ(n_tight, 1);
    EXPECT_TRUE(tight.at(10, 10));
    EXPECT_EQ(n_wide, 13);  // disk of radius 2
    EXPECT_EQ(n_none, 0);
}

TEST(RevertFolds, RestoresVerticesOfTurnedTriangles)
{
    const TriMesh before = make_icosphere(2, 1.0);
    TriMesh after = before;
    after.vertices[0] = -after.vertices[0];  // through the centre: every incident face turns over
    after.vertices[5] += Vec3(1e-3, 0, 0);   // harmless move elsewhere
    const int restored = revert_folds(before, after);
    EXPECT_GE(restored, 1);
    EXPECT_EQ(after.vertices[0], before.vertices[0]);
    for (const Tri& t : after.triangles) {
        const Vec3 n0 = (before.vertices[t[1]] - before.vertices[t[0]]).cross(before.vertices[t[2]] - before.vertices[t[0]]);
        const Vec3 n1 = (after.vertices[t[1]] - after.vertices[t[0]]).cross(after.vertices[t[2]] - after.vertices[t[0]]);
        EXPECT_GE(n0.dot(n1), 0.0);
    }
}

// ------------------------------------------------------------------ refine

TEST(Refine, EmptyStrokesKeepTheCoarseMesh)
{
    const TriMesh& mc = coarse_head();
    const RefineConfig cfg;
    const RefineResult r = refine(mc, {}, procedural_providers(cfg), cfg);
    ASSERT_TRUE(r.ok) << r.diagnostic;
    EXPECT_LE(fast_hausdorff(r.mesh, mc), kVoxel);
}

TEST(Refine, RidgeRaisesAndValleyLowersTheCentreline)
{
    const TriMesh& mc = coarse_head();
    const OrthoCamera cam;
    const RefineConfig cfg;
    const DepthMap before = render_depth(mc, cam);
    auto centreline = [&](StrokeKind kind) {
        const RefineResult r = refine(mc, {forehead(kind)}, procedural_providers(cfg), cfg);
        EXPECT_TRUE(r.ok) << r.diagnostic;
        EXPECT_TRUE(is_watertight(r.mesh));
        const DepthMap after = render_depth(r.mesh, cam);
        std::vector<double> dz;
        for (int i = 210; i <= 302; i += 4) dz.push_back(after.z.at(i, 199) - before.z.at(i, 199));
        return dz;
    };
    const std::vector<double> up = centreline(StrokeKind::ridge);
    const std::vector<double> down = centreline(StrokeKind::valley);
    for (std::size_t k = 0; k < up.size(); ++k) {
        EXPECT_GE(up[k], 0.3 * kA);
        EXPECT_LE(up[k], 1.0 * kA);
        EXPECT_LE(down[k], -0.3 * kA);
        EXPECT_GE(down[k], -1.0 * kA);
        EXPECT_NEAR(up[k], -down[k], 0.1 * kA);
    }
}

TEST(Refine, NothingMovesOutsideTheDilatedSupport)
{
    // the support is 3 sigma around the polyline; a triangle straddling its
    // border may carry the change across, so it is dilated by two mean coarse
    // edge lengths
    const TriMesh& mc = coarse_head();
    const OrthoCamera cam;
    double edge = 0;
    for (const Tri& t : mc.triangles) edge += (mc.vertices[t[0]] - mc.vertices[t[1]]).norm();
    edge /= mc.triangles.size() * cam.pixel_size();

    const RefineConfig cfg;
    const Stroke s = forehead(StrokeKind::ridge);
    const RefineResult r = refine(mc, {s}, procedural_providers(cfg), cfg);
    ASSERT_TRUE(r.ok);
    const DepthMap before = render_depth(mc, cam), after = render_depth(r.mesh, cam);
    int checked = 0;
    for (int j = 0; j < cam.height; ++j)
        for (int i = 0; i < cam.width; ++i) {
            if (distance_to_polyline(Vec2(i + 0.5, j + 0.5), s.polyline) <= 3 * s.width + 2 * edge) continue;
            ASSERT_EQ(before.ok(i, j), after.ok(i, j)) << i << "," << j;
            if (!before.ok(i, j)) continue;
            ASSERT_NEAR(after.z.at(i, j), before.z.at(i, j), 1e-12) << i << "," << j;
            ++checked;
        }
    EXPECT_GT(checked, 10000);
}

TEST(Refine, SecondPassIsNearlyIdempotent)
{
    const TriMesh& mc = coarse_head();
    const RefineConfig cfg;
    const std::vector<Stroke> strokes{forehead(StrokeKind::ridge)};
    const RefineResult first = refine(mc, strokes, procedural_providers(cfg), cfg);
    const RefineResult second = refine(first.mesh, strokes, procedural_providers(cfg), cfg);
    ASSERT_TRUE(first.ok && second.ok);
    EXPECT_LE(fast_hausdorff(second.mesh, first.mesh), 0.5 * kVoxel);
}

TEST(Refine, ThreeStrokesStayWatertightAndDeterministic)
{
    const TriMesh& mc = coarse_head();
    const RefineConfig cfg;
    const std::vector<Stroke> strokes{
        {StrokeKind::ridge, {{200, 200}, {312, 200}}, 0.6, 3.0},
        {StrokeKind::valley, {{236, 300}, {256, 320}, {276, 300}}, 0.5, 4.0},
        {StrokeKind::ridge, {{256, 220}, {256, 280}}, 0.4, 5.0},
    };
    const RefineResult a = refine(mc, strokes, procedural_providers(cfg), cfg);
    const RefineResult b = refine(mc, strokes, procedural_providers(cfg), cfg);
    ASSERT_TRUE(a.ok) << a.diagnostic;
    EXPECT_EQ(boundary_edge_count(a.mesh), 0u);
    EXPECT_GT(a.subdivided_triangles, 0);
    EXPECT_GT(a.moved_vertices, 0);
    EXPECT_EQ(a.mesh.vertices, b.mesh.vertices);
    EXPECT_EQ(a.mesh.triangles, b.mesh.triangles);
}

TEST(Refine, ProviderFailureReturnsTheInput)
{
    const TriMesh& mc = coarse_head();
    const RefineConfig cfg;
    ProviderBundle broken = procedural_providers(cfg);
    broken.depth_enhance = [](const DepthMap&, const NormalMap&) -> DepthMap {
        throw std::runtime_error("enhancer offline");
    };
    const RefineResult r = refine(mc, {forehead(StrokeKind::ridge)}, broken, cfg);
    EXPECT_FALSE(r.ok);
    EXPECT_NE(r.diagnostic.find("enhancer offline"), std::string::npos);
    EXPECT_EQ(r.mesh.vertices, mc.vertices);
    EXPECT_EQ(r.mesh.triangles, mc.triangles);

    ProviderBundle wrong_size = procedural_providers(cfg);
    wrong_size.flow_provider = [](const DepthMap&, const DepthMap&) { return FlowField(4, 4); };
    const RefineResult w = refine(mc, {forehead(StrokeKind::ridge)}, wrong_size, cfg);
    EXPECT_FALSE(w.ok);
    EXPECT_EQ(w.mesh.vertices, mc.vertices);
}

TEST(Refine, RejectsBadInput)
{
    const RefineConfig cfg;
    TriMesh open = make_icosphere(1, 0.5);
    open.triangles.pop_back();
    EXPECT_THROW(refine(open, {}, procedural_providers(cfg), cfg), std::invalid_argument);
    Stroke bad = forehead(StrokeKind::ridge);
    bad.depth = 2.0;
    EXPECT_THROW(refine(bump_head(), {bad}, procedural_providers(cfg), cfg), std::invalid_argument);
    ProviderBundle incomplete = procedural_providers(cfg);
    incomplete.sdf_provider = nullptr;
    EXPECT_THROW(refine(bump_head(), {}, incomplete, cfg), std::invalid_argument);
}

TEST(Refine, ArtifactsAndDebugDumps)
{
    const auto dir = std::filesystem::temp_directory_path() / "facesketch_refine_dump";
    std::filesystem::remove_all(dir);
    RefineConfig cfg;
    cfg.debug_dir = dir.string();
    const RefineResult r = refine(bump_head(), {forehead(StrokeKind::ridge)}, procedural_providers(cfg), cfg, true);
    ASSERT_TRUE(r.ok) << r.diagnostic;
    ASSERT_TRUE(r.artifacts);
    EXPECT_EQ(r.artifacts->updated.vertices.size(), r.mesh.vertices.size());
    EXPECT_EQ(r.artifacts->enhanced_depth.width(), cfg.raster);
    EXPECT_FALSE(r.artifacts->cloud.points.empty());
    for (const char* f : {"S_f.png", "D_c.png", "N.png", "D_c_prime.png", "D_f.png", "D_f_prime.png", "P.obj"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    const DepthMap dc = read_depth_png((dir / "D_c.png").string());
    EXPECT_EQ(dc.width(), cfg.raster);
    std::filesystem::remove_all(dir);
}

// --------------------------------------------------------- synthetic suite

TEST(SyntheticSuite, FlowAlignmentBeatsDirectFitting)
{
    const RefineConfig cfg;
    const BumpCase c = bump_suite(cfg).front();
    RefineConfig no_flow = cfg;
    no_flow.use_flow = false;
    const RefineResult aligned = refine(c.coarse, c.strokes, shifted_providers(cfg, 3, 0), cfg);
    const RefineResult direct = refine(c.coarse, c.strokes, shifted_providers(no_flow, 3, 0), no_flow);
    ASSERT_TRUE(aligned.ok && direct.ok);
    const double with = chamfer_distance(aligned.mesh, c.target);
    const double without = chamfer_distance(direct.mesh, c.target);
    EXPECT_GE(without, 1.2 * with) << with << " vs " << without;
}

TEST(SyntheticSuite, CombinedGuidanceIsNoWorseThanEitherStage)
{
    const RefineConfig cfg;
    for (const BumpCase& c : bump_suite(cfg)) {
        double err[3];
        for (Guidance g : {Guidance::combined, Guidance::implicit_only, Guidance::depth_only}) {
            const RefineConfig gc = with_guidance(cfg, g);
            const auto t0 = std::chrono::steady_clock::now();
            const RefineResult r = refine(c.coarse, c.strokes, procedural_providers(gc), gc);
            EXPECT_LT(ms_since(t0), 2000.0) << c.name << " " << to_string(g);
            ASSERT_TRUE(r.ok) << r.diagnostic;
            err[static_cast<int>(g)] = chamfer_distance(r.mesh, c.target);
        }
        EXPECT_LE(err[0], err[1]) << c.name;
        EXPECT_LE(err[0], err[2]) << c.name;
        EXPECT_LT(err[0], chamfer_distance(c.coarse, c.target)) << c.name;
    }
}

TEST(SyntheticSuite, TargetIsWatertightAndRaised)
{
    const RefineConfig cfg;
    const BumpCase c = bump_suite(cfg).front();
    EXPECT_TRUE(is_watertight(c.target));
    const OrthoCamera cam;
    const DepthMap a = render_depth(c.coarse, cam), b = render_depth(c.target, cam);
    EXPECT_NEAR(b.z.at(256, 199) - a.z.at(256, 199), kA * (1 - stroke_intensity(0.8) / 255.0), 2e-3);
}
